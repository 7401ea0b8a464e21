#include "nrpm/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nrpm/effort_priors.hpp"
#include "nrpm/error.hpp"
#include "nrpm/seeding.hpp"

namespace nrpm {

bool EdReport::all_zero() const {
    return std::all_of(deltas.begin(), deltas.end(), [](const Rational& r) { return r.is_zero(); });
}

double EdReport::mean() const {
    if (deltas.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& d : deltas) {
        sum += d.to_double();
    }
    return sum / static_cast<double>(deltas.size());
}

EdReport exponent_deviation(const Exponents& a, const Exponents& b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("exponent deviation: parameter spaces differ");
    }
    EdReport out;
    for (std::size_t l = 0; l < a.size(); ++l) {
        out.deltas.push_back(abs(a[l].i - b[l].i));
    }
    return out;
}

EdReport exponent_deviation(const PmnfModel& a, const PmnfModel& b) {
    if (a.names() != b.names()) {
        throw InvalidArgument("exponent deviation: parameter spaces differ");
    }
    return exponent_deviation(leading_exponents(a), leading_exponents(b));
}

double relative_error(const PmnfModel& model, const Coordinate& test, double measured) {
    if (!(measured > 0.0) || !std::isfinite(measured)) {
        throw InvalidArgument("relative error needs a positive measured value");
    }
    return std::fabs(measured - evaluate(model, test)) / measured * 100.0;
}

Coordinate next_test_point(const ParameterSpace& space) {
    Coordinate out;
    for (std::size_t l = 0; l < space.dimension(); ++l) {
        const auto& v = space.values(l);
        if (v.size() < 3) {
            throw InvalidArgument("next test point: parameter '" + space.names()[l] + "' needs at least 3 values");
        }
        auto agree = [](double x, double y) { return std::fabs(x - y) <= 1e-9 * std::max(std::fabs(x), std::fabs(y)); };
        const double ratio = v[1] / v[0];
        const double step = v[1] - v[0];
        bool geometric = true;
        bool arithmetic = true;
        for (std::size_t k = 2; k < v.size(); ++k) {
            geometric = geometric && agree(v[k] / v[k - 1], ratio);
            arithmetic = arithmetic && agree(v[k] - v[k - 1], step);
        }
        if (geometric) {
            out.values.push_back(v.back() * ratio);
        } else if (arithmetic) {
            out.values.push_back(v.back() + step);
        } else {
            throw InvalidArgument("irregular spacing of parameter '" + space.names()[l] + "'");
        }
    }
    return out;
}

double CostReport::savings_percent() const {
    return classic == 0 ? 0.0 : 100.0 * (1.0 - static_cast<double>(swc) / static_cast<double>(classic));
}

CostReport cost_report(std::size_t m, std::size_t reps_classic, std::size_t values) {
    if (m == 0 || reps_classic == 0 || values == 0) {
        throw InvalidArgument("cost report: parameter count, repetitions and values must be positive");
    }
    std::uint64_t points = 1;
    for (std::size_t l = 0; l < m; ++l) {
        points *= values;
    }
    return CostReport{points * reps_classic, 2 * points};
}

std::string_view to_string(Pipeline pipeline) {
    return pipeline == Pipeline::classic ? "classic" : "swc";
}

Pipeline parse_pipeline(std::string_view name) {
    if (name == "classic") {
        return Pipeline::classic;
    }
    if (name == "swc") {
        return Pipeline::swc;
    }
    throw ParseError("unknown pipeline '" + std::string(name) + "'");
}

PmnfModel run_pipeline(Pipeline pipeline, const ExperimentSet& exp, std::size_t callpath,
                       const SearchOptions& options) {
    if (pipeline == Pipeline::swc) {
        return build_swc_model(exp, callpath, "p", options).model;
    }
    const auto samples = time_samples(exp, callpath);
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& s : samples) {
        values.push_back(s.value);
    }
    return search_model(exp.space(), values, options);
}

std::vector<CallpathTruth> callpath_truths(const BenchmarkSpec& spec, const Coordinate& test_point) {
    const auto truths = ground_truth(spec);
    const auto ranks = spec.space.index_of("p");
    std::vector<CallpathTruth> out;
    for (std::size_t k = 0; k < spec.kernels.size(); ++k) {
        const auto& kernel = spec.kernels[k];
        out.push_back({computation_callpath(kernel), truths[k].computation, computation_time_at(kernel, test_point)});
        if (kernel.mpi_op) {
            out.push_back({communication_callpath(kernel), *truths[k].communication,
                           communication_time_at(kernel, test_point, *ranks)});
        }
    }
    return out;
}

TrialOutcome evaluate_trial(Pipeline pipeline, const ExperimentSet& exp, const std::vector<CallpathTruth>& truths,
                            const Coordinate& test_point, const SearchOptions& options) {
    TrialOutcome out;
    const auto& callpaths = exp.callpaths();
    if (callpaths.empty()) {
        return out;
    }
    for (std::size_t c = 0; c < callpaths.size(); ++c) {
        const auto it = std::find_if(truths.begin(), truths.end(),
                                     [&](const CallpathTruth& t) { return t.callpath == callpaths[c].path.name; });
        if (it == truths.end()) {
            throw InvalidArgument("no reference for call path '" + callpaths[c].path.name + "'");
        }
        const auto model = run_pipeline(pipeline, exp, c, options);
        out.ed += exponent_deviation(leading_exponents(model), it->leading).mean();
        out.re += relative_error(model, test_point, it->test_time);
    }
    out.ed /= static_cast<double>(callpaths.size());
    out.re /= static_cast<double>(callpaths.size());
    return out;
}

namespace {

// Runs job(i) for i in [0, n) on up to `threads` workers. The exception of
// the lowest failing index is rethrown, so failures are deterministic too.
template <class Job>
void run_jobs(std::size_t n, unsigned threads, Job&& job) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned count = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < count; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

StudyRow summarize(double level, std::string pattern, const std::vector<TrialOutcome>& outcomes) {
    StudyRow row;
    row.level = level;
    row.pattern = std::move(pattern);
    row.trials = outcomes.size();
    if (outcomes.empty()) {
        return row;
    }
    const double n = static_cast<double>(outcomes.size());
    for (const auto& o : outcomes) {
        row.mean_ed += o.ed;
        row.mean_re += o.re;
    }
    row.mean_ed /= n;
    row.mean_re /= n;
    for (const auto& o : outcomes) {
        row.std_ed += (o.ed - row.mean_ed) * (o.ed - row.mean_ed);
        row.std_re += (o.re - row.mean_re) * (o.re - row.mean_re);
    }
    row.std_ed = std::sqrt(row.std_ed / n);
    row.std_re = std::sqrt(row.std_re / n);
    // Identical outcomes must give an exact zero spread.
    const bool same_ed = std::all_of(outcomes.begin(), outcomes.end(), [&](const TrialOutcome& o) { return o.ed == outcomes[0].ed; });
    const bool same_re = std::all_of(outcomes.begin(), outcomes.end(), [&](const TrialOutcome& o) { return o.re == outcomes[0].re; });
    if (same_ed) {
        row.mean_ed = outcomes[0].ed;
        row.std_ed = 0.0;
    }
    if (same_re) {
        row.mean_re = outcomes[0].re;
        row.std_re = 0.0;
    }
    return row;
}

}  // namespace

StudyTable noise_robustness_study(const ExperimentSet& exp, const std::vector<CallpathTruth>& truths,
                                  const Coordinate& test_point, const NoiseStudyConfig& config) {
    std::vector<NoisePattern> patterns = config.patterns;
    if (patterns.empty()) {
        for (auto kind : kNoisyKinds) {
            patterns.push_back(NoisePattern{kind});
        }
    }
    for (double intensity : config.intensities) {
        if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
            throw InvalidArgument("noise intensities must be non-negative");
        }
    }
    if (config.trials == 0) {
        throw InvalidArgument("at least one trial is required");
    }
    const std::size_t cells = config.intensities.size() * patterns.size();
    std::vector<TrialOutcome> outcomes(cells * config.trials);
    run_jobs(outcomes.size(), config.threads, [&](std::size_t job) {
        const std::size_t cell = job / config.trials;
        const std::size_t trial = job % config.trials;
        const std::size_t a = cell / patterns.size();
        const std::size_t b = cell % patterns.size();
        NoiseConfig noise{patterns[b], config.intensities[a], config.selection_fraction,
                          derive_seed(config.seed, {a, b, trial})};
        outcomes[job] = evaluate_trial(config.pipeline, inject(exp, noise), truths, test_point, config.search);
    });
    StudyTable table{"noise", config.pipeline, {}};
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const std::size_t a = cell / patterns.size();
        const std::size_t b = cell % patterns.size();
        std::vector<TrialOutcome> slice(outcomes.begin() + static_cast<std::ptrdiff_t>(cell * config.trials),
                                        outcomes.begin() + static_cast<std::ptrdiff_t>((cell + 1) * config.trials));
        table.rows.push_back(summarize(config.intensities[a], std::string(to_string(patterns[b].kind)), slice));
    }
    return table;
}

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    if (k > n) {
        return out;
    }
    std::vector<std::size_t> idx(k);
    for (std::size_t t = 0; t < k; ++t) {
        idx[t] = t;
    }
    while (true) {
        out.push_back(idx);
        std::size_t t = k;
        while (t > 0 && idx[t - 1] == n - k + t - 1) {
            --t;
        }
        if (t == 0) {
            break;
        }
        ++idx[t - 1];
        for (std::size_t u = t; u < k; ++u) {
            idx[u] = idx[u - 1] + 1;
        }
    }
    return out;
}

namespace {

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t t = 1; t <= k; ++t) {
        r = r * static_cast<double>(n - k + t) / static_cast<double>(t);
    }
    return std::round(r);
}

std::vector<std::vector<std::size_t>> sampled_subsets(std::size_t n, std::size_t k, std::size_t count,
                                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> pool(n);
    while (out.size() < count) {
        for (std::size_t t = 0; t < n; ++t) {
            pool[t] = t;
        }
        for (std::size_t t = 0; t < k; ++t) {
            std::swap(pool[t], pool[t + static_cast<std::size_t>(rng() % (n - t))]);
        }
        std::vector<std::size_t> pick(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(pick.begin(), pick.end());
        if (seen.insert(pick).second) {
            out.push_back(std::move(pick));
        }
    }
    return out;
}

}  // namespace

StudyTable repetition_study(const ExperimentSet& exp, const std::vector<CallpathTruth>& truths,
                            const Coordinate& test_point, const RepetitionStudyConfig& config) {
    std::size_t reps = 0;
    for (const auto& cp : exp.callpaths()) {
        const auto* series = cp.find(Metric::time_s);
        if (reps != 0 && series->repetitions() != reps) {
            throw InvalidArgument("call paths disagree on the repetition count");
        }
        reps = series->repetitions();
    }
    if (reps < 2) {
        throw InvalidArgument("a repetition study needs at least 2 repetitions");
    }
    if (config.max_subsets == 0) {
        throw InvalidArgument("max_subsets must be positive");
    }
    struct Job {
        std::size_t k;
        std::vector<std::size_t> subset;
    };
    std::vector<Job> jobs;
    std::vector<std::size_t> first_job;
    for (std::size_t k = 1; k <= reps; ++k) {
        first_job.push_back(jobs.size());
        auto subsets = binomial(reps, k) <= static_cast<double>(config.max_subsets)
                           ? all_subsets(reps, k)
                           : sampled_subsets(reps, k, config.max_subsets, derive_seed(config.seed, {k}));
        for (auto& s : subsets) {
            jobs.push_back(Job{k, std::move(s)});
        }
    }
    first_job.push_back(jobs.size());
    std::vector<TrialOutcome> outcomes(jobs.size());
    run_jobs(jobs.size(), config.threads, [&](std::size_t j) {
        outcomes[j] = evaluate_trial(config.pipeline, subset_repetitions(exp, jobs[j].subset), truths, test_point,
                                     config.search);
    });
    StudyTable table{"repetitions", config.pipeline, {}};
    for (std::size_t k = 1; k <= reps; ++k) {
        std::vector<TrialOutcome> slice(outcomes.begin() + static_cast<std::ptrdiff_t>(first_job[k - 1]),
                                        outcomes.begin() + static_cast<std::ptrdiff_t>(first_job[k]));
        table.rows.push_back(summarize(static_cast<double>(k), "", slice));
    }
    return table;
}

// Output

std::string study_to_csv(const StudyTable& table) {
    std::ostringstream os;
    os << "# schema_version=1\n";
    os << "study,pipeline,level,pattern,trials,mean_ed,std_ed,mean_re_percent,std_re_percent\n";
    for (const auto& r : table.rows) {
        os << table.study << ',' << to_string(table.pipeline) << ',' << format_number(r.level) << ','
           << (r.pattern.empty() ? "-" : r.pattern) << ',' << r.trials << ',' << format_number(r.mean_ed) << ','
           << format_number(r.std_ed) << ',' << format_number(r.mean_re) << ',' << format_number(r.std_re) << '\n';
    }
    return os.str();
}

std::string study_to_json(const StudyTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        nlohmann::json row{{"level", r.level},     {"trials", r.trials}, {"mean_ed", r.mean_ed},
                           {"std_ed", r.std_ed},   {"mean_re_percent", r.mean_re},
                           {"std_re_percent", r.std_re}};
        if (!r.pattern.empty()) {
            row["pattern"] = r.pattern;
        }
        rows.push_back(row);
    }
    nlohmann::json doc{{"schema_version", 1},
                       {"study", table.study},
                       {"pipeline", std::string(to_string(table.pipeline))},
                       {"rows", rows}};
    return doc.dump(1) + "\n";
}

std::string study_to_text(const StudyTable& table) {
    const bool noise = table.study == "noise";
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %-20s %7s %10s %10s %12s %12s\n", noise ? "intensity" : "reps",
                  noise ? "pattern" : "", "trials", "mean ED", "std ED", "mean RE %", "std RE %");
    os << line;
    for (const auto& r : table.rows) {
        const std::string level = noise ? format_number(r.level * 100.0) + "%" : format_number(r.level);
        std::snprintf(line, sizeof line, "%-10s %-20s %7zu %10.4f %10.4f %12.3f %12.3f\n", level.c_str(),
                      r.pattern.c_str(), r.trials, r.mean_ed, r.std_ed, r.mean_re, r.std_re);
        os << line;
    }
    return os.str();
}

}  // namespace nrpm
