#include "nrpm/modeler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "least_squares.hpp"
#include "nrpm/error.hpp"

namespace nrpm {

namespace {

double symmetric_relative_error(double predicted, double actual) {
    const double denom = std::fabs(actual) + std::fabs(predicted);
    if (denom == 0.0) {
        return 0.0;
    }
    return std::fabs(predicted - actual) / denom;
}

Eigen::MatrixXd design_matrix(const Skeleton& skel, std::span<const Sample> data) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(skel.size()));
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < skel.size(); ++c) {
            a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = skel.basis()[c].evaluate(data[r].at);
        }
    }
    return a;
}

Eigen::VectorXd response(std::span<const Sample> data) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
    for (std::size_t r = 0; r < data.size(); ++r) {
        y(static_cast<Eigen::Index>(r)) = data[r].value;
    }
    return y;
}

// Leave-one-out score of the constant model: each fold predicts the mean of
// the remaining values.
double constant_cv(std::span<const double> y) {
    const std::size_t n = y.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                sum += y[k];
            }
        }
        total += symmetric_relative_error(sum / static_cast<double>(n - 1), y[i]);
    }
    return total / static_cast<double>(n);
}

// Leave-one-out score of y ~ a + b * g via the closed-form leverages of
// simple linear regression. Returns NaN when g is (numerically) constant or a
// point has leverage ~1, in which case the general path must be used.
double simple_regression_cv(std::span<const double> g, std::span<const double> y) {
    const std::size_t n = y.size();
    const double nd = static_cast<double>(n);
    double g_mean = 0.0;
    double y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        g_mean += g[i];
        y_mean += y[i];
    }
    g_mean /= nd;
    y_mean /= nd;
    double sxx = 0.0;
    double sxy = 0.0;
    double g_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dg = g[i] - g_mean;
        sxx += dg * dg;
        sxy += dg * (y[i] - y_mean);
        g_scale = std::max(g_scale, std::fabs(g[i]));
    }
    if (!(sxx > 1e-24 * g_scale * g_scale * nd)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double slope = sxy / sxx;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dg = g[i] - g_mean;
        const double leverage = 1.0 / nd + dg * dg / sxx;
        if (leverage > 1.0 - 1e-10) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        const double residual = (y[i] - y_mean) - slope * dg;
        total += symmetric_relative_error(y[i] - residual / (1.0 - leverage), y[i]);
    }
    return total / nd;
}

double refit_cv(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    const Eigen::Index n = a.rows();
    double total = 0.0;
    Eigen::MatrixXd reduced(n - 1, a.cols());
    Eigen::VectorXd reduced_y(n - 1);
    for (Eigen::Index out = 0; out < n; ++out) {
        for (Eigen::Index r = 0, w = 0; r < n; ++r) {
            if (r == out) {
                continue;
            }
            reduced.row(w) = a.row(r);
            reduced_y(w) = y(r);
            ++w;
        }
        const auto sol = detail::solve_least_squares(reduced, reduced_y);
        total += symmetric_relative_error(a.row(out).dot(sol.coefficients), y(out));
    }
    return total / static_cast<double>(n);
}

struct TieKey {
    std::size_t size;
    Rational sum_i;
    int sum_j;
    std::vector<BasisFunction> signature;
};

TieKey tie_key(const Skeleton& s) {
    TieKey key{s.size(), Rational(0), 0, s.basis()};
    for (const auto& b : s.basis()) {
        for (const auto& e : b.exponents) {
            key.sum_i = key.sum_i + e.i;
            key.sum_j += e.j;
        }
    }
    std::sort(key.signature.begin(), key.signature.end());
    return key;
}

void require_finite(std::span<const Sample> data) {
    for (const auto& s : data) {
        if (!std::isfinite(s.value)) {
            throw ModelingError("non-finite measurement value");
        }
    }
}

}  // namespace

std::vector<Sample> samples_from_grid(const ParameterSpace& space, std::span<const double> grid_values) {
    if (grid_values.size() != space.grid_size()) {
        throw InvalidArgument("data does not cover the parameter grid");
    }
    std::vector<Sample> out;
    out.reserve(grid_values.size());
    for (std::size_t k = 0; k < grid_values.size(); ++k) {
        out.push_back(Sample{space.coordinate(k), grid_values[k]});
    }
    return out;
}

LinearFit fit_coefficients(const Skeleton& skel, std::span<const Sample> data) {
    if (data.size() < skel.size()) {
        throw ModelingError("insufficient data: " + std::to_string(data.size()) + " points for " +
                            std::to_string(skel.size()) + " coefficients");
    }
    require_finite(data);
    const auto sol = detail::solve_least_squares(design_matrix(skel, data), response(data));
    return LinearFit{std::vector<double>(sol.coefficients.begin(), sol.coefficients.end()), sol.rss};
}

double cv_score(const Skeleton& skel, std::span<const Sample> data) {
    if (data.size() < skel.size() + 1) {
        throw ModelingError("insufficient data for cross-validation: " + std::to_string(data.size()) +
                            " points for " + std::to_string(skel.size()) + " coefficients");
    }
    require_finite(data);
    std::vector<double> y;
    y.reserve(data.size());
    for (const auto& s : data) {
        y.push_back(s.value);
    }
    if (skel.size() == 1) {
        return constant_cv(y);
    }
    if (skel.size() == 2) {
        std::vector<double> g;
        g.reserve(data.size());
        for (const auto& s : data) {
            g.push_back(skel.basis()[1].evaluate(s.at));
        }
        const double score = simple_regression_cv(g, y);
        if (!std::isnan(score)) {
            return score;
        }
    }
    const Eigen::MatrixXd a = design_matrix(skel, data);
    const Eigen::VectorXd rhs = response(data);
    Eigen::VectorXd predictions;
    if (detail::leave_one_out_predictions(a, rhs, predictions)) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < rhs.size(); ++i) {
            total += symmetric_relative_error(predictions(i), rhs(i));
        }
        return total / static_cast<double>(rhs.size());
    }
    return refit_cv(a, rhs);
}

FitResult fit_and_score(const Skeleton& skel, std::span<const Sample> data) {
    const double score = cv_score(skel, data);
    auto fit = fit_coefficients(skel, data);
    return FitResult{std::move(fit.coefficients), fit.rss, score};
}

bool tie_break_less(const Skeleton& a, const Skeleton& b) {
    const TieKey ka = tie_key(a);
    const TieKey kb = tie_key(b);
    if (ka.size != kb.size) {
        return ka.size < kb.size;
    }
    if (ka.sum_i != kb.sum_i) {
        return ka.sum_i < kb.sum_i;
    }
    if (ka.sum_j != kb.sum_j) {
        return ka.sum_j < kb.sum_j;
    }
    return ka.signature < kb.signature;
}

std::size_t select_best(std::span<const Skeleton> candidates, std::span<const double> scores) {
    if (candidates.empty() || candidates.size() != scores.size()) {
        throw InvalidArgument("select_best: no candidates or misaligned scores");
    }
    double best = std::numeric_limits<double>::infinity();
    for (double s : scores) {
        if (!std::isnan(s)) {
            best = std::min(best, s);
        }
    }
    std::size_t winner = candidates.size();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (std::isnan(scores[k]) || scores[k] > best + kScoreTieTolerance) {
            continue;
        }
        if (winner == candidates.size() || tie_break_less(candidates[k], candidates[winner])) {
            winner = k;
        }
    }
    if (winner == candidates.size()) {
        throw ModelingError("no candidate could be scored");
    }
    return winner;
}

std::vector<Hypothesis> single_param_hypotheses(const std::vector<std::string>& names, std::size_t param,
                                                const ExponentSets& sets) {
    if (param >= names.size()) {
        throw InvalidArgument("parameter index out of range");
    }
    std::vector<Hypothesis> out;
    out.push_back({Skeleton::with_constant(names, {}), HypothesisOrigin::single_param});
    for (const auto& i : sets.monomial) {
        for (int j : sets.log) {
            if (i.is_zero() && j == 0) {
                continue;
            }
            BasisFunction b = BasisFunction::constant(names.size());
            b.exponents[param] = ExponentPair{i, j};
            out.push_back({Skeleton::with_constant(names, {{b, CoefficientLabel::generic}}),
                           HypothesisOrigin::single_param});
        }
    }
    return out;
}

PmnfModel search_single(const ParameterSpace& space, std::span<const Sample> data, std::size_t param,
                        const SearchOptions& options) {
    std::set<double> distinct;
    for (const auto& s : data) {
        if (s.at.size() != space.dimension()) {
            throw InvalidArgument("sample dimension does not match the parameter space");
        }
        distinct.insert(s.at[param]);
    }
    if (distinct.size() < 3) {
        throw ModelingError("insufficient data: single-parameter search needs at least 3 distinct values of '" +
                            space.names()[param] + "'");
    }
    const auto hypotheses = single_param_hypotheses(space.names(), param, options.exponents);
    std::vector<Skeleton> skeletons;
    std::vector<double> scores;
    for (const auto& h : hypotheses) {
        skeletons.push_back(h.skeleton);
        scores.push_back(cv_score(h.skeleton, data));
    }
    const auto& winner = skeletons[select_best(skeletons, scores)];
    const auto fit = fit_coefficients(winner, data);
    return bind_coefficients(winner, fit.coefficients);
}

std::vector<ParameterTerm> consensus_terms(const ParameterSpace& space, std::span<const double> grid_values,
                                           std::size_t param, const SearchOptions& options) {
    if (grid_values.size() != space.grid_size()) {
        throw InvalidArgument("data does not cover the parameter grid");
    }
    const auto& xs = space.values(param);
    if (xs.size() < 3) {
        throw ModelingError("insufficient data: parameter '" + space.names()[param] +
                            "' needs at least 3 values");
    }
    const auto hypotheses = single_param_hypotheses(space.names(), param, options.exponents);

    // Basis values depend only on the position along the line.
    std::vector<std::vector<double>> table(hypotheses.size());
    for (std::size_t h = 1; h < hypotheses.size(); ++h) {
        const auto& b = hypotheses[h].skeleton.basis()[1];
        for (double x : xs) {
            Coordinate at{std::vector<double>(space.dimension(), 1.0)};
            at.values[param] = x;
            table[h].push_back(b.evaluate(at));
        }
    }

    std::vector<double> mean(hypotheses.size(), 0.0);
    const auto anchors = space.line_anchors(param);
    std::vector<double> y(xs.size());
    for (std::size_t anchor : anchors) {
        const auto line = space.line_through(anchor, param);
        for (std::size_t k = 0; k < line.size(); ++k) {
            y[k] = grid_values[line[k]];
            if (!std::isfinite(y[k])) {
                throw ModelingError("non-finite measurement value");
            }
        }
        mean[0] += constant_cv(y);
        for (std::size_t h = 1; h < hypotheses.size(); ++h) {
            double score = simple_regression_cv(table[h], y);
            if (std::isnan(score)) {
                std::vector<Sample> samples;
                for (std::size_t k = 0; k < line.size(); ++k) {
                    samples.push_back(Sample{space.coordinate(line[k]), y[k]});
                }
                score = cv_score(hypotheses[h].skeleton, samples);
            }
            mean[h] += score;
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(anchors.size());
    }

    std::vector<Skeleton> remaining;
    std::vector<double> remaining_scores;
    std::vector<std::size_t> remaining_index;
    for (std::size_t h = 0; h < hypotheses.size(); ++h) {
        remaining.push_back(hypotheses[h].skeleton);
        remaining_scores.push_back(mean[h]);
        remaining_index.push_back(h);
    }
    std::vector<ParameterTerm> out;
    const std::size_t k = std::max<std::size_t>(options.top_k, 1);
    for (std::size_t rank = 0; rank < k && !remaining.empty(); ++rank) {
        const std::size_t w = select_best(remaining, remaining_scores);
        const std::size_t h = remaining_index[w];
        if (h != 0) {
            out.push_back(ParameterTerm{param, hypotheses[h].skeleton.basis()[1].exponents[param], mean[h]});
        }
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(w));
        remaining_scores.erase(remaining_scores.begin() + static_cast<std::ptrdiff_t>(w));
        remaining_index.erase(remaining_index.begin() + static_cast<std::ptrdiff_t>(w));
    }
    return out;
}

std::vector<Skeleton> combination_candidates(const std::vector<std::string>& names,
                                             const std::vector<std::vector<ParameterTerm>>& terms) {
    const std::size_t m = names.size();
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < terms.size(); ++l) {
        if (!terms[l].empty()) {
            present.push_back(l);
        }
    }
    std::set<std::vector<BasisFunction>> seen;
    std::vector<Skeleton> out;

    // Walk every choice of one term per present parameter.
    std::vector<std::size_t> choice(present.size(), 0);
    while (true) {
        std::vector<BasisFunction> products;
        const std::size_t q = present.size();
        for (std::size_t mask = 1; mask < (std::size_t{1} << q); ++mask) {
            BasisFunction b = BasisFunction::constant(m);
            for (std::size_t t = 0; t < q; ++t) {
                if (mask & (std::size_t{1} << t)) {
                    const auto& term = terms[present[t]][choice[t]];
                    b.exponents[term.param] = term.exponents;
                }
            }
            products.push_back(std::move(b));
        }
        const std::size_t p = products.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << p); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcountll(mask)) > m) {
                continue;
            }
            std::vector<BasisFunction> chosen;
            for (std::size_t t = 0; t < p; ++t) {
                if (mask & (std::size_t{1} << t)) {
                    chosen.push_back(products[t]);
                }
            }
            std::sort(chosen.begin(), chosen.end());
            if (!seen.insert(chosen).second) {
                continue;
            }
            std::vector<std::pair<BasisFunction, CoefficientLabel>> extra;
            for (auto& b : chosen) {
                extra.emplace_back(std::move(b), CoefficientLabel::generic);
            }
            out.push_back(Skeleton::with_constant(names, std::move(extra)));
        }
        std::size_t t = 0;
        for (; t < present.size(); ++t) {
            if (++choice[t] < terms[present[t]].size()) {
                break;
            }
            choice[t] = 0;
        }
        if (t == present.size()) {
            break;
        }
    }
    return out;
}

PmnfModel search_multi(const ParameterSpace& space, std::span<const double> grid_values,
                       const SearchOptions& options) {
    const std::size_t m = space.dimension();
    if (m < 2 || m > 3) {
        throw InvalidArgument("multi-parameter search supports 2 or 3 parameters, got " + std::to_string(m));
    }
    if (grid_values.size() != space.grid_size()) {
        throw InvalidArgument("data does not cover the parameter grid");
    }
    std::vector<std::vector<ParameterTerm>> terms;
    for (std::size_t l = 0; l < m; ++l) {
        terms.push_back(consensus_terms(space, grid_values, l, options));
    }
    const auto candidates = combination_candidates(space.names(), terms);
    const auto samples = samples_from_grid(space, grid_values);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) {
        scores.push_back(cv_score(c, samples));
    }
    const auto& winner = candidates[select_best(candidates, scores)];
    const auto fit = fit_coefficients(winner, samples);
    return bind_coefficients(winner, fit.coefficients);
}

PmnfModel search_model(const ParameterSpace& space, std::span<const double> grid_values,
                       const SearchOptions& options) {
    if (space.dimension() == 1) {
        const auto samples = samples_from_grid(space, grid_values);
        return search_single(space, samples, 0, options);
    }
    return search_multi(space, grid_values, options);
}

PmnfModel fit_skeleton_to_time(const Skeleton& skel, std::span<const Sample> time_data) {
    const auto fit = fit_coefficients(skel, time_data);
    return bind_coefficients(skel, fit.coefficients);
}

}  // namespace nrpm
