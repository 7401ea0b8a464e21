#include "nrpm/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"
#include "nrpm/effort_priors.hpp"
#include "nrpm/error.hpp"
#include "nrpm/seeding.hpp"

namespace nrpm {

using nlohmann::json;

double ComplexityTerm::value(const Coordinate& at) const {
    return basis().evaluate(at);
}

std::string_view to_string(LoopArrangement arrangement) {
    return arrangement == LoopArrangement::nested ? "nested" : "sequential";
}

LoopArrangement parse_loop_arrangement(std::string_view name) {
    if (name == "nested") {
        return LoopArrangement::nested;
    }
    if (name == "sequential") {
        return LoopArrangement::sequential;
    }
    throw ParseError("unknown loop arrangement '" + std::string(name) + "'");
}

namespace {

std::optional<std::size_t> ranks_index(const ParameterSpace& space) {
    return space.index_of("p");
}

bool positive(double v) {
    return std::isfinite(v) && v > 0.0;
}

std::set<std::size_t> params_of(const ComplexityTerm& t) {
    std::set<std::size_t> out;
    for (std::size_t l = 0; l < t.exponents.size(); ++l) {
        if (!t.exponents[l].is_zero()) {
            out.insert(l);
        }
    }
    return out;
}

void validate_term(const ComplexityTerm& t, std::size_t m, const std::string& where) {
    if (t.exponents.size() != m) {
        throw ValidationError(where + ": exponent count does not match the parameter count");
    }
    bool any = false;
    for (const auto& e : t.exponents) {
        if (e.i < Rational(0) || e.j < 0) {
            throw ValidationError(where + ": negative exponent");
        }
        any = any || !e.is_zero();
    }
    if (!any) {
        throw ValidationError(where + ": complexity term is constant");
    }
}

void validate_kernel(const KernelSpec& k, const ParameterSpace& space) {
    const std::size_t m = space.dimension();
    const std::string where = "kernel '" + k.name + "'";
    if (k.computation_terms.empty()) {
        throw ValidationError(where + ": no computation terms");
    }
    std::vector<std::optional<ExponentPair>> shared(m);
    std::set<Exponents> seen;
    for (const auto& ct : k.computation_terms) {
        validate_term(ct.term, m, where);
        if (!positive(ct.coefficient)) {
            throw ValidationError(where + ": coefficients must be positive");
        }
        if (!seen.insert(ct.term.exponents).second) {
            throw ValidationError(where + ": repeated computation term");
        }
        for (std::size_t l = 0; l < m; ++l) {
            const auto& e = ct.term.exponents[l];
            if (e.is_zero()) {
                continue;
            }
            if (shared[l] && *shared[l] != e) {
                throw ValidationError(where + ": parameter '" + space.names()[l] +
                                      "' has different exponents in different terms");
            }
            shared[l] = e;
        }
    }
    if (k.computation_terms.size() > m) {
        throw ValidationError(where + ": more computation terms than parameters");
    }
    if (k.loop_arrangement == LoopArrangement::nested) {
        for (std::size_t t = 1; t < k.computation_terms.size(); ++t) {
            const auto outer = params_of(k.computation_terms[t - 1].term);
            const auto inner = params_of(k.computation_terms[t].term);
            if (!std::includes(inner.begin(), inner.end(), outer.begin(), outer.end()) ||
                inner.size() == outer.size()) {
                throw ValidationError(where + ": nested terms must extend the enclosing loop's term");
            }
        }
    }
    if (k.mpi_op) {
        if (!ranks_index(space)) {
            throw ValidationError(where + ": communication needs a parameter named 'p'");
        }
        const bool barrier = *k.mpi_op == MpiOp::barrier;
        if (barrier == k.message_elems_term.has_value()) {
            throw ValidationError(where + (barrier ? ": barrier takes no message term"
                                                   : ": operation requires a message term"));
        }
        if (k.message_elems_term) {
            validate_term(*k.message_elems_term, m, where);
        }
        if (!positive(k.alpha) || !positive(k.beta) || !positive(k.gamma)) {
            throw ValidationError(where + ": alpha, beta and gamma must be positive");
        }
    } else if (k.message_elems_term) {
        throw ValidationError(where + ": message term without MPI operation");
    }
    if (k.elem_size != 4 && k.elem_size != 8) {
        throw ValidationError(where + ": element size must be 4 or 8");
    }
    if (k.bb_per_iteration < 1) {
        throw ValidationError(where + ": bb_per_iteration must be >= 1");
    }
    if (!positive(k.unit_scale)) {
        throw ValidationError(where + ": unit_scale must be positive");
    }
}

}  // namespace

void validate(const BenchmarkSpec& spec) {
    if (spec.space.dimension() == 0) {
        throw ValidationError("benchmark spec: empty parameter space");
    }
    if (spec.kernels.empty()) {
        throw ValidationError("benchmark spec: no kernels");
    }
    std::set<std::string> names;
    for (const auto& k : spec.kernels) {
        if (k.name.empty() || !names.insert(k.name).second) {
            throw ValidationError("benchmark spec: kernel names must be unique and non-empty");
        }
        validate_kernel(k, spec.space);
    }
}

ParameterSpace default_space(std::size_t m) {
    if (m < 1 || m > 3) {
        throw InvalidArgument("supported parameter counts are 1 to 3 (m <= 3)");
    }
    std::vector<std::string> names{"p", "n", "g"};
    std::vector<std::vector<double>> values{
        {128, 256, 512, 1024, 2048},
        {8000, 16000, 24000, 32000, 40000},
        {32, 64, 96, 128, 160},
    };
    names.resize(m);
    values.resize(m);
    return ParameterSpace(std::move(names), std::move(values));
}

// Generation

namespace {

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(mix64(seed)) {}

    double unit() { return static_cast<double>(rng_() >> 11) * 0x1p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
    bool coin(double p) { return unit() < p; }
    double log_uniform(std::pair<double, double> range) {
        const double lo = std::log(range.first);
        const double hi = std::log(range.second);
        return std::exp(lo + unit() * (hi - lo));
    }
    std::int64_t integer(std::pair<std::int64_t, std::int64_t> range) {
        return range.first + static_cast<std::int64_t>(index(static_cast<std::size_t>(range.second - range.first + 1)));
    }
    std::set<std::size_t> nonempty_subset(const std::vector<std::size_t>& of) {
        while (true) {
            std::set<std::size_t> s;
            for (auto l : of) {
                if (coin(0.5)) {
                    s.insert(l);
                }
            }
            if (!s.empty()) {
                return s;
            }
        }
    }

private:
    std::mt19937_64 rng_;
};

void check_range(std::pair<double, double> r, const char* what) {
    if (!positive(r.first) || !positive(r.second) || r.first > r.second) {
        throw InvalidArgument(std::string("generator config: invalid ") + what + " range");
    }
}

ComplexityTerm product(const std::vector<ExponentPair>& factors, const std::set<std::size_t>& params,
                       std::size_t m) {
    ComplexityTerm t{Exponents(m)};
    for (auto l : params) {
        t.exponents[l] = factors[l];
    }
    return t;
}

// Every parameter of every computation term must move the basic-block count
// by at least this share of its largest value; smaller effects drown in
// floating-point rounding and no search can identify them.
constexpr double kMinVisibleShare = 1e-4;
constexpr std::uint64_t kMaxKernelAttempts = 1000;

bool measurable(const KernelSpec& kernel, const ParameterSpace& space) {
    const std::size_t m = space.dimension();
    Coordinate top;
    for (std::size_t l = 0; l < m; ++l) {
        top.values.push_back(space.values(l).back());
    }
    const double total = basic_blocks_at(kernel, top);
    for (const auto& ct : kernel.computation_terms) {
        for (auto l : params_of(ct.term)) {
            Coordinate low = top;
            low.values[l] = space.values(l).front();
            const double swing = ct.term.value(top) - ct.term.value(low);
            if (kernel.unit_scale * swing * static_cast<double>(kernel.bb_per_iteration) < kMinVisibleShare * total) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

BenchmarkSpec random_spec(std::uint64_t seed, std::size_t m, std::size_t n_kernels, const GeneratorConfig& config) {
    if (m < 1 || m > 3) {
        throw InvalidArgument("supported parameter counts are 1 to 3 (m <= 3)");
    }
    if (n_kernels == 0) {
        throw InvalidArgument("at least one kernel is required");
    }
    check_range(config.computation_coefficient, "computation coefficient");
    check_range(config.alpha, "alpha");
    check_range(config.beta, "beta");
    check_range(config.gamma, "gamma");
    if (config.bb_per_iteration.first < 1 || config.bb_per_iteration.first > config.bb_per_iteration.second) {
        throw InvalidArgument("generator config: invalid bb_per_iteration range");
    }
    if (!positive(config.unit_scale)) {
        throw InvalidArgument("generator config: unit_scale must be positive");
    }
    if (!(config.communication_probability >= 0.0 && config.communication_probability <= 1.0)) {
        throw InvalidArgument("generator config: communication probability outside [0, 1]");
    }
    if (config.communication_probability > 0.0 && config.ops.empty()) {
        throw InvalidArgument("generator config: no MPI operations to draw from");
    }
    std::vector<ExponentPair> pool;
    for (const auto& i : config.exponents.monomial) {
        if (i < Rational(0)) {
            throw InvalidArgument("generator config: negative monomial exponent");
        }
        for (int j : config.exponents.log) {
            if (j < 0) {
                throw InvalidArgument("generator config: negative log exponent");
            }
            if (!(i.is_zero() && j == 0)) {
                pool.push_back(ExponentPair{i, j});
            }
        }
    }
    if (pool.empty()) {
        throw InvalidArgument("generator config: exponent sets yield no non-constant term");
    }

    BenchmarkSpec spec{seed, default_space(m), {}};
    std::vector<std::size_t> all(m);
    for (std::size_t l = 0; l < m; ++l) {
        all[l] = l;
    }
    auto draw_kernel = [&](Draw& draw) {
        KernelSpec kernel;

        std::vector<ExponentPair> factors(m);
        for (auto& f : factors) {
            f = pool[draw.index(pool.size())];
        }
        const auto active = draw.nonempty_subset(all);
        std::vector<std::size_t> order(active.begin(), active.end());
        kernel.loop_arrangement = draw.coin(0.5) ? LoopArrangement::nested : LoopArrangement::sequential;

        std::vector<std::set<std::size_t>> groups;
        if (kernel.loop_arrangement == LoopArrangement::nested) {
            for (std::size_t t = order.size(); t > 1; --t) {
                std::swap(order[t - 1], order[draw.index(t)]);
            }
            std::set<std::size_t> prefix;
            for (auto l : order) {
                prefix.insert(l);
                groups.push_back(prefix);
            }
        } else {
            const std::size_t count = 1 + draw.index(order.size());
            while (true) {
                std::set<std::set<std::size_t>> chosen;
                std::size_t guard = 0;
                while (chosen.size() < count && guard++ < 64) {
                    chosen.insert(draw.nonempty_subset(order));
                }
                std::set<std::size_t> covered;
                for (const auto& g : chosen) {
                    covered.insert(g.begin(), g.end());
                }
                if (chosen.size() == count && covered == active) {
                    groups.assign(chosen.begin(), chosen.end());
                    break;
                }
            }
        }
        for (const auto& g : groups) {
            kernel.computation_terms.push_back(
                ComputationTerm{product(factors, g, m), draw.log_uniform(config.computation_coefficient)});
        }

        if (config.communication_probability > 0.0 && draw.coin(config.communication_probability)) {
            kernel.mpi_op = config.ops[draw.index(config.ops.size())];
            if (*kernel.mpi_op != MpiOp::barrier) {
                std::vector<ExponentPair> message_factors(m);
                for (auto& f : message_factors) {
                    f = pool[draw.index(pool.size())];
                }
                kernel.message_elems_term = product(message_factors, draw.nonempty_subset(all), m);
            }
        }
        kernel.elem_size = draw.coin(0.5) ? 4 : 8;
        kernel.alpha = draw.log_uniform(config.alpha);
        kernel.beta = draw.log_uniform(config.beta);
        kernel.gamma = draw.log_uniform(config.gamma);
        kernel.bb_per_iteration = draw.integer(config.bb_per_iteration);
        kernel.unit_scale = config.unit_scale;
        return kernel;
    };
    for (std::size_t k = 0; k < n_kernels; ++k) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt == kMaxKernelAttempts) {
                throw InvalidArgument("generator config admits no measurable kernel");
            }
            Draw draw(derive_seed(seed, {k, attempt}));
            KernelSpec kernel = draw_kernel(draw);
            kernel.name = "kernel_" + std::to_string(k);
            if (measurable(kernel, spec.space)) {
                spec.kernels.push_back(std::move(kernel));
                break;
            }
        }
    }
    validate(spec);
    return spec;
}

BenchmarkSpec example_spec(const ParameterSpace& space) {
    const auto p = space.index_of("p");
    const auto n = space.index_of("n");
    if (!p || !n) {
        throw InvalidArgument("the example kernel needs parameters 'p' and 'n'");
    }
    const std::size_t m = space.dimension();
    ComplexityTerm outer{Exponents(m)};
    outer.exponents[*n] = ExponentPair{Rational(1), 0};
    ComplexityTerm inner = outer;
    inner.exponents[*p] = ExponentPair{Rational(1), 0};

    KernelSpec k;
    k.name = "kernel_0";
    k.computation_terms = {{outer, 2e-8}, {inner, 5e-9}};
    k.loop_arrangement = LoopArrangement::nested;
    k.mpi_op = MpiOp::broadcast;
    k.message_elems_term = inner;
    k.elem_size = 4;
    k.alpha = 3e-6;
    k.beta = 4e-10;
    k.gamma = 2e-11;
    k.bb_per_iteration = 3;
    k.unit_scale = 1.0;
    BenchmarkSpec spec{0, space, {k}};
    validate(spec);
    return spec;
}

// Ground truth and simulation

std::vector<KernelTruth> ground_truth(const BenchmarkSpec& spec) {
    validate(spec);
    const std::size_t m = spec.space.dimension();
    std::vector<KernelTruth> out;
    for (const auto& k : spec.kernels) {
        KernelTruth truth;
        std::vector<BasisFunction> comp;
        for (const auto& ct : k.computation_terms) {
            comp.push_back(ct.term.basis());
        }
        truth.computation = leading_exponents(comp, m);
        if (k.mpi_op) {
            std::vector<BasisFunction> comm;
            if (*k.mpi_op != MpiOp::send && *k.mpi_op != MpiOp::receive) {
                BasisFunction log_p = BasisFunction::constant(m);
                log_p.exponents[*ranks_index(spec.space)] = ExponentPair{Rational(0), 1};
                comm.push_back(log_p);
            }
            if (k.message_elems_term) {
                comm.push_back(k.message_elems_term->basis());
            }
            truth.communication = leading_exponents(comm, m);
        }
        out.push_back(std::move(truth));
    }
    return out;
}

std::string computation_callpath(const KernelSpec& kernel) {
    return "benchmark_frame->" + kernel.name;
}

std::string communication_callpath(const KernelSpec& kernel) {
    if (!kernel.mpi_op) {
        throw InvalidArgument("kernel '" + kernel.name + "' has no MPI operation");
    }
    return computation_callpath(kernel) + "->" + std::string(mpi_function_name(*kernel.mpi_op));
}

double basic_blocks_at(const KernelSpec& kernel, const Coordinate& at) {
    double total = 0.0;
    for (const auto& ct : kernel.computation_terms) {
        total += std::round(kernel.unit_scale * ct.term.value(at)) * static_cast<double>(kernel.bb_per_iteration);
    }
    return total;
}

double message_elements_at(const KernelSpec& kernel, const Coordinate& at) {
    if (!kernel.message_elems_term) {
        return 0.0;
    }
    return std::round(kernel.unit_scale * kernel.message_elems_term->value(at));
}

double bytes_at(const KernelSpec& kernel, const Coordinate& at, std::size_t ranks_param) {
    if (!kernel.mpi_op) {
        return 0.0;
    }
    return account_bytes(*kernel.mpi_op, message_elements_at(kernel, at), kernel.elem_size, at[ranks_param])
        .per_target_bytes;
}

double computation_time_at(const KernelSpec& kernel, const Coordinate& at) {
    double total = 0.0;
    for (const auto& ct : kernel.computation_terms) {
        total += ct.coefficient * ct.term.value(at);
    }
    return total;
}

double communication_time_at(const KernelSpec& kernel, const Coordinate& at, std::size_t ranks_param) {
    if (!kernel.mpi_op) {
        return 0.0;
    }
    const double p = at[ranks_param];
    const double b = bytes_at(kernel, at, ranks_param);
    const double lg = std::log2(p);
    const double f = (p - 1.0) / p;
    switch (*kernel.mpi_op) {
        case MpiOp::send:
        case MpiOp::receive:
            return kernel.alpha + b * kernel.beta;
        case MpiOp::broadcast:
            return lg * kernel.alpha + b * kernel.beta;
        case MpiOp::scatter:
        case MpiOp::gather:
        case MpiOp::allgather:
            return lg * kernel.alpha + b * f * kernel.beta;
        case MpiOp::reduce:
        case MpiOp::allreduce:
            return lg * kernel.alpha + (kernel.beta + f * kernel.gamma) * b;
        case MpiOp::barrier:
            return lg * kernel.alpha;
    }
    return 0.0;
}

ExperimentSet simulate_measurements(const BenchmarkSpec& spec, std::size_t reps, double baseline_noise,
                                    std::uint64_t seed) {
    validate(spec);
    if (reps < 1) {
        throw InvalidArgument("at least one repetition is required");
    }
    if (!(baseline_noise >= 0.0) || !std::isfinite(baseline_noise)) {
        throw InvalidArgument("baseline noise must be a non-negative fraction");
    }
    const auto& space = spec.space;
    const std::size_t points = space.grid_size();
    const auto ranks = ranks_index(space);

    auto timed = [&](std::size_t kernel, std::uint64_t kind, auto&& time_at) {
        std::vector<std::vector<double>> reps_time(points, std::vector<double>(reps));
        for (std::size_t flat = 0; flat < points; ++flat) {
            const double base = time_at(space.coordinate(flat));
            for (std::size_t r = 0; r < reps; ++r) {
                const double u = static_cast<double>(derive_seed(seed, {kernel, kind, flat, r}) >> 11) * 0x1p-53;
                reps_time[flat][r] = base * (1.0 + baseline_noise * u);
            }
        }
        return MetricSeries(Metric::time_s, std::move(reps_time));
    };
    auto effort = [&](Metric metric, auto&& value_at) {
        std::vector<std::vector<double>> values(points);
        for (std::size_t flat = 0; flat < points; ++flat) {
            values[flat].assign(reps, value_at(space.coordinate(flat)));
        }
        return MetricSeries(metric, std::move(values));
    };

    std::vector<CallpathData> callpaths;
    for (std::size_t k = 0; k < spec.kernels.size(); ++k) {
        const auto& kernel = spec.kernels[k];
        CallpathData comp{CallPath{computation_callpath(kernel), CallpathKind::computation, std::nullopt}, {}};
        comp.metrics.emplace(Metric::time_s,
                             timed(k, 0, [&](const Coordinate& c) { return computation_time_at(kernel, c); }));
        comp.metrics.emplace(Metric::basic_blocks,
                             effort(Metric::basic_blocks, [&](const Coordinate& c) { return basic_blocks_at(kernel, c); }));
        callpaths.push_back(std::move(comp));
        if (kernel.mpi_op) {
            CallpathData comm{CallPath{communication_callpath(kernel), CallpathKind::communication, kernel.mpi_op}, {}};
            comm.metrics.emplace(Metric::time_s, timed(k, 1, [&](const Coordinate& c) {
                                     return communication_time_at(kernel, c, *ranks);
                                 }));
            comm.metrics.emplace(Metric::bytes, effort(Metric::bytes, [&](const Coordinate& c) {
                                     return bytes_at(kernel, c, *ranks);
                                 }));
            callpaths.push_back(std::move(comm));
        }
    }
    return ExperimentSet(space, std::move(callpaths));
}

// Source emission

namespace {

json exponents_to_json(const Exponents& e, const std::vector<std::string>& names) {
    json obj = json::object();
    for (std::size_t l = 0; l < e.size(); ++l) {
        if (!e[l].is_zero()) {
            obj[names[l]] = {{"i", e[l].i.to_string()}, {"j", e[l].j}};
        }
    }
    return obj;
}

Exponents exponents_from_json(const json& obj, const std::vector<std::string>& names, std::string_view what) {
    if (!obj.is_object()) {
        throw ParseError(std::string(what) + ": exponents must be an object");
    }
    Exponents e(names.size());
    for (const auto& [key, value] : obj.items()) {
        auto it = std::find(names.begin(), names.end(), key);
        if (it == names.end()) {
            throw ParseError(std::string(what) + ": unknown parameter '" + key + "'");
        }
        detail::require_keys(value, {"i", "j"}, {}, what);
        const auto j = detail::integer_field(value, "j", what);
        e[static_cast<std::size_t>(it - names.begin())] =
            ExponentPair{Rational::parse(detail::string_field(value, "i", what)), static_cast<int>(j)};
    }
    return e;
}

std::string factor_expression(const ExponentPair& e, const std::string& x) {
    std::vector<std::string> parts;
    if (e.i == Rational(1)) {
        parts.push_back(x);
    } else if (!e.i.is_zero()) {
        parts.push_back("std::pow(" + x + ", " + std::to_string(e.i.numerator()) + ".0 / " +
                        std::to_string(e.i.denominator()) + ".0)");
    }
    for (int j = 0; j < e.j; ++j) {
        parts.push_back("std::log2(" + x + ")");
    }
    std::string out;
    for (const auto& p : parts) {
        out += (out.empty() ? "" : " * ") + p;
    }
    return out;
}

// Bound of a loop or buffer: plain integer product when possible, rounded
// floating expression otherwise.
std::string count_expression(const Exponents& e, const std::set<std::size_t>& params,
                             const std::vector<std::string>& names, double scale) {
    bool plain = scale == 1.0;
    std::string expr;
    for (auto l : params) {
        plain = plain && e[l] == ExponentPair{Rational(1), 0};
        expr += (expr.empty() ? "" : " * ") + factor_expression(e[l], names[l]);
    }
    if (plain) {
        return expr;
    }
    std::ostringstream os;
    os << "trips(" << format_number(scale) << " * " << expr << ")";
    return os.str();
}

std::string_view c_type(int elem_size) {
    return elem_size == 8 ? "double" : "int";
}

std::string_view mpi_type(int elem_size) {
    return elem_size == 8 ? "MPI_DOUBLE" : "MPI_INT";
}

void emit_mpi_call(std::ostringstream& os, const KernelSpec& k, const std::string& count) {
    const std::string t(c_type(k.elem_size));
    const std::string mt(mpi_type(k.elem_size));
    const std::string ind = "    ";
    switch (*k.mpi_op) {
        case MpiOp::send:
        case MpiOp::receive:
            os << ind << "const long count = " << count << ";\n"
               << ind << "std::vector<" << t << "> buffer(count);\n"
               << ind << "if (rank % 2 == 0 && rank + 1 < ranks) {\n"
               << ind << "    MPI_Send(buffer.data(), static_cast<int>(count), " << mt
               << ", rank + 1, 0, MPI_COMM_WORLD);\n"
               << ind << "} else if (rank % 2 == 1) {\n"
               << ind << "    MPI_Recv(buffer.data(), static_cast<int>(count), " << mt
               << ", rank - 1, 0, MPI_COMM_WORLD, MPI_STATUS_IGNORE);\n"
               << ind << "}\n";
            break;
        case MpiOp::broadcast:
            os << ind << "const long count = " << count << ";\n"
               << ind << "std::vector<" << t << "> buffer(count);\n"
               << ind << "MPI_Bcast(buffer.data(), static_cast<int>(count), " << mt << ", 0, MPI_COMM_WORLD);\n";
            break;
        case MpiOp::scatter:
        case MpiOp::gather:
        case MpiOp::allgather: {
            const std::string name(mpi_function_name(*k.mpi_op));
            os << ind << "const long count = " << count << ";\n"
               << ind << "std::vector<" << t << "> local(count);\n"
               << ind << "std::vector<" << t << "> all(count * ranks);\n";
            if (*k.mpi_op == MpiOp::scatter) {
                os << ind << "MPI_Scatter(all.data(), static_cast<int>(count), " << mt
                   << ", local.data(), static_cast<int>(count), " << mt << ", 0, MPI_COMM_WORLD);\n";
            } else if (*k.mpi_op == MpiOp::gather) {
                os << ind << "MPI_Gather(local.data(), static_cast<int>(count), " << mt
                   << ", all.data(), static_cast<int>(count), " << mt << ", 0, MPI_COMM_WORLD);\n";
            } else {
                os << ind << "MPI_Allgather(local.data(), static_cast<int>(count), " << mt
                   << ", all.data(), static_cast<int>(count), " << mt << ", MPI_COMM_WORLD);\n";
            }
            break;
        }
        case MpiOp::reduce:
            os << ind << "const long count = " << count << ";\n"
               << ind << "std::vector<" << t << "> local(count);\n"
               << ind << "std::vector<" << t << "> result(count);\n"
               << ind << "MPI_Reduce(local.data(), result.data(), static_cast<int>(count), " << mt
               << ", MPI_SUM, 0, MPI_COMM_WORLD);\n";
            break;
        case MpiOp::allreduce:
            os << ind << "const long count = " << count << ";\n"
               << ind << "std::vector<" << t << "> local(count);\n"
               << ind << "std::vector<" << t << "> result(count);\n"
               << ind << "MPI_Allreduce(local.data(), result.data(), static_cast<int>(count), " << mt
               << ", MPI_SUM, MPI_COMM_WORLD);\n";
            break;
        case MpiOp::barrier:
            os << ind << "MPI_Barrier(MPI_COMM_WORLD);\n";
            break;
    }
}

void emit_kernel(std::ostringstream& os, const KernelSpec& k, const std::vector<std::string>& names,
                 const std::string& signature) {
    os << "void " << k.name << "(" << signature << ") {\n";
    const std::string body = "work(" + std::to_string(k.bb_per_iteration) + ");\n";
    if (k.loop_arrangement == LoopArrangement::nested) {
        std::set<std::size_t> outer;
        std::string indent = "    ";
        for (std::size_t t = 0; t < k.computation_terms.size(); ++t) {
            const auto& term = k.computation_terms[t].term;
            const auto params = params_of(term);
            std::set<std::size_t> fresh;
            std::set_difference(params.begin(), params.end(), outer.begin(), outer.end(),
                                std::inserter(fresh, fresh.begin()));
            const std::string var = "i" + std::to_string(t);
            os << indent << "for (long " << var << " = 0; " << var << " < "
               << count_expression(term.exponents, fresh, names, t == 0 ? k.unit_scale : 1.0) << "; ++" << var
               << ") {\n";
            indent += "    ";
            os << indent << body;
            outer = params;
        }
        for (std::size_t t = k.computation_terms.size(); t > 0; --t) {
            indent.resize(indent.size() - 4);
            os << indent << "}\n";
        }
    } else {
        for (std::size_t t = 0; t < k.computation_terms.size(); ++t) {
            const auto& term = k.computation_terms[t].term;
            const std::string var = "i" + std::to_string(t);
            os << "    for (long " << var << " = 0; " << var << " < "
               << count_expression(term.exponents, params_of(term), names, k.unit_scale) << "; ++" << var << ") {\n"
               << "        " << body << "    }\n";
        }
    }
    if (k.mpi_op) {
        std::string count = "0";
        if (k.message_elems_term) {
            count = count_expression(k.message_elems_term->exponents, params_of(*k.message_elems_term), names,
                                     k.unit_scale);
        }
        emit_mpi_call(os, k, count);
    }
    os << "}\n\n";
}

json truth_to_json(const BenchmarkSpec& spec) {
    const auto truths = ground_truth(spec);
    json kernels = json::array();
    for (std::size_t k = 0; k < spec.kernels.size(); ++k) {
        json entry{{"name", spec.kernels[k].name},
                   {"computation", exponents_to_json(truths[k].computation, spec.space.names())}};
        if (truths[k].communication) {
            entry["mpi_op"] = std::string(to_string(*spec.kernels[k].mpi_op));
            entry["communication"] = exponents_to_json(*truths[k].communication, spec.space.names());
        }
        kernels.push_back(entry);
    }
    return json{{"seed", spec.seed}, {"kernels", kernels}};
}

}  // namespace

std::string emit_source(const BenchmarkSpec& spec) {
    validate(spec);
    const auto& names = spec.space.names();
    std::ostringstream os;
    os << "// GROUND_TRUTH " << truth_to_json(spec).dump() << "\n";
    os << "// Synthetic MPI benchmark, seed " << spec.seed << ".\n\n";
    os << "#include <cmath>\n#include <cstdlib>\n#include <vector>\n\n#include <mpi.h>\n\n";
    os << "namespace {\n\n";
    os << "volatile long sink = 0;\n\n";
    os << "long trips(double v) {\n    return static_cast<long>(std::llround(v));\n}\n\n";
    os << "void work(int blocks) {\n    for (int b = 0; b < blocks; ++b) {\n"
       << "        if (sink % 2 == 0) {\n            sink = sink + 1;\n        } else {\n"
       << "            sink = sink - 1;\n        }\n    }\n}\n\n";
    std::string signature;
    std::string arguments;
    for (const auto& name : names) {
        signature += "long " + name + ", ";
        arguments += name + ", ";
    }
    signature += "int rank, int ranks";
    arguments += "rank, ranks";
    for (const auto& k : spec.kernels) {
        emit_kernel(os, k, names, signature);
    }
    os << "}  // namespace\n\n";
    os << "void benchmark_frame(" << signature << ") {\n";
    for (const auto& k : spec.kernels) {
        os << "    " << k.name << "(" << arguments << ");\n";
    }
    os << "}\n\n";
    os << "int main(int argc, char** argv) {\n"
       << "    MPI_Init(&argc, &argv);\n"
       << "    int rank = 0;\n    int ranks = 1;\n"
       << "    MPI_Comm_rank(MPI_COMM_WORLD, &rank);\n"
       << "    MPI_Comm_size(MPI_COMM_WORLD, &ranks);\n";
    int arg = 1;
    for (const auto& name : names) {
        if (name == "p") {
            os << "    const long p = ranks;\n";
        } else {
            os << "    const long " << name << " = argc > " << arg << " ? std::atol(argv[" << arg << "]) : 1;\n";
            ++arg;
        }
    }
    os << "    benchmark_frame(" << arguments << ");\n"
       << "    MPI_Finalize();\n    return 0;\n}\n";
    return os.str();
}

// Spec files

std::string spec_to_json(const BenchmarkSpec& spec) {
    validate(spec);
    const auto& names = spec.space.names();
    json doc;
    doc["format_version"] = 1;
    doc["seed"] = spec.seed;
    json params = json::array();
    for (std::size_t l = 0; l < spec.space.dimension(); ++l) {
        params.push_back({{"name", names[l]}, {"values", spec.space.values(l)}});
    }
    doc["parameters"] = params;
    json kernels = json::array();
    for (const auto& k : spec.kernels) {
        json terms = json::array();
        for (const auto& ct : k.computation_terms) {
            terms.push_back({{"exponents", exponents_to_json(ct.term.exponents, names)},
                             {"coefficient", ct.coefficient}});
        }
        json obj{{"name", k.name},
                 {"loop_arrangement", std::string(to_string(k.loop_arrangement))},
                 {"computation_terms", terms},
                 {"elem_size", k.elem_size},
                 {"alpha", k.alpha},
                 {"beta", k.beta},
                 {"gamma", k.gamma},
                 {"bb_per_iteration", k.bb_per_iteration},
                 {"unit_scale", k.unit_scale}};
        if (k.mpi_op) {
            obj["mpi_op"] = std::string(to_string(*k.mpi_op));
        }
        if (k.message_elems_term) {
            obj["message_elems_term"] = {{"exponents", exponents_to_json(k.message_elems_term->exponents, names)}};
        }
        kernels.push_back(obj);
    }
    doc["kernels"] = kernels;
    return doc.dump(1) + "\n";
}

BenchmarkSpec spec_from_json(std::string_view text) {
    const json doc = detail::parse_json(text);
    detail::require_keys(doc, {"format_version", "seed", "parameters", "kernels"}, {}, "spec");
    if (!doc["format_version"].is_number_integer() || doc["format_version"].get<int>() != 1) {
        throw ParseError("spec: unsupported format_version");
    }
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
        throw ParseError("spec: 'seed' must be a non-negative integer");
    }
    BenchmarkSpec spec;
    spec.seed = doc["seed"].get<std::uint64_t>();
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (const auto& p : detail::array_field(doc, "parameters", "spec")) {
        detail::require_keys(p, {"name", "values"}, {}, "spec parameter");
        names.push_back(detail::string_field(p, "name", "spec parameter"));
        values.push_back(detail::number_list(p["values"], "spec parameter"));
    }
    spec.space = ParameterSpace(names, values);
    for (const auto& obj : detail::array_field(doc, "kernels", "spec")) {
        const std::string what = "spec kernel";
        detail::require_keys(obj,
                             {"name", "loop_arrangement", "computation_terms", "elem_size", "alpha", "beta", "gamma",
                              "bb_per_iteration", "unit_scale"},
                             {"mpi_op", "message_elems_term"}, what);
        KernelSpec k;
        k.name = detail::string_field(obj, "name", what);
        k.loop_arrangement = parse_loop_arrangement(detail::string_field(obj, "loop_arrangement", what));
        for (const auto& t : detail::array_field(obj, "computation_terms", what)) {
            detail::require_keys(t, {"exponents", "coefficient"}, {}, "computation term");
            k.computation_terms.push_back(ComputationTerm{ComplexityTerm{exponents_from_json(t["exponents"], names, what)},
                                                          detail::number_field(t, "coefficient", what)});
        }
        k.elem_size = static_cast<int>(detail::integer_field(obj, "elem_size", what));
        k.alpha = detail::number_field(obj, "alpha", what);
        k.beta = detail::number_field(obj, "beta", what);
        k.gamma = detail::number_field(obj, "gamma", what);
        k.bb_per_iteration = detail::integer_field(obj, "bb_per_iteration", what);
        k.unit_scale = detail::number_field(obj, "unit_scale", what);
        if (obj.contains("mpi_op")) {
            k.mpi_op = parse_mpi_op(detail::string_field(obj, "mpi_op", what));
        }
        if (obj.contains("message_elems_term")) {
            const auto& t = obj["message_elems_term"];
            detail::require_keys(t, {"exponents"}, {}, "message term");
            k.message_elems_term = ComplexityTerm{exponents_from_json(t["exponents"], names, what)};
        }
        spec.kernels.push_back(std::move(k));
    }
    validate(spec);
    return spec;
}

BenchmarkSpec load_spec(const std::filesystem::path& path) {
    return spec_from_json(read_text_file(path));
}

void save_spec(const BenchmarkSpec& spec, const std::filesystem::path& path) {
    write_text_file(path, spec_to_json(spec));
}

}  // namespace nrpm
