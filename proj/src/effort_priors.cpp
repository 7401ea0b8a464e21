#include "nrpm/effort_priors.hpp"

#include <cmath>

#include "nrpm/error.hpp"

namespace nrpm {

Skeleton derive_computation_prior(const PmnfModel& bb_model) {
    return skeleton_of(bb_model);
}

PmnfModel model_effort(const ExperimentSet& exp, std::size_t callpath, Metric metric, const SearchOptions& options) {
    if (metric == Metric::time_s) {
        throw InvalidArgument("model_effort expects an effort metric");
    }
    const auto& cp = exp.callpaths().at(callpath);
    const MetricSeries* series = cp.find(metric);
    if (series == nullptr) {
        throw ModelingError("call path '" + cp.path.name + "' has no " + std::string(to_string(metric)) +
                            " measurements");
    }
    const auto values = aggregate(*series, Statistic::median);
    return search_model(exp.space(), values, options);
}

CommPrior derive_communication_prior(MpiOp op, const PmnfModel& bytes_model, std::string_view ranks_param) {
    std::optional<std::size_t> ranks;
    for (std::size_t l = 0; l < bytes_model.dimension(); ++l) {
        if (bytes_model.names()[l] == ranks_param) {
            ranks = l;
        }
    }
    if (!ranks) {
        throw InvalidArgument("ranks parameter '" + std::string(ranks_param) + "' is not a model parameter");
    }
    const std::size_t m = bytes_model.dimension();

    std::vector<BasisFunction> b_terms;
    for (const auto& t : bytes_model.terms()) {
        if (t.basis.ranks_factor) {
            throw InvalidArgument("bytes model terms must not carry a (p-1)/p factor");
        }
        b_terms.push_back(t.basis);
    }
    auto with_factor = [&](BasisFunction b) {
        b.ranks_factor = ranks;
        return b;
    };
    BasisFunction log_p = BasisFunction::constant(m);
    log_p.exponents[*ranks] = ExponentPair{Rational(0), 1};

    using L = CoefficientLabel;
    std::vector<std::pair<BasisFunction, CoefficientLabel>> extra;
    switch (op) {
        case MpiOp::send:
        case MpiOp::receive:
            for (const auto& b : b_terms) {
                extra.emplace_back(b, L::beta);
            }
            break;
        case MpiOp::broadcast:
            extra.emplace_back(log_p, L::alpha);
            for (const auto& b : b_terms) {
                extra.emplace_back(b, L::beta);
            }
            break;
        case MpiOp::scatter:
        case MpiOp::gather:
        case MpiOp::allgather:
            extra.emplace_back(log_p, L::alpha);
            for (const auto& b : b_terms) {
                extra.emplace_back(with_factor(b), L::beta);
            }
            break;
        case MpiOp::reduce:
        case MpiOp::allreduce:
            extra.emplace_back(log_p, L::alpha);
            for (const auto& b : b_terms) {
                extra.emplace_back(b, L::beta);
            }
            for (const auto& b : b_terms) {
                extra.emplace_back(with_factor(b), L::gamma);
            }
            break;
        case MpiOp::barrier:
            extra.emplace_back(log_p, L::alpha);
            break;
    }
    return CommPrior{op, Skeleton::with_constant(bytes_model.names(), std::move(extra))};
}

ByteCounts account_bytes(MpiOp op, double elem_count, double elem_size, double ranks) {
    if (!(elem_count >= 0.0) || elem_count != std::floor(elem_count) || !std::isfinite(elem_count)) {
        throw InvalidArgument("element count must be a non-negative integer");
    }
    if (!(elem_size > 0.0) || elem_size != std::floor(elem_size)) {
        throw InvalidArgument("element size must be a positive integer");
    }
    if (!(ranks >= 1.0) || ranks != std::floor(ranks)) {
        throw InvalidArgument("rank count must be an integer >= 1");
    }
    const double payload = elem_count * elem_size;
    switch (op) {
        case MpiOp::send:
        case MpiOp::receive:
            return {payload, payload};
        case MpiOp::broadcast:
        case MpiOp::scatter:
        case MpiOp::gather:
        case MpiOp::allgather:
        case MpiOp::reduce:
        case MpiOp::allreduce:
            return {ranks * payload, payload};
        case MpiOp::barrier:
            return {0.0, 0.0};
    }
    throw InvalidArgument("unknown MPI operation");
}

std::vector<Sample> time_samples(const ExperimentSet& exp, std::size_t callpath) {
    const auto& cp = exp.callpaths().at(callpath);
    const MetricSeries* series = cp.find(Metric::time_s);
    if (series == nullptr) {
        throw ModelingError("call path '" + cp.path.name + "' has no time_s measurements");
    }
    return samples_from_grid(exp.space(), aggregate(*series, Statistic::median));
}

SwcModel build_swc_model(const ExperimentSet& exp, std::size_t callpath, std::string_view ranks_param,
                         const SearchOptions& options) {
    const auto& cp = exp.callpaths().at(callpath);
    PmnfModel effort;
    Skeleton skeleton;
    if (cp.path.kind == CallpathKind::computation) {
        effort = model_effort(exp, callpath, Metric::basic_blocks, options);
        skeleton = derive_computation_prior(effort);
    } else {
        if (!cp.path.mpi_op) {
            throw ModelingError("communication call path '" + cp.path.name + "' has no MPI operation");
        }
        effort = model_effort(exp, callpath, Metric::bytes, options);
        skeleton = derive_communication_prior(*cp.path.mpi_op, effort, ranks_param).skeleton;
    }
    auto model = fit_skeleton_to_time(skeleton, time_samples(exp, callpath));
    return SwcModel{std::move(model), std::move(skeleton), std::move(effort)};
}

}  // namespace nrpm
