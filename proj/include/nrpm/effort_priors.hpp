#pragma once

#include <cstddef>
#include <string_view>

#include "nrpm/dataset.hpp"
#include "nrpm/modeler.hpp"
#include "nrpm/mpi_op.hpp"
#include "nrpm/pmnf.hpp"

namespace nrpm {

/// Communication skeleton of one MPI operation with its alpha/beta/gamma
/// slots labeled.
struct CommPrior {
    MpiOp op = MpiOp::send;
    Skeleton skeleton;
};

/// Exponents of the basic-block model without its coefficients: the constant
/// plus one generic basis per term.
Skeleton derive_computation_prior(const PmnfModel& bb_model);

/// Effort model (basic_blocks or bytes) of one call path: median aggregation
/// followed by the single- or multi-parameter search. Throws ModelingError if
/// the call path lacks the metric.
PmnfModel model_effort(const ExperimentSet& exp, std::size_t callpath, Metric metric,
                       const SearchOptions& options = {});

/// Substitutes the structural terms B of a bytes model into the cost model
/// of `op`:
///
///   send, receive          c0 + B β
///   broadcast              c0 + log2(p) α + B β
///   scatter, gather,
///   allgather              c0 + log2(p) α + B (p-1)/p β
///   reduce, allreduce      c0 + log2(p) α + B β + B (p-1)/p γ
///   barrier                c0 + log2(p) α
///
/// The bytes model's constant is dropped; repeated bases collapse. Throws
/// InvalidArgument if `ranks_param` is not a parameter of the model.
CommPrior derive_communication_prior(MpiOp op, const PmnfModel& bytes_model, std::string_view ranks_param);

struct ByteCounts {
    double root_bytes = 0.0;
    double per_target_bytes = 0.0;

    friend bool operator==(const ByteCounts&, const ByteCounts&) = default;
};

/// Bytes moved by one call with `elem_count` elements of `elem_size` bytes on
/// `ranks` processes. Counts are integral values carried in doubles so that
/// very large messages do not overflow. Broadcast, scatter, gather,
/// allgather, reduce and allreduce move ranks * count * size at the root (or
/// in aggregate) and count * size per rank; send/receive move count * size;
/// barrier moves nothing. Throws InvalidArgument for negative or fractional
/// counts, non-positive sizes or ranks < 1.
ByteCounts account_bytes(MpiOp op, double elem_count, double elem_size, double ranks);

/// Runtime samples of a call path: median over repetitions per grid point.
std::vector<Sample> time_samples(const ExperimentSet& exp, std::size_t callpath);

struct SwcModel {
    PmnfModel model;
    Skeleton skeleton;
    PmnfModel effort_model;
};

/// Effort model -> prior skeleton -> coefficients fitted to runtime. Throws
/// ModelingError naming the call path if its effort metric is missing.
SwcModel build_swc_model(const ExperimentSet& exp, std::size_t callpath, std::string_view ranks_param = "p",
                         const SearchOptions& options = {});

}  // namespace nrpm
