#pragma once

#include <array>
#include <string>
#include <string_view>

namespace nrpm {

enum class MpiOp {
    send,
    receive,
    broadcast,
    scatter,
    gather,
    allgather,
    reduce,
    allreduce,
    barrier,
};

inline constexpr std::array<MpiOp, 9> kAllMpiOps = {
    MpiOp::send,   MpiOp::receive,   MpiOp::broadcast, MpiOp::scatter, MpiOp::gather,
    MpiOp::allgather, MpiOp::reduce, MpiOp::allreduce, MpiOp::barrier,
};

/// Lower-case identifier used in files ("broadcast").
std::string_view to_string(MpiOp op);
/// Inverse of to_string; throws ParseError for unknown names.
MpiOp parse_mpi_op(std::string_view name);
/// MPI routine name used in call paths and emitted source ("MPI_Bcast").
std::string_view mpi_function_name(MpiOp op);

}  // namespace nrpm
