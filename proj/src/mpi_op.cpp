#include "nrpm/mpi_op.hpp"

#include "nrpm/error.hpp"

namespace nrpm {

std::string_view to_string(MpiOp op) {
    switch (op) {
        case MpiOp::send: return "send";
        case MpiOp::receive: return "receive";
        case MpiOp::broadcast: return "broadcast";
        case MpiOp::scatter: return "scatter";
        case MpiOp::gather: return "gather";
        case MpiOp::allgather: return "allgather";
        case MpiOp::reduce: return "reduce";
        case MpiOp::allreduce: return "allreduce";
        case MpiOp::barrier: return "barrier";
    }
    return "unknown";
}

MpiOp parse_mpi_op(std::string_view name) {
    for (MpiOp op : kAllMpiOps) {
        if (to_string(op) == name) {
            return op;
        }
    }
    throw ParseError("unknown MPI operation '" + std::string(name) + "'");
}

std::string_view mpi_function_name(MpiOp op) {
    switch (op) {
        case MpiOp::send: return "MPI_Send";
        case MpiOp::receive: return "MPI_Recv";
        case MpiOp::broadcast: return "MPI_Bcast";
        case MpiOp::scatter: return "MPI_Scatter";
        case MpiOp::gather: return "MPI_Gather";
        case MpiOp::allgather: return "MPI_Allgather";
        case MpiOp::reduce: return "MPI_Reduce";
        case MpiOp::allreduce: return "MPI_Allreduce";
        case MpiOp::barrier: return "MPI_Barrier";
    }
    return "MPI_Unknown";
}

}  // namespace nrpm
