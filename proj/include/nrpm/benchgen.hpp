#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nrpm/dataset.hpp"
#include "nrpm/mpi_op.hpp"
#include "nrpm/pmnf.hpp"

namespace nrpm {

/// Product over parameters of x^i * log2(x)^j; not all pairs zero.
struct ComplexityTerm {
    Exponents exponents;

    [[nodiscard]] double value(const Coordinate& at) const;
    [[nodiscard]] BasisFunction basis() const { return BasisFunction{exponents, std::nullopt}; }
    friend bool operator==(const ComplexityTerm&, const ComplexityTerm&) = default;
};

struct ComputationTerm {
    ComplexityTerm term;
    double coefficient = 0.0;  // seconds per unit of term value
    friend bool operator==(const ComputationTerm&, const ComputationTerm&) = default;
};

enum class LoopArrangement { nested, sequential };

std::string_view to_string(LoopArrangement arrangement);
LoopArrangement parse_loop_arrangement(std::string_view name);

/// One kernel of a synthetic benchmark.
///
/// Nested kernels describe a loop nest: term k is term k-1 times the factors
/// of the parameters entering at depth k, so each parameter keeps the same
/// exponent pair in every term that contains it. Sequential kernels are
/// independent loops; their terms also share one exponent pair per
/// parameter.
///
/// unit_scale multiplies every term before it is rounded to a trip count or
/// an element count, so small term values (log2(p), p^(1/4)) survive the
/// rounding.
struct KernelSpec {
    std::string name;
    std::vector<ComputationTerm> computation_terms;
    LoopArrangement loop_arrangement = LoopArrangement::nested;
    std::optional<MpiOp> mpi_op;
    std::optional<ComplexityTerm> message_elems_term;
    int elem_size = 4;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::int64_t bb_per_iteration = 1;
    double unit_scale = 1.0;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct BenchmarkSpec {
    std::uint64_t seed = 0;
    ParameterSpace space;
    std::vector<KernelSpec> kernels;

    friend bool operator==(const BenchmarkSpec&, const BenchmarkSpec&) = default;
};

/// Throws ValidationError when a spec breaks the KernelSpec/BenchmarkSpec
/// invariants (positive coefficients, op/message pairing, one exponent pair
/// per parameter, nesting, a ranks parameter "p" for communication).
void validate(const BenchmarkSpec& spec);

/// Measurement spaces used by the studies: p in {128, ..., 2048}, then
/// n in {8000, ..., 40000}, then g in {32, ..., 160}.
ParameterSpace default_space(std::size_t m);

struct GeneratorConfig {
    ExponentSets exponents = default_exponent_sets();
    std::vector<MpiOp> ops{kAllMpiOps.begin(), kAllMpiOps.end()};
    double communication_probability = 0.75;
    std::pair<double, double> computation_coefficient{1e-9, 1e-7};
    std::pair<double, double> alpha{1e-6, 1e-5};
    std::pair<double, double> beta{1e-10, 1e-9};
    std::pair<double, double> gamma{1e-11, 1e-10};
    std::pair<std::int64_t, std::int64_t> bb_per_iteration{1, 8};
    double unit_scale = 1e6;
};

/// Deterministic in (seed, m, n_kernels, config). Throws InvalidArgument for
/// m outside 1..3, zero kernels or inconsistent config ranges.
BenchmarkSpec random_spec(std::uint64_t seed, std::size_t m, std::size_t n_kernels,
                          const GeneratorConfig& config = {});

/// The kernel of the Bcast/nested-loop example: outer loop over n, inner
/// loop over p, broadcast of n * p ints. unit_scale 1.
BenchmarkSpec example_spec(const ParameterSpace& space);

struct KernelTruth {
    Exponents computation;
    std::optional<Exponents> communication;
};

/// Leading exponents per kernel: the computation terms, and the cost-model
/// form of the MPI operation instantiated with the message term.
std::vector<KernelTruth> ground_truth(const BenchmarkSpec& spec);

std::string computation_callpath(const KernelSpec& kernel);
std::string communication_callpath(const KernelSpec& kernel);

/// Noise-free quantities of one kernel at a coordinate.
double basic_blocks_at(const KernelSpec& kernel, const Coordinate& at);
double message_elements_at(const KernelSpec& kernel, const Coordinate& at);
double bytes_at(const KernelSpec& kernel, const Coordinate& at, std::size_t ranks_param);
double computation_time_at(const KernelSpec& kernel, const Coordinate& at);
double communication_time_at(const KernelSpec& kernel, const Coordinate& at, std::size_t ranks_param);

/// Exact analytic measurements. Effort metrics are identical across
/// repetitions; every time repetition is scaled by (1 + baseline_noise * u)
/// with u uniform in [0, 1) drawn from a stream derived from (seed, kernel,
/// call path kind, grid point, repetition). The bytes metric is the payload
/// per rank.
ExperimentSet simulate_measurements(const BenchmarkSpec& spec, std::size_t reps, double baseline_noise,
                                    std::uint64_t seed);

/// Benchmark source text with a `// GROUND_TRUTH {...}` header line.
std::string emit_source(const BenchmarkSpec& spec);

std::string spec_to_json(const BenchmarkSpec& spec);
BenchmarkSpec spec_from_json(std::string_view text);
BenchmarkSpec load_spec(const std::filesystem::path& path);
void save_spec(const BenchmarkSpec& spec, const std::filesystem::path& path);

}  // namespace nrpm
