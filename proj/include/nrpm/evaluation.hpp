#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nrpm/benchgen.hpp"
#include "nrpm/dataset.hpp"
#include "nrpm/modeler.hpp"
#include "nrpm/noise_lab.hpp"
#include "nrpm/pmnf.hpp"

namespace nrpm {

/// Per-parameter |i1 - i2| of the leading monomial exponents. Log factors
/// do not count.
struct EdReport {
    std::vector<Rational> deltas;

    [[nodiscard]] bool all_zero() const;
    [[nodiscard]] double mean() const;
};

/// Throws InvalidArgument if the exponent vectors differ in length.
EdReport exponent_deviation(const Exponents& a, const Exponents& b);
/// Throws InvalidArgument unless both models use the same parameter names.
EdReport exponent_deviation(const PmnfModel& a, const PmnfModel& b);

/// |measured - prediction| / measured * 100. Throws InvalidArgument unless
/// measured > 0.
double relative_error(const PmnfModel& model, const Coordinate& test, double measured);

/// The coordinate one step past the largest value of every parameter:
/// geometric if successive ratios agree within 1e-9 (relative), arithmetic if
/// successive differences do. Throws InvalidArgument("irregular spacing")
/// otherwise and for fewer than 3 values.
Coordinate next_test_point(const ParameterSpace& space);

struct CostReport {
    std::uint64_t classic = 0;
    std::uint64_t swc = 0;

    /// Percentage of measurements saved by the SWC design.
    [[nodiscard]] double savings_percent() const;
};

/// values^m * reps_classic measurements for classic modeling against
/// 2 * values^m for one instrumented and one timed run per point. Throws
/// InvalidArgument for m, reps_classic or values == 0.
CostReport cost_report(std::size_t m, std::size_t reps_classic = 5, std::size_t values = 5);

enum class Pipeline { classic, swc };

std::string_view to_string(Pipeline pipeline);
Pipeline parse_pipeline(std::string_view name);

/// classic: hypothesis search on the median runtime. swc: build_swc_model.
PmnfModel run_pipeline(Pipeline pipeline, const ExperimentSet& exp, std::size_t callpath,
                       const SearchOptions& options = {});

/// Reference for one call path: expected leading exponents and the
/// noise-free runtime at the test point.
struct CallpathTruth {
    std::string callpath;
    Exponents leading;
    double test_time = 0.0;
};

std::vector<CallpathTruth> callpath_truths(const BenchmarkSpec& spec, const Coordinate& test_point);

struct TrialOutcome {
    double ed = 0.0;  // mean Δx over call paths and parameters
    double re = 0.0;  // mean RE over call paths, percent
};

/// Runs `pipeline` on every call path of `exp`. Throws InvalidArgument if a
/// call path has no entry in `truths`.
TrialOutcome evaluate_trial(Pipeline pipeline, const ExperimentSet& exp, const std::vector<CallpathTruth>& truths,
                            const Coordinate& test_point, const SearchOptions& options = {});

struct StudyRow {
    double level = 0.0;   // noise intensity (fraction) or repetition count
    std::string pattern;  // empty for repetition studies
    std::size_t trials = 0;
    double mean_ed = 0.0;
    double std_ed = 0.0;
    double mean_re = 0.0;
    double std_re = 0.0;
};

struct StudyTable {
    std::string study;  // "noise" or "repetitions"
    Pipeline pipeline = Pipeline::classic;
    std::vector<StudyRow> rows;
};

struct NoiseStudyConfig {
    std::vector<double> intensities{0.02, 0.05, 0.10, 0.50, 0.75};
    std::vector<NoisePattern> patterns;  // empty: the four non-trivial patterns
    std::size_t trials = 100;
    double selection_fraction = 1.0;
    Pipeline pipeline = Pipeline::classic;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    SearchOptions search;
};

/// One row per (intensity, pattern), intensities outermost. Trial t of a
/// cell injects noise seeded by (seed, intensity index, pattern index, t).
/// Standard deviations are population deviations. The result does not
/// depend on `threads`.
StudyTable noise_robustness_study(const ExperimentSet& exp, const std::vector<CallpathTruth>& truths,
                                  const Coordinate& test_point, const NoiseStudyConfig& config);

struct RepetitionStudyConfig {
    Pipeline pipeline = Pipeline::classic;
    std::uint64_t seed = 0;
    std::size_t max_subsets = 64;
    unsigned threads = 1;
    SearchOptions search;
};

/// One row per k = 1..R over k-subsets of the repetition indices: all of
/// them when C(R, k) <= max_subsets, otherwise max_subsets distinct subsets
/// drawn from a stream seeded by (seed, k). Throws InvalidArgument if R < 2
/// or the call paths disagree on R.
StudyTable repetition_study(const ExperimentSet& exp, const std::vector<CallpathTruth>& truths,
                            const Coordinate& test_point, const RepetitionStudyConfig& config);

/// Every k-subset of {0, ..., n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t k);

std::string study_to_csv(const StudyTable& table);
std::string study_to_json(const StudyTable& table);
std::string study_to_text(const StudyTable& table);

}  // namespace nrpm
