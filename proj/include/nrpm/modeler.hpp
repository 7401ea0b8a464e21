#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nrpm/dataset.hpp"
#include "nrpm/pmnf.hpp"

namespace nrpm {

/// One aggregated measurement.
struct Sample {
    Coordinate at;
    double value = 0.0;
};

std::vector<Sample> samples_from_grid(const ParameterSpace& space, std::span<const double> grid_values);

enum class HypothesisOrigin { single_param, multi_param_candidate, prior };

struct Hypothesis {
    Skeleton skeleton;
    HypothesisOrigin origin = HypothesisOrigin::single_param;
};

struct LinearFit {
    std::vector<double> coefficients;
    double rss = 0.0;
};

struct FitResult {
    std::vector<double> coefficients;
    double rss = 0.0;
    double cv_score = 0.0;
};

struct SearchOptions {
    ExponentSets exponents = default_exponent_sets();
    /// Best single-parameter terms kept per parameter for the combination step.
    std::size_t top_k = 1;
};

/// Scores closer than this to the minimum count as ties and are resolved by
/// tie_break_less.
inline constexpr double kScoreTieTolerance = 1e-12;

/// Ordinary least squares on the evaluate_basis design matrix. Rank-deficient
/// systems yield the minimum-norm solution. Throws ModelingError if there are
/// fewer samples than basis functions.
LinearFit fit_coefficients(const Skeleton& skel, std::span<const Sample> data);

/// Leave-one-out cross-validation: mean over held-out points of the symmetric
/// relative error |yhat - y| / (|y| + |yhat|) (0 when both are 0). Always in
/// [0, 1]. Throws ModelingError unless |data| > basis count.
double cv_score(const Skeleton& skel, std::span<const Sample> data);

FitResult fit_and_score(const Skeleton& skel, std::span<const Sample> data);

/// Total order used to break score ties: basis count, sum of monomial
/// exponents, sum of log exponents, then the sorted basis signatures.
bool tie_break_less(const Skeleton& a, const Skeleton& b);

/// Index of the winner among `candidates` given their scores.
std::size_t select_best(std::span<const Skeleton> candidates, std::span<const double> scores);

/// The constant skeleton plus {1, x^i log2^j(x)} for every (i, j) != (0, 0).
std::vector<Hypothesis> single_param_hypotheses(const std::vector<std::string>& names, std::size_t param,
                                                const ExponentSets& sets = default_exponent_sets());

/// Best single-parameter model for samples in which only `param` varies.
PmnfModel search_single(const ParameterSpace& space, std::span<const Sample> data, std::size_t param,
                        const SearchOptions& options = {});

/// Per-parameter term selected by consensus over all grid lines.
struct ParameterTerm {
    std::size_t param = 0;
    ExponentPair exponents;
    double mean_cv = 0.0;
};

/// Step 1 of the multi-parameter search: for parameter `param`, the top-k
/// single-parameter hypotheses ranked by mean cv_score over all grid lines
/// along that parameter. A constant winner yields no entry.
std::vector<ParameterTerm> consensus_terms(const ParameterSpace& space, std::span<const double> grid_values,
                                           std::size_t param, const SearchOptions& options = {});

/// Step 2: every skeleton with at most m + 1 bases (constant included) whose
/// non-constant bases are products of the chosen terms over non-empty
/// parameter subsets. At most one term per parameter appears in a product.
std::vector<Skeleton> combination_candidates(const std::vector<std::string>& names,
                                             const std::vector<std::vector<ParameterTerm>>& terms);

/// Hierarchical multi-parameter search over the full grid (m in {2, 3}).
PmnfModel search_multi(const ParameterSpace& space, std::span<const double> grid_values,
                       const SearchOptions& options = {});

/// search_single for m == 1, search_multi otherwise.
PmnfModel search_model(const ParameterSpace& space, std::span<const double> grid_values,
                       const SearchOptions& options = {});

/// Binds the least-squares coefficients of `skel` fitted to runtime. The
/// structure is that of the skeleton, whatever the data.
PmnfModel fit_skeleton_to_time(const Skeleton& skel, std::span<const Sample> time_data);

enum class OracleFamily { single, multi_restricted };

/// Brute-force reference for the searches, written independently of them:
/// explicit leave-one-out refits with an SVD solver and explicit enumeration
/// of the candidate family. Throws InvalidArgument if the family exceeds
/// 7 * 60^2 candidates.
PmnfModel exhaustive_oracle(const ParameterSpace& space, std::span<const double> grid_values,
                            OracleFamily family, const SearchOptions& options = {});

}  // namespace nrpm
