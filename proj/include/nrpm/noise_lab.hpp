#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "nrpm/dataset.hpp"

namespace nrpm {

enum class NoiseKind { none, uniform, truncated_normal, scaled_poisson, scaled_exponential };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

/// Distribution of the noise sample s. Draws are clipped to [0, 1].
///
///   uniform             U(0, 1)
///   truncated_normal    |N(0, 1)|, redrawn while above 1
///   scaled_poisson      Poisson(lambda) / scale
///   scaled_exponential  Exp(rate = lambda) * scale
struct NoisePattern {
    NoiseKind kind = NoiseKind::none;
    double lambda = 1000.0;
    double scale = 1000.0;

    friend bool operator==(const NoisePattern&, const NoisePattern&) = default;
};

/// The four non-trivial patterns with their default parameters.
inline constexpr NoiseKind kNoisyKinds[] = {NoiseKind::uniform, NoiseKind::truncated_normal,
                                            NoiseKind::scaled_poisson, NoiseKind::scaled_exponential};

double sample(const NoisePattern& pattern, std::mt19937_64& rng);

struct NoiseConfig {
    NoisePattern pattern;
    /// Fraction of the measurement added at most (0.75 = up to +75%).
    double intensity = 0.0;
    /// Probability that a measurement is perturbed at all.
    double selection_fraction = 1.0;
    std::uint64_t seed = 0;
};

/// Copy of `exp` in which every selected time_s repetition y becomes
/// y * (1 + intensity * s). Each measurement draws from its own stream
/// derived from (seed, call path, grid point, repetition). Effort metrics
/// are copied unchanged. Throws InvalidArgument for a negative intensity or
/// a selection fraction outside (0, 1].
ExperimentSet inject(const ExperimentSet& exp, const NoiseConfig& config);

}  // namespace nrpm
