#include "nrpm/noise_lab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nrpm/error.hpp"
#include "nrpm/seeding.hpp"

namespace nrpm {

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::none:
            return "none";
        case NoiseKind::uniform:
            return "uniform";
        case NoiseKind::truncated_normal:
            return "truncated_normal";
        case NoiseKind::scaled_poisson:
            return "scaled_poisson";
        case NoiseKind::scaled_exponential:
            return "scaled_exponential";
    }
    return "none";
}

NoiseKind parse_noise_kind(std::string_view name) {
    for (auto kind : {NoiseKind::none, NoiseKind::uniform, NoiseKind::truncated_normal, NoiseKind::scaled_poisson,
                      NoiseKind::scaled_exponential}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ParseError("unknown noise pattern '" + std::string(name) + "'");
}

namespace {

double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

}  // namespace

double sample(const NoisePattern& pattern, std::mt19937_64& rng) {
    double s = 0.0;
    switch (pattern.kind) {
        case NoiseKind::none:
            return 0.0;
        case NoiseKind::uniform:
            s = unit(rng);
            break;
        case NoiseKind::truncated_normal: {
            std::normal_distribution<double> normal(0.0, 1.0);
            do {
                s = std::fabs(normal(rng));
            } while (s > 1.0);
            break;
        }
        case NoiseKind::scaled_poisson: {
            std::poisson_distribution<long long> poisson(pattern.lambda);
            s = static_cast<double>(poisson(rng)) / pattern.scale;
            break;
        }
        case NoiseKind::scaled_exponential: {
            std::exponential_distribution<double> exponential(pattern.lambda);
            s = exponential(rng) * pattern.scale;
            break;
        }
    }
    return std::clamp(s, 0.0, 1.0);
}

ExperimentSet inject(const ExperimentSet& exp, const NoiseConfig& config) {
    if (!(config.intensity >= 0.0) || !std::isfinite(config.intensity)) {
        throw InvalidArgument("noise intensity must be a non-negative fraction");
    }
    if (!(config.selection_fraction > 0.0 && config.selection_fraction <= 1.0)) {
        throw InvalidArgument("selection fraction must lie in (0, 1]");
    }
    if (config.intensity == 0.0 || config.pattern.kind == NoiseKind::none) {
        return exp;
    }
    std::vector<CallpathData> callpaths = exp.callpaths();
    for (std::size_t c = 0; c < callpaths.size(); ++c) {
        auto it = callpaths[c].metrics.find(Metric::time_s);
        if (it == callpaths[c].metrics.end()) {
            continue;
        }
        auto reps = it->second.data();
        for (std::size_t flat = 0; flat < reps.size(); ++flat) {
            for (std::size_t r = 0; r < reps[flat].size(); ++r) {
                std::mt19937_64 rng(derive_seed(config.seed, {c, flat, r}));
                const bool selected = unit(rng) < config.selection_fraction;
                const double s = sample(config.pattern, rng);
                if (selected) {
                    reps[flat][r] *= 1.0 + config.intensity * s;
                }
            }
        }
        it->second = MetricSeries(Metric::time_s, std::move(reps));
    }
    return ExperimentSet(exp.space(), std::move(callpaths));
}

}  // namespace nrpm
