#include <gtest/gtest.h>

#include "nrpm/benchgen.hpp"
#include "nrpm/error.hpp"
#include "nrpm/noise_lab.hpp"

using namespace nrpm;

TEST(NoiseKind, Names) {
    for (NoiseKind k : {NoiseKind::none, NoiseKind::uniform, NoiseKind::truncated_normal, NoiseKind::scaled_poisson,
                        NoiseKind::scaled_exponential}) {
        EXPECT_EQ(parse_noise_kind(to_string(k)), k);
    }
    EXPECT_THROW(parse_noise_kind("pink"), ParseError);
}

TEST(Sample, NoneIsZero) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(sample(NoisePattern{NoiseKind::none}, rng), 0.0);
    }
}

TEST(Sample, AllPatternsStayInUnitInterval) {
    for (NoiseKind kind : kNoisyKinds) {
        std::mt19937_64 rng(2);
        double lo = 1.0;
        double hi = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double s = sample(NoisePattern{kind}, rng);
            ASSERT_GE(s, 0.0);
            ASSERT_LE(s, 1.0);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        EXPECT_LT(lo, hi) << to_string(kind);
    }
}

TEST(Sample, UniformMean) {
    std::mt19937_64 rng(3);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        sum += sample(NoisePattern{NoiseKind::uniform}, rng);
    }
    EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Sample, ScaledPoissonCentresOnLambdaOverScale) {
    std::mt19937_64 rng(4);
    const NoisePattern pattern{NoiseKind::scaled_poisson, 500.0, 1000.0};
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        sum += sample(pattern, rng);
    }
    EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

class InjectTest : public ::testing::Test {
protected:
    ExperimentSet exp = simulate_measurements(random_spec(3, 2, 3), 4, 0.0, 5);
};

TEST_F(InjectTest, ZeroIntensityAndNonePatternAreIdentity) {
    EXPECT_EQ(inject(exp, NoiseConfig{NoisePattern{NoiseKind::uniform}, 0.0, 1.0, 1}), exp);
    EXPECT_EQ(inject(exp, NoiseConfig{NoisePattern{NoiseKind::none}, 0.5, 1.0, 1}), exp);
}

TEST_F(InjectTest, BoundsAndEffortMetrics) {
    for (NoiseKind kind : kNoisyKinds) {
        const auto noisy = inject(exp, NoiseConfig{NoisePattern{kind}, 0.75, 1.0, 7});
        ASSERT_EQ(noisy.callpaths().size(), exp.callpaths().size());
        for (std::size_t c = 0; c < exp.callpaths().size(); ++c) {
            for (const auto& [metric, series] : exp.callpaths()[c].metrics) {
                const auto* other = noisy.callpaths()[c].find(metric);
                if (metric != Metric::time_s) {
                    EXPECT_EQ(*other, series);
                    continue;
                }
                for (std::size_t f = 0; f < series.points(); ++f) {
                    for (std::size_t r = 0; r < series.repetitions(); ++r) {
                        const double y = series.at(f)[r];
                        EXPECT_GE(other->at(f)[r], y);
                        EXPECT_LE(other->at(f)[r], 1.75 * y * (1 + 1e-15));
                    }
                }
            }
        }
    }
}

TEST_F(InjectTest, DeterministicPerSeed) {
    const NoiseConfig config{NoisePattern{NoiseKind::truncated_normal}, 0.1, 1.0, 42};
    EXPECT_EQ(inject(exp, config), inject(exp, config));
    auto other = config;
    other.seed = 43;
    EXPECT_NE(inject(exp, config), inject(exp, other));
}

TEST_F(InjectTest, SelectionFractionLeavesSomeUntouched) {
    const auto noisy = inject(exp, NoiseConfig{NoisePattern{NoiseKind::uniform}, 0.5, 0.3, 9});
    std::size_t same = 0;
    std::size_t total = 0;
    for (std::size_t c = 0; c < exp.callpaths().size(); ++c) {
        const auto* a = exp.callpaths()[c].find(Metric::time_s);
        const auto* b = noisy.callpaths()[c].find(Metric::time_s);
        for (std::size_t f = 0; f < a->points(); ++f) {
            for (std::size_t r = 0; r < a->repetitions(); ++r) {
                same += a->at(f)[r] == b->at(f)[r] ? 1 : 0;
                ++total;
            }
        }
    }
    const double untouched = static_cast<double>(same) / static_cast<double>(total);
    EXPECT_NEAR(untouched, 0.7, 0.1);
}

TEST_F(InjectTest, RejectsBadArguments) {
    EXPECT_THROW(inject(exp, NoiseConfig{NoisePattern{NoiseKind::uniform}, -0.1, 1.0, 1}), InvalidArgument);
    EXPECT_THROW(inject(exp, NoiseConfig{NoisePattern{NoiseKind::uniform}, 0.1, 0.0, 1}), InvalidArgument);
    EXPECT_THROW(inject(exp, NoiseConfig{NoisePattern{NoiseKind::uniform}, 0.1, 1.5, 1}), InvalidArgument);
}
