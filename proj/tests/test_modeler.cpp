#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nrpm/benchgen.hpp"
#include "nrpm/error.hpp"
#include "nrpm/modeler.hpp"

using namespace nrpm;

namespace {

ExponentPair ep(std::int64_t num, std::int64_t den, int j) { return ExponentPair{Rational(num, den), j}; }

Skeleton linear_p() {
    return Skeleton::with_constant({"p"}, {{BasisFunction{{ep(1, 1, 0)}, std::nullopt}, CoefficientLabel::generic}});
}

Skeleton constant_p() { return Skeleton::with_constant({"p"}, {}); }

std::vector<double> grid_of(const ParameterSpace& space, const PmnfModel& model) {
    std::vector<double> out;
    for (std::size_t k = 0; k < space.grid_size(); ++k) {
        out.push_back(evaluate(model, space.coordinate(k)));
    }
    return out;
}

PmnfModel random_single(std::mt19937_64& rng, const std::string& name) {
    const auto sets = default_exponent_sets();
    std::uniform_int_distribution<std::size_t> pick_i(0, sets.monomial.size() - 1);
    std::uniform_int_distribution<int> pick_j(0, 2);
    std::uniform_real_distribution<double> coef(0.1, 10.0);
    ExponentPair e{sets.monomial[pick_i(rng)], pick_j(rng)};
    if (e.is_zero()) {
        e.j = 1;
    }
    return PmnfModel({name}, coef(rng), {Term{coef(rng), BasisFunction{{e}, std::nullopt}}});
}

std::vector<double> with_noise(std::vector<double> v, std::mt19937_64& rng, double level) {
    std::uniform_real_distribution<double> u(-level, level);
    for (auto& x : v) {
        x *= 1.0 + u(rng);
    }
    return v;
}

}  // namespace

TEST(Fit, ExactLine) {
    const std::vector<Sample> data{{Coordinate{{1}}, 3.5}, {Coordinate{{2}}, 4.0}, {Coordinate{{4}}, 5.0}};
    const auto fit = fit_coefficients(linear_p(), data);
    EXPECT_NEAR(fit.coefficients[0], 3.0, 1e-12);
    EXPECT_NEAR(fit.coefficients[1], 0.5, 1e-12);
    EXPECT_NEAR(fit.rss, 0.0, 1e-20);
}

TEST(Fit, ConstantIsMean) {
    const std::vector<Sample> data{{Coordinate{{1}}, 7.0}, {Coordinate{{2}}, 9.0}};
    const auto fit = fit_coefficients(constant_p(), data);
    EXPECT_DOUBLE_EQ(fit.coefficients[0], 8.0);
    EXPECT_DOUBLE_EQ(fit.rss, 2.0);
}

TEST(Fit, RankDeficientGivesMinimumNorm) {
    // All samples at p = 2: c0 + 2 c1 = 5 with minimal c0^2 + c1^2 is (1, 2).
    const std::vector<Sample> data{{Coordinate{{2}}, 5.0}, {Coordinate{{2}}, 5.0}};
    const auto fit = fit_coefficients(linear_p(), data);
    EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-12);
    EXPECT_NEAR(fit.coefficients[1], 2.0, 1e-12);
}

TEST(Fit, TooFewSamples) {
    const std::vector<Sample> data{{Coordinate{{2}}, 5.0}};
    EXPECT_THROW(fit_coefficients(linear_p(), data), ModelingError);
    EXPECT_THROW(cv_score(constant_p(), data), ModelingError);
}

TEST(CrossValidation, ConstantOnTwoPoints) {
    const std::vector<Sample> data{{Coordinate{{1}}, 0.0}, {Coordinate{{2}}, 2.0}};
    EXPECT_DOUBLE_EQ(cv_score(constant_p(), data), 1.0);
}

TEST(CrossValidation, ExactModelScoresZero) {
    std::vector<Sample> data;
    for (double p : {2.0, 4.0, 8.0, 16.0}) {
        data.push_back({Coordinate{{p}}, 1.0 + 3.0 * p});
    }
    EXPECT_NEAR(cv_score(linear_p(), data), 0.0, 1e-14);
    const auto both = fit_and_score(linear_p(), data);
    EXPECT_NEAR(both.coefficients[1], 3.0, 1e-12);
}

TEST(CrossValidation, ScoreStaysInUnitInterval) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> y(-100.0, 100.0);
    for (int round = 0; round < 200; ++round) {
        std::vector<Sample> data;
        for (double p : {1.0, 2.0, 3.0, 5.0, 8.0}) {
            data.push_back({Coordinate{{p}}, round % 2 ? y(rng) : std::fabs(y(rng))});
        }
        const double cv = cv_score(linear_p(), data);
        EXPECT_GE(cv, 0.0);
        EXPECT_LE(cv, 1.0);
    }
}

TEST(Hypotheses, SixtyPerParameter) {
    const auto hyps = single_param_hypotheses({"p", "n"}, 1);
    ASSERT_EQ(hyps.size(), 60u);
    EXPECT_EQ(hyps[0].skeleton.size(), 1u);
    for (std::size_t k = 1; k < hyps.size(); ++k) {
        ASSERT_EQ(hyps[k].skeleton.size(), 2u);
        EXPECT_TRUE(hyps[k].skeleton.basis()[1].exponents[0].is_zero());
        EXPECT_FALSE(hyps[k].skeleton.basis()[1].exponents[1].is_zero());
    }
}

TEST(SelectBest, TiesGoToTheSimplerSkeleton) {
    const std::vector<Skeleton> cands{linear_p(), constant_p()};
    const std::vector<double> scores{0.1, 0.1 + 1e-14};
    EXPECT_EQ(select_best(cands, scores), 1u);
    const std::vector<double> clear{0.05, 0.1};
    EXPECT_EQ(select_best(cands, clear), 0u);
    EXPECT_TRUE(tie_break_less(constant_p(), linear_p()));
    EXPECT_FALSE(tie_break_less(linear_p(), constant_p()));
}

TEST(SearchSingle, RecoversKnownModel) {
    const ParameterSpace space({"p"}, {{128, 256, 512, 1024, 2048}});
    const PmnfModel truth({"p"}, 2.0, {Term{3.0, BasisFunction{{ep(3, 4, 1)}, std::nullopt}}});
    const auto grid = grid_of(space, truth);
    const auto data = samples_from_grid(space, grid);
    const auto found = search_single(space, data, 0);
    EXPECT_EQ(leading_exponents(found), leading_exponents(truth));
    ASSERT_EQ(found.terms().size(), 1u);
    EXPECT_NEAR(found.terms()[0].coefficient, 3.0, 1e-9);
    EXPECT_NEAR(found.constant(), 2.0, 1e-6);
}

TEST(SearchSingle, ConstantData) {
    const ParameterSpace space({"p"}, {{2, 4, 8, 16, 32}});
    const std::vector<double> grid(5, 4.25);
    const auto found = search_model(space, grid);
    EXPECT_TRUE(found.terms().empty());
    EXPECT_DOUBLE_EQ(found.constant(), 4.25);
}

// The search and the brute-force oracle pick the same model, noisy or not.
TEST(SearchSingle, MatchesOracle) {
    std::mt19937_64 rng(17);
    const ParameterSpace space({"p"}, {{128, 256, 512, 1024, 2048}});
    for (int round = 0; round < 40; ++round) {
        auto grid = grid_of(space, random_single(rng, "p"));
        if (round % 2) {
            grid = with_noise(grid, rng, 0.2);
        }
        const auto found = search_model(space, grid);
        const auto oracle = exhaustive_oracle(space, grid, OracleFamily::single);
        EXPECT_EQ(skeleton_of(found), skeleton_of(oracle)) << render(found) << " vs " << render(oracle);
    }
}

TEST(SearchMulti, RecoversProductTerm) {
    const auto space = default_space(2);
    const auto truth = parse_model("1 + 0.5 * p * n", space.names());
    const auto found = search_model(space, grid_of(space, truth));
    EXPECT_EQ(skeleton_of(found), skeleton_of(truth));
    EXPECT_NEAR(found.terms()[0].coefficient, 0.5, 1e-9);
}

TEST(SearchMulti, RecoversNestedLoopShape) {
    // n * (a + b * p): two terms sharing the n factor.
    const auto space = default_space(2);
    const auto truth = parse_model("2e-8 * n + 5e-9 * p * n", space.names());
    const auto found = search_model(space, grid_of(space, truth));
    EXPECT_EQ(leading_exponents(found), leading_exponents(truth));
    EXPECT_EQ(found.terms().size(), 2u) << render(found);
}

TEST(SearchMulti, MatchesOracle) {
    std::mt19937_64 rng(23);
    const auto space = default_space(2);
    for (int round = 0; round < 12; ++round) {
        const auto a = random_single(rng, "p");
        const auto b = random_single(rng, "n");
        const auto ea = a.terms()[0].basis.exponents[0];
        const auto eb = b.terms()[0].basis.exponents[0];
        std::vector<Term> terms;
        if (round % 3 == 0) {
            terms.push_back(Term{1.5, BasisFunction{{ea, eb}, std::nullopt}});
        } else {
            terms.push_back(Term{1.5, BasisFunction{{ea, ep(0, 1, 0)}, std::nullopt}});
            terms.push_back(Term{0.7, BasisFunction{{ep(0, 1, 0), eb}, std::nullopt}});
        }
        auto grid = grid_of(space, PmnfModel(space.names(), 3.0, terms));
        if (round % 2) {
            grid = with_noise(grid, rng, 0.1);
        }
        const auto found = search_model(space, grid);
        const auto oracle = exhaustive_oracle(space, grid, OracleFamily::multi_restricted);
        EXPECT_EQ(skeleton_of(found), skeleton_of(oracle)) << render(found) << " vs " << render(oracle);
    }
}

TEST(Consensus, ConstantParameterYieldsNoTerm) {
    const auto space = default_space(2);
    const auto grid = grid_of(space, parse_model("4 + p^2", space.names()));
    EXPECT_TRUE(consensus_terms(space, grid, 1).empty());
    const auto p_terms = consensus_terms(space, grid, 0);
    ASSERT_EQ(p_terms.size(), 1u);
    EXPECT_EQ(p_terms[0].exponents, ep(2, 1, 0));
}

TEST(Combination, CandidateCounts) {
    const ParameterTerm tp{0, ep(1, 1, 0), 0.0};
    const ParameterTerm tn{1, ep(1, 1, 1), 0.0};
    const ParameterTerm tg{2, ep(1, 2, 0), 0.0};
    // m = 2: {p}, {n}, {pn}, {p, n}, {p, pn}, {n, pn}, {}  -> 7 with the constant model
    EXPECT_EQ(combination_candidates({"p", "n"}, {{tp}, {tn}}).size(), 7u);
    EXPECT_EQ(combination_candidates({"p", "n", "g"}, {{tp}, {tn}, {tg}}).size(), 64u);
}

TEST(FitSkeleton, KeepsStructure) {
    const ParameterSpace space({"p"}, {{2, 4, 8, 16, 32}});
    const std::vector<double> grid(5, 1.0);
    const auto model = fit_skeleton_to_time(linear_p(), samples_from_grid(space, grid));
    EXPECT_EQ(skeleton_of(model), linear_p());
}
