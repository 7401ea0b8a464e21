#include <set>

#include <gtest/gtest.h>

#include "nrpm/benchgen.hpp"
#include "nrpm/error.hpp"

using namespace nrpm;

namespace {

ExponentPair ep(std::int64_t num, std::int64_t den = 1, int j = 0) { return ExponentPair{Rational(num, den), j}; }

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

KernelSpec barrier_kernel() {
    KernelSpec k;
    k.name = "kernel_0";
    k.computation_terms = {ComputationTerm{ComplexityTerm{{ep(1), ep(0)}}, 1e-8}};
    k.mpi_op = MpiOp::barrier;
    k.alpha = 1e-6;
    k.beta = 1e-9;
    k.gamma = 1e-10;
    return k;
}

}  // namespace

TEST(DefaultSpace, Values) {
    const auto s3 = default_space(3);
    EXPECT_EQ(s3.names(), (std::vector<std::string>{"p", "n", "g"}));
    EXPECT_EQ(s3.values(0), (std::vector<double>{128, 256, 512, 1024, 2048}));
    EXPECT_EQ(s3.values(1), (std::vector<double>{8000, 16000, 24000, 32000, 40000}));
    EXPECT_EQ(s3.values(2), (std::vector<double>{32, 64, 96, 128, 160}));
    EXPECT_EQ(default_space(1).dimension(), 1u);
    EXPECT_THROW(default_space(4), InvalidArgument);
    EXPECT_THROW(default_space(0), InvalidArgument);
}

TEST(RandomSpec, Deterministic) {
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        EXPECT_EQ(random_spec(seed, 2, 4), random_spec(seed, 2, 4));
    }
    EXPECT_NE(random_spec(1, 2, 4), random_spec(2, 2, 4));
}

TEST(RandomSpec, AlwaysValid) {
    for (std::size_t m = 1; m <= 3; ++m) {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto spec = random_spec(seed, m, 3);
            EXPECT_NO_THROW(validate(spec)) << "seed " << seed << " m " << m;
            ASSERT_EQ(spec.kernels.size(), 3u);
            for (const auto& k : spec.kernels) {
                EXPECT_LE(k.computation_terms.size(), m);
                EXPECT_FALSE(k.computation_terms.empty());
            }
        }
    }
}

TEST(RandomSpec, RespectsConfigRestrictions) {
    GeneratorConfig config;
    config.exponents = ExponentSets{{Rational(0), Rational(1)}, {0}};
    config.ops = {MpiOp::send};
    config.communication_probability = 1.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto spec = random_spec(seed, 2, 2, config);
        for (const auto& k : spec.kernels) {
            ASSERT_TRUE(k.mpi_op.has_value());
            EXPECT_EQ(*k.mpi_op, MpiOp::send);
            for (const auto& t : k.computation_terms) {
                for (const auto& e : t.term.exponents) {
                    EXPECT_EQ(e.j, 0);
                    EXPECT_TRUE(e.i == Rational(0) || e.i == Rational(1));
                }
            }
        }
    }
    config.communication_probability = 0.0;
    for (const auto& k : random_spec(3, 2, 5, config).kernels) {
        EXPECT_FALSE(k.mpi_op.has_value());
    }
}

TEST(RandomSpec, RejectsBadArguments) {
    EXPECT_THROW(random_spec(1, 0, 1), InvalidArgument);
    EXPECT_THROW(random_spec(1, 4, 1), InvalidArgument);
    EXPECT_THROW(random_spec(1, 2, 0), InvalidArgument);
    GeneratorConfig config;
    config.alpha = {2.0, 1.0};
    EXPECT_THROW(random_spec(1, 2, 1, config), InvalidArgument);
}

TEST(Validate, RejectsBrokenKernels) {
    const auto good = example_spec(default_space(2));
    EXPECT_NO_THROW(validate(good));

    auto neg = good;
    neg.kernels[0].computation_terms[0].coefficient = -1.0;
    EXPECT_THROW(validate(neg), ValidationError);

    auto lonely_op = good;
    lonely_op.kernels[0].message_elems_term.reset();
    EXPECT_THROW(validate(lonely_op), ValidationError);

    auto elem = good;
    elem.kernels[0].elem_size = 3;
    EXPECT_THROW(validate(elem), ValidationError);

    auto clash = good;  // n appears with two different exponent pairs
    clash.kernels[0].computation_terms[1].term.exponents[1] = ep(2);
    EXPECT_THROW(validate(clash), ValidationError);

    auto barrier = BenchmarkSpec{0, default_space(2), {barrier_kernel()}};
    barrier.kernels[0].message_elems_term = ComplexityTerm{{ep(1), ep(0)}};
    EXPECT_THROW(validate(barrier), ValidationError);

    auto no_p = BenchmarkSpec{0, ParameterSpace({"n"}, {{1, 2, 3}}), {good.kernels[0]}};
    no_p.kernels[0].computation_terms = {ComputationTerm{ComplexityTerm{{ep(1)}}, 1.0}};
    no_p.kernels[0].message_elems_term = ComplexityTerm{{ep(1)}};
    EXPECT_THROW(validate(no_p), ValidationError);
}

TEST(ExampleKernel, GroundTruthAndCounts) {
    const auto spec = example_spec(default_space(2));
    const auto truth = ground_truth(spec);
    ASSERT_EQ(truth.size(), 1u);
    EXPECT_EQ(truth[0].computation, (Exponents{ep(1), ep(1)}));
    ASSERT_TRUE(truth[0].communication.has_value());
    EXPECT_EQ(*truth[0].communication, (Exponents{ep(1), ep(1)}));

    const auto& k = spec.kernels[0];
    const Coordinate at{{4, 10}};
    EXPECT_EQ(message_elements_at(k, at), 40.0);
    EXPECT_EQ(bytes_at(k, at, 0), 160.0);
    // outer n iterations plus n * p inner iterations, 3 blocks each
    EXPECT_EQ(basic_blocks_at(k, at), 3.0 * (10 + 40));
    EXPECT_EQ(computation_callpath(k), "benchmark_frame->kernel_0");
    EXPECT_EQ(communication_callpath(k), "benchmark_frame->kernel_0->MPI_Bcast");
}

TEST(ExampleKernel, CommunicationTimeFollowsCostModel) {
    const auto spec = example_spec(default_space(2));
    const auto& k = spec.kernels[0];
    const Coordinate at{{4, 10}};
    EXPECT_DOUBLE_EQ(communication_time_at(k, at, 0), k.alpha * 2.0 + k.beta * 160.0);
}

TEST(BarrierKernel, TruthIsLogRanks) {
    const BenchmarkSpec spec{1, default_space(2), {barrier_kernel()}};
    const auto truth = ground_truth(spec);
    EXPECT_EQ(*truth[0].communication, (Exponents{ep(0, 1, 1), ep(0)}));
    const auto src = emit_source(spec);
    EXPECT_EQ(count_of(src, "MPI_Barrier(MPI_COMM_WORLD);"), 1u);
    EXPECT_EQ(count_of(src, "buffer"), 0u);
}

TEST(Simulation, EffortMetricsHaveNoSpread) {
    const auto spec = random_spec(4, 2, 3);
    const auto exp = simulate_measurements(spec, 5, 0.5, 11);
    bool time_spread = false;
    for (const auto& cp : exp.callpaths()) {
        for (const auto& [metric, series] : cp.metrics) {
            for (std::size_t k = 0; k < series.points(); ++k) {
                const auto& reps = series.at(k);
                const bool flat = std::set<double>(reps.begin(), reps.end()).size() == 1;
                if (metric == Metric::time_s) {
                    time_spread = time_spread || !flat;
                } else {
                    EXPECT_TRUE(flat);
                }
            }
        }
    }
    EXPECT_TRUE(time_spread);
}

TEST(Simulation, NoiseFreeTimesMatchFormulas) {
    const auto spec = example_spec(default_space(2));
    const auto exp = simulate_measurements(spec, 2, 0.0, 3);
    const auto& k = spec.kernels[0];
    const auto comp = exp.find_callpath(computation_callpath(k));
    const auto comm = exp.find_callpath(communication_callpath(k));
    ASSERT_TRUE(comp && comm);
    for (std::size_t f = 0; f < exp.space().grid_size(); ++f) {
        const auto at = exp.space().coordinate(f);
        EXPECT_EQ(exp.callpaths()[*comp].find(Metric::time_s)->at(f)[0], computation_time_at(k, at));
        EXPECT_EQ(exp.callpaths()[*comm].find(Metric::time_s)->at(f)[1], communication_time_at(k, at, 0));
        EXPECT_EQ(exp.callpaths()[*comm].find(Metric::bytes)->at(f)[0], bytes_at(k, at, 0));
    }
}

TEST(Simulation, BaselineNoiseIsBoundedAndSeeded) {
    const auto spec = example_spec(default_space(2));
    const auto clean = simulate_measurements(spec, 4, 0.0, 3);
    const auto noisy = simulate_measurements(spec, 4, 0.5, 3);
    EXPECT_EQ(noisy, simulate_measurements(spec, 4, 0.5, 3));
    EXPECT_NE(noisy, simulate_measurements(spec, 4, 0.5, 4));
    for (std::size_t c = 0; c < clean.callpaths().size(); ++c) {
        const auto* a = clean.callpaths()[c].find(Metric::time_s);
        const auto* b = noisy.callpaths()[c].find(Metric::time_s);
        for (std::size_t f = 0; f < a->points(); ++f) {
            for (std::size_t r = 0; r < 4; ++r) {
                EXPECT_GE(b->at(f)[r], a->at(f)[r]);
                EXPECT_LT(b->at(f)[r], 1.5 * a->at(f)[r]);
            }
        }
    }
}

// Scaling every coefficient scales time but leaves effort and truth alone.
TEST(Simulation, CoefficientRescalingInvariance) {
    const auto spec = random_spec(12, 2, 2);
    auto scaled = spec;
    for (auto& k : scaled.kernels) {
        for (auto& t : k.computation_terms) {
            t.coefficient *= 8.0;
        }
        k.alpha *= 8.0;
        k.beta *= 8.0;
        k.gamma *= 8.0;
    }
    EXPECT_EQ(ground_truth(spec).size(), ground_truth(scaled).size());
    for (std::size_t i = 0; i < spec.kernels.size(); ++i) {
        EXPECT_EQ(ground_truth(spec)[i].computation, ground_truth(scaled)[i].computation);
        EXPECT_EQ(ground_truth(spec)[i].communication, ground_truth(scaled)[i].communication);
    }
    const auto a = simulate_measurements(spec, 1, 0.0, 0);
    const auto b = simulate_measurements(scaled, 1, 0.0, 0);
    for (std::size_t c = 0; c < a.callpaths().size(); ++c) {
        for (const auto& [metric, series] : a.callpaths()[c].metrics) {
            const auto* other = b.callpaths()[c].find(metric);
            for (std::size_t f = 0; f < series.points(); ++f) {
                if (metric == Metric::time_s) {
                    EXPECT_DOUBLE_EQ(other->at(f)[0], 8.0 * series.at(f)[0]);
                } else {
                    EXPECT_EQ(other->at(f)[0], series.at(f)[0]);
                }
            }
        }
    }
}

TEST(EmitSource, ExampleKernelText) {
    const auto spec = example_spec(default_space(2));
    const auto src = emit_source(spec);
    EXPECT_EQ(src, emit_source(spec));
    EXPECT_EQ(src.rfind("// GROUND_TRUTH {", 0), 0u);
    EXPECT_EQ(count_of(src, "MPI_Bcast("), 1u);
    EXPECT_NE(src.find("i0 < n;"), std::string::npos);
    EXPECT_NE(src.find("i1 < p;"), std::string::npos);
    EXPECT_NE(src.find("const long count = p * n;"), std::string::npos);
    EXPECT_NE(src.find("benchmark_frame(p, n, rank, ranks);"), std::string::npos);
}

TEST(EmitSource, OneCallPerCommunicatingKernel) {
    const auto spec = random_spec(21, 2, 5);
    const auto src = emit_source(spec);
    std::size_t comm = 0;
    for (const auto& k : spec.kernels) {
        comm += k.mpi_op.has_value() ? 1 : 0;
        EXPECT_NE(src.find("void " + k.name + "("), std::string::npos);
    }
    EXPECT_EQ(count_of(src, "    MPI_") - count_of(src, "    MPI_Comm_") - count_of(src, "    MPI_Init") -
                  count_of(src, "    MPI_Finalize"),
              comm);
}

TEST(SpecJson, RoundTrip) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto spec = random_spec(seed, 1 + seed % 3, 3);
        EXPECT_EQ(spec_from_json(spec_to_json(spec)), spec);
    }
    const auto ex = example_spec(default_space(2));
    EXPECT_EQ(spec_from_json(spec_to_json(ex)), ex);
    const auto path = std::filesystem::temp_directory_path() / "nrpm_spec_roundtrip.json";
    save_spec(ex, path);
    EXPECT_EQ(load_spec(path), ex);
}

TEST(SpecJson, RejectsGarbage) {
    EXPECT_THROW(spec_from_json("{}"), ParseError);
    EXPECT_THROW(spec_from_json("not json"), ParseError);
}
