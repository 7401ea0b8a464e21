#include <gtest/gtest.h>
#include <json.hpp>

#include "cli_runner.hpp"
#include "nrpm/benchgen.hpp"
#include "nrpm/evaluation.hpp"

using namespace nrpm;
namespace fs = std::filesystem;

namespace {

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, CostPrintsBudget) {
    const auto dir = cli::fresh_dir("cli_cost");
    const auto r = cli::run("cost --params 2", dir);
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "classic=125 swc=50\nsavings=60%\n");
    const auto m = cli::run("--format machine cost --params 3", dir);
    EXPECT_EQ(m.out, "classic=625 swc=250\n");
}

TEST(Cli, UsageErrorsExitTwo) {
    const auto dir = cli::fresh_dir("cli_usage");
    const auto four = cli::run("generate --params 4 --out " + q(dir / "g"), dir);
    EXPECT_EQ(four.code, 2);
    EXPECT_NE(four.err.find("m ≤ 3"), std::string::npos) << four.err;
    EXPECT_EQ(cli::run("generate --count 0 --out " + q(dir / "g"), dir).code, 2);
    EXPECT_EQ(cli::run("", dir).code, 2);
    EXPECT_EQ(cli::run("frobnicate", dir).code, 2);
    EXPECT_EQ(cli::run("cost --params two", dir).code, 2);
}

TEST(Cli, MissingFilesExitThree) {
    const auto dir = cli::fresh_dir("cli_io");
    EXPECT_EQ(cli::run("simulate --spec " + q(dir / "absent.json") + " --out " + q(dir / "e.json"), dir).code, 3);
    EXPECT_EQ(cli::run("model --experiment " + q(dir / "absent.json"), dir).code, 3);
}

TEST(Cli, GenerateIsDeterministic) {
    const auto dir = cli::fresh_dir("cli_generate");
    ASSERT_EQ(cli::run("--seed 7 --out " + q(dir / "a") + " generate --params 2 --count 3 --source", dir).code, 0);
    ASSERT_EQ(cli::run("--seed 7 --out " + q(dir / "b") + " generate --params 2 --count 3 --source", dir).code, 0);
    for (int i = 0; i < 3; ++i) {
        const auto spec = "spec_" + std::to_string(i) + ".json";
        const auto src = "bench_" + std::to_string(i) + ".cpp";
        ASSERT_TRUE(fs::exists(dir / "a" / spec));
        EXPECT_EQ(cli::slurp(dir / "a" / spec), cli::slurp(dir / "b" / spec));
        EXPECT_EQ(cli::slurp(dir / "a" / src), cli::slurp(dir / "b" / src));
        EXPECT_NO_THROW(validate(load_spec(dir / "a" / spec)));
    }
    EXPECT_FALSE(fs::exists(dir / "a" / "spec_3.json"));
}

TEST(Cli, SimulateInjectModelPipeline) {
    const auto dir = cli::fresh_dir("cli_pipeline");
    const auto spec = random_spec(31, 2, 2);
    save_spec(spec, dir / "spec.json");

    ASSERT_EQ(cli::run("--seed 1 --out " + q(dir / "exp.json") + " simulate --reps 5 --spec " + q(dir / "spec.json"),
                       dir)
                  .code,
              0);
    const auto exp = load_experiment(dir / "exp.json");
    for (const auto& cp : exp.callpaths()) {
        const auto* t = cp.find(Metric::time_s);
        EXPECT_EQ(t->repetitions(), 5u);
        for (std::size_t f = 0; f < t->points(); ++f) {
            EXPECT_EQ(t->at(f), std::vector<double>(5, t->at(f)[0]));
        }
    }

    ASSERT_EQ(cli::run("--seed 2 --out " + q(dir / "same.json") + " inject --intensity 0 --experiment " +
                           q(dir / "exp.json"),
                       dir)
                  .code,
              0);
    EXPECT_EQ(cli::slurp(dir / "same.json"), cli::slurp(dir / "exp.json"));

    const auto r = cli::run("--out " + q(dir / "report.json") + " model --pipeline swc --experiment " +
                                q(dir / "exp.json"),
                            dir);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = nlohmann::json::parse(cli::slurp(dir / "report.json"));
    const auto truths = callpath_truths(spec, next_test_point(spec.space));
    ASSERT_EQ(report["callpaths"].size(), truths.size());
    for (const auto& row : report["callpaths"]) {
        const auto name = row["callpath"].get<std::string>();
        const auto it = std::find_if(truths.begin(), truths.end(), [&](const auto& t) { return t.callpath == name; });
        ASSERT_NE(it, truths.end());
        for (std::size_t l = 0; l < spec.space.dimension(); ++l) {
            const auto& e = row["leading_exponents"][spec.space.names()[l]];
            EXPECT_EQ(e["i"].get<std::string>(), it->leading[l].i.to_string()) << name;
        }
    }
    EXPECT_EQ(cli::run("model --pipeline classic --experiment " + q(dir / "exp.json"), dir).code, 0);
}

TEST(Cli, MissingBytesIsModelingFailure) {
    const auto dir = cli::fresh_dir("cli_modeling");
    const auto exp = simulate_measurements(example_spec(default_space(2)), 2, 0.0, 1);
    std::vector<CallpathData> stripped = exp.callpaths();
    for (auto& cp : stripped) {
        cp.metrics.erase(Metric::bytes);
    }
    save_experiment(ExperimentSet(exp.space(), stripped), dir / "exp.json");
    const auto r = cli::run("model --experiment " + q(dir / "exp.json"), dir);
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("MPI_Bcast"), std::string::npos) << r.err;
}

TEST(Cli, StudyNoiseTableShape) {
    const auto dir = cli::fresh_dir("cli_study");
    save_spec(random_spec(4, 1, 1), dir / "spec.json");
    const auto r = cli::run("--format machine --seed 3 study-noise --pipeline classic --trials 2 "
                            "--intensities 2,5,10,50,75 --spec " + q(dir / "spec.json"),
                            dir);
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t uniform_rows = 0;
    std::size_t data_rows = 0;
    std::istringstream lines(r.out);
    for (std::string line; std::getline(lines, line);) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        ++data_rows;
        uniform_rows += line.find(",uniform,") != std::string::npos ? 1 : 0;
    }
    EXPECT_EQ(data_rows, 1u + 20u);  // header + 5 intensities x 4 patterns
    EXPECT_EQ(uniform_rows, 5u);
}

TEST(Cli, StudyOutputIndependentOfThreads) {
    const auto dir = cli::fresh_dir("cli_threads");
    save_spec(random_spec(6, 2, 1), dir / "spec.json");
    const std::string common = " study-noise --pipeline classic --trials 2 --intensities 5,50 --spec " +
                               q(dir / "spec.json");
    ASSERT_EQ(cli::run("--seed 9 --threads 1 --out " + q(dir / "t1.json") + common, dir).code, 0);
    ASSERT_EQ(cli::run("--seed 9 --threads 3 --out " + q(dir / "t3.json") + common, dir).code, 0);
    EXPECT_EQ(cli::slurp(dir / "t1.json"), cli::slurp(dir / "t3.json"));
}
