#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include <json.hpp>

#include "nrpm/benchgen.hpp"
#include "nrpm/dataset.hpp"
#include "nrpm/error.hpp"

using namespace nrpm;

namespace {

ParameterSpace space2() {
    return ParameterSpace({"p", "n"}, {{2, 4, 8}, {10, 20}});
}

ExperimentSet small_experiment(double fill = 1.0) {
    const auto space = space2();
    std::vector<std::vector<double>> time(space.grid_size(), std::vector<double>{fill, fill + 1, fill + 2});
    std::vector<std::vector<double>> bytes(space.grid_size(), std::vector<double>{40, 40, 40});
    CallpathData comp{{"main->work", CallpathKind::computation, std::nullopt}, {}};
    comp.metrics.emplace(Metric::time_s, MetricSeries(Metric::time_s, time));
    CallpathData comm{{"main->MPI_Bcast", CallpathKind::communication, MpiOp::broadcast}, {}};
    comm.metrics.emplace(Metric::time_s, MetricSeries(Metric::time_s, time));
    comm.metrics.emplace(Metric::bytes, MetricSeries(Metric::bytes, bytes));
    return ExperimentSet(space, {comp, comm});
}

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "nrpm_test_dataset";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(ParameterSpace, RejectsInvalidDefinitions) {
    EXPECT_THROW(ParameterSpace({}, {}), ValidationError);
    EXPECT_THROW(ParameterSpace({"p", "p"}, {{1, 2}, {1, 2}}), ValidationError);
    EXPECT_THROW(ParameterSpace({""}, {{1, 2}}), ValidationError);
    EXPECT_THROW(ParameterSpace({"p"}, {{2}}), ValidationError);
    EXPECT_THROW(ParameterSpace({"p"}, {{2, 2}}), ValidationError);
    EXPECT_THROW(ParameterSpace({"p"}, {{4, 2}}), ValidationError);
    EXPECT_THROW(ParameterSpace({"p"}, {{0.5, 2}}), ValidationError);
}

TEST(ParameterSpace, GridAddressingFirstParameterSlowest) {
    const auto s = space2();
    EXPECT_EQ(s.grid_size(), 6u);
    EXPECT_EQ(s.coordinate(0).values, (std::vector<double>{2, 10}));
    EXPECT_EQ(s.coordinate(1).values, (std::vector<double>{2, 20}));
    EXPECT_EQ(s.coordinate(5).values, (std::vector<double>{8, 20}));
    for (std::size_t k = 0; k < s.grid_size(); ++k) {
        EXPECT_EQ(s.flat_index(s.coordinate(k)), k);
    }
    EXPECT_FALSE(s.flat_index(Coordinate{{3, 10}}).has_value());
    EXPECT_EQ(s.index_of("n"), 1u);
    EXPECT_FALSE(s.index_of("q").has_value());
}

TEST(ParameterSpace, LinesAlongEachParameter) {
    const auto s = space2();
    EXPECT_EQ(s.line_through(1, 0), (std::vector<std::size_t>{1, 3, 5}));
    EXPECT_EQ(s.line_through(4, 1), (std::vector<std::size_t>{4, 5}));
    EXPECT_EQ(s.line_anchors(0).size(), 2u);
    EXPECT_EQ(s.line_anchors(1).size(), 3u);
}

TEST(MetricSeries, RejectsRaggedNegativeAndNonFinite) {
    EXPECT_THROW(MetricSeries(Metric::time_s, {{1, 2}, {1}}), ValidationError);
    EXPECT_THROW(MetricSeries(Metric::time_s, {{}}), ValidationError);
    try {
        MetricSeries(Metric::time_s, {{1, -2}});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("negative measurement"), std::string::npos);
    }
    EXPECT_THROW(MetricSeries(Metric::time_s, {{1, std::nan("")}}), ValidationError);
}

TEST(ExperimentSet, ValidatesCallpaths) {
    const auto space = space2();
    std::vector<std::vector<double>> time(space.grid_size(), std::vector<double>{1});
    CallpathData no_op{{"x", CallpathKind::communication, std::nullopt}, {}};
    no_op.metrics.emplace(Metric::time_s, MetricSeries(Metric::time_s, time));
    EXPECT_THROW(ExperimentSet(space, {no_op}), ValidationError);

    CallpathData short_series{{"y", CallpathKind::computation, std::nullopt}, {}};
    short_series.metrics.emplace(Metric::time_s, MetricSeries(Metric::time_s, {{1}, {1}}));
    try {
        ExperimentSet(space, {short_series});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("incomplete grid"), std::string::npos);
    }

    CallpathData no_time{{"z", CallpathKind::computation, std::nullopt}, {}};
    no_time.metrics.emplace(Metric::basic_blocks, MetricSeries(Metric::basic_blocks, time));
    EXPECT_THROW(ExperimentSet(space, {no_time}), ValidationError);
}

TEST(ExperimentJson, RoundTripIsExact) {
    const auto exp = small_experiment(0.1);
    EXPECT_EQ(experiment_from_json(experiment_to_json(exp)), exp);
    const auto path = temp_file("small.json");
    save_experiment(exp, path);
    EXPECT_EQ(load_experiment(path), exp);
}

TEST(ExperimentJson, EmptyCallpathListRoundTrips) {
    ExperimentSet exp(space2(), {});
    const auto text = experiment_to_json(exp);
    EXPECT_NE(text.find("\"callpaths\": []"), std::string::npos);
    EXPECT_EQ(experiment_from_json(text), exp);
}

TEST(ExperimentJson, ThreeParameterSimulationRoundTrips) {
    const auto spec = random_spec(5, 3, 2);
    const auto exp = simulate_measurements(spec, 3, 0.3, 9);
    EXPECT_EQ(exp.space().grid_size(), 125u);
    const auto back = experiment_from_json(experiment_to_json(exp));
    ASSERT_EQ(back.callpaths().size(), exp.callpaths().size());
    for (std::size_t c = 0; c < exp.callpaths().size(); ++c) {
        EXPECT_EQ(back.callpaths()[c].path, exp.callpaths()[c].path);
        for (const auto& [metric, series] : exp.callpaths()[c].metrics) {
            const auto* other = back.callpaths()[c].find(metric);
            ASSERT_NE(other, nullptr);
            EXPECT_EQ(other->data(), series.data());  // bit-identical doubles
        }
    }
}

namespace {

std::string expect_validation(const nlohmann::json& doc) {
    try {
        experiment_from_json(doc.dump());
    } catch (const ValidationError& e) {
        return e.what();
    }
    ADD_FAILURE() << "no ValidationError";
    return {};
}

}  // namespace

TEST(ExperimentJson, MissingCoordinateIsIncompleteGrid) {
    auto doc = nlohmann::json::parse(experiment_to_json(small_experiment()));
    doc["callpaths"][0]["metrics"]["time_s"].erase(5);
    EXPECT_NE(expect_validation(doc).find("incomplete grid"), std::string::npos);
}

TEST(ExperimentJson, NegativeValueIsRejected) {
    auto doc = nlohmann::json::parse(experiment_to_json(small_experiment()));
    doc["callpaths"][1]["metrics"]["bytes"][2]["repetitions"][0] = -1.0;
    EXPECT_NE(expect_validation(doc).find("negative measurement"), std::string::npos);
}

TEST(ExperimentJson, DuplicateAndForeignCoordinates) {
    auto doc = nlohmann::json::parse(experiment_to_json(small_experiment()));
    auto dup = doc;
    dup["callpaths"][0]["metrics"]["time_s"][1]["coordinate"] = {2.0, 10.0};
    EXPECT_NE(expect_validation(dup).find("duplicate coordinate"), std::string::npos);
    auto foreign = doc;
    foreign["callpaths"][0]["metrics"]["time_s"][1]["coordinate"] = {3.0, 10.0};
    EXPECT_NE(expect_validation(foreign).find("outside the grid"), std::string::npos);
}

TEST(ExperimentJson, MalformedDocumentsAreParseErrors) {
    EXPECT_THROW(experiment_from_json("{"), ParseError);
    EXPECT_THROW(experiment_from_json("[]"), ParseError);
    auto doc = nlohmann::json::parse(experiment_to_json(small_experiment()));
    auto extra = doc;
    extra["surprise"] = 1;
    EXPECT_THROW(experiment_from_json(extra.dump()), ParseError);
    auto version = doc;
    version["format_version"] = 2;
    EXPECT_THROW(experiment_from_json(version.dump()), ParseError);
    auto metric = doc;
    metric["callpaths"][0]["metrics"]["flops"] = metric["callpaths"][0]["metrics"]["time_s"];
    EXPECT_THROW(experiment_from_json(metric.dump()), ParseError);
    auto op = doc;
    op["callpaths"][1]["mpi_op"] = "MPI_Foo";
    EXPECT_THROW(experiment_from_json(op.dump()), ParseError);
}

TEST(ExperimentJson, MissingFileIsIoError) {
    EXPECT_THROW(load_experiment("/nonexistent/dir/file.json"), IoError);
}

TEST(Aggregate, MedianExamples) {
    const std::vector<double> odd{3, 1, 2};
    const std::vector<double> even{1, 2, 3, 10};
    const std::vector<double> one{5};
    EXPECT_EQ(aggregate_values(odd, Statistic::median), 2.0);
    EXPECT_EQ(aggregate_values(even, Statistic::median), 2.5);
    EXPECT_EQ(aggregate_values(one, Statistic::median), 5.0);
    EXPECT_EQ(aggregate_values(even, Statistic::min), 1.0);
    EXPECT_EQ(aggregate_values(even, Statistic::mean), 4.0);
}

TEST(Aggregate, MedianIsPermutationInvariantAndBounded) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> v(1 + round % 9);
        for (auto& x : v) {
            x = dist(rng);
        }
        const double med = aggregate_values(v, Statistic::median);
        EXPECT_LE(*std::min_element(v.begin(), v.end()), med);
        EXPECT_GE(*std::max_element(v.begin(), v.end()), med);
        std::shuffle(v.begin(), v.end(), rng);
        EXPECT_EQ(aggregate_values(v, Statistic::median), med);
    }
}

TEST(Aggregate, PerGridPoint) {
    const auto exp = small_experiment(1.0);
    const auto med = aggregate(*exp.callpaths()[0].find(Metric::time_s), Statistic::median);
    EXPECT_EQ(med, std::vector<double>(6, 2.0));
}

TEST(SubsetRepetitions, SelectsInGivenOrder) {
    const auto exp = small_experiment(1.0);
    const std::vector<std::size_t> idx{2, 0};
    const auto sub = subset_repetitions(exp, idx);
    const auto* time = sub.callpaths()[1].find(Metric::time_s);
    EXPECT_EQ(time->repetitions(), 2u);
    EXPECT_EQ(time->at(4), (std::vector<double>{3, 1}));
    // effort metrics stay untouched
    EXPECT_EQ(*sub.callpaths()[1].find(Metric::bytes), *exp.callpaths()[1].find(Metric::bytes));

    const std::vector<std::size_t> bad{3};
    EXPECT_THROW(subset_repetitions(exp, bad), InvalidArgument);
    EXPECT_THROW(subset_repetitions(exp, std::span<const std::size_t>{}), InvalidArgument);
}

TEST(SubsetRepetitions, FiveRepetitionsGiveThirtyOneNonEmptySubsets) {
    std::vector<std::vector<double>> time(6, std::vector<double>{1, 2, 3, 4, 5});
    const MetricSeries series(Metric::time_s, time);
    std::set<std::vector<double>> seen;
    for (unsigned mask = 1; mask < 32; ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t r = 0; r < 5; ++r) {
            if (mask & (1u << r)) {
                idx.push_back(r);
            }
        }
        seen.insert(subset_repetitions(series, idx).at(0));
    }
    EXPECT_EQ(seen.size(), 31u);
}
