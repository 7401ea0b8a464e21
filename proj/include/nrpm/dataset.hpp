#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nrpm/mpi_op.hpp"

namespace nrpm {

/// A point in parameter space, aligned positionally with ParameterSpace::names().
struct Coordinate {
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    double operator[](std::size_t l) const { return values[l]; }
    friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

/// Named parameters with a strictly increasing list of values each. The full
/// factorial grid over these lists is the measurement design; grid points are
/// addressed by a flat index with the first parameter varying slowest.
class ParameterSpace {
public:
    ParameterSpace() = default;
    /// Throws ValidationError if names are empty/duplicated, a list has fewer
    /// than two values, is not strictly increasing, or holds a value < 1.
    ParameterSpace(std::vector<std::string> names, std::vector<std::vector<double>> values);

    [[nodiscard]] std::size_t dimension() const { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] const std::vector<double>& values(std::size_t l) const { return values_[l]; }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;

    [[nodiscard]] std::size_t grid_size() const;
    [[nodiscard]] Coordinate coordinate(std::size_t flat) const;
    /// Exact match of every component against the stored value lists.
    [[nodiscard]] std::optional<std::size_t> flat_index(const Coordinate& at) const;
    /// Flat indices of the grid line through `anchor` along parameter `l`,
    /// ordered by increasing value of that parameter.
    [[nodiscard]] std::vector<std::size_t> line_through(std::size_t anchor, std::size_t l) const;
    /// One anchor flat index per distinct grid line along parameter `l`.
    [[nodiscard]] std::vector<std::size_t> line_anchors(std::size_t l) const;

    friend bool operator==(const ParameterSpace&, const ParameterSpace&) = default;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> values_;
};

enum class Metric { time_s, basic_blocks, bytes };
enum class CallpathKind { computation, communication };
enum class Statistic { median, min, mean };

std::string_view to_string(Metric metric);
std::string_view to_string(CallpathKind kind);
Metric parse_metric(std::string_view name);
CallpathKind parse_callpath_kind(std::string_view name);

struct CallPath {
    std::string name;
    CallpathKind kind = CallpathKind::computation;
    /// Present exactly when kind == communication.
    std::optional<MpiOp> mpi_op;

    friend bool operator==(const CallPath&, const CallPath&) = default;
};

/// Repeated measurements of one metric over the full grid; entry k holds the
/// repetitions at grid point k (flat index of the owning ParameterSpace).
class MetricSeries {
public:
    MetricSeries() = default;
    /// Throws ValidationError on empty or ragged repetition lists and on
    /// negative or non-finite values.
    MetricSeries(Metric metric, std::vector<std::vector<double>> repetitions);

    [[nodiscard]] Metric metric() const { return metric_; }
    [[nodiscard]] std::size_t points() const { return reps_.size(); }
    [[nodiscard]] std::size_t repetitions() const { return reps_.empty() ? 0 : reps_.front().size(); }
    [[nodiscard]] const std::vector<double>& at(std::size_t flat) const { return reps_[flat]; }
    [[nodiscard]] const std::vector<std::vector<double>>& data() const { return reps_; }

    friend bool operator==(const MetricSeries&, const MetricSeries&) = default;

private:
    Metric metric_ = Metric::time_s;
    std::vector<std::vector<double>> reps_;
};

struct CallpathData {
    CallPath path;
    std::map<Metric, MetricSeries> metrics;

    [[nodiscard]] const MetricSeries* find(Metric metric) const;
    friend bool operator==(const CallpathData&, const CallpathData&) = default;
};

/// Measurements of all call paths over one parameter space. Every series
/// covers the complete grid. time_s is mandatory on every call path; effort
/// metrics are optional here and demanded by the pipelines that use them.
class ExperimentSet {
public:
    ExperimentSet() = default;
    ExperimentSet(ParameterSpace space, std::vector<CallpathData> callpaths);

    [[nodiscard]] const ParameterSpace& space() const { return space_; }
    [[nodiscard]] const std::vector<CallpathData>& callpaths() const { return callpaths_; }
    [[nodiscard]] std::optional<std::size_t> find_callpath(std::string_view name) const;

    friend bool operator==(const ExperimentSet&, const ExperimentSet&) = default;

private:
    ParameterSpace space_;
    std::vector<CallpathData> callpaths_;
};

std::string experiment_to_json(const ExperimentSet& exp);
/// Throws ParseError for malformed documents, ValidationError for invariant
/// violations ("incomplete grid", "negative measurement", ...).
ExperimentSet experiment_from_json(std::string_view text);

ExperimentSet load_experiment(const std::filesystem::path& path);
void save_experiment(const ExperimentSet& exp, const std::filesystem::path& path);

/// One value per grid point. Median of an even-length list is the mean of
/// the two central order statistics.
std::vector<double> aggregate(const MetricSeries& series, Statistic stat);
double aggregate_values(std::span<const double> values, Statistic stat);

/// Restricts every grid point to the repetitions at `indices` (in the given
/// order). Throws InvalidArgument if empty or out of range.
MetricSeries subset_repetitions(const MetricSeries& series, std::span<const std::size_t> indices);
/// Applies subset_repetitions to the time_s series of every call path;
/// effort metrics are deterministic and kept as they are.
ExperimentSet subset_repetitions(const ExperimentSet& exp, std::span<const std::size_t> indices);

// Shared text-file helpers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace nrpm
