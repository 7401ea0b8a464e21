#include "nrpm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"
#include "nrpm/error.hpp"

namespace nrpm {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ParameterSpace

ParameterSpace::ParameterSpace(std::vector<std::string> names, std::vector<std::vector<double>> values)
    : names_(std::move(names)), values_(std::move(values)) {
    if (names_.empty()) {
        throw ValidationError("parameter space needs at least one parameter");
    }
    if (names_.size() != values_.size()) {
        throw ValidationError("parameter names and value lists differ in length");
    }
    std::set<std::string> seen;
    for (std::size_t l = 0; l < names_.size(); ++l) {
        const auto& name = names_[l];
        if (name.empty()) {
            throw ValidationError("empty parameter name");
        }
        if (!seen.insert(name).second) {
            throw ValidationError("duplicate parameter name '" + name + "'");
        }
        const auto& vals = values_[l];
        if (vals.size() < 2) {
            throw ValidationError("parameter '" + name + "' needs at least two values");
        }
        for (std::size_t k = 0; k < vals.size(); ++k) {
            if (!std::isfinite(vals[k]) || vals[k] < 1.0) {
                throw ValidationError("parameter '" + name + "' has a value below 1");
            }
            if (k > 0 && !(vals[k] > vals[k - 1])) {
                throw ValidationError("values of parameter '" + name + "' are not strictly increasing");
            }
        }
    }
}

std::optional<std::size_t> ParameterSpace::index_of(std::string_view name) const {
    for (std::size_t l = 0; l < names_.size(); ++l) {
        if (names_[l] == name) {
            return l;
        }
    }
    return std::nullopt;
}

std::size_t ParameterSpace::grid_size() const {
    if (values_.empty()) {
        return 0;
    }
    std::size_t n = 1;
    for (const auto& v : values_) {
        n *= v.size();
    }
    return n;
}

Coordinate ParameterSpace::coordinate(std::size_t flat) const {
    Coordinate c;
    c.values.resize(values_.size());
    for (std::size_t l = values_.size(); l-- > 0;) {
        const std::size_t n = values_[l].size();
        c.values[l] = values_[l][flat % n];
        flat /= n;
    }
    return c;
}

std::optional<std::size_t> ParameterSpace::flat_index(const Coordinate& at) const {
    if (at.size() != values_.size()) {
        return std::nullopt;
    }
    std::size_t flat = 0;
    for (std::size_t l = 0; l < values_.size(); ++l) {
        const auto& vals = values_[l];
        const auto it = std::find(vals.begin(), vals.end(), at[l]);
        if (it == vals.end()) {
            return std::nullopt;
        }
        flat = flat * vals.size() + static_cast<std::size_t>(it - vals.begin());
    }
    return flat;
}

namespace {

std::size_t stride_of(const std::vector<std::vector<double>>& values, std::size_t l) {
    std::size_t stride = 1;
    for (std::size_t k = l + 1; k < values.size(); ++k) {
        stride *= values[k].size();
    }
    return stride;
}

}  // namespace

std::vector<std::size_t> ParameterSpace::line_through(std::size_t anchor, std::size_t l) const {
    const std::size_t stride = stride_of(values_, l);
    const std::size_t n = values_[l].size();
    const std::size_t position = (anchor / stride) % n;
    const std::size_t base = anchor - position * stride;
    std::vector<std::size_t> line(n);
    for (std::size_t k = 0; k < n; ++k) {
        line[k] = base + k * stride;
    }
    return line;
}

std::vector<std::size_t> ParameterSpace::line_anchors(std::size_t l) const {
    const std::size_t stride = stride_of(values_, l);
    const std::size_t n = values_[l].size();
    std::vector<std::size_t> anchors;
    for (std::size_t flat = 0; flat < grid_size(); ++flat) {
        if ((flat / stride) % n == 0) {
            anchors.push_back(flat);
        }
    }
    return anchors;
}

// ---------------------------------------------------------------------------
// Enumerations

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::time_s: return "time_s";
        case Metric::basic_blocks: return "basic_blocks";
        case Metric::bytes: return "bytes";
    }
    return "unknown";
}

std::string_view to_string(CallpathKind kind) {
    return kind == CallpathKind::computation ? "computation" : "communication";
}

Metric parse_metric(std::string_view name) {
    for (Metric m : {Metric::time_s, Metric::basic_blocks, Metric::bytes}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ParseError("unknown metric '" + std::string(name) + "'");
}

CallpathKind parse_callpath_kind(std::string_view name) {
    if (name == "computation") {
        return CallpathKind::computation;
    }
    if (name == "communication") {
        return CallpathKind::communication;
    }
    throw ParseError("unknown call path kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// MetricSeries / ExperimentSet

MetricSeries::MetricSeries(Metric metric, std::vector<std::vector<double>> repetitions)
    : metric_(metric), reps_(std::move(repetitions)) {
    const std::string label(to_string(metric_));
    for (const auto& reps : reps_) {
        if (reps.empty()) {
            throw ValidationError(label + ": empty repetition list");
        }
        if (reps.size() != reps_.front().size()) {
            throw ValidationError(label + ": repetition lists differ in length");
        }
        for (double v : reps) {
            if (!std::isfinite(v)) {
                throw ValidationError(label + ": non-finite measurement");
            }
            if (v < 0.0) {
                throw ValidationError(label + ": negative measurement");
            }
        }
    }
}

const MetricSeries* CallpathData::find(Metric metric) const {
    const auto it = metrics.find(metric);
    return it == metrics.end() ? nullptr : &it->second;
}

ExperimentSet::ExperimentSet(ParameterSpace space, std::vector<CallpathData> callpaths)
    : space_(std::move(space)), callpaths_(std::move(callpaths)) {
    std::set<std::string> names;
    for (const auto& cp : callpaths_) {
        if (cp.path.name.empty()) {
            throw ValidationError("call path with empty name");
        }
        if (!names.insert(cp.path.name).second) {
            throw ValidationError("duplicate call path '" + cp.path.name + "'");
        }
        const bool comm = cp.path.kind == CallpathKind::communication;
        if (comm != cp.path.mpi_op.has_value()) {
            throw ValidationError("call path '" + cp.path.name +
                                  "': mpi_op must be present exactly for communication call paths");
        }
        if (cp.find(Metric::time_s) == nullptr) {
            throw ValidationError("call path '" + cp.path.name + "' has no time_s series");
        }
        for (const auto& [metric, series] : cp.metrics) {
            if (series.metric() != metric) {
                throw ValidationError("call path '" + cp.path.name + "': series filed under wrong metric");
            }
            if (series.points() != space_.grid_size()) {
                throw ValidationError("call path '" + cp.path.name + "': incomplete grid");
            }
        }
    }
}

std::optional<std::size_t> ExperimentSet::find_callpath(std::string_view name) const {
    for (std::size_t k = 0; k < callpaths_.size(); ++k) {
        if (callpaths_[k].path.name == name) {
            return k;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON

std::string experiment_to_json(const ExperimentSet& exp) {
    json doc;
    doc["format_version"] = 1;
    json params = json::array();
    for (std::size_t l = 0; l < exp.space().dimension(); ++l) {
        params.push_back({{"name", exp.space().names()[l]}, {"values", exp.space().values(l)}});
    }
    doc["parameters"] = params;
    json cps = json::array();
    for (const auto& cp : exp.callpaths()) {
        json obj;
        obj["name"] = cp.path.name;
        obj["kind"] = std::string(to_string(cp.path.kind));
        if (cp.path.mpi_op) {
            obj["mpi_op"] = std::string(to_string(*cp.path.mpi_op));
        }
        json metrics = json::object();
        for (const auto& [metric, series] : cp.metrics) {
            json records = json::array();
            for (std::size_t flat = 0; flat < series.points(); ++flat) {
                records.push_back({{"coordinate", exp.space().coordinate(flat).values},
                                   {"repetitions", series.at(flat)}});
            }
            metrics[std::string(to_string(metric))] = records;
        }
        obj["metrics"] = metrics;
        cps.push_back(obj);
    }
    doc["callpaths"] = cps;
    return doc.dump(1) + "\n";
}

ExperimentSet experiment_from_json(std::string_view text) {
    const json doc = detail::parse_json(text);
    detail::require_keys(doc, {"format_version", "parameters", "callpaths"}, {}, "experiment");
    if (!doc["format_version"].is_number_integer() || doc["format_version"].get<int>() != 1) {
        throw ParseError("experiment: unsupported format_version");
    }

    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (const auto& p : detail::array_field(doc, "parameters", "experiment")) {
        detail::require_keys(p, {"name", "values"}, {}, "parameter");
        names.push_back(detail::string_field(p, "name", "parameter"));
        values.push_back(detail::number_list(p["values"], "parameter values"));
    }
    ParameterSpace space(std::move(names), std::move(values));

    std::vector<CallpathData> callpaths;
    for (const auto& c : detail::array_field(doc, "callpaths", "experiment")) {
        detail::require_keys(c, {"name", "kind", "metrics"}, {"mpi_op"}, "call path");
        CallpathData cp;
        cp.path.name = detail::string_field(c, "name", "call path");
        cp.path.kind = parse_callpath_kind(detail::string_field(c, "kind", "call path"));
        if (c.contains("mpi_op")) {
            cp.path.mpi_op = parse_mpi_op(detail::string_field(c, "mpi_op", "call path"));
        }
        if (!c["metrics"].is_object()) {
            throw ParseError("call path '" + cp.path.name + "': metrics must be an object");
        }
        for (const auto& [key, records] : c["metrics"].items()) {
            const Metric metric = parse_metric(key);
            if (!records.is_array()) {
                throw ParseError("metric '" + key + "' must be an array of records");
            }
            std::vector<std::vector<double>> reps(space.grid_size());
            std::vector<bool> filled(space.grid_size(), false);
            for (const auto& rec : records) {
                detail::require_keys(rec, {"coordinate", "repetitions"}, {}, "measurement record");
                const Coordinate at{detail::number_list(rec["coordinate"], "coordinate")};
                const auto flat = space.flat_index(at);
                if (!flat) {
                    throw ValidationError("call path '" + cp.path.name + "': coordinate outside the grid");
                }
                if (filled[*flat]) {
                    throw ValidationError("call path '" + cp.path.name + "': duplicate coordinate");
                }
                filled[*flat] = true;
                reps[*flat] = detail::number_list(rec["repetitions"], "repetitions");
            }
            if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
                throw ValidationError("call path '" + cp.path.name + "', metric " + key + ": incomplete grid");
            }
            cp.metrics.emplace(metric, MetricSeries(metric, std::move(reps)));
        }
        callpaths.push_back(std::move(cp));
    }
    return ExperimentSet(std::move(space), std::move(callpaths));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError("failed reading '" + path.string() + "'");
    }
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

ExperimentSet load_experiment(const std::filesystem::path& path) {
    return experiment_from_json(read_text_file(path));
}

void save_experiment(const ExperimentSet& exp, const std::filesystem::path& path) {
    write_text_file(path, experiment_to_json(exp));
}

// ---------------------------------------------------------------------------
// Aggregation and subsetting

double aggregate_values(std::span<const double> values, Statistic stat) {
    switch (stat) {
        case Statistic::min:
            return *std::min_element(values.begin(), values.end());
        case Statistic::mean:
            return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        case Statistic::median: {
            std::vector<double> sorted(values.begin(), values.end());
            std::sort(sorted.begin(), sorted.end());
            const std::size_t n = sorted.size();
            if (n % 2 == 1) {
                return sorted[n / 2];
            }
            return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
        }
    }
    return 0.0;
}

std::vector<double> aggregate(const MetricSeries& series, Statistic stat) {
    std::vector<double> out;
    out.reserve(series.points());
    for (const auto& reps : series.data()) {
        out.push_back(aggregate_values(reps, stat));
    }
    return out;
}

MetricSeries subset_repetitions(const MetricSeries& series, std::span<const std::size_t> indices) {
    if (indices.empty()) {
        throw InvalidArgument("subset_repetitions: empty index set");
    }
    for (std::size_t idx : indices) {
        if (idx >= series.repetitions()) {
            throw InvalidArgument("subset_repetitions: repetition index " + std::to_string(idx) +
                                  " out of range");
        }
    }
    std::vector<std::vector<double>> reps;
    reps.reserve(series.points());
    for (const auto& full : series.data()) {
        std::vector<double> chosen;
        chosen.reserve(indices.size());
        for (std::size_t idx : indices) {
            chosen.push_back(full[idx]);
        }
        reps.push_back(std::move(chosen));
    }
    return MetricSeries(series.metric(), std::move(reps));
}

ExperimentSet subset_repetitions(const ExperimentSet& exp, std::span<const std::size_t> indices) {
    // Only runtime is repeated; effort metrics are deterministic and kept whole.
    std::vector<CallpathData> callpaths = exp.callpaths();
    for (auto& cp : callpaths) {
        auto& time = cp.metrics.at(Metric::time_s);
        time = subset_repetitions(time, indices);
    }
    return ExperimentSet(exp.space(), std::move(callpaths));
}

}  // namespace nrpm
