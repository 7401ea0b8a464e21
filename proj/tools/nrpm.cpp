// nrpm: generate synthetic benchmarks, simulate and perturb measurements,
// build classic or SWC models and run the noise/repetition studies.
//
// Exit codes: 0 ok, 2 usage, 3 I/O or malformed input, 4 modeling failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nrpm/benchgen.hpp"
#include "nrpm/dataset.hpp"
#include "nrpm/effort_priors.hpp"
#include "nrpm/error.hpp"
#include "nrpm/evaluation.hpp"
#include "nrpm/noise_lab.hpp"
#include "nrpm/seeding.hpp"

namespace fs = std::filesystem;
using namespace nrpm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitModeling = 4;

struct UsageError : Error {
    using Error::Error;
};

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "table";
    unsigned threads = 1;
};

bool machine(const Globals& g) {
    return g.format == "machine";
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

double parse_percent(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(v >= 0.0)) {
        throw UsageError("invalid percentage '" + text + "'");
    }
    return v / 100.0;
}

std::string exponents_text(const Exponents& e, const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t l = 0; l < e.size(); ++l) {
        out += (out.empty() ? "" : " ") + names[l] + ":(" + e[l].i.to_string() + "," + std::to_string(e[l].j) + ")";
    }
    return out;
}

nlohmann::json exponents_json(const Exponents& e, const std::vector<std::string>& names) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t l = 0; l < e.size(); ++l) {
        obj[names[l]] = {{"i", e[l].i.to_string()}, {"j", e[l].j}};
    }
    return obj;
}

NoiseKind pattern_flag(const std::string& name) {
    try {
        return parse_noise_kind(name);
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
}

void require_out(const Globals& g, const char* command) {
    if (g.out.empty()) {
        throw UsageError(std::string(command) + " needs --out");
    }
}

// generate

struct GenerateArgs {
    std::size_t params = 2;
    std::size_t count = 1;
    std::size_t kernels = 2;
    bool source = false;
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
    if (a.params < 1 || a.params > 3) {
        throw UsageError("unsupported parameter count " + std::to_string(a.params) + ": need 1 <= m ≤ 3");
    }
    if (a.count == 0) {
        throw UsageError("--count must be at least 1");
    }
    if (a.kernels == 0) {
        throw UsageError("--kernels must be at least 1");
    }
    require_out(g, "generate");
    fs::create_directories(g.out);
    for (std::size_t i = 0; i < a.count; ++i) {
        const auto spec = random_spec(derive_seed(g.seed, {i}), a.params, a.kernels);
        const fs::path file = fs::path(g.out) / ("spec_" + std::to_string(i) + ".json");
        save_spec(spec, file);
        std::cout << file.string() << "\n";
        if (a.source) {
            const fs::path src = fs::path(g.out) / ("bench_" + std::to_string(i) + ".cpp");
            write_text_file(src, emit_source(spec));
            std::cout << src.string() << "\n";
        }
    }
    return kExitOk;
}

// simulate

struct SimulateArgs {
    std::string spec;
    std::size_t reps = 5;
    double baseline_noise = 0.0;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    if (a.reps == 0) {
        throw UsageError("--reps must be at least 1");
    }
    require_out(g, "simulate");
    const auto spec = load_spec(a.spec);
    const auto exp = simulate_measurements(spec, a.reps, a.baseline_noise, g.seed);
    save_experiment(exp, g.out);
    std::cout << "wrote " << exp.callpaths().size() << " call paths x " << exp.space().grid_size() << " points x "
              << a.reps << " repetitions to " << g.out << "\n";
    return kExitOk;
}

// inject

struct InjectArgs {
    std::string experiment;
    std::string intensity = "0";
    std::string pattern = "uniform";
    double selection = 1.0;
};

int cmd_inject(const Globals& g, const InjectArgs& a) {
    require_out(g, "inject");
    NoiseConfig config{NoisePattern{pattern_flag(a.pattern)}, parse_percent(a.intensity), a.selection, g.seed};
    if (!(a.selection > 0.0 && a.selection <= 1.0)) {
        throw UsageError("--selection must lie in (0, 1]");
    }
    const auto exp = load_experiment(a.experiment);
    save_experiment(inject(exp, config), g.out);
    std::cout << "wrote " << g.out << "\n";
    return kExitOk;
}

// model

struct ModelArgs {
    std::string experiment;
    std::string pipeline = "swc";
};

int cmd_model(const Globals& g, const ModelArgs& a) {
    const Pipeline pipeline = parse_pipeline(a.pipeline);
    const auto exp = load_experiment(a.experiment);
    const auto& names = exp.space().names();
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream text;
    for (std::size_t c = 0; c < exp.callpaths().size(); ++c) {
        const auto& cp = exp.callpaths()[c];
        PmnfModel model;
        try {
            model = run_pipeline(pipeline, exp, c);
        } catch (const ModelingError& e) {
            throw ModelingError("call path '" + cp.path.name + "': " + e.what());
        }
        const auto lead = leading_exponents(model);
        const std::string rendered = render(model);
        nlohmann::json row{{"callpath", cp.path.name},
                           {"kind", std::string(to_string(cp.path.kind))},
                           {"model", rendered},
                           {"leading_exponents", exponents_json(lead, names)}};
        if (cp.path.mpi_op) {
            row["mpi_op"] = std::string(to_string(*cp.path.mpi_op));
        }
        rows.push_back(row);
        if (machine(g)) {
            text << cp.path.name << '\t' << exponents_text(lead, names) << '\t' << rendered << '\n';
        } else {
            text << cp.path.name << "\n  model:   " << rendered << "\n  leading: " << exponents_text(lead, names)
                 << "\n";
        }
    }
    std::cout << text.str();
    if (!g.out.empty()) {
        nlohmann::json doc{{"schema_version", 1},
                           {"pipeline", std::string(to_string(pipeline))},
                           {"parameters", names},
                           {"callpaths", rows}};
        write_text_file(g.out, doc.dump(1) + "\n");
    }
    return kExitOk;
}

// studies

struct StudyArgs {
    std::string spec;
    std::string experiment;
    std::string pipeline = "swc";
    std::size_t reps = 5;
    double baseline_noise = 0.0;
    std::size_t trials = 100;
    std::string intensities = "2,5,10,50,75";
    std::string patterns = "uniform,truncated_normal,scaled_poisson,scaled_exponential";
    double selection = 1.0;
    std::size_t max_subsets = 64;
};

void emit_table(const Globals& g, const StudyTable& table) {
    std::cout << (machine(g) ? study_to_csv(table) : study_to_text(table));
    if (!g.out.empty()) {
        const bool json = fs::path(g.out).extension() == ".json";
        write_text_file(g.out, json ? study_to_json(table) : study_to_csv(table));
    }
}

ExperimentSet study_input(const Globals& g, const StudyArgs& a, const BenchmarkSpec& spec) {
    if (!a.experiment.empty()) {
        return load_experiment(a.experiment);
    }
    if (a.reps == 0) {
        throw UsageError("--reps must be at least 1");
    }
    return simulate_measurements(spec, a.reps, a.baseline_noise, g.seed);
}

int cmd_study_noise(const Globals& g, const StudyArgs& a) {
    if (a.trials == 0) {
        throw UsageError("--trials must be at least 1");
    }
    NoiseStudyConfig config;
    config.intensities.clear();
    for (const auto& v : split(a.intensities)) {
        config.intensities.push_back(parse_percent(v));
    }
    for (const auto& p : split(a.patterns)) {
        config.patterns.push_back(NoisePattern{pattern_flag(p)});
    }
    if (config.intensities.empty() || config.patterns.empty()) {
        throw UsageError("need at least one intensity and one pattern");
    }
    config.trials = a.trials;
    config.selection_fraction = a.selection;
    config.pipeline = parse_pipeline(a.pipeline);
    config.seed = g.seed;
    config.threads = g.threads;
    const auto spec = load_spec(a.spec);
    const auto exp = study_input(g, a, spec);
    const auto test = next_test_point(exp.space());
    emit_table(g, noise_robustness_study(exp, callpath_truths(spec, test), test, config));
    return kExitOk;
}

int cmd_study_reps(const Globals& g, const StudyArgs& a) {
    RepetitionStudyConfig config;
    config.pipeline = parse_pipeline(a.pipeline);
    config.seed = g.seed;
    config.max_subsets = a.max_subsets;
    config.threads = g.threads;
    const auto spec = load_spec(a.spec);
    const auto exp = study_input(g, a, spec);
    const auto test = next_test_point(exp.space());
    emit_table(g, repetition_study(exp, callpath_truths(spec, test), test, config));
    return kExitOk;
}

// cost

struct CostArgs {
    std::size_t params = 2;
    std::size_t reps = 5;
    std::size_t values = 5;
};

int cmd_cost(const Globals& g, const CostArgs& a) {
    if (a.params == 0 || a.reps == 0 || a.values == 0) {
        throw UsageError("--params, --reps and --values must be positive");
    }
    const auto report = cost_report(a.params, a.reps, a.values);
    std::cout << "classic=" << report.classic << " swc=" << report.swc << "\n";
    if (!machine(g)) {
        std::cout << "savings=" << format_number(report.savings_percent()) << "%\n";
    }
    if (!g.out.empty()) {
        nlohmann::json doc{{"schema_version", 1},
                           {"params", a.params},
                           {"classic", report.classic},
                           {"swc", report.swc},
                           {"savings_percent", report.savings_percent()}};
        write_text_file(g.out, doc.dump(1) + "\n");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-resilient performance modeling with software-counter priors"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random stream");
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--format", g.format, "Standard output format")->check(CLI::IsMember({"table", "machine"}));
    app.add_option("--threads", g.threads, "Worker threads for studies")->check(CLI::Range(1U, 256U));

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write random benchmark spec files");
    generate->add_option("--params", gen.params, "Parameter count m (1 to 3)");
    generate->add_option("--count", gen.count, "Number of specs");
    generate->add_option("--kernels", gen.kernels, "Kernels per benchmark");
    generate->add_flag("--source", gen.source, "Also write benchmark source files");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate measurements of a spec");
    simulate->add_option("--spec", sim.spec, "Spec file")->required();
    simulate->add_option("--reps", sim.reps, "Repetitions per point");
    simulate->add_option("--baseline-noise", sim.baseline_noise, "Multiplicative system noise (fraction)")
        ->check(CLI::NonNegativeNumber);

    InjectArgs inj;
    auto* inject_cmd = app.add_subcommand("inject", "Add artificial noise to runtime measurements");
    inject_cmd->add_option("--experiment", inj.experiment, "Experiment file")->required();
    inject_cmd->add_option("--intensity", inj.intensity, "Noise intensity in percent");
    inject_cmd->add_option("--pattern", inj.pattern, "none, uniform, truncated_normal, scaled_poisson, scaled_exponential");
    inject_cmd->add_option("--selection", inj.selection, "Probability that a measurement is perturbed");

    ModelArgs mod;
    auto* model = app.add_subcommand("model", "Model every call path of an experiment");
    model->add_option("--experiment", mod.experiment, "Experiment file")->required();
    model->add_option("--pipeline", mod.pipeline, "classic or swc")->check(CLI::IsMember({"classic", "swc"}));

    StudyArgs noise_args;
    StudyArgs reps_args;
    reps_args.baseline_noise = 0.5;
    auto add_study_options = [](CLI::App* cmd, StudyArgs& a) {
        cmd->add_option("--spec", a.spec, "Spec file (ground truth)")->required();
        cmd->add_option("--experiment", a.experiment, "Experiment file; simulated from the spec if absent");
        cmd->add_option("--pipeline", a.pipeline, "classic or swc")->check(CLI::IsMember({"classic", "swc"}));
        cmd->add_option("--reps", a.reps, "Repetitions when simulating");
        cmd->add_option("--baseline-noise", a.baseline_noise, "System noise when simulating (fraction)")
            ->check(CLI::NonNegativeNumber);
    };
    auto* study_noise = app.add_subcommand("study-noise", "Noise robustness study");
    add_study_options(study_noise, noise_args);
    study_noise->add_option("--trials", noise_args.trials, "Trials per intensity and pattern");
    study_noise->add_option("--intensities", noise_args.intensities, "Comma-separated percentages");
    study_noise->add_option("--patterns", noise_args.patterns, "Comma-separated noise patterns");
    study_noise->add_option("--selection", noise_args.selection, "Probability that a measurement is perturbed");
    auto* study_reps = app.add_subcommand("study-reps", "Repetition count study");
    add_study_options(study_reps, reps_args);
    study_reps->add_option("--max-subsets", reps_args.max_subsets, "Subsets per repetition count");

    CostArgs cost_args;
    auto* cost = app.add_subcommand("cost", "Measurement budget of classic and SWC modeling");
    cost->add_option("--params", cost_args.params, "Parameter count m");
    cost->add_option("--reps", cost_args.reps, "Classic repetitions per point");
    cost->add_option("--values", cost_args.values, "Values per parameter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (generate->parsed()) {
            return cmd_generate(g, gen);
        }
        if (simulate->parsed()) {
            return cmd_simulate(g, sim);
        }
        if (inject_cmd->parsed()) {
            return cmd_inject(g, inj);
        }
        if (model->parsed()) {
            return cmd_model(g, mod);
        }
        if (study_noise->parsed()) {
            return cmd_study_noise(g, noise_args);
        }
        if (study_reps->parsed()) {
            return cmd_study_reps(g, reps_args);
        }
        return cmd_cost(g, cost_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ModelingError& e) {
        std::cerr << "modeling failed: " << e.what() << "\n";
        return kExitModeling;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
