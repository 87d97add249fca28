#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "fjc/experiment.hpp"
#include "fjc/error.hpp"
#include "fjc/version.hpp"

namespace fs = std::filesystem;
using namespace fjc;

namespace {

// Flags shared by every subcommand; each maps onto an ExperimentConfig key.
struct CommonFlags {
    std::string config;
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void add(CLI::App& app) {
        app.add_option("--config", config, "key = value experiment file")->check(CLI::ExistingFile);
        bind(app, "--graph", "graph", "edge-list path or karate | ba:N:K[:SEED] | path:N | cycle:N");
        bind(app, "--seed", "seed", "master rng seed");
        bind(app, "--runs", "runs", "number of Monte Carlo runs");
        bind(app, "--theta", "theta", "global reshare probability, or 'trace'");
        bind(app, "--lambda-strategy", "lambda_strategy", "proportional | inverse | uniform");
        bind(app, "--lambda", "lambda", "constant susceptibility for the uniform strategy");
        bind(app, "--init-opinions", "init_opinions", "b1 | b2 | b2t | heuristic | file");
        bind(app, "--init-file", "init_file", "opinion CSV for --init-opinions file");
        bind(app, "--eq10-mode", "eq10_mode", "convex | literal cascade update");
        bind(app, "--out-dir", "out_dir", "output directory");
        bind(app, "--trace", "trace", "reshare trace CSV (timestamp,post_id,node_id)");
        bind(app, "--seeds", "seeds", "number of seed nodes");
        bind(app, "--threads", "threads", "worker threads (0 = all cores)");
        bind(app, "--theta-fallback", "theta_fallback", "theta for nodes the trace says nothing about");
        bind(app, "--top-cascades", "top_cascades", "replay only the largest K posts");
        auto* directed = app.add_flag("--directed", "edge list lines are one-way follows");
        auto* lscc = app.add_flag("--lscc", "restrict to the largest strongly connected component");
        options.emplace_back("directed", directed);
        options.emplace_back("lscc", lscc);
    }

    void bind(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
        options.emplace_back(key, app.add_option(flag, values[key], help));
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_config(config);
        for (const auto& [key, opt] : options) {
            if (opt->count() == 0) continue;
            if (key == "directed" || key == "lscc") {
                set_config_value(cfg, key, "true");
            } else {
                set_config_value(cfg, key, values.at(key));
            }
        }
        return cfg;
    }
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

int cmd_gen_graph(const ExperimentConfig& cfg, bool remap) {
    const LoadedGraph g = build_graph(cfg);
    const fs::path dir = cfg.out_dir;
    auto out = open_out(dir / "graph.txt");
    write_edge_list(out, g.graph);
    if (remap) {
        auto r = open_out(dir / "remap.csv");
        write_remap_csv(r, g.original_ids);
    }
    std::cout << g.graph.node_count() << " nodes, " << g.graph.edge_count() << " follow edges -> "
              << (dir / "graph.txt").string() << '\n';
    return 0;
}

int cmd_solve_fj(const ExperimentConfig& cfg) {
    const ExperimentSetup s = prepare_experiment(cfg);
    const Opinions z = fj_fixed_point(s.w, s.lambda, s.u);
    const fs::path dir = cfg.out_dir;
    {
        auto out = open_out(dir / "fj_opinions.csv");
        out << "node,u,z\n";
        out.precision(17);
        for (Eigen::Index i = 0; i < z.size(); ++i) out << i << ',' << s.u[i] << ',' << z[i] << '\n';
    }
    {
        auto out = open_out(dir / "polarization.csv");
        out << "metric,initial,fj,delta_fj\n";
        out.precision(17);
        for (auto m : {PolarizationMetric::p2, PolarizationMetric::p3, PolarizationMetric::p4}) {
            const auto rep = polarization_report(m, s.u, z);
            out << to_string(m) << ',' << rep.initial << ',' << rep.final << ',' << rep.delta() << '\n';
        }
    }
    std::cout << "residual " << fj_residual(s.w, s.lambda, s.u, z) << '\n';
    return 0;
}

int cmd_simulate_fjc(const ExperimentConfig& cfg, const std::string& log_path) {
    const ExperimentSetup s = prepare_experiment(cfg);
    const FjcSystem system(s.graph.graph, s.w, s.lambda);
    const fs::path dir = cfg.out_dir;
    std::ofstream log;
    FjcOptions opts;
    opts.mode = cfg.eq10_mode;
    if (!log_path.empty()) {
        log = open_out(log_path);
        opts.observer = jsonl_update_log(log);
    }
    Rng rng = stream_rng(cfg.seed, 0);
    const FjcRunRecord rec = run_fjc(system, s.u, s.schedule, s.model, rng, opts);
    auto out = open_out(dir / "final_opinions.csv");
    write_node_opinions_csv(out, rec);
    auto cas = open_out(dir / "cascades.csv");
    write_cascades_csv(cas, rec);
    std::size_t reached = 0;
    for (const auto& c : rec.cascades) reached += c.size;
    std::cout << rec.cascades.size() << " cascades, " << reached << " nodes reached\n";
    return 0;
}

int run_report(const ExperimentConfig& cfg, bool replay) {
    const fs::path dir = cfg.out_dir;
    try {
        const AggregateReport r = replay ? replay_experiment(cfg) : run_experiment(cfg);
        write_report(r, dir);
        for (const auto& row : r.polarization) {
            std::cout << to_string(row.metric) << ": delta FJ " << row.delta_fj() << ", mean delta FJC "
                      << row.delta_fjc();
            if (r.real) std::cout << ", delta Real " << row.delta_real();
            std::cout << '\n';
        }
        if (r.real) std::cout << "KS(FJC, Real) " << r.ks_fjc_real << ", KS(FJ, Real) " << r.ks_fj_real << '\n';
        return 0;
    } catch (const std::exception& e) {
        write_failure_manifest(dir, format_config(cfg), e.what());
        throw;
    }
}

int cmd_estimate_theta(const ExperimentConfig& cfg) {
    if (cfg.trace.empty()) throw InvalidArgument("estimate-theta needs --trace");
    ExperimentConfig c = cfg;
    c.theta_from_trace = true;
    const ExperimentSetup s = prepare_experiment(c);
    const fs::path dir = cfg.out_dir;
    auto out = open_out(dir / "theta_report.csv");
    write_theta_report_csv(out, *s.theta_estimate);
    auto sum = open_out(dir / "theta_summary.csv");
    write_theta_summary_csv(sum, s.theta_estimate->summary);
    const auto& t = s.theta_estimate->summary;
    std::cout << "theta over " << t.available << " nodes (" << t.unavailable << " unavailable): mean " << t.mean
              << ", median " << t.median << '\n';
    return 0;
}

int cmd_polarizing_vector(const ExperimentConfig& cfg) {
    const LoadedGraph g = build_graph(cfg);
    const InfluenceMatrix w = influence_matrix(g.graph);
    const Susceptibility lambda = assign_susceptibility(g.graph, cfg.lambda_strategy, cfg.lambda);
    std::string provenance;
    const Opinions u = initial_opinions(cfg, w, lambda, &provenance);
    const fs::path path = fs::path(cfg.out_dir) / "initial_opinions.csv";
    auto out = open_out(path);
    write_opinions_csv(out, u, provenance);
    std::cout << provenance << " -> " << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Friedkin-Johnsen opinion dynamics on information cascades"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::map<std::string, CommonFlags> flags;
    auto sub = [&](const std::string& name, const std::string& help) {
        CLI::App* s = app.add_subcommand(name, help);
        flags[name].add(*s);
        return s;
    };

    bool remap = false;
    sub("gen-graph", "write a graph as an edge list")->add_flag("--remap", remap, "also write remap.csv");
    sub("solve-fj", "FJ equilibrium for the configured graph, susceptibility and opinions");
    std::string log_path;
    sub("simulate-fjc", "one FJC run over the seed schedule")
        ->add_option("--log", log_path, "JSON-lines log of every opinion update");
    sub("replay-trace", "replay a reshare trace and compare it with FJC and FJ");
    sub("estimate-theta", "per-node reshare probabilities from a trace");
    sub("polarizing-vector", "write the requested polarizing initial opinions");
    sub("experiment", "Monte Carlo FJC runs against the FJ baseline");

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, f] : flags) {
            if (!app.got_subcommand(name)) continue;
            const ExperimentConfig cfg = f.resolve();
            if (name == "gen-graph") return cmd_gen_graph(cfg, remap);
            if (name == "solve-fj") return cmd_solve_fj(cfg);
            if (name == "simulate-fjc") return cmd_simulate_fjc(cfg, log_path);
            if (name == "replay-trace") return run_report(cfg, true);
            if (name == "estimate-theta") return cmd_estimate_theta(cfg);
            if (name == "polarizing-vector") return cmd_polarizing_vector(cfg);
            if (name == "experiment") return run_report(cfg, false);
        }
    } catch (const std::exception& e) {
        std::cerr << "fjc: error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
