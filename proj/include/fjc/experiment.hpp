#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fjc/cascade.hpp"
#include "fjc/fj.hpp"
#include "fjc/fjc.hpp"
#include "fjc/graph.hpp"
#include "fjc/polarization.hpp"
#include "fjc/trace.hpp"

namespace fjc {

enum class LambdaStrategy { proportional, inverse, uniform };
enum class InitialOpinions { b1, b2_unit, b2_box, heuristic, file };

std::string_view to_string(LambdaStrategy s);
std::string_view to_string(InitialOpinions s);
LambdaStrategy parse_lambda_strategy(std::string_view text);
InitialOpinions parse_initial_opinions(std::string_view text);

/// Affine map of `values` onto [eps, 1 - eps]; all entries become 0.5 when
/// the values are constant.
Eigen::VectorXd rescale_to_open_unit(std::span<const double> values, double eps = 0.01);

/// proportional: rescaled PageRank; inverse: rescaled 1/PageRank;
/// uniform: constant.
Susceptibility assign_susceptibility(const SocialGraph& g, LambdaStrategy strategy, double constant = 0.6,
                                     const PageRankOptions& pr = {});

/// `count` distinct nodes drawn uniformly without replacement, in draw order.
SeedSchedule select_seeds(const SocialGraph& g, std::size_t count, Rng& rng);

/// Mirrors the flat "key = value" experiment file.
struct ExperimentConfig {
    /// Edge-list path, or a generator: "karate", "ba:N:K[:SEED]", "path:N", "cycle:N".
    std::string graph = "karate";
    bool directed = false;
    bool lscc = false;
    LambdaStrategy lambda_strategy = LambdaStrategy::uniform;
    double lambda = 0.6;
    InitialOpinions init_opinions = InitialOpinions::b2_unit;
    std::string init_file;
    /// Radius of B2(t); 0 picks the largest radius that stays inside [-1,1].
    double b2_radius = 0.0;
    double heuristic_alpha = 0.1;
    /// Global reshare probability, ignored when theta_from_trace is set.
    double theta = 0.5;
    bool theta_from_trace = false;
    double theta_fallback = 0.0;
    std::string trace;
    /// Replay only the largest posts of the trace on their connecting subgraph (0 = all).
    std::size_t top_cascades = 0;
    std::size_t seeds = 15;
    std::uint64_t seed = 1;
    std::size_t runs = 1000;
    UpdateMode eq10_mode = UpdateMode::convex;
    std::string out_dir = "out";
    /// 0 = hardware concurrency.
    std::size_t threads = 0;
    bool keep_runs = false;
    bool per_run_ecdf = false;
    Eigen::Index influence_map_cap = kDefaultInfluenceMapCap;
};

/// Throws ParseError on unknown keys or malformed values.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies one "key", "value" pair (same keys as the config file).
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);
/// Canonical text form, parseable by parse_config.
std::string format_config(const ExperimentConfig& cfg);

/// Graph named by cfg.graph (after LSCC extraction when requested).
LoadedGraph build_graph(const ExperimentConfig& cfg);

/// Everything shared by the Monte Carlo runs of one experiment.
struct ExperimentSetup {
    LoadedGraph graph;
    InfluenceMatrix w;
    Susceptibility lambda;
    Opinions u;
    std::string init_provenance;
    SeedSchedule schedule;
    ReshareModel model;
    std::optional<ReshareTrace> trace;
    std::optional<ThetaEstimate> theta_estimate;
};

/// Builds graph, W, Lambda, u, the frozen seed schedule and reshare model.
ExperimentSetup prepare_experiment(const ExperimentConfig& cfg);

/// Initial opinions of the requested kind for (W, Lambda).
Opinions initial_opinions(const ExperimentConfig& cfg, const InfluenceMatrix& w, const Susceptibility& lambda,
                          std::string* provenance = nullptr);

/// Right-continuous step function: cumulative[k] = fraction of samples <= values[k].
struct Ecdf {
    std::vector<double> values;
    std::vector<double> cumulative;

    double operator()(double x) const;
};

Ecdf make_ecdf(std::vector<double> samples);

/// Pooled shifts final_i - u_i over every vector in `finals` and every node.
Ecdf opinion_shift_ecdf(const Opinions& u, std::span<const Opinions> finals);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F(x) - G(x)|.
double ks_distance(const Ecdf& f, const Ecdf& g);

struct PolarizationRow {
    PolarizationMetric metric;
    double initial;
    double fj;
    double fjc_mean;  // mean over runs of Phi(x_final)
    double real = 0.0;

    double delta_fj() const noexcept { return fj - initial; }
    double delta_fjc() const noexcept { return fjc_mean - initial; }
    double delta_real() const noexcept { return real - initial; }
};

struct AggregateReport {
    Opinions u;
    Opinions fj;
    Opinions fjc_mean;
    std::optional<Opinions> real;           // replay only
    std::vector<Opinions> runs;             // per-run finals, when keep_runs
    std::vector<CascadeRecord> first_run_cascades;
    Ecdf fj_ecdf;
    Ecdf fjc_ecdf;
    std::optional<Ecdf> real_ecdf;
    std::vector<Ecdf> fjc_run_ecdfs;        // when per_run_ecdf
    std::vector<PolarizationRow> polarization;
    double mean_abs_shift_fj = 0.0;
    double mean_abs_shift_fjc = 0.0;
    double mean_abs_shift_real = 0.0;
    double ks_fjc_real = 0.0;
    double ks_fj_real = 0.0;
    std::optional<ThetaEstimate> theta;
    // metadata
    std::string config_text;
    std::string config_hash;
    SeedSchedule schedule;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    double wall_seconds = 0.0;
};

/// FJ baseline via the closed form plus cfg.runs independent FJC runs
/// (run k uses rng stream k of cfg.seed), aggregated in run order.
AggregateReport run_experiment(const ExperimentConfig& cfg);
AggregateReport run_experiment(const ExperimentConfig& cfg, const ExperimentSetup& setup);

/// Real (trace replay), FJC with trace-estimated per-node theta and the
/// trace's post sources as schedule, and FJ, on one shared (graph, Lambda, u).
AggregateReport replay_experiment(const ExperimentConfig& cfg);
AggregateReport replay_experiment(const ExperimentConfig& cfg, const ExperimentSetup& setup);

/// shifts_ecdf.csv, polarization.csv, final_opinions.csv, theta_report.csv
/// (replay), manifest.txt. CSV content depends only on the configuration.
void write_report(const AggregateReport& report, const std::filesystem::path& dir);

/// Marks a directory whose experiment aborted.
void write_failure_manifest(const std::filesystem::path& dir, const std::string& config_text,
                            const std::string& error);

}  // namespace fjc
