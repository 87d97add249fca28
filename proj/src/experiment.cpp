#include "fjc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "fjc/datasets.hpp"
#include "fjc/error.hpp"
#include "fjc/version.hpp"
#include "number_format.hpp"

namespace fjc {

using detail::write_number;

namespace {

constexpr std::uint64_t kScheduleStream = 0x8000000000000000ULL;
constexpr std::uint64_t kGeneratorStream = 0x8000000000000001ULL;

}  // namespace

std::string_view to_string(LambdaStrategy s) {
    switch (s) {
        case LambdaStrategy::proportional: return "proportional";
        case LambdaStrategy::inverse: return "inverse";
        case LambdaStrategy::uniform: return "uniform";
    }
    return "?";
}

std::string_view to_string(InitialOpinions s) {
    switch (s) {
        case InitialOpinions::b1: return "b1";
        case InitialOpinions::b2_unit: return "b2";
        case InitialOpinions::b2_box: return "b2t";
        case InitialOpinions::heuristic: return "heuristic";
        case InitialOpinions::file: return "file";
    }
    return "?";
}

LambdaStrategy parse_lambda_strategy(std::string_view text) {
    if (text == "proportional") return LambdaStrategy::proportional;
    if (text == "inverse") return LambdaStrategy::inverse;
    if (text == "uniform") return LambdaStrategy::uniform;
    throw InvalidArgument("unknown susceptibility strategy \"" + std::string(text) +
                          "\" (expected proportional, inverse or uniform)");
}

InitialOpinions parse_initial_opinions(std::string_view text) {
    if (text == "b1") return InitialOpinions::b1;
    if (text == "b2") return InitialOpinions::b2_unit;
    if (text == "b2t") return InitialOpinions::b2_box;
    if (text == "heuristic") return InitialOpinions::heuristic;
    if (text == "file") return InitialOpinions::file;
    throw InvalidArgument("unknown initial opinions \"" + std::string(text) +
                          "\" (expected b1, b2, b2t, heuristic or file)");
}

Eigen::VectorXd rescale_to_open_unit(std::span<const double> values, double eps) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
    if (values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double span = *hi - *lo;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] =
            span > 0.0 ? eps + (1.0 - 2.0 * eps) * (values[i] - *lo) / span : 0.5;
    }
    return out;
}

Susceptibility assign_susceptibility(const SocialGraph& g, LambdaStrategy strategy, double constant,
                                     const PageRankOptions& pr) {
    switch (strategy) {
        case LambdaStrategy::uniform:
            return Susceptibility::uniform(g.node_count(), constant);
        case LambdaStrategy::proportional:
            return Susceptibility(rescale_to_open_unit(pagerank(g, pr)));
        case LambdaStrategy::inverse: {
            auto p = pagerank(g, pr);
            for (double& x : p) x = 1.0 / x;
            return Susceptibility(rescale_to_open_unit(p));
        }
    }
    throw InvalidArgument("unknown susceptibility strategy");
}

SeedSchedule select_seeds(const SocialGraph& g, std::size_t count, Rng& rng) {
    const std::size_t n = g.node_count();
    if (count > n) {
        throw InvalidArgument("cannot draw " + std::to_string(count) + " distinct seeds from " + std::to_string(n) +
                              " nodes");
    }
    std::vector<NodeId> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<NodeId>(i);
    // partial Fisher-Yates; the first `count` slots are the sample in draw order
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t pick = k + uniform_index(rng, n - k);
        std::swap(pool[k], pool[pick]);
    }
    pool.resize(count);
    return {std::move(pool)};
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size()) {
        throw InvalidArgument("invalid value \"" + std::string(value) + "\" for " + std::string(key));
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw InvalidArgument("invalid boolean \"" + std::string(value) + "\" for " + std::string(key));
}

void check_probability(const char* key, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(key) + " must lie in [0,1]");
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "graph") cfg.graph = value;
    else if (key == "directed") cfg.directed = parse_bool(key, value);
    else if (key == "lscc") cfg.lscc = parse_bool(key, value);
    else if (key == "lambda_strategy") cfg.lambda_strategy = parse_lambda_strategy(value);
    else if (key == "lambda") {
        cfg.lambda = parse_number<double>(key, value);
        check_probability("lambda", cfg.lambda);
    } else if (key == "init_opinions") cfg.init_opinions = parse_initial_opinions(value);
    else if (key == "init_file") cfg.init_file = value;
    else if (key == "b2_radius") cfg.b2_radius = parse_number<double>(key, value);
    else if (key == "heuristic_alpha") cfg.heuristic_alpha = parse_number<double>(key, value);
    else if (key == "theta") {
        if (value == "trace") {
            cfg.theta_from_trace = true;
        } else {
            cfg.theta = parse_number<double>(key, value);
            check_probability("theta", cfg.theta);
            cfg.theta_from_trace = false;
        }
    } else if (key == "theta_fallback") {
        cfg.theta_fallback = parse_number<double>(key, value);
        check_probability("theta_fallback", cfg.theta_fallback);
    } else if (key == "trace") cfg.trace = value;
    else if (key == "top_cascades") cfg.top_cascades = parse_number<std::size_t>(key, value);
    else if (key == "seeds") cfg.seeds = parse_number<std::size_t>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "runs") {
        cfg.runs = parse_number<std::size_t>(key, value);
        if (cfg.runs < 1) throw InvalidArgument("runs must be at least 1");
    } else if (key == "eq10_mode") cfg.eq10_mode = parse_update_mode(value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "threads") cfg.threads = parse_number<std::size_t>(key, value);
    else if (key == "keep_runs") cfg.keep_runs = parse_bool(key, value);
    else if (key == "per_run_ecdf") cfg.per_run_ecdf = parse_bool(key, value);
    else if (key == "influence_map_cap") cfg.influence_map_cap = parse_number<Eigen::Index>(key, value);
    else throw InvalidArgument("unknown configuration key \"" + std::string(key) + "\"");
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        try {
            set_config_value(cfg, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    return parse_config(in);
}

std::string format_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    auto num = [&](double v) {
        write_number(out, v);
        out << '\n';
    };
    out << "graph = " << cfg.graph << '\n';
    out << "directed = " << (cfg.directed ? "true" : "false") << '\n';
    out << "lscc = " << (cfg.lscc ? "true" : "false") << '\n';
    out << "lambda_strategy = " << to_string(cfg.lambda_strategy) << '\n';
    out << "lambda = ";
    num(cfg.lambda);
    out << "init_opinions = " << to_string(cfg.init_opinions) << '\n';
    if (!cfg.init_file.empty()) out << "init_file = " << cfg.init_file << '\n';
    out << "b2_radius = ";
    num(cfg.b2_radius);
    out << "heuristic_alpha = ";
    num(cfg.heuristic_alpha);
    if (cfg.theta_from_trace) {
        out << "theta = trace\n";
    } else {
        out << "theta = ";
        num(cfg.theta);
    }
    out << "theta_fallback = ";
    num(cfg.theta_fallback);
    if (!cfg.trace.empty()) out << "trace = " << cfg.trace << '\n';
    out << "top_cascades = " << cfg.top_cascades << '\n';
    out << "seeds = " << cfg.seeds << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "runs = " << cfg.runs << '\n';
    out << "eq10_mode = " << to_string(cfg.eq10_mode) << '\n';
    out << "out_dir = " << cfg.out_dir << '\n';
    out << "keep_runs = " << (cfg.keep_runs ? "true" : "false") << '\n';
    out << "per_run_ecdf = " << (cfg.per_run_ecdf ? "true" : "false") << '\n';
    out << "influence_map_cap = " << cfg.influence_map_cap << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Setup

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) parts.push_back(item);
    return parts;
}

LoadedGraph identity_ids(SocialGraph g) {
    LoadedGraph out{std::move(g), {}};
    out.original_ids.resize(out.graph.node_count());
    for (std::size_t i = 0; i < out.original_ids.size(); ++i) out.original_ids[i] = i;
    return out;
}

LoadedGraph compose(const LoadedGraph& parent, Subgraph sub) {
    LoadedGraph out{std::move(sub.graph), {}};
    for (NodeId old : sub.new_to_old) out.original_ids.push_back(parent.original_ids[old]);
    return out;
}

// Graph before LSCC extraction.
LoadedGraph source_graph(const ExperimentConfig& cfg) {
    const auto parts = split(cfg.graph, ':');
    if (cfg.graph == "karate") return identity_ids(datasets::karate_club());
    if (!parts.empty() && parts[0] == "ba" && (parts.size() == 3 || parts.size() == 4)) {
        const auto n = parse_number<NodeId>("ba nodes", parts[1]);
        const auto k = parse_number<NodeId>("ba k", parts[2]);
        Rng rng = parts.size() == 4 ? Rng(parse_number<std::uint64_t>("ba seed", parts[3]))
                                    : stream_rng(cfg.seed, kGeneratorStream);
        return identity_ids(generate_barabasi_albert(n, k, rng));
    }
    if (!parts.empty() && parts[0] == "path" && parts.size() == 2) {
        return identity_ids(datasets::path(parse_number<NodeId>("path nodes", parts[1])));
    }
    if (!parts.empty() && parts[0] == "cycle" && parts.size() == 2) {
        return identity_ids(datasets::directed_cycle(parse_number<NodeId>("cycle nodes", parts[1])));
    }
    std::ifstream in(cfg.graph);
    if (!in) throw Error("cannot open graph file \"" + cfg.graph + "\"");
    return load_edge_list(in, cfg.directed);
}

void require_followees(const SocialGraph& g, const std::vector<std::uint64_t>& ids) {
    for (NodeId i = 0; i < g.node_count(); ++i) {
        if (g.out_degree(i) == 0) {
            throw InvalidArgument("node " + std::to_string(ids[i]) +
                                  " follows nobody, so its influence row is undefined; use lscc = true or "
                                  "repair the edge list");
        }
    }
}

}  // namespace

LoadedGraph build_graph(const ExperimentConfig& cfg) {
    LoadedGraph g = source_graph(cfg);
    if (cfg.lscc) g = compose(g, largest_strongly_connected_component(g.graph));
    return g;
}

Opinions initial_opinions(const ExperimentConfig& cfg, const InfluenceMatrix& w, const Susceptibility& lambda,
                          std::string* provenance) {
    std::ostringstream prov;
    Opinions u;
    if (cfg.init_opinions == InitialOpinions::file) {
        std::ifstream in(cfg.init_file);
        if (!in) throw Error("cannot open opinion file \"" + cfg.init_file + "\"");
        u = read_opinions_csv(in);
        if (u.size() != w.size()) throw InvalidArgument("opinion file length does not match the graph");
        prov << "file " << cfg.init_file;
    } else {
        const InfluenceMap h = influence_map(w, lambda, cfg.influence_map_cap);
        switch (cfg.init_opinions) {
            case InitialOpinions::b1:
                u = polarizing_b1(h);
                prov << "b1: vertex of the unit L1 ball maximizing ||H u||_1";
                break;
            case InitialOpinions::b2_unit:
                u = polarizing_b2(h, 1.0);
                prov << "b2: top right singular vector of H, radius 1";
                break;
            case InitialOpinions::b2_box: {
                const double radius = cfg.b2_radius > 0.0 ? cfg.b2_radius : box_radius(h);
                u = polarizing_b2(h, radius);
                prov << "b2t: top right singular vector of H, radius ";
                write_number(prov, radius);
                break;
            }
            case InitialOpinions::heuristic:
                u = polarizing_heuristic(h, cfg.heuristic_alpha);
                prov << "heuristic: thresholded signs of the top singular vector, alpha ";
                write_number(prov, cfg.heuristic_alpha);
                break;
            case InitialOpinions::file: break;
        }
    }
    if (provenance) *provenance = prov.str();
    return u;
}

ExperimentSetup prepare_experiment(const ExperimentConfig& cfg) {
    LoadedGraph full = source_graph(cfg);
    std::optional<ReshareTrace> trace;
    if (!cfg.trace.empty()) {
        std::ifstream in(cfg.trace);
        if (!in) throw Error("cannot open trace file \"" + cfg.trace + "\"");
        trace = load_trace_csv(in, full.original_ids);
    }
    LoadedGraph graph = std::move(full);
    if (cfg.lscc) {
        Subgraph sub = largest_strongly_connected_component(graph.graph);
        if (trace) trace = restrict_trace(*trace, sub.old_to_new);
        graph = compose(graph, std::move(sub));
    }
    if (trace && cfg.top_cascades > 0) {
        TraceSubgraph ts = top_cascades_subgraph(graph.graph, *trace, cfg.top_cascades);
        trace = std::move(ts.trace);
        graph = compose(graph, std::move(ts.subgraph));
    }
    require_followees(graph.graph, graph.original_ids);

    InfluenceMatrix w = influence_matrix(graph.graph);
    Susceptibility lambda = assign_susceptibility(graph.graph, cfg.lambda_strategy, cfg.lambda);
    std::string provenance;
    Opinions u = initial_opinions(cfg, w, lambda, &provenance);

    SeedSchedule schedule;
    if (trace) {
        schedule.roots = trace->post_sources();
    } else {
        Rng rng = stream_rng(cfg.seed, kScheduleStream);
        schedule = select_seeds(graph.graph, cfg.seeds, rng);
    }

    std::optional<ThetaEstimate> estimate;
    if (cfg.theta_from_trace) {
        if (!trace) throw InvalidArgument("theta = trace needs a trace file");
        estimate = estimate_theta(*trace, graph.graph, cfg.theta_fallback);
    }
    ReshareModel model = estimate ? estimate->model() : ReshareModel::global(cfg.theta);

    return ExperimentSetup{std::move(graph), std::move(w), std::move(lambda), std::move(u), std::move(provenance),
                           std::move(schedule), std::move(model), std::move(trace), std::move(estimate)};
}

// ---------------------------------------------------------------------------
// ECDF

double Ecdf::operator()(double x) const {
    const auto it = std::upper_bound(values.begin(), values.end(), x);
    if (it == values.begin()) return 0.0;
    return cumulative[static_cast<std::size_t>(it - values.begin()) - 1];
}

Ecdf make_ecdf(std::vector<double> samples) {
    Ecdf f;
    if (samples.empty()) return f;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (k + 1 < samples.size() && samples[k + 1] == samples[k]) continue;
        f.values.push_back(samples[k]);
        f.cumulative.push_back(static_cast<double>(k + 1) / n);
    }
    f.cumulative.back() = 1.0;
    return f;
}

Ecdf opinion_shift_ecdf(const Opinions& u, std::span<const Opinions> finals) {
    std::vector<double> shifts;
    shifts.reserve(static_cast<std::size_t>(u.size()) * finals.size());
    for (const auto& x : finals) {
        if (x.size() != u.size()) throw InvalidArgument("final opinion vector length mismatch");
        for (Eigen::Index i = 0; i < u.size(); ++i) shifts.push_back(x[i] - u[i]);
    }
    return make_ecdf(std::move(shifts));
}

double ks_distance(const Ecdf& f, const Ecdf& g) {
    double best = 0.0;
    for (double x : f.values) best = std::max(best, std::abs(f(x) - g(x)));
    for (double x : g.values) best = std::max(best, std::abs(f(x) - g(x)));
    return best;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct MonteCarloResult {
    std::vector<Opinions> finals;
    std::vector<CascadeRecord> first_cascades;
};

MonteCarloResult monte_carlo(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
    const FjcSystem system(setup.graph.graph, setup.w, setup.lambda);
    MonteCarloResult out;
    out.finals.resize(cfg.runs);
    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cfg.runs);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    FjcOptions opts;
    opts.mode = cfg.eq10_mode;

    auto worker = [&] {
        for (std::size_t k = next++; k < cfg.runs; k = next++) {
            try {
                Rng rng = stream_rng(cfg.seed, k);
                FjcRunRecord rec = run_fjc(system, setup.u, setup.schedule, setup.model, rng, opts);
                out.finals[k] = std::move(rec.final);
                if (k == 0) out.first_cascades = std::move(rec.cascades);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg.runs;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

double mean_abs_shift(const Opinions& u, std::span<const Opinions> finals) {
    double total = 0.0;
    for (const auto& x : finals) total += (x - u).lpNorm<1>();
    return total / (static_cast<double>(u.size()) * static_cast<double>(finals.size()));
}

AggregateReport aggregate(const ExperimentConfig& cfg, const ExperimentSetup& setup, MonteCarloResult mc) {
    AggregateReport r;
    r.u = setup.u;
    r.fj = FjSolver(setup.w, setup.lambda).fixed_point(setup.u);
    r.fjc_mean = Opinions::Zero(setup.u.size());
    for (const auto& x : mc.finals) r.fjc_mean += x;
    r.fjc_mean /= static_cast<double>(mc.finals.size());

    r.fj_ecdf = opinion_shift_ecdf(r.u, std::span(&r.fj, 1));
    r.fjc_ecdf = opinion_shift_ecdf(r.u, mc.finals);
    if (cfg.per_run_ecdf) {
        for (const auto& x : mc.finals) r.fjc_run_ecdfs.push_back(opinion_shift_ecdf(r.u, std::span(&x, 1)));
    }
    for (auto m : {PolarizationMetric::p2, PolarizationMetric::p3, PolarizationMetric::p4}) {
        PolarizationRow row{m, polarization(m, r.u), polarization(m, r.fj), 0.0};
        for (const auto& x : mc.finals) row.fjc_mean += polarization(m, x);
        row.fjc_mean /= static_cast<double>(mc.finals.size());
        r.polarization.push_back(row);
    }
    r.mean_abs_shift_fj = mean_abs_shift(r.u, std::span(&r.fj, 1));
    r.mean_abs_shift_fjc = mean_abs_shift(r.u, mc.finals);
    r.first_run_cascades = std::move(mc.first_cascades);
    if (cfg.keep_runs) r.runs = std::move(mc.finals);

    r.config_text = format_config(cfg);
    ExperimentConfig hashed = cfg;
    hashed.out_dir.clear();
    hashed.threads = 0;
    r.config_hash = fnv1a_hex(format_config(hashed));
    r.schedule = setup.schedule;
    r.node_count = setup.graph.graph.node_count();
    r.edge_count = setup.graph.graph.edge_count();
    r.theta = setup.theta_estimate;
    return r;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

AggregateReport run_experiment(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.runs < 1) throw InvalidArgument("runs must be at least 1");
    AggregateReport r = aggregate(cfg, setup, monte_carlo(cfg, setup));
    r.wall_seconds = seconds_since(start);
    return r;
}

AggregateReport run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    AggregateReport r = run_experiment(cfg, prepare_experiment(cfg));
    r.wall_seconds = seconds_since(start);
    return r;
}

AggregateReport replay_experiment(const ExperimentConfig& cfg, const ExperimentSetup& setup) {
    const auto start = std::chrono::steady_clock::now();
    if (!setup.trace) throw InvalidArgument("replay needs a trace");
    ExperimentSetup fjc_setup = setup;
    if (!fjc_setup.theta_estimate) {
        fjc_setup.theta_estimate = estimate_theta(*setup.trace, setup.graph.graph, cfg.theta_fallback);
    }
    fjc_setup.model = fjc_setup.theta_estimate->model();
    fjc_setup.schedule.roots = setup.trace->post_sources();

    AggregateReport r = aggregate(cfg, fjc_setup, monte_carlo(cfg, fjc_setup));

    const FjcSystem system(setup.graph.graph, setup.w, setup.lambda);
    FjcOptions opts;
    opts.mode = cfg.eq10_mode;
    const FjcRunRecord real = replay_trace(system, setup.u, *setup.trace, opts);
    r.real = real.final;
    r.real_ecdf = opinion_shift_ecdf(r.u, std::span(&*r.real, 1));
    r.mean_abs_shift_real = mean_abs_shift(r.u, std::span(&*r.real, 1));
    for (auto& row : r.polarization) row.real = polarization(row.metric, *r.real);
    r.ks_fjc_real = ks_distance(r.fjc_ecdf, *r.real_ecdf);
    r.ks_fj_real = ks_distance(r.fj_ecdf, *r.real_ecdf);
    r.wall_seconds = seconds_since(start);
    return r;
}

AggregateReport replay_experiment(const ExperimentConfig& cfg) {
    if (cfg.trace.empty()) throw InvalidArgument("replay needs a trace file (trace = ...)");
    return replay_experiment(cfg, prepare_experiment(cfg));
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_ecdf_rows(std::ostream& out, std::string_view label, const Ecdf& f) {
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        out << label << ',';
        write_number(out, f.values[k]);
        out << ',';
        write_number(out, f.cumulative[k]);
        out << '\n';
    }
}

}  // namespace

void write_report(const AggregateReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "shifts_ecdf.csv");
        out << "model,shift,cumulative\n";
        write_ecdf_rows(out, "FJ", r.fj_ecdf);
        write_ecdf_rows(out, "FJC", r.fjc_ecdf);
        if (r.real_ecdf) write_ecdf_rows(out, "Real", *r.real_ecdf);
    }
    if (!r.fjc_run_ecdfs.empty()) {
        auto out = open_out(dir / "shifts_ecdf_runs.csv");
        out << "run,shift,cumulative\n";
        for (std::size_t k = 0; k < r.fjc_run_ecdfs.size(); ++k) write_ecdf_rows(out, std::to_string(k), r.fjc_run_ecdfs[k]);
    }
    {
        auto out = open_out(dir / "polarization.csv");
        out << "metric,initial,fj,fjc_mean,delta_fj,delta_fjc";
        if (r.real) out << ",real,delta_real";
        out << '\n';
        for (const auto& row : r.polarization) {
            out << to_string(row.metric);
            for (double v : {row.initial, row.fj, row.fjc_mean, row.delta_fj(), row.delta_fjc()}) {
                out << ',';
                write_number(out, v);
            }
            if (r.real) {
                for (double v : {row.real, row.delta_real()}) {
                    out << ',';
                    write_number(out, v);
                }
            }
            out << '\n';
        }
    }
    {
        auto out = open_out(dir / "final_opinions.csv");
        out << "node,u,fj,fjc_mean" << (r.real ? ",real" : "") << '\n';
        for (Eigen::Index i = 0; i < r.u.size(); ++i) {
            out << i;
            for (double v : {r.u[i], r.fj[i], r.fjc_mean[i]}) {
                out << ',';
                write_number(out, v);
            }
            if (r.real) {
                out << ',';
                write_number(out, (*r.real)[i]);
            }
            out << '\n';
        }
    }
    if (!r.runs.empty()) {
        auto out = open_out(dir / "run_opinions.csv");
        out << "run,node,x_final\n";
        for (std::size_t k = 0; k < r.runs.size(); ++k) {
            for (Eigen::Index i = 0; i < r.runs[k].size(); ++i) {
                out << k << ',' << i << ',';
                write_number(out, r.runs[k][i]);
                out << '\n';
            }
        }
    }
    {
        auto out = open_out(dir / "cascades.csv");
        out << "index,root,size,depth\n";
        for (const auto& c : r.first_run_cascades) out << c.index << ',' << c.root << ',' << c.size << ',' << c.depth << '\n';
    }
    if (r.theta) {
        auto out = open_out(dir / "theta_report.csv");
        write_theta_report_csv(out, *r.theta);
        auto summary = open_out(dir / "theta_summary.csv");
        write_theta_summary_csv(summary, r.theta->summary);
    }
    if (r.real) {
        auto out = open_out(dir / "fidelity.csv");
        out << "comparison,ks_distance,mean_abs_shift\n";
        out << "FJC_vs_Real,";
        write_number(out, r.ks_fjc_real);
        out << ',';
        write_number(out, r.mean_abs_shift_fjc);
        out << "\nFJ_vs_Real,";
        write_number(out, r.ks_fj_real);
        out << ',';
        write_number(out, r.mean_abs_shift_fj);
        out << '\n';
    }
    {
        auto out = open_out(dir / "manifest.txt");
        out << "status = ok\n";
        out << "fjc_version = " << kVersion << '\n';
        out << "config_hash = " << r.config_hash << '\n';
        out << "nodes = " << r.node_count << '\n';
        out << "edges = " << r.edge_count << '\n';
        out << "schedule =";
        for (NodeId s : r.schedule.roots) out << ' ' << s;
        out << '\n';
        out << "wall_seconds = " << r.wall_seconds << '\n';
        out << "# configuration\n" << r.config_text;
    }
}

void write_failure_manifest(const std::filesystem::path& dir, const std::string& config_text,
                            const std::string& error) {
    std::filesystem::create_directories(dir);
    auto out = open_out(dir / "manifest.txt");
    out << "status = failed\n";
    out << "error = " << error << '\n';
    out << "fjc_version = " << kVersion << '\n';
    out << "# configuration\n" << config_text;
}

}  // namespace fjc
