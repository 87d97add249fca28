// Python bindings for the opinion-dynamics core.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "fjc/datasets.hpp"
#include "fjc/error.hpp"
#include "fjc/experiment.hpp"
#include "fjc/version.hpp"

namespace py = pybind11;
using namespace fjc;

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

SocialGraph make_graph(NodeId n, const EdgeList& edges) { return SocialGraph(n, edges); }

Susceptibility lambda_of(const SocialGraph& g, const py::object& lambda) {
    if (py::isinstance<py::float_>(lambda) || py::isinstance<py::int_>(lambda))
        return Susceptibility::uniform(g.node_count(), lambda.cast<double>());
    return Susceptibility(lambda.cast<Eigen::VectorXd>());
}

ReshareModel model_of(const py::object& theta) {
    if (py::isinstance<py::float_>(theta) || py::isinstance<py::int_>(theta))
        return ReshareModel::global(theta.cast<double>());
    return ReshareModel::per_node(theta.cast<std::vector<double>>(), 0.0);
}

ExperimentConfig config_of(const py::dict& options) {
    ExperimentConfig cfg;
    for (const auto& [key, value] : options) {
        std::string text = py::isinstance<py::bool_>(value) ? (value.cast<bool>() ? "true" : "false")
                                                             : py::str(value).cast<std::string>();
        set_config_value(cfg, key.cast<std::string>(), text);
    }
    return cfg;
}

py::dict report_dict(const AggregateReport& r) {
    py::dict d;
    d["u"] = r.u;
    d["fj"] = r.fj;
    d["fjc_mean"] = r.fjc_mean;
    if (r.real) d["real"] = *r.real;
    py::dict pol;
    for (const auto& row : r.polarization) {
        py::dict m;
        m["initial"] = row.initial;
        m["fj"] = row.fj;
        m["fjc_mean"] = row.fjc_mean;
        m["delta_fj"] = row.delta_fj();
        m["delta_fjc"] = row.delta_fjc();
        if (r.real) m["real"] = row.real;
        pol[py::str(std::string(to_string(row.metric)))] = m;
    }
    d["polarization"] = pol;
    d["mean_abs_shift_fj"] = r.mean_abs_shift_fj;
    d["mean_abs_shift_fjc"] = r.mean_abs_shift_fjc;
    if (r.real) {
        d["ks_fjc_real"] = r.ks_fjc_real;
        d["ks_fj_real"] = r.ks_fj_real;
    }
    d["schedule"] = r.schedule.roots;
    d["config_hash"] = r.config_hash;
    d["nodes"] = r.node_count;
    d["edges"] = r.edge_count;
    return d;
}

}  // namespace

PYBIND11_MODULE(_fjc, m) {
    m.doc() = "Friedkin-Johnsen opinion dynamics over information cascades";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<SocialGraph>(m, "Graph", "Directed follow graph; edge (i, j) means i follows j.")
        .def(py::init(&make_graph), py::arg("node_count"), py::arg("edges"))
        .def_property_readonly("node_count", &SocialGraph::node_count)
        .def_property_readonly("edge_count", &SocialGraph::edge_count)
        .def("followees", [](const SocialGraph& g, NodeId i) {
            if (i >= g.node_count()) throw InvalidArgument("node out of range");
            auto s = g.followees(i);
            return std::vector<NodeId>(s.begin(), s.end());
        })
        .def("followers", [](const SocialGraph& g, NodeId i) {
            if (i >= g.node_count()) throw InvalidArgument("node out of range");
            auto s = g.followers(i);
            return std::vector<NodeId>(s.begin(), s.end());
        })
        .def("edges", &SocialGraph::edges)
        .def("has_edge", &SocialGraph::has_edge)
        .def("is_symmetric", &SocialGraph::is_symmetric)
        .def("__repr__", [](const SocialGraph& g) {
            return "<Graph nodes=" + std::to_string(g.node_count()) + " edges=" + std::to_string(g.edge_count()) + ">";
        });

    m.def("karate_club", &datasets::karate_club);
    m.def("path_graph", &datasets::path, py::arg("n"));
    m.def("cycle_graph", &datasets::directed_cycle, py::arg("n"));
    m.def(
        "barabasi_albert",
        [](NodeId n, NodeId k, std::uint64_t seed) {
            Rng rng(seed);
            return generate_barabasi_albert(n, k, rng);
        },
        py::arg("n"), py::arg("k"), py::arg("seed") = 1);
    m.def(
        "load_edge_list",
        [](const std::filesystem::path& path, bool directed) {
            std::ifstream in(path);
            if (!in) throw InvalidArgument("cannot open " + path.string());
            LoadedGraph lg = load_edge_list(in, directed);
            return py::make_tuple(std::move(lg.graph), lg.original_ids);
        },
        py::arg("path"), py::arg("directed") = false, "Returns (graph, original_ids).");
    m.def(
        "largest_scc",
        [](const SocialGraph& g) {
            Subgraph s = largest_strongly_connected_component(g);
            return py::make_tuple(std::move(s.graph), s.new_to_old);
        },
        "Returns (subgraph, original node of each subgraph node).");
    m.def("pagerank", [](const SocialGraph& g) { return pagerank(g); });
    m.def(
        "influence_matrix", [](const SocialGraph& g) { return Eigen::MatrixXd(influence_matrix(g).weights); },
        "Dense row-normalized W.");

    m.def(
        "susceptibility",
        [](const SocialGraph& g, const std::string& strategy, double constant) {
            return assign_susceptibility(g, parse_lambda_strategy(strategy), constant).values();
        },
        py::arg("graph"), py::arg("strategy") = "uniform", py::arg("constant") = 0.6);

    m.def(
        "fj_equilibrium",
        [](const SocialGraph& g, const py::object& lambda, const Opinions& u) {
            return fj_fixed_point(influence_matrix(g), lambda_of(g, lambda), u);
        },
        py::arg("graph"), py::arg("lam"), py::arg("u"), "Closed-form FJ equilibrium (I - Lambda W)^-1 (I - Lambda) u.");
    m.def(
        "fj_iterate",
        [](const SocialGraph& g, const py::object& lambda, const Opinions& u, double tol, int max_iter) {
            const IterationResult r = fj_iterate_until(influence_matrix(g), lambda_of(g, lambda), u, tol, max_iter);
            return py::make_tuple(r.x, r.iterations);
        },
        py::arg("graph"), py::arg("lam"), py::arg("u"), py::arg("tol") = 1e-12, py::arg("max_iter") = 100000);
    m.def(
        "fj_async",
        [](const SocialGraph& g, const py::object& lambda, const Opinions& u, std::uint64_t steps, std::uint64_t seed) {
            const Susceptibility l = lambda_of(g, lambda);
            Rng rng(seed);
            const AsyncResult r = fj_async_run(g, gossip_parameters(g, influence_matrix(g), l), u, steps, rng);
            return py::make_tuple(r.final, r.time_average);
        },
        py::arg("graph"), py::arg("lam"), py::arg("u"), py::arg("steps"), py::arg("seed") = 1,
        "Pairwise gossip; returns (final state, time average).");

    m.def(
        "sample_cascade",
        [](const SocialGraph& g, NodeId root, const py::object& theta, std::uint64_t seed) {
            Rng rng(seed);
            const CascadeRealization c = sample_cascade(g, root, model_of(theta), rng);
            py::list layers, preds;
            for (std::size_t l = 0; l < c.layer_count(); ++l) {
                auto s = c.layer(l);
                layers.append(std::vector<NodeId>(s.begin(), s.end()));
            }
            py::dict phi;
            for (std::size_t p = 1; p < c.size(); ++p) {
                auto s = c.predecessors_at(p);
                phi[py::int_(c.nodes[p])] = std::vector<NodeId>(s.begin(), s.end());
            }
            py::dict d;
            d["layers"] = layers;
            d["reshared"] = std::vector<bool>(c.reshared.begin(), c.reshared.end());
            d["nodes"] = c.nodes;
            d["predecessors"] = phi;
            return d;
        },
        py::arg("graph"), py::arg("root"), py::arg("theta"), py::arg("seed") = 1);
    m.def("expected_cascade_size", &expected_cascade_size_bruteforce, py::arg("graph"), py::arg("root"),
          py::arg("theta"), py::arg("max_free") = 20, "Exact expectation by enumeration (small graphs).");

    m.def(
        "run_fjc",
        [](const SocialGraph& g, const py::object& lambda, const Opinions& u, std::vector<NodeId> roots,
           const py::object& theta, std::uint64_t seed, const std::string& mode) {
            Rng rng(seed);
            FjcOptions opts;
            opts.mode = parse_update_mode(mode);
            return run_fjc(g, influence_matrix(g), lambda_of(g, lambda), u, SeedSchedule{std::move(roots)},
                           model_of(theta), rng, opts)
                .final;
        },
        py::arg("graph"), py::arg("lam"), py::arg("u"), py::arg("roots"), py::arg("theta"), py::arg("seed") = 1,
        py::arg("mode") = "convex", "One FJC run over the given post sources; returns the final opinions.");
    m.def(
        "replay_trace",
        [](const SocialGraph& g, const py::object& lambda, const Opinions& u, const std::vector<py::tuple>& events) {
            std::vector<ReshareEvent> ev;
            for (const auto& t : events) ev.push_back({t[0].cast<double>(), t[1].cast<std::string>(), t[2].cast<NodeId>()});
            const FjcSystem system(g, influence_matrix(g), lambda_of(g, lambda));
            return replay_trace(system, u, ReshareTrace(std::move(ev))).final;
        },
        py::arg("graph"), py::arg("lam"), py::arg("u"), py::arg("events"),
        "Events are (timestamp_ms, post_id, node) tuples.");
    m.def(
        "estimate_theta",
        [](const SocialGraph& g, const std::vector<py::tuple>& events, double fallback) {
            std::vector<ReshareEvent> ev;
            for (const auto& t : events) ev.push_back({t[0].cast<double>(), t[1].cast<std::string>(), t[2].cast<NodeId>()});
            const ThetaEstimate est = estimate_theta(ReshareTrace(std::move(ev)), g, fallback);
            py::dict d;
            d["theta"] = est.theta;
            d["seen"] = est.seen;
            d["reshared"] = est.reshared;
            d["pooled"] = est.pooled();
            d["mean"] = est.summary.mean;
            d["median"] = est.summary.median;
            return d;
        },
        py::arg("graph"), py::arg("events"), py::arg("fallback") = 0.0);

    m.def("p2", &p2);
    m.def("p3", &p3);
    m.def("p4", &p4);
    m.def(
        "polarizing_vector",
        [](const SocialGraph& g, const py::object& lambda, const std::string& kind, double radius, double alpha) {
            const InfluenceMap h = influence_map(influence_matrix(g), lambda_of(g, lambda));
            if (kind == "b1") return polarizing_b1(h);
            if (kind == "b2") return polarizing_b2(h, radius > 0 ? radius : 1.0);
            if (kind == "b2t") return polarizing_b2(h, radius > 0 ? radius : box_radius(h));
            if (kind == "heuristic") return polarizing_heuristic(h, alpha);
            throw InvalidArgument("unknown polarizing vector '" + kind + "'");
        },
        py::arg("graph"), py::arg("lam"), py::arg("kind") = "b2", py::arg("radius") = 0.0, py::arg("alpha") = 0.1);

    m.def(
        "run_experiment",
        [](const py::dict& options, const std::optional<std::filesystem::path>& out_dir) {
            const ExperimentConfig cfg = config_of(options);
            AggregateReport r;
            {
                py::gil_scoped_release release;
                r = cfg.trace.empty() ? run_experiment(cfg) : replay_experiment(cfg);
                if (out_dir) write_report(r, *out_dir);
            }
            return report_dict(r);
        },
        py::arg("options") = py::dict(), py::arg("out_dir") = py::none(),
        "Runs an experiment (a replay when 'trace' is set). Keys match the config file.");
    m.def(
        "format_config", [](const py::dict& options) { return format_config(config_of(options)); },
        py::arg("options") = py::dict());
}
