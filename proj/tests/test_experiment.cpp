#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fjc/datasets.hpp"
#include "fjc/error.hpp"
#include "fjc/experiment.hpp"
#include "support.hpp"

using namespace fjc;
using fjc::test::directed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fjc_test_experiment_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.graph = "karate";
    cfg.runs = 20;
    cfg.threads = 2;
    return cfg;
}

void check_ecdf_valid(const Ecdf& f) {
    REQUIRE_FALSE(f.values.empty());
    for (std::size_t k = 1; k < f.values.size(); ++k) {
        CHECK(f.values[k] > f.values[k - 1]);
        CHECK(f.cumulative[k] > f.cumulative[k - 1]);
    }
    CHECK(f.cumulative.front() > 0.0);
    CHECK(f.cumulative.back() == 1.0);
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("susceptibility strategies") {
    SUBCASE("uniform") {
        const auto l = assign_susceptibility(datasets::karate_club(), LambdaStrategy::uniform, 0.6);
        CHECK(l.values() == Eigen::VectorXd::Constant(34, 0.6));
    }
    SUBCASE("equal pagerank rescales to one half") {
        const auto l = assign_susceptibility(datasets::directed_cycle(6), LambdaStrategy::proportional);
        CHECK(l.values() == Eigen::VectorXd::Constant(6, 0.5));
    }
    SUBCASE("star hub gets the top of the range") {
        // leaves follow the hub and the hub follows one leaf
        const SocialGraph g = directed(4, {{1, 0}, {2, 0}, {3, 0}, {0, 1}});
        const auto p = assign_susceptibility(g, LambdaStrategy::proportional);
        CHECK(p[0] == doctest::Approx(0.99));
        const auto inv = assign_susceptibility(g, LambdaStrategy::inverse);
        CHECK(inv[0] == doctest::Approx(0.01));
        for (Eigen::Index i = 0; i < 4; ++i) {
            CHECK(p[i] >= 0.01 - 1e-15);
            CHECK(p[i] <= 0.99 + 1e-15);
        }
    }
    SUBCASE("pure hub star") {
        const SocialGraph g = directed(4, {{1, 0}, {2, 0}, {3, 0}});
        const auto p = assign_susceptibility(g, LambdaStrategy::proportional);
        CHECK(p[0] == doctest::Approx(0.99));
        for (Eigen::Index i = 1; i < 4; ++i) CHECK(p[i] == doctest::Approx(0.01));
    }
    SUBCASE("rescale") {
        const std::vector<double> v{2.0, 4.0, 3.0};
        const auto r = rescale_to_open_unit(v);
        CHECK(r[0] == doctest::Approx(0.01));
        CHECK(r[1] == doctest::Approx(0.99));
        CHECK(r[2] == doctest::Approx(0.5));
    }
}

TEST_CASE("seed selection") {
    const SocialGraph g = datasets::karate_club();
    Rng a(1), b(1);
    const auto s = select_seeds(g, 15, a);
    CHECK(s.roots.size() == 15);
    CHECK(std::set<NodeId>(s.roots.begin(), s.roots.end()).size() == 15);
    CHECK(select_seeds(g, 15, b).roots == s.roots);
    Rng c(2);
    auto all = select_seeds(g, 34, c).roots;
    std::sort(all.begin(), all.end());
    for (NodeId i = 0; i < 34; ++i) CHECK(all[i] == i);
    CHECK_THROWS_AS(select_seeds(g, 35, c), InvalidArgument);
}

TEST_CASE("config text") {
    std::istringstream in(
        "# experiment\n"
        "graph = ba:100:6:3\n"
        "lambda_strategy = inverse\n"
        "theta = 0.01\n"
        "runs = 7\n"
        "eq10_mode = literal\n"
        "init_opinions = b2t\n");
    const ExperimentConfig cfg = parse_config(in);
    CHECK(cfg.graph == "ba:100:6:3");
    CHECK(cfg.lambda_strategy == LambdaStrategy::inverse);
    CHECK(cfg.theta == 0.01);
    CHECK(cfg.runs == 7);
    CHECK(cfg.eq10_mode == UpdateMode::literal);
    CHECK(cfg.init_opinions == InitialOpinions::b2_box);
    std::istringstream round(format_config(cfg));
    CHECK(format_config(parse_config(round)) == format_config(cfg));

    std::istringstream bad_key("colour = red\n");
    CHECK_THROWS_AS(parse_config(bad_key), ParseError);
    std::istringstream bad_theta("x\ntheta = 1.5\n");
    CHECK_THROWS_AS(parse_config(bad_theta), ParseError);
    ExperimentConfig c;
    CHECK_THROWS_AS(set_config_value(c, "runs", "0"), InvalidArgument);
    CHECK_THROWS_AS(set_config_value(c, "lambda", "-0.1"), InvalidArgument);
    set_config_value(c, "theta", "trace");
    CHECK(c.theta_from_trace);
}

TEST_CASE("graph specs") {
    ExperimentConfig cfg;
    cfg.graph = "ba:100:6:3";
    CHECK(build_graph(cfg).graph.edge_count() == 1158);
    cfg.graph = "path:5";
    CHECK(build_graph(cfg).graph.node_count() == 5);
    cfg.graph = "cycle:4";
    CHECK(build_graph(cfg).graph.edge_count() == 4);
    cfg.graph = "/nonexistent/graph.txt";
    CHECK_THROWS_AS(build_graph(cfg), Error);

    const fs::path dir = scratch("graphs");
    {
        std::ofstream out(dir / "g.txt");
        out << "1 2\n2 1\n2 3\n";
    }
    cfg.graph = (dir / "g.txt").string();
    cfg.directed = true;
    CHECK(build_graph(cfg).graph.node_count() == 3);
    cfg.lscc = true;
    const LoadedGraph lscc = build_graph(cfg);
    CHECK(lscc.graph.node_count() == 2);
    CHECK(lscc.original_ids == std::vector<std::uint64_t>{1, 2});

    cfg.lscc = false;
    CHECK_THROWS_WITH_AS(prepare_experiment(cfg), doctest::Contains("3"), InvalidArgument);
}

TEST_CASE("ecdf") {
    const Opinions u = Opinions::Zero(3);
    SUBCASE("no shift is a single step at zero") {
        const Ecdf f = opinion_shift_ecdf(u, std::vector<Opinions>{u});
        CHECK(f.values == std::vector<double>{0.0});
        CHECK(f.cumulative == std::vector<double>{1.0});
    }
    SUBCASE("thirds") {
        Opinions x(3);
        x << -1, 0, 1;
        const Ecdf f = opinion_shift_ecdf(u, std::vector<Opinions>{x});
        CHECK(f.cumulative[0] == doctest::Approx(1.0 / 3));
        CHECK(f.cumulative[1] == doctest::Approx(2.0 / 3));
        CHECK(f.cumulative[2] == 1.0);
        CHECK(f(-2.0) == 0.0);
        CHECK(f(0.5) == doctest::Approx(2.0 / 3));
    }
    SUBCASE("ks distance") {
        const Ecdf a = make_ecdf({0.0, 1.0});
        const Ecdf b = make_ecdf({0.0, 1.0});
        CHECK(ks_distance(a, b) == 0.0);
        const Ecdf c = make_ecdf({2.0, 3.0});
        CHECK(ks_distance(a, c) == 1.0);
        const Ecdf d = make_ecdf({0.5, 1.0});
        CHECK(ks_distance(a, d) == doctest::Approx(0.5));
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(opinion_shift_ecdf(u, std::vector<Opinions>{Opinions::Zero(2)}), InvalidArgument);
    }
}

TEST_CASE("one run with no posts") {
    ExperimentConfig cfg = small_config();
    cfg.runs = 1;
    cfg.seeds = 0;
    const AggregateReport r = run_experiment(cfg);
    CHECK(r.fjc_ecdf.values == std::vector<double>{0.0});
    for (const auto& row : r.polarization) CHECK(row.delta_fjc() == 0.0);
}

TEST_CASE("baseline and aggregation consistency") {
    ExperimentConfig cfg = small_config();
    cfg.runs = 10;
    cfg.keep_runs = true;
    cfg.per_run_ecdf = true;
    const ExperimentSetup setup = prepare_experiment(cfg);
    const AggregateReport r = run_experiment(cfg, setup);
    const Opinions z = fj_fixed_point(setup.w, setup.lambda, setup.u);
    REQUIRE(r.runs.size() == 10);
    CHECK(r.fjc_run_ecdfs.size() == 10);
    for (const auto& row : r.polarization) {
        CHECK(row.delta_fj() == polarization_value(row.metric, setup.u, z));
        double mean = 0.0;
        for (const auto& x : r.runs) mean += polarization_value(row.metric, setup.u, x);
        mean /= 10.0;
        CHECK(row.delta_fjc() == doctest::Approx(mean).epsilon(1e-12));
    }
    Opinions avg = Opinions::Zero(34);
    for (const auto& x : r.runs) avg += x;
    CHECK((avg / 10.0 - r.fjc_mean).lpNorm<Eigen::Infinity>() < 1e-15);
    check_ecdf_valid(r.fj_ecdf);
    check_ecdf_valid(r.fjc_ecdf);
    CHECK(r.schedule.roots.size() == 15);
    CHECK(r.node_count == 34);
}

TEST_CASE("thread count does not change results") {
    ExperimentConfig one = small_config();
    one.threads = 1;
    ExperimentConfig four = small_config();
    four.threads = 4;
    const AggregateReport a = run_experiment(one);
    const AggregateReport b = run_experiment(four);
    CHECK(a.fjc_mean == b.fjc_mean);
    CHECK(a.fjc_ecdf.values == b.fjc_ecdf.values);
    CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("initial opinion kinds") {
    ExperimentConfig cfg = small_config();
    const LoadedGraph g = build_graph(cfg);
    const InfluenceMatrix w = influence_matrix(g.graph);
    const Susceptibility l = Susceptibility::uniform(34, 0.6);
    std::string prov;
    cfg.init_opinions = InitialOpinions::b1;
    CHECK(initial_opinions(cfg, w, l, &prov).lpNorm<1>() == 1.0);
    CHECK(prov.rfind("b1", 0) == 0);
    cfg.init_opinions = InitialOpinions::b2_box;
    CHECK(initial_opinions(cfg, w, l).lpNorm<Eigen::Infinity>() == doctest::Approx(1.0));
    cfg.init_opinions = InitialOpinions::heuristic;
    const Opinions heu = initial_opinions(cfg, w, l);
    for (Eigen::Index i = 0; i < heu.size(); ++i) CHECK((heu[i] == 0.0 || std::abs(heu[i]) == 1.0));

    const fs::path dir = scratch("init");
    {
        std::ofstream out(dir / "u.csv");
        write_opinions_csv(out, heu, "heuristic");
    }
    cfg.init_opinions = InitialOpinions::file;
    cfg.init_file = (dir / "u.csv").string();
    CHECK(initial_opinions(cfg, w, l) == heu);
}

TEST_CASE("report files are reproducible") {
    ExperimentConfig cfg = small_config();
    const fs::path a = scratch("repro_a");
    const fs::path b = scratch("repro_b");
    write_report(run_experiment(cfg), a);
    cfg.threads = 1;
    write_report(run_experiment(cfg), b);
    for (const char* name : {"shifts_ecdf.csv", "polarization.csv", "final_opinions.csv", "cascades.csv"}) {
        CHECK(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const std::string manifest = slurp(a / "manifest.txt");
    CHECK(manifest.find("status = ok") != std::string::npos);
    CHECK(manifest.find("graph = karate") != std::string::npos);
    CHECK(manifest.find("wall_seconds") != std::string::npos);
}

TEST_CASE("failure manifest") {
    const fs::path dir = scratch("failure");
    write_failure_manifest(dir, "graph = nowhere\n", "cannot open graph file");
    const std::string m = slurp(dir / "manifest.txt");
    CHECK(m.find("status = failed") != std::string::npos);
    CHECK(m.find("cannot open graph file") != std::string::npos);
}

TEST_CASE("replay experiment") {
    const fs::path dir = scratch("replay");
    // r=0 follows q=1; q <-> q2=2; a=3, b=4 follow r; c=5, d=6 follow a
    {
        std::ofstream g(dir / "tree.txt");
        g << "0 1\n1 2\n2 1\n3 0\n4 0\n5 3\n6 3\n";
    }
    ExperimentConfig cfg;
    cfg.graph = (dir / "tree.txt").string();
    cfg.directed = true;
    cfg.runs = 5;
    cfg.threads = 1;
    cfg.theta_from_trace = true;

    SUBCASE("empty trace") {
        {
            std::ofstream t(dir / "empty.csv");
            t << "timestamp,post_id,node_id\n";
        }
        cfg.trace = (dir / "empty.csv").string();
        const AggregateReport r = replay_experiment(cfg);
        CHECK(r.fjc_ecdf.values == std::vector<double>{0.0});
        REQUIRE(r.real_ecdf.has_value());
        CHECK(r.real_ecdf->values == std::vector<double>{0.0});
        CHECK(r.fj_ecdf.values.size() > 1);
    }
    SUBCASE("full tree cascades are reproduced exactly") {
        {
            std::ofstream t(dir / "trace.csv");
            t << "timestamp,post_id,node_id\n";
            // two posts from r, every aware node reshares
            for (int p = 0; p < 2; ++p) {
                const int t0 = p * 10000;
                t << t0 << ",p" << p << ",0\n";
                t << t0 + 1000 << ",p" << p << ",3\n";
                t << t0 + 1001 << ",p" << p << ",4\n";
                t << t0 + 2000 << ",p" << p << ",5\n";
                t << t0 + 2001 << ",p" << p << ",6\n";
            }
        }
        cfg.trace = (dir / "trace.csv").string();
        const AggregateReport r = replay_experiment(cfg);
        REQUIRE(r.real.has_value());
        CHECK(r.ks_fjc_real == 0.0);
        CHECK((r.fjc_mean - *r.real).lpNorm<Eigen::Infinity>() < 1e-15);
        REQUIRE(r.theta.has_value());
        CHECK(r.theta->theta[3] == 1.0);

        const fs::path out = dir / "out";
        write_report(r, out);
        for (const char* name : {"theta_report.csv", "theta_summary.csv", "fidelity.csv"}) CHECK(fs::exists(out / name));
        CHECK(slurp(out / "polarization.csv").find("delta_real") != std::string::npos);
    }
    SUBCASE("missing trace") {
        cfg.trace.clear();
        CHECK_THROWS_AS(replay_experiment(cfg), InvalidArgument);
    }
}

}  // TEST_SUITE
