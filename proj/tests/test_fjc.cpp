#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fjc/datasets.hpp"
#include "fjc/error.hpp"
#include "fjc/fjc.hpp"
#include "support.hpp"

using namespace fjc;
using fjc::test::directed;
using fjc::test::undirected;

namespace {

Opinions random_opinions(Eigen::Index n, Rng& rng) {
    Opinions u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = 2.0 * uniform01(rng) - 1.0;
    return u;
}

}  // namespace

TEST_SUITE("fjc") {

TEST_CASE("single update, hand values") {
    const Exposure one{1.0 / 3, 1.0};
    const double expected = 0.75 * (1.0 / 3);
    CHECK(fjc_update(0.0, 0.0, 0.75, std::span(&one, 1), UpdateMode::convex) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(fjc_update(0.0, 0.0, 0.75, std::span(&one, 1), UpdateMode::literal) ==
          doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("opposing predecessors cancel") {
    const std::vector<Exposure> two{{0.25, 1.0}, {0.25, -1.0}};
    CHECK(std::abs(fjc_update(0.0, 0.0, 0.8, two, UpdateMode::convex)) < 1e-16);
}

TEST_CASE("consensus is a fixed point of the update") {
    for (double c : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
        const Exposure e{0.4, c};
        CHECK(fjc_update(c, c, 0.6, std::span(&e, 1), UpdateMode::convex) == doctest::Approx(c).epsilon(1e-15));
    }
}

TEST_CASE("literal mode divides the prejudice term") {
    const std::vector<Exposure> two{{0.5, 1.0}, {0.5, 1.0}};
    // convex: 0.5*(0.5) + 0.5*1 = 0.75; literal: (2*0.25 + 0.5)/2 = 0.5
    CHECK(fjc_update(0.0, 1.0, 0.5, two, UpdateMode::convex) == doctest::Approx(0.75));
    CHECK(fjc_update(0.0, 1.0, 0.5, two, UpdateMode::literal) == doctest::Approx(0.5));
    CHECK_THROWS_AS(fjc_update(0.0, 0.0, 0.5, std::span<const Exposure>{}, UpdateMode::convex), InvalidArgument);
}

TEST_CASE("mode parsing") {
    CHECK(parse_update_mode("convex") == UpdateMode::convex);
    CHECK(parse_update_mode("literal") == UpdateMode::literal);
    CHECK(to_string(UpdateMode::literal) == "literal");
    CHECK_THROWS_AS(parse_update_mode("mean"), InvalidArgument);
}

TEST_CASE("no posts leave opinions unchanged") {
    const SocialGraph g = datasets::karate_club();
    const InfluenceMatrix w = influence_matrix(g);
    Rng rng(1);
    const Opinions u = random_opinions(34, rng);
    const auto rec = run_fjc(g, w, Susceptibility::uniform(34, 0.6), u, {}, ReshareModel::global(0.5), rng);
    CHECK(rec.final == u);
    CHECK(rec.cascades.empty());
}

TEST_CASE("star post updates each follower once from the root") {
    // a, b, c follow r; r follows a
    const SocialGraph g = directed(4, {{1, 0}, {2, 0}, {3, 0}, {0, 1}});
    const InfluenceMatrix w = influence_matrix(g);
    const Susceptibility l = Susceptibility::uniform(4, 0.5);
    Opinions u(4);
    u << 1.0, -0.5, 0.25, 0.0;
    std::vector<UpdateEvent> log;
    FjcOptions opts;
    opts.observer = [&](const UpdateEvent& e) { log.push_back(e); };
    Rng rng(2);
    const auto rec = run_fjc(g, w, l, u, SeedSchedule{{0}}, ReshareModel::global(0.0), rng, opts);
    REQUIRE(log.size() == 3);
    std::set<NodeId> updated;
    for (const auto& e : log) {
        updated.insert(e.node);
        CHECK(e.layer == 1);
    }
    CHECK(updated == std::set<NodeId>{1, 2, 3});
    // d = 1, h = 0.5, gamma = 1: x' = 0.5 x_r + 0.5 u_i
    for (NodeId i : {1u, 2u, 3u}) CHECK(rec.final[i] == doctest::Approx(0.5 * u[0] + 0.5 * u[i]).epsilon(1e-15));
    CHECK(rec.final[0] == u[0]);
    REQUIRE(rec.cascades.size() == 1);
    CHECK(rec.cascades[0].size == 4);
    CHECK(rec.cascades[0].depth == 1);
    CHECK(rec.cascades[0].updates == 3);
}

TEST_CASE("layers read the previous layer's opinions") {
    // a follows r, b follows a (chain), r follows b to close the graph
    const SocialGraph g = directed(3, {{1, 0}, {2, 1}, {0, 2}});
    const InfluenceMatrix w = influence_matrix(g);
    const Susceptibility l = Susceptibility::uniform(3, 0.5);
    Opinions u(3);
    u << 1.0, 0.0, 0.0;
    Rng rng(3);
    const auto rec = run_fjc(g, w, l, u, SeedSchedule{{0}}, ReshareModel::global(1.0), rng);
    // a: 0.5 * 1 + 0.5 * 0 = 0.5; b then reads the updated a: 0.5 * 0.5 = 0.25
    CHECK(rec.final[1] == doctest::Approx(0.5));
    CHECK(rec.final[2] == doctest::Approx(0.25));
}

TEST_CASE("anchored node never moves") {
    const SocialGraph g = undirected(3, {{0, 1}, {1, 2}});
    const InfluenceMatrix w = influence_matrix(g);
    Eigen::VectorXd lv(3);
    lv << 0.0, 0.5, 0.5;  // node 0 has d = 1 and lambda = 0, so h = 0
    fjc::test::WarningCapture quiet;
    Rng rng(4);
    Opinions u(3);
    u << 0.3, -1.0, 1.0;
    const auto rec = run_fjc(g, w, Susceptibility(lv), u, SeedSchedule{{1, 2, 1, 1}}, ReshareModel::global(1.0), rng);
    CHECK(rec.final[0] == 0.3);
}

TEST_CASE("seed without followers warns") {
    const SocialGraph g = directed(3, {{0, 1}, {1, 0}, {2, 0}});
    const InfluenceMatrix w = influence_matrix(g);
    fjc::test::WarningCapture warnings;
    Rng rng(5);
    const auto rec = run_fjc(g, w, Susceptibility::uniform(3, 0.5), Opinions::Zero(3), SeedSchedule{{2}},
                             ReshareModel::global(0.5), rng);
    CHECK(rec.cascades[0].size == 1);
    CHECK(warnings.messages.size() == 1);
}

TEST_CASE("bad inputs") {
    const SocialGraph g = datasets::path(3);
    const InfluenceMatrix w = influence_matrix(g);
    Rng rng(6);
    CHECK_THROWS_AS(run_fjc(g, w, Susceptibility::uniform(3, 0.5), Opinions::Zero(2), {}, ReshareModel::global(0.5), rng),
                    InvalidArgument);
    CHECK_THROWS_AS(run_fjc(g, w, Susceptibility::uniform(3, 0.5), Opinions::Zero(3), SeedSchedule{{7}},
                            ReshareModel::global(0.5), rng),
                    InvalidArgument);
}

TEST_CASE("property: run invariants on random configurations") {
    Rng meta(7);
    for (int trial = 0; trial < 40; ++trial) {
        Rng graph_rng = stream_rng(700, static_cast<std::uint64_t>(trial));
        const NodeId n = 10 + static_cast<NodeId>(uniform_index(meta, 40));
        const SocialGraph g = generate_barabasi_albert(n, 1 + static_cast<NodeId>(uniform_index(meta, 4)), graph_rng);
        const InfluenceMatrix w = influence_matrix(g);
        Eigen::VectorXd lv(n);
        for (NodeId i = 0; i < n; ++i) lv[i] = 0.01 + 0.98 * uniform01(meta);
        const Susceptibility l(lv);
        const Opinions u = random_opinions(n, meta);
        const double theta = uniform01(meta);
        SeedSchedule sched;
        for (int k = 0; k < 10; ++k) sched.roots.push_back(static_cast<NodeId>(uniform_index(meta, n)));

        std::map<std::size_t, std::set<NodeId>> written;
        bool unique = true, in_domain = true;
        FjcOptions opts;
        opts.keep_realizations = true;
        opts.observer = [&](const UpdateEvent& e) {
            unique = unique && written[e.cascade].insert(e.node).second;
            in_domain = in_domain && e.new_value >= -1.0 && e.new_value <= 1.0;
        };
        const std::uint64_t seed = meta();
        Rng rng(seed);
        const auto rec = run_fjc(g, w, l, u, sched, ReshareModel::global(theta), rng, opts);
        CHECK(unique);
        CHECK(in_domain);
        REQUIRE(rec.realizations.size() == sched.roots.size());
        for (std::size_t c = 0; c < rec.realizations.size(); ++c) {
            const auto& real = rec.realizations[c];
            // written nodes are exactly the non-root cascade members
            std::set<NodeId> members(real.nodes.begin() + 1, real.nodes.end());
            CHECK(written[c] == members);
            CHECK(written[c].count(real.root) == 0);
        }
        Rng again(seed);
        const auto rec2 = run_fjc(g, w, l, u, sched, ReshareModel::global(theta), again, opts);
        CHECK(rec2.final == rec.final);
    }
}

TEST_CASE("theta extremes") {
    const SocialGraph g = datasets::karate_club();
    const InfluenceMatrix w = influence_matrix(g);
    const Susceptibility l = Susceptibility::uniform(34, 0.6);
    for (NodeId r : {0u, 11u, 33u}) {
        std::set<NodeId> touched;
        FjcOptions opts;
        opts.observer = [&](const UpdateEvent& e) { touched.insert(e.node); };
        Rng rng(r);
        run_fjc(g, w, l, Opinions::Zero(34), SeedSchedule{{r}}, ReshareModel::global(0.0), rng, opts);
        CHECK(touched == std::set<NodeId>(g.followers(r).begin(), g.followers(r).end()));
        touched.clear();
        run_fjc(g, w, l, Opinions::Zero(34), SeedSchedule{{r}}, ReshareModel::global(1.0), rng, opts);
        CHECK(touched.size() == 33);  // karate is connected
    }
}

TEST_CASE("replay") {
    const SocialGraph g = datasets::karate_club();
    const InfluenceMatrix w = influence_matrix(g);
    const FjcSystem system(g, w, Susceptibility::uniform(34, 0.6));
    Rng rng(8);
    const Opinions u = random_opinions(34, rng);
    SUBCASE("empty trace") {
        CHECK(replay_trace(system, u, ReshareTrace{}).final == u);
    }
    SUBCASE("single event touches only the emitter's followers") {
        const auto rec = replay_trace(system, u, ReshareTrace({{0.0, "p", 5}}));
        const auto f = g.followers(5);
        const std::set<NodeId> followers(f.begin(), f.end());
        for (NodeId i = 0; i < 34; ++i) {
            if (followers.count(i)) {
                CHECK(rec.final[i] != u[i]);
            } else {
                CHECK(rec.final[i] == u[i]);
            }
        }
        REQUIRE(rec.cascades.size() == 1);
        CHECK(rec.cascades[0].root == 5);
        CHECK(rec.cascades[0].size == 1 + followers.size());
        CHECK(rec.cascades[0].depth == 1);
    }
    SUBCASE("repeated exposure updates again") {
        const auto once = replay_trace(system, u, ReshareTrace({{0.0, "p", 5}}));
        const auto twice = replay_trace(system, u, ReshareTrace({{0.0, "p", 5}, {1.0, "q", 5}}));
        CHECK(twice.final[g.followers(5)[0]] != once.final[g.followers(5)[0]]);
        CHECK(twice.cascades.size() == 2);
    }
}

TEST_CASE("engine equivalence on a follower tree") {
    // nodes: r=0, q=1, q2=2, a=3, b=4, c=5, d=6
    // r follows q; q <-> q2; a, b follow r; c, d follow a
    const SocialGraph t = directed(7, {{0, 1}, {1, 2}, {2, 1}, {3, 0}, {4, 0}, {5, 3}, {6, 3}});
    const InfluenceMatrix w = influence_matrix(t);
    const Susceptibility l = Susceptibility::uniform(7, 0.6);
    const FjcSystem system(t, w, l);
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Opinions u = random_opinions(7, rng);
        FjcOptions opts;
        opts.keep_realizations = true;
        const SeedSchedule sched{{0, 3, 0}};
        const auto rec = run_fjc(system, u, sched, ReshareModel::global(0.5), rng, opts);
        std::vector<ReshareEvent> ev;
        for (std::size_t c = 0; c < rec.realizations.size(); ++c) {
            append_cascade_events(ev, rec.realizations[c], "p" + std::to_string(c), 1e6 * static_cast<double>(c));
        }
        const auto real = replay_trace(system, u, ReshareTrace(std::move(ev)));
        CHECK((real.final - rec.final).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("output helpers") {
    const SocialGraph g = directed(3, {{1, 0}, {2, 0}, {0, 1}});
    const InfluenceMatrix w = influence_matrix(g);
    Opinions u(3);
    u << 1.0, 0.0, -1.0;
    std::ostringstream log;
    FjcOptions opts;
    opts.observer = jsonl_update_log(log);
    Rng rng(10);
    const auto rec = run_fjc(g, w, Susceptibility::uniform(3, 0.5), u, SeedSchedule{{0}}, ReshareModel::global(0.0),
                             rng, opts);
    std::istringstream lines(log.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.at("cascade") == 0);
        CHECK(j.at("layer") == 1);
        ++count;
    }
    CHECK(count == 2);

    std::ostringstream nodes, cascades;
    write_node_opinions_csv(nodes, rec);
    write_cascades_csv(cascades, rec);
    CHECK(nodes.str().rfind("node,u,x_final,shift\n0,1,1,0\n", 0) == 0);
    CHECK(cascades.str() == "index,root,size,depth\n0,0,3,1\n");
}

}  // TEST_SUITE
