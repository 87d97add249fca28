#include "fjc/fjc.hpp"

#include <ostream>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "fjc/diagnostics.hpp"
#include "fjc/error.hpp"
#include "number_format.hpp"

namespace fjc {

std::string_view to_string(UpdateMode mode) {
    return mode == UpdateMode::convex ? "convex" : "literal";
}

UpdateMode parse_update_mode(std::string_view text) {
    if (text == "convex") return UpdateMode::convex;
    if (text == "literal") return UpdateMode::literal;
    throw InvalidArgument("unknown update mode \"" + std::string(text) + "\" (expected convex or literal)");
}

double fjc_update(double x_i, double u_i, double h_i, std::span<const Exposure> exposures, UpdateMode mode) {
    if (exposures.empty()) throw InvalidArgument("opinion update needs at least one predecessor");
    const double k = static_cast<double>(exposures.size());
    double social = 0.0;
    for (const auto& e : exposures) social += h_i * ((1.0 - e.gamma) * x_i + e.gamma * e.opinion);
    const double anchor = (1.0 - h_i) * u_i;
    if (mode == UpdateMode::convex) return (social + k * anchor) / k;
    return (social + anchor) / k;
}

double fjc_update(NodeId i, const Opinions& x, const Opinions& u, std::span<const NodeId> phi,
                  const GossipParameters& params, UpdateMode mode) {
    std::vector<Exposure> exposures;
    exposures.reserve(phi.size());
    for (NodeId j : phi) exposures.push_back({params.gamma_at(i, j), x[j]});
    return fjc_update(x[i], u[i], params.h[i], exposures, mode);
}

FjcSystem::FjcSystem(const SocialGraph& g, const InfluenceMatrix& w, const Susceptibility& lambda)
    : graph_(&g), params_(gossip_parameters(g, w, lambda)) {}

namespace {

void check_opinions(const SocialGraph& g, const Opinions& u) {
    if (u.size() != static_cast<Eigen::Index>(g.node_count())) {
        throw InvalidArgument("prejudice vector has length " + std::to_string(u.size()) + " for a graph of " +
                              std::to_string(g.node_count()) + " nodes");
    }
}

}  // namespace

FjcRunRecord run_fjc(const FjcSystem& system, const Opinions& u, const SeedSchedule& schedule,
                     const ReshareModel& model, Rng& rng, const FjcOptions& opts) {
    const SocialGraph& g = system.graph();
    const GossipParameters& params = system.params();
    check_opinions(g, u);
    for (NodeId r : schedule.roots) {
        if (r >= g.node_count()) throw InvalidArgument("seed " + std::to_string(r) + " out of range");
    }

    FjcRunRecord rec;
    rec.initial = u;
    rec.final = u;
    Opinions& x = rec.final;
    CascadeSampler sampler(g);
    CascadeRealization c;
    std::vector<double> next;
    std::vector<Exposure> exposures;

    for (std::size_t n = 0; n < schedule.roots.size(); ++n) {
        sampler.sample(schedule.roots[n], model, rng, c);
        CascadeRecord cr{n, c.root, c.size(), c.depth(), 0};
        if (c.size() == 1 && g.in_degree(c.root) == 0) {
            warn("seed " + std::to_string(c.root) + " has no followers; its post reaches nobody");
        }
        for (std::size_t l = 1; l < c.layer_count(); ++l) {
            const std::size_t begin = c.layer_offsets[l];
            const std::size_t end = c.layer_offsets[l + 1];
            next.resize(end - begin);
            for (std::size_t pos = begin; pos < end; ++pos) {
                const NodeId i = c.nodes[pos];
                exposures.clear();
                for (NodeId j : c.predecessors_at(pos)) exposures.push_back({params.gamma_at(i, j), x[j]});
                next[pos - begin] = fjc_update(x[i], u[i], params.h[i], exposures, opts.mode);
            }
            for (std::size_t pos = begin; pos < end; ++pos) {
                const NodeId i = c.nodes[pos];
                if (opts.observer) opts.observer({n, l, i, x[i], next[pos - begin]});
                x[i] = next[pos - begin];
                ++cr.updates;
            }
        }
        rec.cascades.push_back(cr);
        if (opts.keep_realizations) rec.realizations.push_back(c);
    }
    return rec;
}

FjcRunRecord run_fjc(const SocialGraph& g, const InfluenceMatrix& w, const Susceptibility& lambda,
                     const Opinions& u, const SeedSchedule& schedule, const ReshareModel& model, Rng& rng,
                     const FjcOptions& opts) {
    return run_fjc(FjcSystem(g, w, lambda), u, schedule, model, rng, opts);
}

FjcRunRecord replay_trace(const FjcSystem& system, const Opinions& u, const ReshareTrace& trace,
                          const FjcOptions& opts) {
    const SocialGraph& g = system.graph();
    const GossipParameters& params = system.params();
    check_opinions(g, u);
    const auto events = trace.events();
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (events[k].node >= g.node_count()) {
            throw InvalidArgument("trace event " + std::to_string(k) + " refers to unknown node " +
                                  std::to_string(events[k].node));
        }
    }

    FjcRunRecord rec;
    rec.initial = u;
    rec.final = u;
    Opinions& x = rec.final;

    struct PostState {
        std::size_t record;
        std::unordered_map<NodeId, std::size_t> layer;  // aware nodes
    };
    std::unordered_map<std::string_view, PostState> posts;
    std::vector<double> next;

    for (const auto& e : events) {
        auto [it, fresh] = posts.try_emplace(e.post_id);
        PostState& post = it->second;
        if (fresh) {
            post.record = rec.cascades.size();
            rec.cascades.push_back({post.record, e.node, 0, 0, 0});
        }
        CascadeRecord& cr = rec.cascades[post.record];
        // an emitter that was never exposed acts as an extra source at layer 0
        const std::size_t emitter_layer = post.layer.try_emplace(e.node, 0).first->second;

        const NodeId s = e.node;
        const auto followers = g.followers(s);
        next.resize(followers.size());
        for (std::size_t k = 0; k < followers.size(); ++k) {
            const NodeId f = followers[k];
            const Exposure exposure{params.gamma_at(f, s), x[s]};
            next[k] = fjc_update(x[f], u[f], params.h[f], std::span(&exposure, 1), opts.mode);
        }
        for (std::size_t k = 0; k < followers.size(); ++k) {
            const NodeId f = followers[k];
            const std::size_t layer = post.layer.try_emplace(f, emitter_layer + 1).first->second;
            cr.depth = std::max(cr.depth, layer);
            if (opts.observer) opts.observer({post.record, emitter_layer + 1, f, x[f], next[k]});
            x[f] = next[k];
            ++cr.updates;
        }
        cr.size = post.layer.size();
    }
    return rec;
}

UpdateObserver jsonl_update_log(std::ostream& out) {
    return [&out](const UpdateEvent& e) {
        const nlohmann::json line{
            {"cascade", e.cascade}, {"layer", e.layer}, {"node", e.node}, {"old", e.old_value}, {"new", e.new_value}};
        out << line.dump() << '\n';
    };
}

void write_node_opinions_csv(std::ostream& out, const FjcRunRecord& record) {
    out << "node,u,x_final,shift\n";
    for (Eigen::Index i = 0; i < record.final.size(); ++i) {
        out << i << ',';
        detail::write_number(out, record.initial[i]);
        out << ',';
        detail::write_number(out, record.final[i]);
        out << ',';
        detail::write_number(out, record.final[i] - record.initial[i]);
        out << '\n';
    }
}

void write_cascades_csv(std::ostream& out, const FjcRunRecord& record) {
    out << "index,root,size,depth\n";
    for (const auto& c : record.cascades) out << c.index << ',' << c.root << ',' << c.size << ',' << c.depth << '\n';
}

}  // namespace fjc
