#include "fjc/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "fjc/error.hpp"

namespace fjc {
namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument(std::string(what) + " must lie in [0,1], got " + std::to_string(p));
    }
}

}  // namespace

ReshareModel ReshareModel::global(double theta) {
    check_probability(theta, "reshare probability");
    ReshareModel m;
    m.global_ = theta;
    m.fallback_ = theta;
    return m;
}

ReshareModel ReshareModel::per_node(std::vector<double> theta, double fallback) {
    check_probability(fallback, "fallback reshare probability");
    for (double& t : theta) {
        if (std::isnan(t)) {
            t = fallback;
        } else {
            check_probability(t, "per-node reshare probability");
        }
    }
    ReshareModel m;
    m.global_ = fallback;
    m.fallback_ = fallback;
    m.per_node_ = std::move(theta);
    return m;
}

std::optional<std::size_t> CascadeRealization::position_of(NodeId i) const noexcept {
    const auto it = std::find(nodes.begin(), nodes.end(), i);
    if (it == nodes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - nodes.begin());
}

std::size_t CascadeRealization::layer_of_position(std::size_t pos) const noexcept {
    const auto it = std::upper_bound(layer_offsets.begin(), layer_offsets.end(), pos);
    return static_cast<std::size_t>(it - layer_offsets.begin()) - 1;
}

CascadeSampler::CascadeSampler(const SocialGraph& g)
    : g_(&g), stamp_(g.node_count(), 0), slot_(g.node_count(), 0) {}

void CascadeSampler::sample(NodeId r, const ReshareModel& model, Rng& rng, CascadeRealization& out) {
    const SocialGraph& g = *g_;
    if (r >= g.node_count()) throw InvalidArgument("cascade root " + std::to_string(r) + " out of range");
    if (!model.is_global() && model.node_count() != g.node_count()) {
        throw InvalidArgument("per-node reshare model does not match the graph size");
    }
    if (++epoch_ == 0) {  // wrapped: reset stamps
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
    }
    out.root = r;
    out.nodes.assign(1, r);
    out.layer_offsets.assign({0, 1});
    out.reshared.assign(1, 1);
    out.pred_offsets.assign({0, 0});
    out.preds.clear();
    stamp_[r] = epoch_;
    slot_[r] = 0;

    std::size_t begin = 0;
    std::size_t end = 1;
    while (true) {
        // exposures (position of follower, resharing followee) for the next layer
        exposures_.clear();
        for (std::size_t pos = begin; pos < end; ++pos) {
            if (!out.reshared[pos]) continue;
            const NodeId j = out.nodes[pos];
            for (NodeId f : g.followers(j)) {
                if (stamp_[f] != epoch_) {
                    stamp_[f] = epoch_;
                    slot_[f] = out.nodes.size();
                    out.nodes.push_back(f);
                    out.reshared.push_back(bernoulli(rng, model.probability(f)) ? 1 : 0);
                    exposures_.emplace_back(slot_[f], j);
                } else if (slot_[f] >= end) {
                    // already exposed in this same round by an earlier resharer
                    exposures_.emplace_back(slot_[f], j);
                }
            }
        }
        if (out.nodes.size() == end) break;

        // group exposures by follower position; stable, so each phi keeps resharer order
        std::stable_sort(exposures_.begin(), exposures_.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t e = 0;
        for (std::size_t pos = end; pos < out.nodes.size(); ++pos) {
            while (e < exposures_.size() && exposures_[e].first == pos) out.preds.push_back(exposures_[e++].second);
            out.pred_offsets.push_back(out.preds.size());
        }
        begin = end;
        end = out.nodes.size();
        out.layer_offsets.push_back(end);
    }
}

CascadeRealization sample_cascade(const SocialGraph& g, NodeId r, const ReshareModel& model, Rng& rng) {
    return CascadeSampler(g).sample(r, model, rng);
}

std::vector<NodeId> predecessors(const CascadeRealization& c, NodeId i) {
    const auto pos = c.position_of(i);
    if (!pos) throw InvalidArgument("node " + std::to_string(i) + " is not part of the cascade");
    if (*pos == 0) throw InvalidArgument("the root has no predecessors");
    const auto p = c.predecessors_at(*pos);
    return {p.begin(), p.end()};
}

double expected_cascade_size_bruteforce(const SocialGraph& g, NodeId r, double theta, std::size_t max_free) {
    if (r >= g.node_count()) throw InvalidArgument("root out of range");
    check_probability(theta, "reshare probability");

    // Nodes whose outcome can matter: reachable, not the root, with followers.
    const auto layers = follower_layers(g, r);
    std::size_t free_nodes = 0;
    for (std::size_t l = 1; l < layers.layers.size(); ++l) {
        for (NodeId i : layers.layers[l]) free_nodes += g.in_degree(i) > 0 ? 1 : 0;
    }
    if (free_nodes > max_free) {
        throw InvalidArgument("brute-force enumeration over " + std::to_string(free_nodes) +
                              " reshare outcomes exceeds the limit of " + std::to_string(max_free));
    }

    std::vector<char> placed(g.node_count(), 0);
    placed[r] = 1;

    // Expected number of nodes added strictly after `frontier`, given the
    // set of nodes in `frontier` that reshare is still to be decided.
    std::function<double(const std::vector<NodeId>&)> expand = [&](const std::vector<NodeId>& frontier) -> double {
        std::vector<NodeId> relevant;
        for (NodeId i : frontier) {
            bool has_new = false;
            for (NodeId f : g.followers(i)) has_new = has_new || !placed[f];
            if (has_new) relevant.push_back(i);
        }
        if (relevant.empty()) return 0.0;
        double total = 0.0;
        const std::size_t k = relevant.size();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
            double prob = 1.0;
            std::vector<NodeId> next;
            for (std::size_t b = 0; b < k; ++b) {
                const bool shares = (mask >> b) & 1U;
                prob *= shares ? theta : 1.0 - theta;
                if (!shares) continue;
                for (NodeId f : g.followers(relevant[b])) {
                    if (!placed[f]) {
                        placed[f] = 1;
                        next.push_back(f);
                    }
                }
            }
            if (prob == 0.0) {
                for (NodeId f : next) placed[f] = 0;
                continue;
            }
            const double deeper = expand(next);
            for (NodeId f : next) placed[f] = 0;
            total += prob * (static_cast<double>(next.size()) + deeper);
        }
        return total;
    };

    std::vector<NodeId> first(g.followers(r).begin(), g.followers(r).end());
    for (NodeId f : first) placed[f] = 1;
    return 1.0 + static_cast<double>(first.size()) + expand(first);
}

}  // namespace fjc
