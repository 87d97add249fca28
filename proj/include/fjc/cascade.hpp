#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fjc/graph.hpp"
#include "fjc/random.hpp"

namespace fjc {

/// Reshare probability theta: one global value or one value per node.
/// Per-node entries that are NaN mean "no estimate" and use the fallback.
class ReshareModel {
public:
    static ReshareModel global(double theta);
    static ReshareModel per_node(std::vector<double> theta, double fallback);

    bool is_global() const noexcept { return per_node_.empty(); }
    double probability(NodeId i) const noexcept {
        return per_node_.empty() ? global_ : per_node_[i];
    }
    double global_value() const noexcept { return global_; }
    double fallback() const noexcept { return fallback_; }
    std::size_t node_count() const noexcept { return per_node_.size(); }

private:
    double global_ = 0.0;
    double fallback_ = 0.0;
    std::vector<double> per_node_;  // fallback already substituted
};

/// One sampled diffusion tree. Nodes are stored layer by layer in order of
/// first exposure; reshared and predecessor data are parallel to `nodes`.
struct CascadeRealization {
    NodeId root = kNoNode;
    std::vector<NodeId> nodes;
    std::vector<std::size_t> layer_offsets;  // layer l is nodes[layer_offsets[l], layer_offsets[l+1])
    std::vector<char> reshared;
    std::vector<std::size_t> pred_offsets;   // size nodes.size() + 1
    std::vector<NodeId> preds;

    std::size_t size() const noexcept { return nodes.size(); }
    std::size_t layer_count() const noexcept { return layer_offsets.empty() ? 0 : layer_offsets.size() - 1; }
    /// Index of the last non-empty layer.
    std::size_t depth() const noexcept { return layer_count() == 0 ? 0 : layer_count() - 1; }

    std::span<const NodeId> layer(std::size_t l) const noexcept {
        return {nodes.data() + layer_offsets[l], nodes.data() + layer_offsets[l + 1]};
    }
    std::span<const NodeId> predecessors_at(std::size_t pos) const noexcept {
        return {preds.data() + pred_offsets[pos], preds.data() + pred_offsets[pos + 1]};
    }
    /// Position of node i in `nodes`, if present.
    std::optional<std::size_t> position_of(NodeId i) const noexcept;
    /// Layer of the node stored at position pos.
    std::size_t layer_of_position(std::size_t pos) const noexcept;
};

/// Reusable sampler; keeps per-node scratch buffers between samples so
/// Monte Carlo loops do not reallocate. Not thread-safe; use one per worker.
class CascadeSampler {
public:
    explicit CascadeSampler(const SocialGraph& g);

    /// T_0 = {r}; T_1 = N-(r); each exposed node draws its reshare outcome
    /// once on first exposure; T_{l+1} collects the not-yet-placed followers
    /// of layer-l resharers. phi(i) lists the resharing followees of i in
    /// the previous layer (phi = {r} on layer 1).
    void sample(NodeId r, const ReshareModel& model, Rng& rng, CascadeRealization& out);

    CascadeRealization sample(NodeId r, const ReshareModel& model, Rng& rng) {
        CascadeRealization c;
        sample(r, model, rng, c);
        return c;
    }

private:
    const SocialGraph* g_;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::size_t> slot_;
    std::uint32_t epoch_ = 0;
    std::vector<std::pair<std::size_t, NodeId>> exposures_;
};

CascadeRealization sample_cascade(const SocialGraph& g, NodeId r, const ReshareModel& model, Rng& rng);

/// phi(i) for a node on layer >= 1. Throws InvalidArgument when i is not in
/// the cascade or is the root.
std::vector<NodeId> predecessors(const CascadeRealization& c, NodeId i);

/// Exact E|C(r)| by enumerating reshare outcomes layer by layer. Throws
/// InvalidArgument when more than max_free nodes have outcomes that matter.
double expected_cascade_size_bruteforce(const SocialGraph& g, NodeId r, double theta, std::size_t max_free = 20);

}  // namespace fjc
