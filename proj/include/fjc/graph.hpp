#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "fjc/random.hpp"

namespace fjc {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Directed follow graph. Edge (i, j) means "i follows j": j influences i
/// and content posted by j reaches i.
///
/// Both adjacency directions are stored in CSR form with sorted neighbour
/// lists. The structure is immutable once built and can be shared freely
/// between threads.
class SocialGraph {
public:
    using Edge = std::pair<NodeId, NodeId>;

    SocialGraph() = default;

    /// Builds the graph from (follower, followee) pairs. Duplicate pairs are
    /// collapsed; self-loops and out-of-range ids throw InvalidArgument.
    SocialGraph(NodeId node_count, std::span<const Edge> edges);

    NodeId node_count() const noexcept { return node_count_; }
    std::size_t edge_count() const noexcept { return out_targets_.size(); }

    /// N+(i): nodes that i follows.
    std::span<const NodeId> followees(NodeId i) const noexcept {
        return {out_targets_.data() + out_offsets_[i], out_targets_.data() + out_offsets_[i + 1]};
    }
    /// N-(j): nodes following j.
    std::span<const NodeId> followers(NodeId j) const noexcept {
        return {in_sources_.data() + in_offsets_[j], in_sources_.data() + in_offsets_[j + 1]};
    }

    std::size_t out_degree(NodeId i) const noexcept { return out_offsets_[i + 1] - out_offsets_[i]; }
    std::size_t in_degree(NodeId j) const noexcept { return in_offsets_[j + 1] - in_offsets_[j]; }

    /// Position of i's first followee in the flat out-adjacency; edge k of
    /// the graph is (i, out_targets[k]) for k in [out_offset(i), out_offset(i+1)).
    std::size_t out_offset(NodeId i) const noexcept { return out_offsets_[i]; }
    std::span<const NodeId> out_targets() const noexcept { return out_targets_; }

    bool has_edge(NodeId i, NodeId j) const noexcept;

    /// Sorted (follower, followee) list.
    std::vector<Edge> edges() const;

    /// True when every edge has its reverse.
    bool is_symmetric() const noexcept;

private:
    NodeId node_count_ = 0;
    std::vector<std::size_t> out_offsets_{0};
    std::vector<NodeId> out_targets_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<NodeId> in_sources_;
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Non-negative tie strengths, non-zero exactly on the edge set.
struct SocialMatrix {
    SparseRowMatrix weights;
};

/// Row-stochastic influence weights w_ij with the sparsity of the social matrix.
struct InfluenceMatrix {
    SparseRowMatrix weights;

    Eigen::Index size() const noexcept { return weights.rows(); }
};

/// 0/1 adjacency of an unweighted follow graph.
SocialMatrix social_matrix(const SocialGraph& g);

/// w_ij = s_ij / sum_k s_ik. Throws InvalidArgument naming the first node
/// whose row is empty (no followees, hence no opinion sources).
InfluenceMatrix row_normalize(const SocialMatrix& social);

inline InfluenceMatrix influence_matrix(const SocialGraph& g) {
    return row_normalize(social_matrix(g));
}

/// Graph read from an edge list, with contiguous ids. original_ids[new] is
/// the id that appeared in the input.
struct LoadedGraph {
    SocialGraph graph;
    std::vector<std::uint64_t> original_ids;
};

/// Parses "i j" lines (i follows j). '#' lines and blank lines are skipped.
/// Input ids are remapped to 0..v-1 in increasing order of original id.
/// With directed == false every line also yields the reverse edge.
LoadedGraph load_edge_list(std::istream& in, bool directed);

void write_edge_list(std::ostream& out, const SocialGraph& g);
/// CSV "original,new".
void write_remap_csv(std::ostream& out, std::span<const std::uint64_t> original_ids);

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-10;
    int max_iter = 1000;
};

/// Random-surfer stationary distribution on the influence direction: the
/// surfer at i moves to one of i's followees. Dangling mass is spread
/// uniformly. Throws ConvergenceError (with the last iterate) when the L1
/// change does not fall below tol within max_iter sweeps.
std::vector<double> pagerank(const SocialGraph& g, const PageRankOptions& opts = {});

/// Induced subgraph on a node subset, ids re-compacted in increasing order.
struct Subgraph {
    SocialGraph graph;
    std::vector<NodeId> old_to_new;  // kNoNode for dropped nodes
    std::vector<NodeId> new_to_old;
};

Subgraph induced_subgraph(const SocialGraph& g, std::span<const NodeId> nodes);

/// Largest strongly connected component. Equal sizes are resolved in favour
/// of the component containing the smallest node id.
Subgraph largest_strongly_connected_component(const SocialGraph& g);

bool is_strongly_connected(const SocialGraph& g);

struct LayerDecomposition {
    NodeId root = kNoNode;
    std::vector<std::vector<NodeId>> layers;

    std::size_t eccentricity() const noexcept { return layers.empty() ? 0 : layers.size() - 1; }
};

/// BFS from r over reversed follow edges (r, its followers, their followers, ...).
LayerDecomposition follower_layers(const SocialGraph& g, NodeId r);

/// Undirected preferential attachment stored as symmetric directed edges.
/// Starts from a clique on k nodes; every later node attaches to k distinct
/// existing nodes with probability proportional to degree.
SocialGraph generate_barabasi_albert(NodeId n, NodeId k, Rng& rng);

/// Number of followees of i, the d_i of the gossip parameters.
std::size_t degree_for_gossip(const SocialGraph& g, NodeId i);

}  // namespace fjc
