#include "fjc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "fjc/error.hpp"

namespace fjc {

SocialGraph::SocialGraph(NodeId node_count, std::span<const Edge> edges) : node_count_(node_count) {
    if (node_count == 0) {
        throw InvalidArgument("empty graph");
    }
    std::vector<Edge> sorted(edges.begin(), edges.end());
    for (const auto& [i, j] : sorted) {
        if (i >= node_count || j >= node_count) {
            throw InvalidArgument("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") out of range for " + std::to_string(node_count) + " nodes");
        }
        if (i == j) {
            throw InvalidArgument("self-loop on node " + std::to_string(i));
        }
    }
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    out_offsets_.assign(node_count + 1, 0);
    in_offsets_.assign(node_count + 1, 0);
    for (const auto& [i, j] : sorted) {
        ++out_offsets_[i + 1];
        ++in_offsets_[j + 1];
    }
    for (NodeId v = 0; v < node_count; ++v) {
        out_offsets_[v + 1] += out_offsets_[v];
        in_offsets_[v + 1] += in_offsets_[v];
    }
    out_targets_.resize(sorted.size());
    in_sources_.resize(sorted.size());
    std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const auto [i, j] = sorted[k];
        out_targets_[k] = j;
        // sorted by (i, j), so each in-list is filled in increasing i
        in_sources_[in_fill[j]++] = i;
    }
}

bool SocialGraph::has_edge(NodeId i, NodeId j) const noexcept {
    if (i >= node_count_ || j >= node_count_) return false;
    const auto f = followees(i);
    return std::binary_search(f.begin(), f.end(), j);
}

std::vector<SocialGraph::Edge> SocialGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId i = 0; i < node_count_; ++i) {
        for (NodeId j : followees(i)) out.emplace_back(i, j);
    }
    return out;
}

bool SocialGraph::is_symmetric() const noexcept {
    for (NodeId i = 0; i < node_count_; ++i) {
        const auto out = followees(i);
        const auto in = followers(i);
        if (!std::equal(out.begin(), out.end(), in.begin(), in.end())) return false;
    }
    return true;
}

SocialMatrix social_matrix(const SocialGraph& g) {
    const auto v = static_cast<Eigen::Index>(g.node_count());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(g.edge_count());
    for (NodeId i = 0; i < g.node_count(); ++i) {
        for (NodeId j : g.followees(i)) triplets.emplace_back(i, j, 1.0);
    }
    SocialMatrix s;
    s.weights.resize(v, v);
    s.weights.setFromTriplets(triplets.begin(), triplets.end());
    s.weights.makeCompressed();
    return s;
}

InfluenceMatrix row_normalize(const SocialMatrix& social) {
    InfluenceMatrix w{social.weights};
    w.weights.makeCompressed();
    for (Eigen::Index i = 0; i < w.weights.outerSize(); ++i) {
        double total = 0.0;
        for (SparseRowMatrix::InnerIterator it(w.weights, i); it; ++it) {
            if (it.value() < 0.0 || !std::isfinite(it.value())) {
                throw InvalidArgument("negative or non-finite social weight in row " + std::to_string(i));
            }
            total += it.value();
        }
        if (!(total > 0.0)) {
            throw InvalidArgument("node " + std::to_string(i) +
                                  " has no followees; its influence row cannot be normalized");
        }
        for (SparseRowMatrix::InnerIterator it(w.weights, i); it; ++it) it.valueRef() /= total;
    }
    return w;
}

namespace {

bool is_comment_or_blank(const std::string& line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string::npos || line[first] == '#';
}

}  // namespace

LoadedGraph load_edge_list(std::istream& in, bool directed) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        std::uint64_t ids[2];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 2; ++k) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            const auto [next, ec] = std::from_chars(p, end, ids[k]);
            if (ec != std::errc{} || next == p) {
                throw ParseError("expected two non-negative integer ids", line_no);
            }
            p = next;
        }
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p != end) {
            throw ParseError("trailing characters after edge", line_no);
        }
        if (ids[0] == ids[1]) {
            throw ParseError("self-loop on node " + std::to_string(ids[0]) + " is not allowed", line_no);
        }
        raw.emplace_back(ids[0], ids[1]);
    }
    if (raw.empty()) {
        throw InvalidArgument("empty graph");
    }

    LoadedGraph result;
    auto& ids = result.original_ids;
    for (const auto& [a, b] : raw) {
        ids.push_back(a);
        ids.push_back(b);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() >= kNoNode) {
        throw InvalidArgument("too many nodes");
    }
    auto remap = [&](std::uint64_t id) {
        return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    std::vector<SocialGraph::Edge> edges;
    edges.reserve(raw.size() * (directed ? 1 : 2));
    for (const auto& [a, b] : raw) {
        edges.emplace_back(remap(a), remap(b));
        if (!directed) edges.emplace_back(remap(b), remap(a));
    }
    result.graph = SocialGraph(static_cast<NodeId>(ids.size()), edges);
    return result;
}

void write_edge_list(std::ostream& out, const SocialGraph& g) {
    for (NodeId i = 0; i < g.node_count(); ++i) {
        for (NodeId j : g.followees(i)) out << i << ' ' << j << '\n';
    }
}

void write_remap_csv(std::ostream& out, std::span<const std::uint64_t> original_ids) {
    out << "original,new\n";
    for (std::size_t k = 0; k < original_ids.size(); ++k) out << original_ids[k] << ',' << k << '\n';
}

std::vector<double> pagerank(const SocialGraph& g, const PageRankOptions& opts) {
    const NodeId n = g.node_count();
    if (n == 0) throw InvalidArgument("pagerank on an empty graph");
    if (!(opts.damping > 0.0 && opts.damping < 1.0)) {
        throw InvalidArgument("pagerank damping must lie in (0,1)");
    }
    const double inv_n = 1.0 / n;
    std::vector<double> rank(n, inv_n), next(n);
    double change = 0.0;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double dangling = 0.0;
        for (NodeId i = 0; i < n; ++i) {
            if (g.out_degree(i) == 0) dangling += rank[i];
        }
        const double base = (1.0 - opts.damping) * inv_n + opts.damping * dangling * inv_n;
        for (NodeId j = 0; j < n; ++j) {
            double inflow = 0.0;
            for (NodeId i : g.followers(j)) inflow += rank[i] / static_cast<double>(g.out_degree(i));
            next[j] = base + opts.damping * inflow;
        }
        // renormalize against round-off drift
        double total = 0.0;
        for (double p : next) total += p;
        change = 0.0;
        for (NodeId j = 0; j < n; ++j) {
            next[j] /= total;
            change += std::abs(next[j] - rank[j]);
        }
        rank.swap(next);
        if (change < opts.tol) return rank;
    }
    throw ConvergenceError("pagerank did not converge in " + std::to_string(opts.max_iter) + " iterations",
                           rank, change);
}

Subgraph induced_subgraph(const SocialGraph& g, std::span<const NodeId> nodes) {
    Subgraph sub;
    sub.old_to_new.assign(g.node_count(), kNoNode);
    sub.new_to_old.assign(nodes.begin(), nodes.end());
    std::sort(sub.new_to_old.begin(), sub.new_to_old.end());
    sub.new_to_old.erase(std::unique(sub.new_to_old.begin(), sub.new_to_old.end()), sub.new_to_old.end());
    for (std::size_t k = 0; k < sub.new_to_old.size(); ++k) {
        sub.old_to_new.at(sub.new_to_old[k]) = static_cast<NodeId>(k);
    }
    std::vector<SocialGraph::Edge> edges;
    for (NodeId old_i : sub.new_to_old) {
        for (NodeId old_j : g.followees(old_i)) {
            if (sub.old_to_new[old_j] != kNoNode) edges.emplace_back(sub.old_to_new[old_i], sub.old_to_new[old_j]);
        }
    }
    sub.graph = SocialGraph(static_cast<NodeId>(sub.new_to_old.size()), edges);
    return sub;
}

namespace {

// Iterative Tarjan. component[v] is the SCC index of v.
std::vector<NodeId> strongly_connected_components(const SocialGraph& g, NodeId& count) {
    const NodeId n = g.node_count();
    std::vector<NodeId> index(n, kNoNode), low(n, 0), component(n, kNoNode);
    std::vector<char> on_stack(n, 0);
    std::vector<NodeId> stack;
    std::vector<std::pair<NodeId, std::size_t>> call;  // node, next followee position
    NodeId next_index = 0;
    count = 0;

    for (NodeId start = 0; start < n; ++start) {
        if (index[start] != kNoNode) continue;
        call.emplace_back(start, 0);
        index[start] = low[start] = next_index++;
        stack.push_back(start);
        on_stack[start] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            const auto out = g.followees(v);
            if (pos < out.size()) {
                const NodeId w = out[pos++];
                if (index[w] == kNoNode) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const NodeId done = v;
            call.pop_back();
            if (!call.empty()) {
                low[call.back().first] = std::min(low[call.back().first], low[done]);
            }
            if (low[done] == index[done]) {
                NodeId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    component[w] = count;
                } while (w != done);
                ++count;
            }
        }
    }
    return component;
}

}  // namespace

Subgraph largest_strongly_connected_component(const SocialGraph& g) {
    NodeId count = 0;
    const auto component = strongly_connected_components(g, count);
    std::vector<std::size_t> size(count, 0);
    std::vector<NodeId> min_member(count, kNoNode);
    for (NodeId v = 0; v < g.node_count(); ++v) {
        ++size[component[v]];
        min_member[component[v]] = std::min(min_member[component[v]], v);
    }
    NodeId best = 0;
    for (NodeId c = 1; c < count; ++c) {
        if (size[c] > size[best] || (size[c] == size[best] && min_member[c] < min_member[best])) best = c;
    }
    std::vector<NodeId> members;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (component[v] == best) members.push_back(v);
    }
    return induced_subgraph(g, members);
}

bool is_strongly_connected(const SocialGraph& g) {
    NodeId count = 0;
    strongly_connected_components(g, count);
    return count == 1;
}

LayerDecomposition follower_layers(const SocialGraph& g, NodeId r) {
    if (r >= g.node_count()) throw InvalidArgument("root " + std::to_string(r) + " out of range");
    LayerDecomposition d;
    d.root = r;
    std::vector<char> seen(g.node_count(), 0);
    seen[r] = 1;
    d.layers.push_back({r});
    while (true) {
        std::vector<NodeId> next;
        for (NodeId i : d.layers.back()) {
            for (NodeId f : g.followers(i)) {
                if (!seen[f]) {
                    seen[f] = 1;
                    next.push_back(f);
                }
            }
        }
        if (next.empty()) break;
        d.layers.push_back(std::move(next));
    }
    return d;
}

SocialGraph generate_barabasi_albert(NodeId n, NodeId k, Rng& rng) {
    if (k < 1 || n <= k) {
        throw InvalidArgument("Barabasi-Albert requires n > k >= 1 (got n=" + std::to_string(n) +
                              ", k=" + std::to_string(k) + ")");
    }
    std::vector<SocialGraph::Edge> edges;
    // every endpoint of every undirected edge, so a uniform pick is degree-proportional
    std::vector<NodeId> endpoints;
    for (NodeId a = 0; a < k; ++a) {
        for (NodeId b = a + 1; b < k; ++b) {
            edges.emplace_back(a, b);
            edges.emplace_back(b, a);
            endpoints.push_back(a);
            endpoints.push_back(b);
        }
    }
    std::vector<NodeId> targets;
    for (NodeId v = k; v < n; ++v) {
        targets.clear();
        while (targets.size() < k) {
            const NodeId t = endpoints.empty() ? static_cast<NodeId>(uniform_index(rng, v))
                                               : endpoints[uniform_index(rng, endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (NodeId t : targets) {
            edges.emplace_back(v, t);
            edges.emplace_back(t, v);
            endpoints.push_back(v);
            endpoints.push_back(t);
        }
    }
    return SocialGraph(n, edges);
}

std::size_t degree_for_gossip(const SocialGraph& g, NodeId i) {
    if (i >= g.node_count()) throw InvalidArgument("node " + std::to_string(i) + " out of range");
    const auto d = g.out_degree(i);
    if (d == 0) {
        throw InvalidArgument("node " + std::to_string(i) + " has no followees; gossip degree undefined");
    }
    return d;
}

}  // namespace fjc
