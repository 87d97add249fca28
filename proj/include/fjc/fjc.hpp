#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "fjc/cascade.hpp"
#include "fjc/fj.hpp"
#include "fjc/graph.hpp"
#include "fjc/trace.hpp"

namespace fjc {

/// How the prejudice term of the cascade update is averaged.
///  convex:  (1/|phi|) sum_j { h [(1-g_ij) x_i + g_ij x_j] + (1-h) u_i }
///  literal: (1/|phi|) { sum_j h [(1-g_ij) x_i + g_ij x_j] + (1-h) u_i }
/// Both agree when |phi| = 1. Only convex keeps opinions inside [-1,1].
enum class UpdateMode { convex, literal };

std::string_view to_string(UpdateMode mode);
UpdateMode parse_update_mode(std::string_view text);

/// Opinion conveyed by one resharing predecessor j.
struct Exposure {
    double gamma;    // gamma_ij
    double opinion;  // x_j
};

/// New opinion of a node exposed to `exposures` at once. Throws
/// InvalidArgument on an empty exposure set.
double fjc_update(double x_i, double u_i, double h_i, std::span<const Exposure> exposures, UpdateMode mode);

/// Same, reading x_j and gamma_ij for every j in phi.
double fjc_update(NodeId i, const Opinions& x, const Opinions& u, std::span<const NodeId> phi,
                  const GossipParameters& params, UpdateMode mode);

/// Post sources r_1..r_N, processed one cascade at a time. Repeats allowed.
struct SeedSchedule {
    std::vector<NodeId> roots;
};

struct CascadeRecord {
    std::size_t index = 0;
    NodeId root = kNoNode;
    std::size_t size = 0;     // nodes made aware, root included
    std::size_t depth = 0;    // last non-empty layer
    std::size_t updates = 0;  // opinion writes
};

struct FjcRunRecord {
    Opinions initial;
    Opinions final;
    std::vector<CascadeRecord> cascades;
    /// Filled only when FjcOptions::keep_realizations is set (synthetic runs).
    std::vector<CascadeRealization> realizations;

    Opinions shift() const { return final - initial; }
};

struct UpdateEvent {
    std::size_t cascade;
    std::size_t layer;
    NodeId node;
    double old_value;
    double new_value;
};

using UpdateObserver = std::function<void(const UpdateEvent&)>;

struct FjcOptions {
    UpdateMode mode = UpdateMode::convex;
    bool keep_realizations = false;
    /// Called once per opinion write, in write order.
    UpdateObserver observer;
};

/// Immutable inputs shared by every run on one graph: the graph itself and
/// the gossip parameters derived from (W, Lambda) with d_i = followee count.
class FjcSystem {
public:
    FjcSystem(const SocialGraph& g, const InfluenceMatrix& w, const Susceptibility& lambda);

    const SocialGraph& graph() const noexcept { return *graph_; }
    const GossipParameters& params() const noexcept { return params_; }

private:
    const SocialGraph* graph_;
    GossipParameters params_;
};

/// Sequential cascades. For each root: sample a diffusion tree, then update
/// layers 1..depth in order; every layer reads the opinions as they stood
/// after the previous layer. Nodes outside the cascade keep their opinion.
FjcRunRecord run_fjc(const FjcSystem& system, const Opinions& u, const SeedSchedule& schedule,
                     const ReshareModel& model, Rng& rng, const FjcOptions& opts = {});

FjcRunRecord run_fjc(const SocialGraph& g, const InfluenceMatrix& w, const Susceptibility& lambda,
                     const Opinions& u, const SeedSchedule& schedule, const ReshareModel& model, Rng& rng,
                     const FjcOptions& opts = {});

/// Replays real reshares in time order: at every event (t, p, s) each
/// follower of s is updated with phi = {s}. Cascade records are per post,
/// in order of first event; a node's layer is one more than the layer of
/// the emitter that first exposed it to the post.
FjcRunRecord replay_trace(const FjcSystem& system, const Opinions& u, const ReshareTrace& trace,
                          const FjcOptions& opts = {});

/// Observer writing one JSON object per line:
/// {"cascade":..,"layer":..,"node":..,"old":..,"new":..}
UpdateObserver jsonl_update_log(std::ostream& out);

/// CSV "node,u,x_final,shift".
void write_node_opinions_csv(std::ostream& out, const FjcRunRecord& record);
/// CSV "index,root,size,depth".
void write_cascades_csv(std::ostream& out, const FjcRunRecord& record);

}  // namespace fjc
