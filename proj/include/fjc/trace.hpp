#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fjc/cascade.hpp"
#include "fjc/graph.hpp"

namespace fjc {

struct ReshareEvent {
    double timestamp = 0.0;  // milliseconds
    std::string post_id;
    NodeId node = kNoNode;
};

/// Time-ordered reshare events. Ordering is a stable sort on timestamp, so
/// equal timestamps keep their input order; repeated (post, node) events
/// keep only the earliest.
class ReshareTrace {
public:
    ReshareTrace() = default;
    explicit ReshareTrace(std::vector<ReshareEvent> events);

    std::span<const ReshareEvent> events() const noexcept { return events_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }

    /// Source node of every post, in order of the post's first event.
    std::vector<NodeId> post_sources() const;
    std::size_t post_count() const;

    /// Throws InvalidArgument naming the first event whose node is not in g.
    void validate(const SocialGraph& g) const;

private:
    std::vector<ReshareEvent> events_;
};

/// "YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm]" to epoch milliseconds.
std::optional<double> parse_iso8601_ms(std::string_view text);

/// CSV with header "timestamp,post_id,node_id". Timestamps are integer (or
/// decimal) milliseconds or ISO-8601, detected per field. When original_ids
/// is non-empty, node ids are translated through it (sorted original ids,
/// as produced by load_edge_list); unknown ids raise ParseError.
ReshareTrace load_trace_csv(std::istream& in, std::span<const std::uint64_t> original_ids = {});
void write_trace_csv(std::ostream& out, const ReshareTrace& trace);

/// Keeps only posts whose every event lies on a node kept in old_to_new
/// (kNoNode marks dropped nodes) and renumbers the surviving events.
ReshareTrace restrict_trace(const ReshareTrace& trace, std::span<const NodeId> old_to_new);

/// Subgraph for replaying the top_k largest posts of a trace. The node set
/// is the union of their emitters; for each emitter s, a shortest follow
/// path s -> a and a -> s to the first emitter a is added whenever the
/// current induced subgraph lacks one, so the result is strongly connected
/// when g is. Returns the subgraph and the trace restricted to it.
struct TraceSubgraph {
    Subgraph subgraph;
    ReshareTrace trace;
};
TraceSubgraph top_cascades_subgraph(const SocialGraph& g, const ReshareTrace& trace, std::size_t top_k);

/// Events for one sampled cascade: the root at t0, then every resharer of
/// layer l at t0 + l * layer_spacing (plus its position inside the layer).
void append_cascade_events(std::vector<ReshareEvent>& events, const CascadeRealization& c,
                           const std::string& post_id, double t0, double layer_spacing = 1000.0);

struct ThetaSummary {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
    std::size_t available = 0;
    std::size_t unavailable = 0;
};

struct ThetaEstimate {
    std::vector<std::size_t> seen;
    std::vector<std::size_t> reshared;
    std::vector<double> theta;    // NaN where unavailable
    std::vector<char> available;
    double fallback = 0.0;
    ThetaSummary summary;

    ReshareModel model() const { return ReshareModel::per_node(theta, fallback); }
    /// Sum of reshared over sum of seen.
    double pooled() const;
};

/// theta_i = reshared_i / seen_i. A post counts as seen by i when a
/// followee of i emitted it strictly earlier than i did (or i never did);
/// it counts as reshared when i emitted it after such an exposure.
ThetaEstimate estimate_theta(const ReshareTrace& trace, const SocialGraph& g, double fallback);

/// Five-number summary plus mean (quartiles by linear interpolation between
/// order statistics), over the available entries.
ThetaSummary summarize(std::span<const double> values, std::size_t unavailable);

/// CSV "node,seen,reshared,theta,available".
void write_theta_report_csv(std::ostream& out, const ThetaEstimate& est);
/// Two-line table: header and the theta summary row.
void write_theta_summary_csv(std::ostream& out, const ThetaSummary& s);

}  // namespace fjc
