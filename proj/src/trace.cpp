#include "fjc/trace.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "fjc/error.hpp"
#include "number_format.hpp"

namespace fjc {

using detail::write_number;

ReshareTrace::ReshareTrace(std::vector<ReshareEvent> events) {
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (!std::isfinite(events[k].timestamp)) {
            throw InvalidArgument("event " + std::to_string(k) + " has a non-finite timestamp");
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const ReshareEvent& a, const ReshareEvent& b) { return a.timestamp < b.timestamp; });
    std::unordered_map<std::string, std::vector<NodeId>> emitted;
    events_.reserve(events.size());
    for (auto& e : events) {
        auto& nodes = emitted[e.post_id];
        if (std::find(nodes.begin(), nodes.end(), e.node) != nodes.end()) continue;
        nodes.push_back(e.node);
        events_.push_back(std::move(e));
    }
}

std::vector<NodeId> ReshareTrace::post_sources() const {
    std::vector<NodeId> sources;
    std::unordered_map<std::string_view, bool> started;
    for (const auto& e : events_) {
        if (started.emplace(e.post_id, true).second) sources.push_back(e.node);
    }
    return sources;
}

std::size_t ReshareTrace::post_count() const { return post_sources().size(); }

void ReshareTrace::validate(const SocialGraph& g) const {
    for (std::size_t k = 0; k < events_.size(); ++k) {
        if (events_[k].node >= g.node_count()) {
            throw InvalidArgument("trace event " + std::to_string(k) + " refers to unknown node " +
                                  std::to_string(events_[k].node));
        }
    }
}

namespace {

bool parse_int(std::string_view s, int& out) {
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                fields.back() += '"';
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no);
    return fields;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

void write_csv_field(std::ostream& out, const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

std::optional<double> parse_iso8601_ms(std::string_view s) {
    // date part
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
        s[16] != ':') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, sec;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d) ||
        !parse_int(s.substr(11, 2), h) || !parse_int(s.substr(14, 2), mi) || !parse_int(s.substr(17, 2), sec)) {
        return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;

    std::size_t pos = 19;
    double frac_ms = 0.0;
    if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        double scale = 100.0;
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            frac_ms += (s[pos] - '0') * scale;
            scale /= 10.0;
            ++pos;
        }
        if (pos == start) return std::nullopt;
    }
    int offset_min = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            pos = s.size();
        } else if ((s[pos] == '+' || s[pos] == '-') && (s.size() == pos + 6 || s.size() == pos + 5 ||
                                                        s.size() == pos + 3)) {
            const int sign = s[pos] == '-' ? -1 : 1;
            int oh = 0, om = 0;
            if (!parse_int(s.substr(pos + 1, 2), oh)) return std::nullopt;
            if (s.size() == pos + 6) {
                if (s[pos + 3] != ':' || !parse_int(s.substr(pos + 4, 2), om)) return std::nullopt;
            } else if (s.size() == pos + 5) {
                if (!parse_int(s.substr(pos + 3, 2), om)) return std::nullopt;
            }
            offset_min = sign * (oh * 60 + om);
        } else {
            return std::nullopt;
        }
    }
    const auto days = sys_days(ymd).time_since_epoch().count();
    const double seconds = static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec - offset_min * 60.0;
    return seconds * 1000.0 + frac_ms;
}

ReshareTrace load_trace_csv(std::istream& in, std::span<const std::uint64_t> original_ids) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<ReshareEvent> events;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line, line_no);
        if (fields.size() != 3) throw ParseError("expected 3 fields (timestamp,post_id,node_id)", line_no);
        for (auto& f : fields) f = trim(f);
        if (!header_seen) {
            header_seen = true;
            if (fields[0] != "timestamp" || fields[1] != "post_id" || fields[2] != "node_id") {
                throw ParseError("trace header must be \"timestamp,post_id,node_id\"", line_no);
            }
            continue;
        }
        ReshareEvent e;
        const std::string& ts = fields[0];
        const auto [tp, tec] = std::from_chars(ts.data(), ts.data() + ts.size(), e.timestamp);
        if (tec != std::errc{} || tp != ts.data() + ts.size()) {
            const auto iso = parse_iso8601_ms(ts);
            if (!iso) throw ParseError("unrecognised timestamp \"" + ts + "\"", line_no);
            e.timestamp = *iso;
        }
        e.post_id = fields[1];
        std::uint64_t raw = 0;
        const auto [np, nec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), raw);
        if (nec != std::errc{} || np != fields[2].data() + fields[2].size()) {
            throw ParseError("node_id must be a non-negative integer", line_no);
        }
        if (!original_ids.empty()) {
            const auto it = std::lower_bound(original_ids.begin(), original_ids.end(), raw);
            if (it == original_ids.end() || *it != raw) {
                throw ParseError("node " + std::to_string(raw) + " is not in the graph", line_no);
            }
            e.node = static_cast<NodeId>(it - original_ids.begin());
        } else {
            if (raw >= kNoNode) throw ParseError("node id too large", line_no);
            e.node = static_cast<NodeId>(raw);
        }
        events.push_back(std::move(e));
    }
    return ReshareTrace(std::move(events));
}

void write_trace_csv(std::ostream& out, const ReshareTrace& trace) {
    out << "timestamp,post_id,node_id\n";
    for (const auto& e : trace.events()) {
        write_number(out, e.timestamp);
        out << ',';
        write_csv_field(out, e.post_id);
        out << ',' << e.node << '\n';
    }
}

void append_cascade_events(std::vector<ReshareEvent>& events, const CascadeRealization& c,
                           const std::string& post_id, double t0, double layer_spacing) {
    for (std::size_t l = 0; l < c.layer_count(); ++l) {
        double tick = 0.0;
        for (std::size_t pos = c.layer_offsets[l]; pos < c.layer_offsets[l + 1]; ++pos) {
            if (!c.reshared[pos]) continue;
            events.push_back({t0 + static_cast<double>(l) * layer_spacing + tick, post_id, c.nodes[pos]});
            tick += 1.0;
        }
    }
}

double ThetaEstimate::pooled() const {
    std::size_t s = 0, r = 0;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        s += seen[i];
        r += reshared[i];
    }
    return s == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(r) / static_cast<double>(s);
}

ThetaEstimate estimate_theta(const ReshareTrace& trace, const SocialGraph& g, double fallback) {
    trace.validate(g);
    const NodeId n = g.node_count();
    ThetaEstimate est;
    est.seen.assign(n, 0);
    est.reshared.assign(n, 0);
    est.fallback = fallback;

    // event positions per post, in trace order
    std::unordered_map<std::string_view, std::vector<std::size_t>> by_post;
    std::vector<std::string_view> post_order;
    const auto events = trace.events();
    for (std::size_t k = 0; k < events.size(); ++k) {
        auto [it, fresh] = by_post.try_emplace(events[k].post_id);
        if (fresh) post_order.push_back(events[k].post_id);
        it->second.push_back(k);
    }

    std::unordered_map<NodeId, std::size_t> emitted_at, exposed_at;
    for (const auto& post : post_order) {
        emitted_at.clear();
        exposed_at.clear();
        for (std::size_t k : by_post[post]) {
            const NodeId j = events[k].node;
            emitted_at.emplace(j, k);
            for (NodeId f : g.followers(j)) exposed_at.emplace(f, k);  // keeps the earliest
        }
        for (const auto& [f, first_exposure] : exposed_at) {
            const auto em = emitted_at.find(f);
            if (em == emitted_at.end()) {
                ++est.seen[f];
            } else if (em->second > first_exposure) {
                ++est.seen[f];
                ++est.reshared[f];
            }
        }
    }

    est.theta.assign(n, std::numeric_limits<double>::quiet_NaN());
    est.available.assign(n, 0);
    std::vector<double> values;
    for (NodeId i = 0; i < n; ++i) {
        if (est.seen[i] == 0) continue;
        est.available[i] = 1;
        est.theta[i] = static_cast<double>(est.reshared[i]) / static_cast<double>(est.seen[i]);
        values.push_back(est.theta[i]);
    }
    est.summary = summarize(values, n - values.size());
    return est;
}

ThetaSummary summarize(std::span<const double> values, std::size_t unavailable) {
    ThetaSummary s;
    s.available = values.size();
    s.unavailable = unavailable;
    if (values.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.min = s.q1 = s.median = s.q3 = s.max = s.mean = nan;
        return s;
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    auto quantile = [&](double p) {
        const double h = (static_cast<double>(v.size()) - 1.0) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.min = v.front();
    s.max = v.back();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    double total = 0.0;
    for (double x : v) total += x;
    s.mean = total / static_cast<double>(v.size());
    return s;
}

void write_theta_report_csv(std::ostream& out, const ThetaEstimate& est) {
    out << "node,seen,reshared,theta,available\n";
    for (std::size_t i = 0; i < est.seen.size(); ++i) {
        out << i << ',' << est.seen[i] << ',' << est.reshared[i] << ',';
        if (est.available[i]) {
            write_number(out, est.theta[i]);
        } else {
            write_number(out, est.fallback);
        }
        out << ',' << (est.available[i] ? 1 : 0) << '\n';
    }
}

void write_theta_summary_csv(std::ostream& out, const ThetaSummary& s) {
    out << "min,q1,median,q3,max,mean,na\n";
    for (double v : {s.min, s.q1, s.median, s.q3, s.max, s.mean}) {
        write_number(out, v);
        out << ',';
    }
    out << s.unavailable << '\n';
}

}  // namespace fjc

namespace fjc {

ReshareTrace restrict_trace(const ReshareTrace& trace, std::span<const NodeId> old_to_new) {
    std::unordered_map<std::string_view, bool> inside;
    for (const auto& e : trace.events()) {
        const bool ok = e.node < old_to_new.size() && old_to_new[e.node] != kNoNode;
        auto [it, fresh] = inside.try_emplace(e.post_id, ok);
        if (!fresh) it->second = it->second && ok;
    }
    std::vector<ReshareEvent> kept;
    for (const auto& e : trace.events()) {
        if (inside[e.post_id]) kept.push_back({e.timestamp, e.post_id, old_to_new[e.node]});
    }
    return ReshareTrace(std::move(kept));
}

namespace {

// Shortest follow path from `from` to `to` in g (followee direction),
// inclusive of both ends; empty when unreachable.
std::vector<NodeId> shortest_follow_path(const SocialGraph& g, NodeId from, NodeId to) {
    std::vector<NodeId> parent(g.node_count(), kNoNode);
    std::vector<NodeId> queue{from};
    parent[from] = from;
    for (std::size_t head = 0; head < queue.size() && parent[to] == kNoNode; ++head) {
        for (NodeId j : g.followees(queue[head])) {
            if (parent[j] == kNoNode) {
                parent[j] = queue[head];
                queue.push_back(j);
            }
        }
    }
    if (parent[to] == kNoNode) return {};
    std::vector<NodeId> path{to};
    while (path.back() != from) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

// Reachability from `from` to `to` using only nodes flagged in `member`.
bool reaches_within(const SocialGraph& g, const std::vector<char>& member, NodeId from, NodeId to) {
    std::vector<char> seen(g.node_count(), 0);
    std::vector<NodeId> queue{from};
    seen[from] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        if (queue[head] == to) return true;
        for (NodeId j : g.followees(queue[head])) {
            if (member[j] && !seen[j]) {
                seen[j] = 1;
                queue.push_back(j);
            }
        }
    }
    return false;
}

}  // namespace

TraceSubgraph top_cascades_subgraph(const SocialGraph& g, const ReshareTrace& trace, std::size_t top_k) {
    trace.validate(g);
    std::unordered_map<std::string_view, std::size_t> counts;
    std::vector<std::string_view> order;
    for (const auto& e : trace.events()) {
        if (counts[e.post_id]++ == 0) order.push_back(e.post_id);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::string_view a, std::string_view b) { return counts[a] > counts[b]; });
    order.resize(std::min(order.size(), top_k));
    std::unordered_map<std::string_view, bool> chosen;
    for (auto p : order) chosen[p] = true;

    std::vector<char> member(g.node_count(), 0);
    std::vector<NodeId> emitters;
    for (const auto& e : trace.events()) {
        if (chosen.count(e.post_id) && !member[e.node]) {
            member[e.node] = 1;
            emitters.push_back(e.node);
        }
    }
    if (!emitters.empty()) {
        const NodeId anchor = emitters.front();
        for (NodeId s : emitters) {
            for (const auto& [from, to] : {std::pair{s, anchor}, std::pair{anchor, s}}) {
                if (reaches_within(g, member, from, to)) continue;
                for (NodeId p : shortest_follow_path(g, from, to)) member[p] = 1;
            }
        }
    }
    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (member[v]) nodes.push_back(v);
    }
    TraceSubgraph out{induced_subgraph(g, nodes), {}};
    std::vector<ReshareEvent> kept;
    for (const auto& e : trace.events()) {
        if (chosen.count(e.post_id)) kept.push_back(e);
    }
    out.trace = restrict_trace(ReshareTrace(std::move(kept)), out.subgraph.old_to_new);
    return out;
}

}  // namespace fjc
