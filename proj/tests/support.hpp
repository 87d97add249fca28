#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "fjc/diagnostics.hpp"
#include "fjc/graph.hpp"

namespace fjc::test {

inline SocialGraph directed(NodeId n, std::initializer_list<std::pair<NodeId, NodeId>> follows) {
    std::vector<SocialGraph::Edge> edges(follows.begin(), follows.end());
    return SocialGraph(n, edges);
}

inline SocialGraph undirected(NodeId n, std::initializer_list<std::pair<NodeId, NodeId>> links) {
    std::vector<SocialGraph::Edge> edges;
    for (auto [a, b] : links) {
        edges.emplace_back(a, b);
        edges.emplace_back(b, a);
    }
    return SocialGraph(n, edges);
}

/// Collects warnings while alive and restores the default sink afterwards.
class WarningCapture {
public:
    WarningCapture() {
        set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
    }
    ~WarningCapture() { set_warning_sink(nullptr); }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    std::vector<std::string> messages;
};

}  // namespace fjc::test
