#pragma once

#include "fjc/graph.hpp"

namespace fjc::datasets {

/// Zachary's karate club (34 nodes, 78 friendships) as symmetric follows.
SocialGraph karate_club();

/// Undirected path 0 - 1 - ... - (n-1).
SocialGraph path(NodeId n);

/// Directed cycle in which node i follows node (i+1) mod n.
SocialGraph directed_cycle(NodeId n);

}  // namespace fjc::datasets
