#pragma once

#include <map>
#include <optional>
#include <vector>

#include "groke/geo.hpp"
#include "groke/mapgraph.hpp"

namespace groke {

struct GroundedLandmark;  // instruction.hpp

enum class NodeKind { Waypoint, Intersection };

/// A point of interest sighted within 50 m of a path node, with its
/// direction relative to that node's reference heading.
struct PoiSighting {
    std::string poi_id;
    char landmark_letter = '\0';  // '\0' when the landmark carries no letter
    RelativeDirection direction = RelativeDirection::Forward;
    double distance_m = 0.0;
};

struct NextStep {
    Heading heading;
    RelativeDirection direction = RelativeDirection::Forward;
};

struct PathNode {
    NodeId id;
    NodeKind kind = NodeKind::Waypoint;
    Heading arrival_heading;             // heading used to reach this node (h_t at the origin)
    std::optional<NextStep> to_next;     // step toward the following node, when any
    /// For intersections: one onward chain per relative direction, each
    /// extended up to 2 nodes. The arrival direction is never listed.
    std::map<RelativeDirection, std::vector<NodeId>> branches;
    std::vector<PoiSighting> nearby_pois;
};

/// The forward view from a node: the heading-greedy path up to the
/// visibility bound, plus up to 3 lookahead nodes past the stopping point.
struct VisibleArea {
    NodeId origin;
    Heading origin_heading;
    std::vector<PathNode> path;       // path[0].id == origin
    std::vector<PathNode> lookahead;  // up to 3 nodes

    bool contains(const NodeId& id) const;
    /// All node ids the area presents, including branch chains.
    std::vector<NodeId> presented_nodes() const;
    /// Hop sequence from the origin to a presented node along the area's
    /// tree structure (path, lookahead, or a branch chain). Empty when the
    /// target is the origin itself; throws if the target is not presented.
    std::vector<NodeId> route_to(const NodeId& target) const;
};

/// Picks the candidate whose heading deviates least from the current one;
/// exact ties go to the smallest node id.
NodeId tie_break_neighbor(const std::vector<Edge>& candidates, const Heading& h_curr);

inline constexpr double kTurnThresholdDeg = 100.0;
inline constexpr int kTraversalIterationCap = 1000;
inline constexpr int kLookaheadNodes = 3;
inline constexpr double kPoiMaxDistanceM = 50.0;
inline constexpr int kBranchChainLength = 2;

/// Builds the visible area from `v_t` facing `h_t`.
///
/// The traversal repeatedly steps to the heading-greedy neighbor. It stops
/// at the u-th intersection encountered (the origin counts when it is one),
/// when the best onward turn reaches 100 degrees, when it would revisit a
/// node, or at the iteration safety cap. The lookahead then continues
/// heading-greedy for up to 3 further nodes under the same turn/revisit
/// guards.
VisibleArea construct_visible_area(const MapGraph& g, const NodeId& v_t, const Heading& h_t,
                                   int visibility_units);

/// Attaches PoiSightings for every grounded landmark's POI set to every
/// path and lookahead node within 50 m. Directions classify the bearing
/// node->POI against the node's onward heading (arrival heading at the
/// last node, origin heading when the path is a single node).
void annotate_pois(const MapGraph& g, VisibleArea& area,
                   const std::vector<GroundedLandmark>& grounded);

}  // namespace groke
