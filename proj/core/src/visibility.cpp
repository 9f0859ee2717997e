#include "groke/visibility.hpp"

#include <algorithm>
#include <set>

#include "groke/instruction.hpp"

namespace groke {

bool VisibleArea::contains(const NodeId& id) const {
    auto in = [&](const std::vector<PathNode>& v) {
        return std::any_of(v.begin(), v.end(), [&](const PathNode& n) { return n.id == id; });
    };
    if (in(path) || in(lookahead)) return true;
    for (const auto& n : path) {
        for (const auto& [dir, chain] : n.branches) {
            if (std::find(chain.begin(), chain.end(), id) != chain.end()) return true;
        }
    }
    for (const auto& n : lookahead) {
        for (const auto& [dir, chain] : n.branches) {
            if (std::find(chain.begin(), chain.end(), id) != chain.end()) return true;
        }
    }
    return false;
}

std::vector<NodeId> VisibleArea::presented_nodes() const {
    std::vector<NodeId> out;
    std::set<NodeId> seen;
    auto add = [&](const NodeId& id) {
        if (seen.insert(id).second) out.push_back(id);
    };
    for (const auto& list : {path, lookahead}) {
        for (const auto& n : list) {
            add(n.id);
            for (const auto& [dir, chain] : n.branches) {
                for (const auto& c : chain) add(c);
            }
        }
    }
    return out;
}

std::vector<NodeId> VisibleArea::route_to(const NodeId& target) const {
    if (target == origin) return {};
    std::vector<const PathNode*> spine;
    for (const auto& n : path) spine.push_back(&n);
    for (const auto& n : lookahead) spine.push_back(&n);

    // Spine hits are preferred; branch chains hang off a spine node, so the
    // hop route is the spine prefix plus the chain prefix.
    std::vector<NodeId> prefix;
    for (std::size_t i = 0; i < spine.size(); ++i) {
        if (i > 0) prefix.push_back(spine[i]->id);
        if (spine[i]->id == target) return prefix;
    }
    prefix.clear();
    for (std::size_t i = 0; i < spine.size(); ++i) {
        if (i > 0) prefix.push_back(spine[i]->id);
        for (const auto& [dir, chain] : spine[i]->branches) {
            auto cit = std::find(chain.begin(), chain.end(), target);
            if (cit == chain.end()) continue;
            std::vector<NodeId> hops = prefix;
            hops.insert(hops.end(), chain.begin(), std::next(cit));
            return hops;
        }
    }
    throw std::invalid_argument("node '" + target + "' is not presented by this visible area");
}

NodeId tie_break_neighbor(const std::vector<Edge>& candidates, const Heading& h_curr) {
    if (candidates.empty()) {
        throw std::invalid_argument("tie_break_neighbor requires at least one candidate");
    }
    const Edge* best = &candidates.front();
    double best_diff = angular_diff(h_curr, best->heading);
    for (const auto& c : candidates) {
        const double d = angular_diff(h_curr, c.heading);
        if (d < best_diff || (d == best_diff && c.target < best->target)) {
            best = &c;
            best_diff = d;
        }
    }
    return best->target;
}

namespace {

struct GreedyStep {
    NodeId next;
    Heading heading;
    double diff;
};

std::optional<GreedyStep> greedy_step(const MapGraph& g, const NodeId& cur, const Heading& h) {
    const auto& edges = g.node(cur).out_edges;
    if (edges.empty()) return std::nullopt;
    const NodeId pick = tie_break_neighbor(edges, h);
    for (const auto& e : edges) {
        if (e.target == pick) return GreedyStep{e.target, e.heading, angular_diff(h, e.heading)};
    }
    return std::nullopt;
}

void attach_branches(const MapGraph& g, PathNode& node, const std::optional<NodeId>& came_from) {
    if (node.kind != NodeKind::Intersection) return;
    struct Candidate {
        Edge edge;
        double diff;
    };
    std::map<RelativeDirection, Candidate> picked;
    for (const auto& e : g.node(node.id).out_edges) {
        if (came_from && e.target == *came_from) continue;
        const auto rel = relative_direction(e.heading, node.arrival_heading);
        if (rel.direction == RelativeDirection::Back) continue;
        const double d = angular_diff(node.arrival_heading, e.heading);
        auto it = picked.find(rel.direction);
        if (it == picked.end() || d < it->second.diff ||
            (d == it->second.diff && e.target < it->second.edge.target)) {
            picked[rel.direction] = {e, d};
        }
    }
    for (const auto& [dir, cand] : picked) {
        std::vector<NodeId> chain{cand.edge.target};
        // extend heading-greedy up to the chain length, same guards as the path
        NodeId cur = cand.edge.target;
        Heading h = cand.edge.heading;
        while (static_cast<int>(chain.size()) < kBranchChainLength) {
            auto step = greedy_step(g, cur, h);
            if (!step || step->diff >= kTurnThresholdDeg || step->next == node.id ||
                std::find(chain.begin(), chain.end(), step->next) != chain.end()) {
                break;
            }
            chain.push_back(step->next);
            cur = step->next;
            h = step->heading;
        }
        node.branches[dir] = std::move(chain);
    }
}

PathNode make_node(const MapGraph& g, const NodeId& id, const Heading& arrival,
                   const std::optional<NodeId>& came_from) {
    PathNode n;
    n.id = id;
    n.kind = g.is_intersection(id) ? NodeKind::Intersection : NodeKind::Waypoint;
    n.arrival_heading = arrival;
    attach_branches(g, n, came_from);
    return n;
}

}  // namespace

VisibleArea construct_visible_area(const MapGraph& g, const NodeId& v_t, const Heading& h_t,
                                   int visibility_units) {
    if (visibility_units < 1) {
        throw std::invalid_argument("visibility units must be >= 1");
    }
    (void)g.node(v_t);  // validate existence up front

    VisibleArea area;
    area.origin = v_t;
    area.origin_heading = h_t;

    std::set<NodeId> visited{v_t};
    NodeId cur = v_t;
    Heading h = h_t;
    int intersections = 0;
    int iterations = 0;

    area.path.push_back(make_node(g, v_t, h_t, std::nullopt));

    auto advance = [&](std::vector<PathNode>& into) -> bool {
        auto step = greedy_step(g, cur, h);
        if (!step || step->diff >= kTurnThresholdDeg || visited.count(step->next)) {
            return false;
        }
        auto& prev = into.empty() ? area.path.back() : into.back();
        prev.to_next = NextStep{step->heading,
                                relative_direction(step->heading, prev.arrival_heading).direction};
        into.push_back(make_node(g, step->next, step->heading, cur));
        visited.insert(step->next);
        cur = step->next;
        h = step->heading;
        return true;
    };

    while (iterations < kTraversalIterationCap) {
        ++iterations;
        if (g.is_intersection(cur)) {
            ++intersections;
            if (intersections >= visibility_units) break;
        }
        if (!advance(area.path)) break;
    }

    for (int k = 0; k < kLookaheadNodes; ++k) {
        if (!advance(area.lookahead)) break;
    }
    return area;
}

void annotate_pois(const MapGraph& g, VisibleArea& area,
                   const std::vector<GroundedLandmark>& grounded) {
    std::map<std::string, const Poi*> poi_index;
    for (const auto& p : g.pois()) poi_index.emplace(p.id, &p);

    auto annotate_list = [&](std::vector<PathNode>& list) {
        for (PathNode& n : list) {
            n.nearby_pois.clear();
            const GeoPoint& npos = g.node(n.id).position;
            const Heading ref = n.to_next ? n.to_next->heading
                                : (n.id == area.origin ? area.origin_heading : n.arrival_heading);
            for (const auto& gl : grounded) {
                for (const auto& pid : gl.pois) {
                    auto it = poi_index.find(pid);
                    if (it == poi_index.end()) continue;
                    const Poi& poi = *it->second;
                    const double d = haversine_distance(npos, poi.position);
                    if (d > kPoiMaxDistanceM) continue;
                    if (poi.position == npos) continue;  // degenerate, no bearing
                    const auto rel = relative_direction(bearing(npos, poi.position), ref);
                    n.nearby_pois.push_back({pid, gl.landmark.letter, rel.direction, d});
                }
            }
            std::sort(n.nearby_pois.begin(), n.nearby_pois.end(),
                      [](const PoiSighting& a, const PoiSighting& b) {
                          return std::tie(a.poi_id, a.distance_m) < std::tie(b.poi_id, b.distance_m);
                      });
        }
    };
    annotate_list(area.path);
    annotate_list(area.lookahead);
}

}  // namespace groke
