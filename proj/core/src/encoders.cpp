#include "groke/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace groke {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string deg1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string heading_note(const Heading& h) {
    return "(heading: " + deg1(h.degrees()) + "\xC2\xB0, " + compass_word(h) + ")";
}

std::string heading_note_int(const Heading& h) {
    return "[heading: " + std::to_string(static_cast<long>(std::llround(h.degrees()))) +
           "\xC2\xB0, " + compass_word(h) + "]";
}

const Poi* find_poi(const MapGraph& g, const std::string& id) {
    for (const auto& p : g.pois()) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

std::string landmark_display(const std::vector<GroundedLandmark>& landmarks, char letter,
                             const std::string& poi_id, const MapGraph& g) {
    for (const auto& gl : landmarks) {
        if (gl.landmark.letter == letter) {
            const Poi* p = find_poi(g, poi_id);
            if (p && !p->name().empty() && p->name() != gl.landmark.name) {
                return gl.landmark.name + " / " + p->name();
            }
            return gl.landmark.name;
        }
    }
    return poi_id;
}

/// Non-back outgoing connections of a node, classified against its arrival
/// heading; the node the path arrived from is never listed.
struct Connection {
    NodeId target;
    Heading heading;
    RelativeDirection direction;
};

std::vector<Connection> visible_connections(const MapGraph& g, const PathNode& n,
                                            const NodeId* came_from) {
    std::vector<Connection> out;
    for (const auto& e : g.node(n.id).out_edges) {
        if (came_from && e.target == *came_from) continue;
        const auto rel = relative_direction(e.heading, n.arrival_heading);
        if (rel.direction == RelativeDirection::Back) continue;
        out.push_back({e.target, e.heading, rel.direction});
    }
    return out;
}

/// One sighting row per POI id: the nearest node that sees it.
struct PoiRow {
    char letter;
    std::string poi_id;
    NodeId nearby_node;
    RelativeDirection direction;
    double distance_m;
};

std::vector<PoiRow> collect_poi_rows(const VisibleArea& area) {
    std::map<std::string, PoiRow> best;
    auto scan = [&](const std::vector<PathNode>& list) {
        for (const auto& n : list) {
            for (const auto& s : n.nearby_pois) {
                auto it = best.find(s.poi_id);
                if (it == best.end() || s.distance_m < it->second.distance_m) {
                    best[s.poi_id] = {s.landmark_letter, s.poi_id, n.id, s.direction, s.distance_m};
                }
            }
        }
    };
    scan(area.path);
    scan(area.lookahead);
    std::vector<PoiRow> rows;
    for (auto& [id, row] : best) rows.push_back(row);
    std::sort(rows.begin(), rows.end(), [](const PoiRow& a, const PoiRow& b) {
        return std::tie(a.letter, a.poi_id) < std::tie(b.letter, b.poi_id);
    });
    return rows;
}

const NodeId* previous_of(const std::vector<PathNode>& path, const std::vector<PathNode>& lookahead,
                          std::size_t idx, bool in_lookahead,
                          const std::vector<NodeId>& trajectory) {
    if (!in_lookahead) {
        if (idx > 0) return &path[idx - 1].id;
        // the origin's predecessor is the previous trajectory node, when any
        if (trajectory.size() >= 2) return &trajectory[trajectory.size() - 2];
        return nullptr;
    }
    if (idx > 0) return &lookahead[idx - 1].id;
    return &path.back().id;
}

// ---------------------------------------------------------------- textual

std::string encode_textual(const EncodeInput& in) {
    std::ostringstream os;
    const VisibleArea& area = in.area;
    os << "Current position: Node " << area.origin << " " << heading_note(area.origin_heading)
       << "\n\n";

    os << "POI Legend:\n";
    bool any_letter = false;
    for (const auto& gl : in.landmarks) {
        if (gl.landmark.letter == '\0') continue;
        any_letter = true;
        os << "  " << gl.landmark.letter << ": " << gl.landmark.name;
        if (!gl.landmark.category.empty()) os << " (" << gl.landmark.category << ")";
        os << "\n";
    }
    if (!any_letter) os << "  (none)\n";
    os << "\n";

    auto emit_node = [&](const PathNode& n, const NodeId* came_from) {
        os << (n.kind == NodeKind::Intersection ? "Intersection " : "Node ") << n.id << ":\n";
        os << "  Connected to nodes:\n";
        for (const auto& c : visible_connections(in.graph, n, came_from)) {
            os << "    - Node " << c.target << " is to the " << lower(to_string(c.direction))
               << " " << heading_note(c.heading) << "\n";
        }
        if (!n.branches.empty()) {
            os << "  Branches from this intersection:\n";
            for (const auto& [dir, chain] : n.branches) {
                const Edge* head = nullptr;
                for (const auto& e : in.graph.node(n.id).out_edges) {
                    if (e.target == chain.front()) head = &e;
                }
                os << "    - " << to_string(dir) << " branch";
                if (head) os << " " << heading_note(head->heading);
                os << ":\n      - Path: ";
                for (std::size_t i = 0; i < chain.size(); ++i) {
                    if (i) os << " -> ";
                    os << chain[i];
                }
                os << "\n";
            }
        }
        if (!n.nearby_pois.empty()) {
            os << "  Nearby POIs:\n";
            for (const auto& s : n.nearby_pois) {
                os << "    - ";
                if (s.landmark_letter != '\0') {
                    os << s.landmark_letter << " ("
                       << landmark_display(in.landmarks, s.landmark_letter, s.poi_id, in.graph)
                       << ")";
                } else {
                    os << s.poi_id;
                }
                os << " is to the " << lower(to_string(s.direction)) << ", "
                   << std::llround(s.distance_m) << " m\n";
            }
        }
        os << "\n";
    };

    for (std::size_t i = 0; i < area.path.size(); ++i) {
        emit_node(area.path[i], previous_of(area.path, area.lookahead, i, false,
                                            in.trajectory_so_far));
    }
    if (!area.lookahead.empty()) {
        os << "Lookahead:\n\n";
        for (std::size_t i = 0; i < area.lookahead.size(); ++i) {
            emit_node(area.lookahead[i],
                      previous_of(area.path, area.lookahead, i, true, in.trajectory_so_far));
        }
    }
    os << render_planning_state(in.state, false);
    return os.str();
}

// ------------------------------------------------------------------ json

ordered_json node_entry(const EncodeInput& in, const PathNode& n, const NodeId* came_from,
                        bool with_coordinates) {
    ordered_json e;
    e["node_id"] = n.id;
    e["type"] = n.kind == NodeKind::Intersection ? "intersection" : "waypoint";
    if (with_coordinates) {
        const GeoPoint& p = in.graph.node(n.id).position;
        e["lat"] = p.lat;
        e["lng"] = p.lng;
    }
    ordered_json conns = ordered_json::array();
    for (const auto& c : visible_connections(in.graph, n, came_from)) {
        conns.push_back({{"target_node_id", c.target},
                         {"heading", round1(c.heading.degrees())},
                         {"direction", to_string(c.direction)}});
    }
    e["connections"] = std::move(conns);
    if (n.to_next) {
        e["to_next"] = {{"direction", to_string(n.to_next->direction)},
                        {"heading", round1(n.to_next->heading.degrees())}};
    }
    if (!n.branches.empty()) {
        ordered_json branches;
        for (const auto& [dir, chain] : n.branches) {
            branches[to_string(dir)] = chain;
        }
        e["branches"] = std::move(branches);
    }
    return e;
}

std::string encode_json(const EncodeInput& in, bool optimized) {
    const VisibleArea& area = in.area;
    ordered_json ctx;
    ordered_json& nav = ctx["navigation_context"];

    nav["current_position"] = {
        {"node_id", area.origin},
        {"heading", static_cast<long>(std::llround(area.origin_heading.degrees()))},
        {"compass_direction", compass_word(area.origin_heading)}};

    ordered_json prev = ordered_json::array();
    const auto& traj = in.trajectory_so_far;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const Heading step = bearing(in.graph.node(traj[i]).position,
                                     in.graph.node(traj[i + 1]).position);
        const Heading arrival =
            i == 0 ? step : bearing(in.graph.node(traj[i - 1]).position,
                                    in.graph.node(traj[i]).position);
        prev.push_back({{"node_id", traj[i]},
                        {"to_next", {{"direction", to_string(relative_direction(step, arrival).direction)},
                                     {"heading", round1(step.degrees())}}}});
    }
    nav["previous_path"] = std::move(prev);

    ordered_json nodes = ordered_json::array();
    for (std::size_t i = 0; i < area.path.size(); ++i) {
        nodes.push_back(node_entry(in, area.path[i],
                                   previous_of(area.path, area.lookahead, i, false, traj),
                                   !optimized));
    }
    nav["current_path_nodes"] = std::move(nodes);

    ordered_json look = ordered_json::array();
    for (std::size_t i = 0; i < area.lookahead.size(); ++i) {
        look.push_back(node_entry(in, area.lookahead[i],
                                  previous_of(area.path, area.lookahead, i, true, traj),
                                  !optimized));
    }
    nav["lookahead_nodes"] = std::move(look);

    ordered_json pois = ordered_json::array();
    for (const auto& row : collect_poi_rows(area)) {
        ordered_json p;
        if (row.letter != '\0') p["letter"] = std::string(1, row.letter);
        for (const auto& gl : in.landmarks) {
            if (gl.landmark.letter == row.letter) {
                p["name"] = gl.landmark.name;
                if (!gl.landmark.category.empty()) p["category"] = gl.landmark.category;
                break;
            }
        }
        p["poi_id"] = row.poi_id;
        p["nearby_node_id"] = row.nearby_node;
        p["direction"] = to_string(row.direction);
        p["distance_m"] = round1(row.distance_m);
        pois.push_back(std::move(p));
    }
    nav["pois"] = std::move(pois);

    return ctx.dump(2) + "\n\n" + render_planning_state(in.state, optimized);
}

// -------------------------------------------------------------- graphviz

std::string encode_graphviz(const EncodeInput& in) {
    std::ostringstream os;
    const VisibleArea& area = in.area;

    auto node_tag = [&](const PathNode& n) {
        return n.kind == NodeKind::Intersection ? n.id + "[Intersection]" : n.id;
    };

    std::vector<const PathNode*> spine;
    for (const auto& n : area.path) spine.push_back(&n);
    for (const auto& n : area.lookahead) spine.push_back(&n);

    for (const auto* n : spine) {
        if (n->kind == NodeKind::Intersection) {
            const NodeId* came_from = nullptr;
            for (std::size_t i = 0; i < spine.size(); ++i) {
                if (spine[i] == n && i > 0) came_from = &spine[i - 1]->id;
            }
            if (n->id == area.origin && in.trajectory_so_far.size() >= 2) {
                came_from = &in.trajectory_so_far[in.trajectory_so_far.size() - 2];
            }
            for (const auto& c : visible_connections(in.graph, *n, came_from)) {
                os << node_tag(*n) << " -> " << c.target << " [heading: "
                   << std::llround(c.heading.degrees()) << "\xC2\xB0, direction: "
                   << to_string(c.direction) << "]\n";
            }
        } else if (n->to_next) {
            NodeId next;
            for (std::size_t i = 0; i + 1 < spine.size(); ++i) {
                if (spine[i] == n) next = spine[i + 1]->id;
            }
            if (!next.empty()) {
                os << node_tag(*n) << " -> " << next << " [heading: "
                   << std::llround(n->to_next->heading.degrees()) << "\xC2\xB0, direction: "
                   << to_string(n->to_next->direction) << "]\n";
            }
        }
    }

    bool header = false;
    for (const auto* n : spine) {
        if (n->branches.empty()) continue;
        if (!header) {
            os << "\nIntersection Branches (extended nodes)\n";
            header = true;
        }
        for (const auto& [dir, chain] : n->branches) {
            const Edge* tail = nullptr;
            const NodeId& last = chain.back();
            const NodeId& before = chain.size() >= 2 ? chain[chain.size() - 2] : n->id;
            for (const auto& e : in.graph.node(before).out_edges) {
                if (e.target == last) tail = &e;
            }
            os << n->id << " -" << to_string(dir) << "-> ";
            for (std::size_t i = 0; i < chain.size(); ++i) {
                if (i) os << " -> ";
                os << chain[i];
            }
            if (tail) {
                os << " [heading: " << std::llround(tail->heading.degrees()) << "\xC2\xB0, "
                   << compass_word(tail->heading) << "]";
            }
            os << "\n";
        }
    }

    const auto rows = collect_poi_rows(area);
    if (!rows.empty()) {
        os << "\nPOI Connections\n";
        for (const auto& row : rows) {
            os << row.nearby_node << " -.-> ";
            if (row.letter != '\0') {
                os << row.letter << " ["
                   << landmark_display(in.landmarks, row.letter, row.poi_id, in.graph);
            } else {
                os << row.poi_id << " [" << row.poi_id;
            }
            os << ", direction: " << to_string(row.direction) << ", distance: "
               << std::llround(row.distance_m) << "m]\n";
        }
    }

    os << "\nCurrent position: " << area.origin << " " << heading_note_int(area.origin_heading)
       << "\n\n";
    os << render_planning_state(in.state, false);
    return os.str();
}

// ------------------------------------------------------------------ grid

std::string encode_grid(const EncodeInput& in) {
    const GridCanvas canvas =
        rasterize_grid(in.graph, in.area, in.trajectory_so_far, in.landmarks, in.label);
    std::ostringstream os;
    os << "Grid map (S=start, P=current position, 1=visited, 2=current path, "
          "3=intersection, 0=empty):\n\n";
    os << canvas.render() << "\n";
    os << "POI Legend:\n";
    if (canvas.legend.empty()) {
        os << "  (none)\n";
    } else {
        for (const auto& [letter, name] : canvas.legend) {
            os << "  " << letter << ": " << name << "\n";
        }
    }
    os << "\n" << render_planning_state(in.state, false);
    return os.str();
}

}  // namespace

const char* to_string(RepresentationKind k) {
    switch (k) {
        case RepresentationKind::Textual: return "textual";
        case RepresentationKind::StructuredJson: return "json";
        case RepresentationKind::OptimizedJson: return "optimized-json";
        case RepresentationKind::GraphvizStyle: return "graphviz";
        case RepresentationKind::Grid: return "grid";
    }
    return "textual";
}

RepresentationKind representation_from_string(const std::string& s) {
    if (s == "textual") return RepresentationKind::Textual;
    if (s == "json") return RepresentationKind::StructuredJson;
    if (s == "optimized-json") return RepresentationKind::OptimizedJson;
    if (s == "graphviz") return RepresentationKind::GraphvizStyle;
    if (s == "grid") return RepresentationKind::Grid;
    throw std::invalid_argument("unknown representation '" + s + "'");
}

std::string render_planning_state(const PlanningState& state, bool with_iteration) {
    std::ostringstream os;
    os << "Planning State:\n";
    for (const auto& g : state.sub_goals) {
        os << g.index << ". " << g.description << " (" << to_string(g.status);
        if (with_iteration && g.status == SubGoalStatus::InProgress) {
            os << ", Iteration " << g.iteration;
        }
        os << ")\n";
    }
    return os.str();
}

std::string encode(RepresentationKind kind, const EncodeInput& input) {
    switch (kind) {
        case RepresentationKind::Textual: return encode_textual(input);
        case RepresentationKind::StructuredJson: return encode_json(input, false);
        case RepresentationKind::OptimizedJson: return encode_json(input, true);
        case RepresentationKind::GraphvizStyle: return encode_graphviz(input);
        case RepresentationKind::Grid: return encode_grid(input);
    }
    throw std::logic_error("unreachable representation kind");
}

}  // namespace groke
