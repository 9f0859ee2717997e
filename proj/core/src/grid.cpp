#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "groke/encoders.hpp"

namespace groke {

namespace {

struct Cell {
    int r = 0;
    int c = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

int rank_of(char ch) {
    switch (ch) {
        case 'P': return 6;
        case 'S': return 5;
        case '3': return 4;
        case '2': return 3;
        case '1': return 2;
        case '0': return 0;
        default: return 1;  // POI letters
    }
}

/// Diagonal quadrant offset for a bearing: NE, SE, SW, NW in 90-degree arcs.
Cell quadrant_offset(const Heading& h) {
    const double v = h.degrees();
    if (v < 90.0) return {-1, 1};   // Northeast
    if (v < 180.0) return {1, 1};   // Southeast
    if (v < 270.0) return {1, -1};  // Southwest
    return {-1, -1};                // Northwest
}

}  // namespace

std::string GridCanvas::render() const {
    std::ostringstream os;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ' ';
            os << row[i];
        }
        os << '\n';
    }
    return os.str();
}

GridCanvas rasterize_grid(const MapGraph& g, const VisibleArea& area,
                          const std::vector<NodeId>& trajectory_so_far,
                          const std::vector<GroundedLandmark>& landmarks,
                          const std::string& label) {
    GridCanvas canvas;
    std::map<Cell, char> marks;
    std::map<NodeId, Cell> placed;

    auto put = [&](Cell cell, char ch) {
        auto it = marks.find(cell);
        if (it == marks.end() || rank_of(ch) > rank_of(it->second)) {
            marks[cell] = ch;
        }
    };

    // Walks a node sequence, placing each node one quantized step from its
    // predecessor. Collisions displace the new node one more cell along the
    // incoming offset until a free cell is found.
    auto place_chain = [&](const std::vector<NodeId>& chain, char mark) {
        if (chain.empty()) return;
        if (!placed.count(chain.front())) {
            placed[chain.front()] = {0, 0};
        }
        put(placed[chain.front()], mark);
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
            const NodeId& a = chain[i];
            const NodeId& b = chain[i + 1];
            if (placed.count(b)) {
                put(placed[b], mark);
                continue;
            }
            const GridOffset off = heading_to_grid_offset(
                bearing(g.node(a).position, g.node(b).position));
            Cell cell{placed[a].r + off.dr, placed[a].c + off.dc};
            int guard = 0;
            while (std::any_of(placed.begin(), placed.end(),
                               [&](const auto& kv) { return kv.second == cell; }) &&
                   guard++ < kGridMaxDim) {
                cell.r += off.dr;
                cell.c += off.dc;
                canvas.warnings.push_back("node " + b + " displaced to avoid cell collision");
            }
            placed[b] = cell;
            put(cell, mark);
        }
    };

    std::vector<NodeId> traj = trajectory_so_far;
    if (traj.empty()) traj.push_back(area.origin);
    place_chain(traj, '1');

    std::vector<NodeId> forward;
    for (const auto& n : area.path) forward.push_back(n.id);
    for (const auto& n : area.lookahead) forward.push_back(n.id);
    place_chain(forward, '2');

    for (const auto& [id, cell] : placed) {
        if (g.is_intersection(id)) put(cell, '3');
    }
    put(placed[traj.front()], 'S');
    put(placed[traj.back()], 'P');  // P wins over S when they coincide

    // POI letters: one cell per sighted POI, relative to its nearest node.
    std::map<std::string, std::tuple<NodeId, double, char>> nearest;
    auto scan = [&](const std::vector<PathNode>& list) {
        for (const auto& n : list) {
            for (const auto& s : n.nearby_pois) {
                auto it = nearest.find(s.poi_id);
                if (it == nearest.end() || s.distance_m < std::get<1>(it->second)) {
                    nearest[s.poi_id] = {n.id, s.distance_m, s.landmark_letter};
                }
            }
        }
    };
    scan(area.path);
    scan(area.lookahead);

    for (const auto& [poi_id, info] : nearest) {
        const auto& [node_id, distance, letter] = info;
        if (letter == '\0') continue;
        auto pit = placed.find(node_id);
        if (pit == placed.end()) continue;
        const Poi* poi = nullptr;
        for (const auto& p : g.pois()) {
            if (p.id == poi_id) poi = &p;
        }
        if (!poi || poi->position == g.node(node_id).position) continue;
        const Heading to_poi = bearing(g.node(node_id).position, poi->position);
        const Cell base = pit->second;

        std::vector<Cell> candidates;
        const bool corner = g.is_intersection(node_id) && distance <= kGridIntersectionPoiM;
        const GridOffset card = heading_to_grid_offset(to_poi);
        const Cell diag = quadrant_offset(to_poi);
        if (corner) {
            candidates.push_back({base.r + diag.r, base.c + diag.c});
            candidates.push_back({base.r + card.dr, base.c + card.dc});
        } else {
            // very close POIs would share the node cell, but path markers
            // are reserved, so they start at the adjacent cell too
            candidates.push_back({base.r + card.dr, base.c + card.dc});
            candidates.push_back({base.r + diag.r, base.c + diag.c});
        }
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                candidates.push_back({base.r + dr, base.c + dc});
            }
        }
        bool done = false;
        for (const Cell& cand : candidates) {
            auto it = marks.find(cand);
            if (it == marks.end() || it->second == '0') {
                marks[cand] = letter;
                done = true;
                break;
            }
        }
        if (!done) {
            canvas.warnings.push_back("poi " + poi_id + " dropped, no free cell near " + node_id);
        } else {
            for (const auto& gl : landmarks) {
                if (gl.landmark.letter == letter) canvas.legend[letter] = gl.landmark.name;
            }
        }
    }

    int rmin = 0, rmax = 0, cmin = 0, cmax = 0;
    for (const auto& [cell, ch] : marks) {
        rmin = std::min(rmin, cell.r);
        rmax = std::max(rmax, cell.r);
        cmin = std::min(cmin, cell.c);
        cmax = std::max(cmax, cell.c);
    }
    const int rows = rmax - rmin + 1;
    const int cols = cmax - cmin + 1;
    if (rows > kGridMaxDim || cols > kGridMaxDim) {
        throw std::runtime_error("grid canvas " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + " exceeds the " +
                                 std::to_string(kGridMaxDim) + " limit" +
                                 (label.empty() ? "" : " (instance " + label + ")"));
    }
    canvas.cells.assign(rows, std::string(cols, '0'));
    for (const auto& [cell, ch] : marks) {
        canvas.cells[cell.r - rmin][cell.c - cmin] = ch;
    }
    canvas.origin_row = placed[traj.front()].r - rmin;
    canvas.origin_col = placed[traj.front()].c - cmin;
    return canvas;
}

}  // namespace groke
