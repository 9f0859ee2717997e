#pragma once

#include <map>
#include <string>
#include <vector>

#include "groke/instruction.hpp"
#include "groke/visibility.hpp"

namespace groke {

enum class RepresentationKind { Textual, StructuredJson, OptimizedJson, GraphvizStyle, Grid };

const char* to_string(RepresentationKind k);
/// Parses the CLI spelling ("textual", "json", "optimized-json", "graphviz",
/// "grid"). Throws std::invalid_argument on anything else.
RepresentationKind representation_from_string(const std::string& s);

/// Everything a serializer may draw on for one step.
struct EncodeInput {
    const VisibleArea& area;                  // annotated
    std::vector<NodeId> trajectory_so_far;    // v_1 .. v_t, current node last
    const std::vector<GroundedLandmark>& landmarks;
    const PlanningState& state;
    const MapGraph& graph;
    std::string label;  // used in error messages (instance id)
};

/// Serializes the step context in the requested representation. Output is a
/// pure function of the inputs; each kind appends the numbered planning
/// state block, and OptimizedJson additionally tags the active sub-goal
/// with its iteration count and strips all coordinates.
std::string encode(RepresentationKind kind, const EncodeInput& input);

/// The numbered sub-goal list as shown to the navigator.
std::string render_planning_state(const PlanningState& state, bool with_iteration);

struct GridCanvas {
    std::vector<std::string> cells;           // row-major, one char per cell
    std::map<char, std::string> legend;       // POI letter -> landmark name
    int origin_row = 0;                       // cell of the start node
    int origin_col = 0;
    std::vector<std::string> warnings;        // dropped/displaced placements

    int rows() const { return static_cast<int>(cells.size()); }
    int cols() const { return cells.empty() ? 0 : static_cast<int>(cells.front().size()); }
    char at(int r, int c) const { return cells[r][c]; }
    std::string render() const;  // space-separated rows
};

inline constexpr int kGridMaxDim = 64;
inline constexpr double kGridIntersectionPoiM = 20.0;
inline constexpr double kGridSharedCellM = 5.0;

/// Rasterizes the trajectory and forward path onto a character grid using
/// heading-quantized unit offsets. Visited nodes become '1', the forward
/// path '2', intersections '3', with 'S' at the start and 'P' at the
/// current node ('P' wins when they coincide). POI letters are placed next
/// to their nearest sighted node and never overwrite a path marker.
/// Throws std::runtime_error when the canvas would exceed kGridMaxDim.
GridCanvas rasterize_grid(const MapGraph& g, const VisibleArea& area,
                          const std::vector<NodeId>& trajectory_so_far,
                          const std::vector<GroundedLandmark>& landmarks,
                          const std::string& label = {});

}  // namespace groke
