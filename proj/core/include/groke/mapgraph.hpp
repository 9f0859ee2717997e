#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "groke/geo.hpp"

namespace groke {

using NodeId = std::string;

/// Raised when a dataset file does not match the documented schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a file parses but violates referential integrity
/// (dangling edge, route node missing from the graph, ...).
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Edge {
    NodeId target;
    Heading heading;  // recomputed from coordinates at load
};

struct GraphNode {
    NodeId id;
    GeoPoint position;
    std::vector<Edge> out_edges;          // sorted by target id
    std::vector<NodeId> neighbors;        // distinct, undirected, sorted
};

struct Poi {
    std::string id;
    GeoPoint position;
    std::map<std::string, std::string> tags;

    /// The value of the "name" tag when present, else an empty string.
    const std::string& name() const;
};

/// Immutable street-graph environment: navigable nodes, headed edges and
/// tagged points of interest. Shared read-only across concurrent episodes.
class MapGraph {
public:
    MapGraph(std::vector<GraphNode> nodes, std::vector<Poi> pois);

    bool has_node(const NodeId& id) const { return index_.count(id) > 0; }
    const GraphNode& node(const NodeId& id) const;
    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<GraphNode>& nodes() const { return nodes_; }
    const std::vector<Poi>& pois() const { return pois_; }

    /// Undirected degree: the number of distinct neighbors regardless of
    /// edge direction. Street data stores both directions of a two-way
    /// street, so this matches the physical branching factor.
    std::size_t degree(const NodeId& id) const { return node(id).neighbors.size(); }

    bool is_intersection(const NodeId& id) const { return degree(id) > 2; }

    /// Out-neighbors with headings recomputed from node positions,
    /// deterministically ordered by target id.
    std::vector<Edge> neighbors_with_headings(const NodeId& id) const { return node(id).out_edges; }

    bool has_edge(const NodeId& from, const NodeId& to) const;

private:
    std::vector<GraphNode> nodes_;
    std::vector<Poi> pois_;
    std::map<NodeId, std::size_t> index_;
};

/// One navigation task: an instruction, its local graph extract and the
/// ground-truth route from start to goal.
struct Instance {
    std::string instance_id;
    std::shared_ptr<const MapGraph> graph;
    std::string instruction;
    std::vector<NodeId> route;  // v_1 .. v_T, consecutive nodes connected
    Heading initial_heading;    // from file, or bearing(v_1, v_2) when absent
};

/// Loads a test-split document (see docs/DATASET.md for the schema) and
/// validates every instance invariant. Load order is preserved.
std::vector<Instance> load_instances(const std::string& path);

/// Same, but from an already-read JSON string (used by tests and tools).
std::vector<Instance> load_instances_from_string(const std::string& text,
                                                 const std::string& origin = "<memory>");

}  // namespace groke
