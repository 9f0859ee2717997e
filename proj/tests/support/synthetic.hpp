#pragma once

// Synthetic street worlds for tests: lattices, corridors and a small
// procedural city with degree-2 waypoints between intersections.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "groke/mapgraph.hpp"

namespace groke::testing {

/// Straight north-south corridor of `n` nodes, ids c00..c(n-1), ~20 m apart.
std::shared_ptr<MapGraph> make_corridor(int n);

/// Corridor a0-a1-a2 ending in a T whose two arms both require a sharp turn
/// (about 120 degrees off the approach heading).
std::shared_ptr<MapGraph> make_sharp_tee();

/// Full n-by-n lattice; every interior node is an intersection. Ids are
/// zero-padded "rRRcCC".
std::shared_ptr<MapGraph> make_lattice(int n);

struct CityOptions {
    int blocks = 4;              // blocks per side
    int waypoints_per_edge = 2;  // degree-2 nodes between intersections
    int pois = 10;
    std::uint64_t seed = 7;
};

/// Manhattan-style street grid: nodes exist only on street lines, so
/// mid-block nodes have degree 2 and crossings degree 3-4. POIs sit a few
/// meters off selected intersections with name/amenity tags.
std::shared_ptr<MapGraph> make_city(const CityOptions& opts = {});

/// Random no-reverse routes over a city graph, with simple template
/// instructions mentioning the turns and nearby POI names.
std::vector<Instance> make_city_instances(int count, const CityOptions& opts = {},
                                          std::uint64_t route_seed = 11);

/// A single instance over the given graph with an explicit route.
Instance make_instance(std::shared_ptr<const MapGraph> g, std::vector<NodeId> route,
                       std::string instruction = "go to the end", std::string id = "syn-0");

/// Serializes instances into the dataset file schema (used to exercise the
/// loader and the CLI round trip).
std::string instances_to_json(const std::vector<Instance>& instances);

}  // namespace groke::testing
