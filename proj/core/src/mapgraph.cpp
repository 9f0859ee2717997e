#include "groke/mapgraph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace groke {

namespace {

using nlohmann::json;

const std::string kEmpty;

std::string ctx(const std::string& origin, const std::string& instance_id) {
    return origin + (instance_id.empty() ? "" : " [instance " + instance_id + "]");
}

double require_number(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j.at(field).is_number()) {
        throw SchemaError(where + ": missing or non-numeric field '" + std::string(field) + "'");
    }
    return j.at(field).get<double>();
}

std::string require_string(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j.at(field).is_string()) {
        throw SchemaError(where + ": missing or non-string field '" + std::string(field) + "'");
    }
    return j.at(field).get<std::string>();
}

const json& require_array(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field) || !j.at(field).is_array()) {
        throw SchemaError(where + ": missing or non-array field '" + std::string(field) + "'");
    }
    return j.at(field);
}

}  // namespace

const std::string& Poi::name() const {
    auto it = tags.find("name");
    return it == tags.end() ? kEmpty : it->second;
}

MapGraph::MapGraph(std::vector<GraphNode> nodes, std::vector<Poi> pois)
    : nodes_(std::move(nodes)), pois_(std::move(pois)) {
    if (nodes_.empty()) {
        throw IntegrityError("graph must contain at least one node");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) throw IntegrityError("empty node id");
        if (!index_.emplace(nodes_[i].id, i).second) {
            throw IntegrityError("duplicate node id '" + nodes_[i].id + "'");
        }
    }
    // Recompute edge headings from positions and derive undirected neighbor
    // sets; coordinates are the single source of truth for geometry.
    std::map<NodeId, std::set<NodeId>> undirected;
    for (auto& n : nodes_) {
        std::sort(n.out_edges.begin(), n.out_edges.end(),
                  [](const Edge& a, const Edge& b) { return a.target < b.target; });
        for (auto& e : n.out_edges) {
            auto it = index_.find(e.target);
            if (it == index_.end()) {
                throw IntegrityError("edge " + n.id + " -> " + e.target +
                                     " references unknown node '" + e.target + "'");
            }
            const GraphNode& tgt = nodes_[it->second];
            if (tgt.position == n.position) {
                throw IntegrityError("edge " + n.id + " -> " + e.target +
                                     " connects coincident coordinates");
            }
            e.heading = bearing(n.position, tgt.position);
            undirected[n.id].insert(e.target);
            undirected[e.target].insert(n.id);
        }
    }
    for (auto& n : nodes_) {
        auto& s = undirected[n.id];
        n.neighbors.assign(s.begin(), s.end());
    }
}

const GraphNode& MapGraph::node(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw IntegrityError("unknown node id '" + id + "'");
    }
    return nodes_[it->second];
}

bool MapGraph::has_edge(const NodeId& from, const NodeId& to) const {
    const auto& edges = node(from).out_edges;
    return std::any_of(edges.begin(), edges.end(),
                       [&](const Edge& e) { return e.target == to; });
}

namespace {

Instance parse_instance(const json& j, const std::string& origin) {
    std::string id = require_string(j, "id", origin);
    const std::string where = ctx(origin, id);

    std::vector<GraphNode> nodes;
    for (const auto& nj : require_array(j, "nodes", where)) {
        GraphNode n;
        n.id = require_string(nj, "id", where);
        n.position = {require_number(nj, "lat", where + " node " + n.id),
                      require_number(nj, "lng", where + " node " + n.id)};
        if (!n.position.valid()) {
            throw SchemaError(where + ": node " + n.id + " has out-of-range coordinates");
        }
        nodes.push_back(std::move(n));
    }

    std::map<NodeId, std::size_t> pos;
    for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i].id] = i;

    struct FileHeading { NodeId from, to; double deg; };
    std::vector<FileHeading> file_headings;
    for (const auto& ej : require_array(j, "edges", where)) {
        const std::string from = require_string(ej, "from", where);
        const std::string to = require_string(ej, "to", where);
        auto it = pos.find(from);
        if (it == pos.end()) {
            throw IntegrityError(where + ": edge 'from' references unknown node '" + from + "'");
        }
        nodes[it->second].out_edges.push_back({to, Heading{}});
        if (ej.contains("heading")) {
            file_headings.push_back({from, to, require_number(ej, "heading", where)});
        }
    }

    std::vector<Poi> pois;
    for (const auto& pj : require_array(j, "pois", where)) {
        Poi p;
        p.id = require_string(pj, "id", where);
        p.position = {require_number(pj, "lat", where + " poi " + p.id),
                      require_number(pj, "lng", where + " poi " + p.id)};
        if (!pj.contains("tags") || !pj.at("tags").is_object() || pj.at("tags").empty()) {
            throw SchemaError(where + ": poi " + p.id + " must carry at least one tag");
        }
        for (auto it = pj.at("tags").begin(); it != pj.at("tags").end(); ++it) {
            if (!it.value().is_string()) {
                throw SchemaError(where + ": poi " + p.id + " tag '" + it.key() +
                                  "' must be a string");
            }
            p.tags[it.key()] = it.value().get<std::string>();
        }
        pois.push_back(std::move(p));
    }

    Instance inst;
    inst.instance_id = std::move(id);
    inst.graph = std::make_shared<MapGraph>(std::move(nodes), std::move(pois));
    inst.instruction = require_string(j, "instruction", where);

    // Recomputed headings win; file-provided ones are only cross-checked.
    for (const auto& fh : file_headings) {
        for (const auto& e : inst.graph->node(fh.from).out_edges) {
            if (e.target != fh.to) continue;
            if (angular_diff(e.heading, Heading(fh.deg)) > 0.5) {
                throw IntegrityError(where + ": edge " + fh.from + " -> " + fh.to +
                                     " stored heading deviates more than 0.5 deg from geometry");
            }
        }
    }

    for (const auto& rj : require_array(j, "route", where)) {
        if (!rj.is_string()) throw SchemaError(where + ": route entries must be node ids");
        inst.route.push_back(rj.get<std::string>());
    }
    if (inst.route.size() < 2) {
        throw IntegrityError(where + ": route must contain at least 2 nodes");
    }
    for (const auto& rid : inst.route) {
        if (!inst.graph->has_node(rid)) {
            throw IntegrityError(where + ": route references unknown node '" + rid + "'");
        }
    }
    for (std::size_t i = 0; i + 1 < inst.route.size(); ++i) {
        if (!inst.graph->has_edge(inst.route[i], inst.route[i + 1])) {
            throw IntegrityError(where + ": route nodes " + inst.route[i] + " -> " +
                                 inst.route[i + 1] + " are not connected by an edge");
        }
    }

    if (j.contains("initial_heading")) {
        inst.initial_heading = Heading(require_number(j, "initial_heading", where));
    } else {
        inst.initial_heading = bearing(inst.graph->node(inst.route[0]).position,
                                       inst.graph->node(inst.route[1]).position);
    }
    return inst;
}

}  // namespace

std::vector<Instance> load_instances_from_string(const std::string& text,
                                                 const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(origin + ": not valid JSON: " + e.what());
    }
    const json* list = nullptr;
    if (doc.is_array()) {
        list = &doc;
    } else if (doc.is_object() && doc.contains("instances") && doc.at("instances").is_array()) {
        list = &doc.at("instances");
    } else {
        throw SchemaError(origin + ": expected an array or an object with an 'instances' array");
    }
    std::vector<Instance> out;
    out.reserve(list->size());
    for (const auto& j : *list) {
        out.push_back(parse_instance(j, origin));
    }
    return out;
}

std::vector<Instance> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open dataset file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_instances_from_string(buf.str(), path);
}

}  // namespace groke
