#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cspkit/csp.hpp"
#include "cspkit/graph.hpp"

namespace cspkit {

// JSON schema:
//   instance: { "n": int, "alphabets": [int],
//               "bipartition": {"A":[int],"B":[int]} | null,
//               "edges": [ {"id":int,"u":int,"v":int,
//                           "allowed":[[int,int],...]} ] }
//   graph:    { "n": int, "edges": [[int,int],...] }
// Canonical form: edges sorted by id (instance) / lexicographically (graph),
// allowed pairs sorted lexicographically, object keys sorted (nlohmann
// default). serialize() emits the canonical compact form.

inline nlohmann::json instance_to_json(const CspInstance& inst_in) {
  CspInstance inst = inst_in;
  inst.normalize();
  nlohmann::json j;
  j["n"] = inst.n;
  j["alphabets"] = inst.alphabet_sizes;
  if (inst.bipartition) {
    j["bipartition"] = {{"A", inst.bipartition->left},
                        {"B", inst.bipartition->right}};
  } else {
    j["bipartition"] = nullptr;
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : inst.edges) {
    nlohmann::json je;
    je["id"] = e.id;
    je["u"] = e.u;
    je["v"] = e.v;
    je["allowed"] = nlohmann::json::array();
    for (const auto& [a, b] : e.allowed)
      je["allowed"].push_back({a, b});
    j["edges"].push_back(std::move(je));
  }
  return j;
}

inline std::string serialize_instance(const CspInstance& inst) {
  return instance_to_json(inst).dump();
}

inline CspInstance instance_from_json(const nlohmann::json& j) {
  CspInstance inst;
  try {
    inst.n = j.at("n").get<int>();
    inst.alphabet_sizes = j.at("alphabets").get<std::vector<int>>();
    const auto& bp = j.at("bipartition");
    if (!bp.is_null()) {
      Bipartition b;
      b.left = bp.at("A").get<std::vector<int>>();
      b.right = bp.at("B").get<std::vector<int>>();
      inst.bipartition = std::move(b);
    }
    for (const auto& je : j.at("edges")) {
      CspEdge e;
      e.id = je.at("id").get<int>();
      e.u = je.at("u").get<int>();
      e.v = je.at("v").get<int>();
      for (const auto& pr : je.at("allowed")) {
        if (!pr.is_array() || pr.size() != 2)
          throw ValidationError("allowed pair must be a 2-element array");
        e.allowed.emplace_back(pr.at(0).get<int>(), pr.at(1).get<int>());
      }
      inst.edges.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("instance schema violation: ") +
                          ex.what());
  }
  inst.normalize();
  inst.validate();
  return inst;
}

inline CspInstance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ValidationError(std::string("instance parse error: ") + ex.what());
  }
  return instance_from_json(j);
}

inline nlohmann::json graph_to_json(const SimpleGraph& g) {
  nlohmann::json j;
  j["n"] = g.num_vertices();
  j["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : g.edge_list()) j["edges"].push_back({u, v});
  return j;
}

inline std::string serialize_graph(const SimpleGraph& g) {
  return graph_to_json(g).dump();
}

inline SimpleGraph graph_from_json(const nlohmann::json& j) {
  try {
    SimpleGraph g(j.at("n").get<int>());
    for (const auto& pr : j.at("edges")) {
      if (!pr.is_array() || pr.size() != 2)
        throw ValidationError("graph edge must be a 2-element array");
      g.add_edge(pr.at(0).get<int>(), pr.at(1).get<int>());
    }
    return g;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("graph schema violation: ") + ex.what());
  }
}

inline SimpleGraph parse_graph(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ValidationError(std::string("graph parse error: ") + ex.what());
  }
  return graph_from_json(j);
}

// FNV-1a content hash of the canonical serialization, for report provenance.
inline std::uint64_t content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t instance_hash(const CspInstance& inst) {
  return content_hash(serialize_instance(inst));
}

}  // namespace cspkit
