#pragma once

#include <string>
#include <vector>

#include "gridtop/common.hpp"

namespace gridtop {

// Plain serialized form of a network; build_network() validates and
// canonicalizes it into a PowerNetwork.

struct DocumentNode {
  int id = 0;
  double inertia = 1.0;
  double damping = 1.0;
  bool zero_injection = false;
};

struct DocumentEdge {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
  bool existing = false;
};

struct AngleWeight {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

struct FrequencyWeight {
  int i = 0;
  double weight = 0.0;
};

struct ObjectiveSpec {
  bool coherence = true;  // coherence preset; otherwise custom w/s below
  std::vector<AngleWeight> w;
  std::vector<FrequencyWeight> s;
};

struct NetworkDocument {
  int schema_version = 1;
  int reference_node = 1;
  std::vector<DocumentNode> nodes;
  std::vector<DocumentEdge> edges;
  ObjectiveSpec objective;
};

NetworkDocument parse_network_document(const std::string& json_text);
std::string serialize_network_document(const NetworkDocument& doc);

struct MatpowerOptions {
  // Override dynamics the way the 39-bus experiments do: tiny inertia on
  // non-generator buses and one damping constant everywhere.
  bool uniform_dynamics = false;
  double non_generator_inertia = 1e-4;
  double uniform_damping = 0.025;
  double generator_inertia = 1.0;
  double generator_damping = 1.0;
};

// Converts a MATPOWER case file (mpc.bus / mpc.branch / mpc.gen) into a
// NetworkDocument. Branch reactance x gives susceptance 1/x; resistance is
// ignored (lossless model). The slack bus (type 3) becomes the reference.
NetworkDocument convert_matpower(const std::string& case_text, const MatpowerOptions& opts = {});

// Loads .json documents directly and .m files through the MATPOWER converter.
NetworkDocument load_network_document(const std::string& path, const MatpowerOptions& opts = {});

// Appends `count` seeded random candidate lines (not duplicating existing
// pairs, susceptance drawn between the existing min/max). Returns the edges'
// indices in the grown document.
std::vector<int> add_random_candidates(NetworkDocument& doc, int count, unsigned seed);

}  // namespace gridtop
