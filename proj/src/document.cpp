#include "gridtop/document.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gridtop {

using nlohmann::json;

namespace {

int line_of_offset(const std::string& text, size_t byte) {
  int line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

double require_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key))
    throw Error("schema error: missing field '" + path + "." + key + "'");
  if (!j[key].is_number())
    throw Error("schema error: field '" + path + "." + key + "' must be a number");
  return j[key].get<double>();
}

int require_int(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw Error("schema error: field '" + path + "." + key + "' must be an integer");
  return j[key].get<int>();
}

}  // namespace

NetworkDocument parse_network_document(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error("JSON parse error at line " + std::to_string(line_of_offset(json_text, e.byte)) +
                ": " + e.what());
  }

  NetworkDocument doc;
  doc.schema_version = j.value("schema_version", 1);
  if (doc.schema_version != 1)
    throw Error("unsupported schema_version " + std::to_string(doc.schema_version));
  if (!j.contains("reference_node"))
    throw Error("schema error: missing field 'reference_node'");
  doc.reference_node = j["reference_node"].get<int>();

  if (!j.contains("nodes") || !j["nodes"].is_array())
    throw Error("schema error: 'nodes' must be an array");
  int idx = 0;
  std::set<int> ids;
  for (const json& jn : j["nodes"]) {
    std::string path = "nodes[" + std::to_string(idx++) + "]";
    DocumentNode n;
    n.id = require_int(jn, path, "id");
    if (!ids.insert(n.id).second) throw Error("schema error: duplicate node id in " + path);
    n.inertia = require_number(jn, path, "inertia");
    n.damping = require_number(jn, path, "damping");
    std::string kind = jn.value("kind", std::string("machine"));
    if (kind != "machine" && kind != "zero_injection")
      throw Error("schema error: " + path + ".kind must be machine|zero_injection");
    n.zero_injection = (kind == "zero_injection");
    doc.nodes.push_back(n);
  }

  if (!j.contains("edges") || !j["edges"].is_array())
    throw Error("schema error: 'edges' must be an array");
  idx = 0;
  for (const json& je : j["edges"]) {
    std::string path = "edges[" + std::to_string(idx++) + "]";
    DocumentEdge e;
    e.from = require_int(je, path, "from");
    e.to = require_int(je, path, "to");
    e.susceptance = require_number(je, path, "susceptance");
    e.existing = je.value("existing", false);
    if (e.from > e.to) std::swap(e.from, e.to);
    doc.edges.push_back(e);
  }

  doc.objective = ObjectiveSpec{};
  if (j.contains("objective")) {
    const json& jo = j["objective"];
    if (jo.contains("preset")) {
      if (jo["preset"] != "coherence")
        throw Error("schema error: objective.preset must be 'coherence'");
      doc.objective.coherence = true;
    } else {
      doc.objective.coherence = false;
      if (jo.contains("w"))
        for (const json& jw : jo["w"]) {
          AngleWeight w;
          w.i = require_int(jw, "objective.w[]", "i");
          w.j = require_int(jw, "objective.w[]", "j");
          w.weight = require_number(jw, "objective.w[]", "weight");
          if (w.weight < 0) throw Error("schema error: objective weights must be >= 0");
          doc.objective.w.push_back(w);
        }
      if (jo.contains("s"))
        for (const json& js : jo["s"]) {
          FrequencyWeight s;
          s.i = require_int(js, "objective.s[]", "i");
          s.weight = require_number(js, "objective.s[]", "weight");
          if (s.weight < 0) throw Error("schema error: objective weights must be >= 0");
          doc.objective.s.push_back(s);
        }
    }
  }
  return doc;
}

std::string serialize_network_document(const NetworkDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["reference_node"] = doc.reference_node;
  j["nodes"] = json::array();
  for (const DocumentNode& n : doc.nodes)
    j["nodes"].push_back({{"id", n.id},
                          {"inertia", n.inertia},
                          {"damping", n.damping},
                          {"kind", n.zero_injection ? "zero_injection" : "machine"}});
  j["edges"] = json::array();
  for (const DocumentEdge& e : doc.edges)
    j["edges"].push_back({{"from", e.from},
                          {"to", e.to},
                          {"susceptance", e.susceptance},
                          {"existing", e.existing}});
  if (doc.objective.coherence) {
    j["objective"] = {{"preset", "coherence"}};
  } else {
    json jw = json::array(), js = json::array();
    for (const AngleWeight& w : doc.objective.w)
      jw.push_back({{"i", w.i}, {"j", w.j}, {"weight", w.weight}});
    for (const FrequencyWeight& s : doc.objective.s)
      js.push_back({{"i", s.i}, {"weight", s.weight}});
    j["objective"] = {{"w", jw}, {"s", js}};
  }
  return j.dump(2);
}

namespace {

// Pulls the numeric rows of "mpc.<name> = [ ... ];" from a MATPOWER file.
std::vector<std::vector<double>> matpower_table(const std::string& text, const std::string& name) {
  std::string key = "mpc." + name;
  size_t at = text.find(key);
  if (at == std::string::npos) throw Error("MATPOWER case missing " + key);
  size_t open = text.find('[', at);
  size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw Error("MATPOWER case: malformed table " + key);
  std::vector<std::vector<double>> rows;
  std::istringstream body(text.substr(open + 1, close - open - 1));
  std::string line;
  while (std::getline(body, line)) {
    if (size_t c = line.find('%'); c != std::string::npos) line.erase(c);
    std::replace(line.begin(), line.end(), ';', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(row);
  }
  if (rows.empty()) throw Error("MATPOWER case: empty table " + key);
  return rows;
}

}  // namespace

NetworkDocument convert_matpower(const std::string& case_text, const MatpowerOptions& opts) {
  auto bus = matpower_table(case_text, "bus");
  auto branch = matpower_table(case_text, "branch");
  auto gen = matpower_table(case_text, "gen");

  std::set<int> gen_buses;
  for (const auto& row : gen) gen_buses.insert(static_cast<int>(row.at(0)));

  NetworkDocument doc;
  doc.reference_node = -1;
  for (const auto& row : bus) {
    DocumentNode n;
    n.id = static_cast<int>(row.at(0));
    int bus_type = static_cast<int>(row.at(1));
    if (bus_type == 3) doc.reference_node = n.id;
    bool is_gen = gen_buses.count(n.id) > 0;
    if (opts.uniform_dynamics) {
      n.inertia = is_gen ? opts.generator_inertia : opts.non_generator_inertia;
      n.damping = opts.uniform_damping;
    } else {
      n.inertia = is_gen ? opts.generator_inertia : 1.0;
      n.damping = is_gen ? opts.generator_damping : 1.0;
    }
    doc.nodes.push_back(n);
  }
  if (doc.reference_node < 0) {
    if (gen_buses.empty()) throw Error("MATPOWER case has no slack bus and no generators");
    doc.reference_node = *gen_buses.begin();
  }

  std::set<std::pair<int, int>> seen;
  for (const auto& row : branch) {
    DocumentEdge e;
    e.from = static_cast<int>(row.at(0));
    e.to = static_cast<int>(row.at(1));
    if (e.from > e.to) std::swap(e.from, e.to);
    double x = row.at(3);  // BR_X column
    if (!(x > 0)) throw Error("MATPOWER branch with nonpositive reactance");
    if (!seen.insert({e.from, e.to}).second) {
      // Parallel circuits combine as susceptances in parallel.
      for (DocumentEdge& prev : doc.edges)
        if (prev.from == e.from && prev.to == e.to) prev.susceptance += 1.0 / x;
      continue;
    }
    e.susceptance = 1.0 / x;
    e.existing = true;
    doc.edges.push_back(e);
  }
  doc.objective.coherence = true;
  return doc;
}

NetworkDocument load_network_document(const std::string& path, const MatpowerOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.size() > 2 && path.substr(path.size() - 2) == ".m")
    return convert_matpower(buf.str(), opts);
  return parse_network_document(buf.str());
}

std::vector<int> add_random_candidates(NetworkDocument& doc, int count, unsigned seed) {
  std::set<std::pair<int, int>> taken;
  double bmin = std::numeric_limits<double>::infinity(), bmax = 0;
  for (const DocumentEdge& e : doc.edges) {
    taken.insert({e.from, e.to});
    bmin = std::min(bmin, e.susceptance);
    bmax = std::max(bmax, e.susceptance);
  }
  if (doc.edges.empty()) bmin = bmax = 1.0;

  std::vector<int> ids;
  for (const DocumentNode& n : doc.nodes) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());

  std::mt19937 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, ids.size() - 1);
  std::uniform_real_distribution<double> bdist(bmin, bmax);
  std::vector<int> added;
  int guard = 0;
  while (static_cast<int>(added.size()) < count) {
    if (++guard > 100000) throw Error("cannot place that many distinct candidate lines");
    int a = ids[pick(rng)], b = ids[pick(rng)];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!taken.insert({a, b}).second) continue;
    DocumentEdge e;
    e.from = a;
    e.to = b;
    e.susceptance = bdist(rng);
    e.existing = false;
    added.push_back(static_cast<int>(doc.edges.size()));
    doc.edges.push_back(e);
  }
  return added;
}

}  // namespace gridtop
