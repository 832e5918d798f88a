#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "plif/model.hpp"

namespace plif {

using nlohmann::json;

namespace {

[[noreturn]] void syntax(const std::string& what) {
  throw Error(ErrorCode::Syntax, what);
}

double read_t0(const json& doc) {
  if (!doc.contains("t0")) syntax("missing field 't0'");
  const json& v = doc.at("t0");
  if (v.is_string()) {
    if (v.get<std::string>() == "-inf") return kNegInf;
    syntax("'t0' must be a number or \"-inf\"");
  }
  if (!v.is_number()) syntax("'t0' must be a number or \"-inf\"");
  return v.get<double>();
}

std::vector<std::string> read_strings(const json& v, const std::string& where) {
  if (!v.is_array()) syntax(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) syntax(where + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

NodeSpec read_node(const json& v, std::size_t index) {
  const std::string where = fmt::format("nodes[{}]", index);
  if (!v.is_object()) syntax(where + " must be an object");
  for (const char* field : {"name", "states", "pl", "parents", "cpt"}) {
    if (!v.contains(field)) syntax(fmt::format("{} is missing field '{}'", where, field));
  }
  NodeSpec node;
  if (!v.at("name").is_string()) syntax(where + ".name must be a string");
  node.name = v.at("name").get<std::string>();
  node.states = read_strings(v.at("states"), where + ".states");
  node.parents = read_strings(v.at("parents"), where + ".parents");
  // JSON has no NaN literal, so a numeric pl is never NaN; strings are refused.
  if (!v.at("pl").is_number()) syntax(where + ".pl must be a finite number");
  node.pl = v.at("pl").get<double>();

  const json& cpt = v.at("cpt");
  if (!cpt.is_array()) syntax(where + ".cpt must be an array of rows");
  for (const auto& row : cpt) {
    if (!row.is_array()) syntax(where + ".cpt must be an array of rows");
    std::vector<double> values;
    for (const auto& p : row) {
      if (!p.is_number()) syntax(where + ".cpt entries must be numbers");
      values.push_back(p.get<double>());
    }
    node.cpt.push_back(std::move(values));
  }
  return node;
}

}  // namespace

Network parse_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    syntax(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!doc.is_object()) syntax("network document must be a JSON object");
  double t0 = read_t0(doc);
  bool open_past = false;
  if (doc.contains("open_past")) {
    if (!doc.at("open_past").is_boolean()) syntax("'open_past' must be a boolean");
    open_past = doc.at("open_past").get<bool>();
  }
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) {
    syntax("'nodes' must be an array");
  }
  std::vector<NodeSpec> nodes;
  std::size_t i = 0;
  for (const auto& v : doc.at("nodes")) nodes.push_back(read_node(v, i++));
  return Network(t0, open_past, std::move(nodes));
}

Network load_network(std::string_view text) {
  Network net = parse_network(text);
  ValidationReport report = validate(net);
  if (!report.empty()) {
    std::ostringstream msg;
    msg << "network violates " << report.size() << " invariant(s):";
    for (const auto& v : report) msg << "\n  " << v.message;
    throw Error(ErrorCode::InvalidNetwork, msg.str());
  }
  return net;
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("cannot open '{}'", path));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_network(buf.str());
}

std::string serialize(const Network& net) {
  nlohmann::ordered_json doc;
  if (std::isinf(net.t0()) && net.t0() < 0) {
    doc["t0"] = "-inf";
  } else {
    doc["t0"] = net.t0();
  }
  doc["open_past"] = net.open_past();
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& node : net.nodes()) {
    nlohmann::ordered_json entry;
    entry["name"] = node.name;
    entry["states"] = node.states;
    entry["pl"] = node.pl;
    entry["parents"] = node.parents;
    entry["cpt"] = node.cpt;
    nodes.push_back(std::move(entry));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump();
}

}  // namespace plif
