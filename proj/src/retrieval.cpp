#include "plif/retrieval.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>
#include <json.hpp>

namespace plif {

std::string to_string(const Threshold& th) {
  if (th.is_origin()) return "-inf";
  return fmt::format("{}", th.v);
}

NodeSet ancestors(const NodeSource& net, const NodeSet& targets) {
  NodeSet out;
  std::deque<std::string> queue;
  for (const auto& t : targets) {
    net.at(t);
    queue.push_back(t);
  }
  while (!queue.empty()) {
    std::string name = queue.front();
    queue.pop_front();
    for (const auto& p : net.at(name).parents) {
      if (out.insert(p).second) queue.push_back(p);
    }
  }
  return out;
}

bool d_separated(const Network& net, const NodeSet& a, const NodeSet& b, const NodeSet& c) {
  for (const NodeSet* s : {&a, &b, &c}) {
    for (const auto& name : *s) net.at(name);
  }
  auto overlap = [](const NodeSet& x, const NodeSet& y) {
    return std::any_of(x.begin(), x.end(), [&](const auto& n) { return y.count(n) > 0; });
  };
  if (overlap(a, b) || overlap(a, c) || overlap(b, c)) {
    throw Error(ErrorCode::InvalidArgument, "d-separation sets must be disjoint");
  }

  const std::size_t n = net.size();
  std::vector<std::vector<std::size_t>> parents(n), children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& p : net.nodes()[i].parents) {
      std::size_t j = net.index_of(p);
      parents[i].push_back(j);
      children[j].push_back(i);
    }
  }
  std::vector<bool> observed(n, false), observed_ancestor(n, false);
  std::deque<std::size_t> up;
  for (const auto& name : c) {
    std::size_t i = net.index_of(name);
    observed[i] = true;
    up.push_back(i);
  }
  // Observed nodes and their ancestors: colliders there are open.
  while (!up.empty()) {
    std::size_t i = up.front();
    up.pop_front();
    if (observed_ancestor[i]) continue;
    observed_ancestor[i] = true;
    for (std::size_t p : parents[i]) up.push_back(p);
  }

  std::vector<bool> target(n, false);
  for (const auto& name : b) target[net.index_of(name)] = true;

  // Ball state: (node, arrived-from-child).  Arriving from a child means the
  // trail points up into the node.
  std::vector<bool> seen_up(n, false), seen_down(n, false);
  std::deque<std::pair<std::size_t, bool>> trail;
  for (const auto& name : a) trail.emplace_back(net.index_of(name), true);
  while (!trail.empty()) {
    auto [i, from_child] = trail.front();
    trail.pop_front();
    auto& seen = from_child ? seen_up : seen_down;
    if (seen[i]) continue;
    seen[i] = true;
    if (!observed[i] && target[i]) return false;

    if (from_child) {
      if (observed[i]) continue;
      for (std::size_t p : parents[i]) trail.emplace_back(p, true);
      for (std::size_t k : children[i]) trail.emplace_back(k, false);
    } else {
      if (!observed[i]) {
        for (std::size_t k : children[i]) trail.emplace_back(k, false);
      }
      if (observed_ancestor[i]) {
        for (std::size_t p : parents[i]) trail.emplace_back(p, true);
      }
    }
  }
  return true;
}

// --- Retrieval --------------------------------------------------------------

Retrieval::Retrieval(const NodeSource& source, Query query, RetrievalOptions options)
    : source_(source), query_(std::move(query)), options_(options) {
  validate_query(source_, query_);
  result_.submodel.t0 = source_.t0();
}

void Retrieval::expand(const std::string& name) {
  const NodeSpec& spec = source_.at(name);
  result_.interior.insert(name);
  result_.frontier.erase(name);
  result_.submodel.frontier.erase(name);
  result_.submodel.interior.emplace(name, spec);
}

const RootSetResult& Retrieval::advance(Threshold th) {
  if (std::isnan(th.v)) {
    throw Error(ErrorCode::InvalidArgument, "threshold is NaN");
  }
  if (started_ && th.v > result_.threshold.v) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("threshold {} lies above the previous threshold {}",
                            to_string(th), to_string(result_.threshold)));
  }

  std::deque<std::string> queue;
  bool any_start = false;
  auto consider_start = [&](const std::string& name) {
    if (th.admits(source_.at(name).pl)) {
      any_start = true;
      if (result_.interior.count(name) == 0) queue.push_back(name);
    }
  };
  for (const auto& [name, _] : query_.objective) consider_start(name);
  for (const auto& [name, _] : query_.evidence) consider_start(name);
  if (!any_start) {
    throw Error(ErrorCode::NoStartNodes,
                fmt::format("no query or evidence node has PL at or above {}", to_string(th)));
  }
  for (const auto& f : result_.frontier) {
    if (th.admits(source_.at(f).pl)) queue.push_back(f);
  }

  while (!queue.empty()) {
    std::string name = queue.front();
    queue.pop_front();
    if (result_.interior.count(name) > 0) continue;
    if (result_.interior.size() + result_.frontier.size() >= options_.node_cap) {
      throw Error(ErrorCode::ExpansionCap,
                  fmt::format("retrieval exceeded {} nodes at threshold {}",
                              options_.node_cap, to_string(th)));
    }
    expand(name);
    const NodeSpec& spec = source_.at(name);
    for (const auto& p : spec.parents) {
      ++result_.expanded_count;
      const NodeSpec& parent = source_.at(p);
      if (!(parent.pl < spec.pl)) {
        throw Error(ErrorCode::InconsistentModel,
                    fmt::format("edge {} -> {} violates temporal precedence", p, name));
      }
      if (result_.interior.count(p) > 0) continue;
      if (th.admits(parent.pl)) {
        queue.push_back(p);
      } else if (result_.frontier.insert(p).second) {
        result_.submodel.frontier.emplace(p, FrontierStub{p, parent.states, parent.pl});
      }
    }
  }

  result_.threshold = th;
  started_ = true;
  refresh_partition();
  return result_;
}

void Retrieval::refresh_partition() {
  result_.evidence_plus.clear();
  result_.evidence_in_frontier.clear();
  result_.evidence_minus.clear();
  for (const auto& [name, _] : query_.evidence) {
    if (result_.threshold.admits(source_.at(name).pl)) {
      result_.evidence_plus.insert(name);
    } else if (result_.frontier.count(name) > 0) {
      result_.evidence_in_frontier.insert(name);
    } else {
      result_.evidence_minus.insert(name);
    }
  }
}

RootSetResult root_set(const NodeSource& source, const Query& q, Threshold th,
                       RetrievalOptions options) {
  Retrieval retrieval(source, q, options);
  return retrieval.advance(th);
}

std::string serialize_root_set(const RootSetResult& rs) {
  nlohmann::ordered_json doc;
  const double t0 = rs.submodel.t0;
  if (std::isinf(t0) && t0 < 0) {
    doc["t0"] = "-inf";
  } else {
    doc["t0"] = t0;
  }
  doc["open_past"] = true;
  std::vector<const NodeSpec*> interior;
  for (const auto& [_, spec] : rs.submodel.interior) interior.push_back(&spec);
  std::sort(interior.begin(), interior.end(), [](const NodeSpec* a, const NodeSpec* b) {
    return a->pl != b->pl ? a->pl < b->pl : a->name < b->name;
  });
  auto nodes = nlohmann::ordered_json::array();
  for (const NodeSpec* spec : interior) {
    nlohmann::ordered_json entry;
    entry["name"] = spec->name;
    entry["states"] = spec->states;
    entry["pl"] = spec->pl;
    entry["parents"] = spec->parents;
    entry["cpt"] = spec->cpt;
    nodes.push_back(std::move(entry));
  }
  doc["nodes"] = std::move(nodes);
  auto frontier = nlohmann::ordered_json::array();
  for (const auto& [_, stub] : rs.submodel.frontier) {
    nlohmann::ordered_json entry;
    entry["name"] = stub.name;
    entry["states"] = stub.states;
    entry["pl"] = stub.pl;
    frontier.push_back(std::move(entry));
  }
  doc["frontier"] = std::move(frontier);
  doc["threshold"] = rs.threshold.is_origin() ? nlohmann::ordered_json("-inf")
                                              : nlohmann::ordered_json(rs.threshold.v);
  return doc.dump();
}

}  // namespace plif
