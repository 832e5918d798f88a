#include "plif/model.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace plif {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "syntax error";
    case ErrorCode::InvalidNetwork: return "invalid network";
    case ErrorCode::UnknownNode: return "unknown node";
    case ErrorCode::InvalidQuery: return "invalid query";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::ThresholdAboveCpl: return "threshold above critical PL";
    case ErrorCode::NoStartNodes: return "no start nodes";
    case ErrorCode::ZeroProbability: return "zero-probability evidence";
    case ErrorCode::OpenPast: return "open past";
    case ErrorCode::FrontierTooWide: return "frontier too wide";
    case ErrorCode::ExpansionCap: return "expansion cap exceeded";
    case ErrorCode::InconsistentModel: return "inconsistent model";
    case ErrorCode::UnassignedFrontier: return "unassigned frontier node";
    case ErrorCode::InvalidSchedule: return "invalid schedule";
  }
  return "error";
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DuplicateNode: return "duplicate node";
    case ViolationKind::TooFewStates: return "too few states";
    case ViolationKind::DuplicateState: return "duplicate state";
    case ViolationKind::UnknownParent: return "unknown parent";
    case ViolationKind::DuplicateParent: return "duplicate parent";
    case ViolationKind::CptRowCount: return "CPT row count";
    case ViolationKind::CptRowWidth: return "CPT row width";
    case ViolationKind::CptEntryRange: return "CPT entry out of range";
    case ViolationKind::CptRowSum: return "CPT row sum";
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::TemporalPrecedence: return "temporal precedence";
    case ViolationKind::RootPlNotT0: return "root PL must equal T0";
    case ViolationKind::PlBelowT0: return "PL below T0";
    case ViolationKind::NonFinitePl: return "non-finite PL";
    case ViolationKind::NonFiniteT0: return "closed-past network requires finite T0";
  }
  return "violation";
}

std::size_t NodeSpec::state_index(std::string_view label) const {
  auto it = std::find(states.begin(), states.end(), label);
  return it == states.end() ? npos : static_cast<std::size_t>(it - states.begin());
}

const NodeSpec& NodeSource::at(const std::string& name) const {
  const NodeSpec* spec = resolve(name);
  if (spec == nullptr) {
    throw Error(ErrorCode::UnknownNode, fmt::format("unknown node '{}'", name));
  }
  return *spec;
}

// --- Network ----------------------------------------------------------------

Network::Network(double t0, bool open_past, std::vector<NodeSpec> nodes)
    : t0_(t0), open_past_(open_past), nodes_(std::move(nodes)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    // First declaration wins; validate() reports the duplicate.
    index_.emplace(nodes_[i].name, i);
  }
}

const NodeSpec* Network::resolve(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

std::size_t Network::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? npos : it->second;
}

std::vector<std::string> Network::children(const std::string& name) const {
  std::vector<std::string> out;
  for (const auto& node : nodes_) {
    if (std::find(node.parents.begin(), node.parents.end(), name) != node.parents.end()) {
      out.push_back(node.name);
    }
  }
  return out;
}

// --- LazyNetwork ------------------------------------------------------------

struct LazyNetwork::State {
  Resolver resolver;
  double t0;
  bool open_past;
  mutable std::mutex mutex;
  mutable std::map<std::string, NodeSpec> cache;
  mutable std::set<std::string> missing;
};

LazyNetwork::LazyNetwork(Resolver resolver, double t0, bool open_past)
    : state_(std::make_unique<State>()) {
  state_->resolver = std::move(resolver);
  state_->t0 = t0;
  state_->open_past = open_past;
}

LazyNetwork::~LazyNetwork() = default;
LazyNetwork::LazyNetwork(LazyNetwork&&) noexcept = default;
LazyNetwork& LazyNetwork::operator=(LazyNetwork&&) noexcept = default;

LazyNetwork LazyNetwork::wrap(Network net) {
  auto shared = std::make_shared<const Network>(std::move(net));
  double t0 = shared->t0();
  bool open = shared->open_past();
  return LazyNetwork(
      [shared](const std::string& name) -> std::optional<NodeSpec> {
        const NodeSpec* spec = shared->resolve(name);
        if (spec == nullptr) return std::nullopt;
        return *spec;
      },
      t0, open);
}

const NodeSpec* LazyNetwork::resolve(const std::string& name) const {
  std::lock_guard lock(state_->mutex);
  if (auto it = state_->cache.find(name); it != state_->cache.end()) {
    return &it->second;
  }
  if (state_->missing.count(name) > 0) return nullptr;

  std::optional<NodeSpec> spec = state_->resolver(name);
  if (!spec) {
    state_->missing.insert(name);
    return nullptr;
  }
  if (spec->name != name) {
    throw Error(ErrorCode::InconsistentModel,
                fmt::format("resolver returned node '{}' for '{}'", spec->name, name));
  }
  ValidationReport report;
  check_node(*spec, report);
  if (!std::isfinite(spec->pl)) {
    report.push_back({ViolationKind::NonFinitePl, {name}, "PL must be finite"});
  }
  if (spec->pl < state_->t0) {
    report.push_back({ViolationKind::PlBelowT0, {name}, "PL lies before T0"});
  }
  if (!report.empty()) {
    throw Error(ErrorCode::InconsistentModel,
                fmt::format("resolver produced invalid node '{}': {}", name,
                            report.front().message));
  }
  return &state_->cache.emplace(name, std::move(*spec)).first->second;
}

double LazyNetwork::t0() const { return state_->t0; }
bool LazyNetwork::open_past() const { return state_->open_past; }

std::size_t LazyNetwork::resolved_count() const {
  std::lock_guard lock(state_->mutex);
  return state_->cache.size();
}

// --- queries ----------------------------------------------------------------

namespace {

void check_assignment(const NodeSource& source, const Assignment& a, const char* what) {
  for (const auto& [name, label] : a) {
    const NodeSpec* spec = source.resolve(name);
    if (spec == nullptr) {
      throw Error(ErrorCode::UnknownNode,
                  fmt::format("{} names unknown node '{}'", what, name));
    }
    if (spec->state_index(label) == npos) {
      throw Error(ErrorCode::InvalidQuery,
                  fmt::format("{} assigns unknown state '{}' to '{}'", what, label, name));
    }
  }
}

}  // namespace

void validate_query(const NodeSource& source, const Query& q) {
  if (q.objective.empty()) {
    throw Error(ErrorCode::InvalidQuery, "objective assignment is empty");
  }
  check_assignment(source, q.objective, "objective");
  check_assignment(source, q.evidence, "evidence");
  for (const auto& [name, _] : q.objective) {
    if (q.evidence.count(name) > 0) {
      throw Error(ErrorCode::InvalidQuery,
                  fmt::format("node '{}' is both objective and evidence", name));
    }
  }
}

// --- validation -------------------------------------------------------------

void check_node(const NodeSpec& node, ValidationReport& report) {
  const std::string& n = node.name;
  if (node.states.size() < 2) {
    report.push_back({ViolationKind::TooFewStates, {n},
                      fmt::format("node '{}' has {} states, needs at least 2", n,
                                  node.states.size())});
  }
  std::set<std::string> seen_states;
  for (const auto& s : node.states) {
    if (!seen_states.insert(s).second) {
      report.push_back({ViolationKind::DuplicateState, {n},
                        fmt::format("node '{}' repeats state '{}'", n, s)});
    }
  }
  std::set<std::string> seen_parents;
  for (const auto& p : node.parents) {
    if (!seen_parents.insert(p).second) {
      report.push_back({ViolationKind::DuplicateParent, {n, p},
                        fmt::format("node '{}' lists parent '{}' twice", n, p)});
    }
  }
  // Row count can only be checked against parent sizes at network level; a
  // parentless node must have exactly one row.
  if (node.parents.empty() && node.cpt.size() != 1) {
    report.push_back({ViolationKind::CptRowCount, {n},
                      fmt::format("node '{}' has {} CPT rows, expected 1", n,
                                  node.cpt.size())});
  }
  for (std::size_t r = 0; r < node.cpt.size(); ++r) {
    const auto& row = node.cpt[r];
    if (row.size() != node.states.size()) {
      report.push_back({ViolationKind::CptRowWidth, {n},
                        fmt::format("node '{}' CPT row {} has {} entries, expected {}", n,
                                    r, row.size(), node.states.size())});
      continue;
    }
    bool in_range = true;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) in_range = false;
    }
    if (!in_range) {
      report.push_back({ViolationKind::CptEntryRange, {n},
                        fmt::format("node '{}' CPT row {} has an entry outside [0,1]", n, r)});
    }
    double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(std::abs(sum - 1.0) <= 1e-9)) {
      report.push_back({ViolationKind::CptRowSum, {n},
                        fmt::format("node '{}' CPT row {} sums to {:.12g}", n, r, sum)});
    }
  }
}

ValidationReport validate(const Network& net) {
  ValidationReport report;
  const double t0 = net.t0();

  if (!net.open_past() && !std::isfinite(t0)) {
    report.push_back({ViolationKind::NonFiniteT0, {},
                      "a closed-past network needs a finite T0"});
  }

  std::set<std::string> names;
  for (const auto& node : net.nodes()) {
    if (!names.insert(node.name).second) {
      report.push_back({ViolationKind::DuplicateNode, {node.name},
                        fmt::format("node '{}' is declared twice", node.name)});
    }
  }

  for (const auto& node : net.nodes()) {
    check_node(node, report);
    if (!std::isfinite(node.pl)) {
      report.push_back({ViolationKind::NonFinitePl, {node.name},
                        fmt::format("node '{}' has non-finite PL", node.name)});
      continue;
    }
    if (node.pl < t0) {
      report.push_back({ViolationKind::PlBelowT0, {node.name},
                        fmt::format("node '{}' has PL {} below T0 {}", node.name, node.pl, t0)});
    }
    if (node.parents.empty() && !net.open_past() && node.pl != t0) {
      report.push_back({ViolationKind::RootPlNotT0, {node.name},
                        fmt::format("root PL must equal T0: node '{}' has PL {}, T0 is {}",
                                    node.name, node.pl, t0)});
    }

    std::size_t expected_rows = 1;
    bool parents_known = true;
    for (const auto& p : node.parents) {
      const NodeSpec* parent = net.resolve(p);
      if (parent == nullptr) {
        report.push_back({ViolationKind::UnknownParent, {node.name, p},
                          fmt::format("node '{}' names unknown parent '{}'", node.name, p)});
        parents_known = false;
        continue;
      }
      expected_rows *= parent->states.size();
      if (!(parent->pl < node.pl)) {
        report.push_back(
            {ViolationKind::TemporalPrecedence, {p, node.name},
             fmt::format("temporal precedence violated on edge {} -> {}: PL {} is not below {}",
                         p, node.name, parent->pl, node.pl)});
      }
    }
    if (parents_known && !node.parents.empty() && node.cpt.size() != expected_rows) {
      report.push_back({ViolationKind::CptRowCount, {node.name},
                        fmt::format("node '{}' has {} CPT rows, expected {}", node.name,
                                    node.cpt.size(), expected_rows)});
    }
  }

  // Kahn's algorithm over the known parent relation.
  const std::size_t n = net.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> kids(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& p : net.nodes()[i].parents) {
      std::size_t j = net.index_of(p);
      if (j == npos) continue;
      ++pending[i];
      kids[j].push_back(i);
    }
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push_back(i);
  }
  std::size_t done = 0;
  while (!ready.empty()) {
    std::size_t i = ready.front();
    ready.pop_front();
    ++done;
    for (std::size_t k : kids[i]) {
      if (--pending[k] == 0) ready.push_back(k);
    }
  }
  if (done < n) {
    std::vector<std::string> stuck;
    for (std::size_t i = 0; i < n; ++i) {
      if (pending[i] > 0) stuck.push_back(net.nodes()[i].name);
    }
    report.push_back({ViolationKind::Cycle, stuck,
                      fmt::format("parent relation has a cycle through {}",
                                  fmt::join(stuck, ", "))});
  }
  return report;
}

// --- materialize ------------------------------------------------------------

Network materialize(const NodeSource& source, const std::set<std::string>& seeds,
                    double floor, std::size_t node_cap) {
  std::map<std::string, NodeSpec> fragment;
  std::set<std::string> truncated;
  std::deque<std::string> queue;

  auto admit = [&](const std::string& name) {
    if (fragment.count(name) > 0) return;
    if (fragment.size() >= node_cap) {
      throw Error(ErrorCode::ExpansionCap,
                  fmt::format("materialization exceeded {} nodes", node_cap));
    }
    fragment.emplace(name, source.at(name));
    queue.push_back(name);
  };

  for (const auto& s : seeds) admit(s);
  while (!queue.empty()) {
    std::string name = queue.front();
    queue.pop_front();
    const NodeSpec& spec = fragment.at(name);
    if (spec.pl < floor) {
      if (!spec.parents.empty()) truncated.insert(name);
      continue;
    }
    double pl = spec.pl;
    std::vector<std::string> parents = spec.parents;
    for (const auto& p : parents) {
      admit(p);
      if (!(fragment.at(p).pl < pl)) {
        throw Error(ErrorCode::InconsistentModel,
                    fmt::format("edge {} -> {} violates temporal precedence", p, name));
      }
    }
  }

  std::vector<NodeSpec> nodes;
  nodes.reserve(fragment.size());
  for (auto& [name, spec] : fragment) {
    if (truncated.count(name) > 0) {
      spec.parents.clear();
      spec.cpt.assign(1, std::vector<double>(spec.states.size(),
                                             1.0 / static_cast<double>(spec.states.size())));
    }
    nodes.push_back(std::move(spec));
  }
  // Declaration order by PL, then name, so fragments list causes first.
  std::sort(nodes.begin(), nodes.end(), [](const NodeSpec& a, const NodeSpec& b) {
    return a.pl != b.pl ? a.pl < b.pl : a.name < b.name;
  });
  return Network(source.t0(), true, std::move(nodes));
}

}  // namespace plif
