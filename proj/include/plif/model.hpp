#pragma once

// PL-annotated causal Bayesian networks.
//
// Every node carries a Potential Level (PL): a real number that orders causes
// strictly before their effects.  Parentless nodes sit at the origin of time
// T0 unless the network is marked open_past, in which case it is understood
// as a truncation of a larger model whose earlier history was cut away.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "plif/error.hpp"

namespace plif {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NodeSpec {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  // One row per joint parent assignment in odometer order over `parents`
  // (last parent fastest); one column per entry of `states`.
  std::vector<std::vector<double>> cpt;
  double pl = 0.0;

  std::size_t state_index(std::string_view label) const;  // npos if absent
  bool operator==(const NodeSpec&) const = default;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Read-only view of a (possibly unbounded) node population.  Networks and
// lazy networks both implement it so retrieval can walk either one.
class NodeSource {
 public:
  virtual ~NodeSource() = default;

  // nullptr when no node has this name.
  virtual const NodeSpec* resolve(const std::string& name) const = 0;
  virtual double t0() const = 0;
  virtual bool open_past() const = 0;

  // All roots carry known priors at a finite origin of time.
  bool closed_past() const { return !open_past() && std::isfinite(t0()); }

  const NodeSpec& at(const std::string& name) const;
};

class Network final : public NodeSource {
 public:
  Network() = default;
  Network(double t0, bool open_past, std::vector<NodeSpec> nodes);

  const NodeSpec* resolve(const std::string& name) const override;
  double t0() const override { return t0_; }
  bool open_past() const override { return open_past_; }

  // Declaration order.
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  std::size_t index_of(const std::string& name) const;  // npos if absent

  std::vector<std::string> children(const std::string& name) const;

  bool operator==(const Network& other) const {
    return t0_ == other.t0_ && open_past_ == other.open_past_ &&
           nodes_ == other.nodes_;
  }

 private:
  double t0_ = 0.0;
  bool open_past_ = false;
  std::vector<NodeSpec> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
};

// On-demand node generator for models too large (or unbounded) to list.
// The resolver must be deterministic; returned specs are cached so a name is
// resolved at most once, and the cache is guarded for concurrent readers.
class LazyNetwork final : public NodeSource {
 public:
  using Resolver = std::function<std::optional<NodeSpec>(const std::string&)>;

  LazyNetwork(Resolver resolver, double t0, bool open_past);
  ~LazyNetwork() override;
  LazyNetwork(LazyNetwork&&) noexcept;
  LazyNetwork& operator=(LazyNetwork&&) noexcept;

  // Wraps a finite network; resolution is a lookup.
  static LazyNetwork wrap(Network net);

  // Throws Error{InconsistentModel} when the resolver hands back a spec that
  // breaks a node-level invariant or carries the wrong name.
  const NodeSpec* resolve(const std::string& name) const override;
  double t0() const override;
  bool open_past() const override;

  std::size_t resolved_count() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

using Assignment = std::map<std::string, std::string>;

struct Query {
  Assignment objective;
  Assignment evidence;
};

// Throws Error{UnknownNode|InvalidQuery} when the query does not fit the
// source: unknown names, unknown labels, overlap or an empty objective.
void validate_query(const NodeSource& source, const Query& q);

// --- validation -------------------------------------------------------------

enum class ViolationKind {
  DuplicateNode,
  TooFewStates,
  DuplicateState,
  UnknownParent,
  DuplicateParent,
  CptRowCount,
  CptRowWidth,
  CptEntryRange,
  CptRowSum,
  Cycle,
  TemporalPrecedence,
  RootPlNotT0,
  PlBelowT0,
  NonFinitePl,
  NonFiniteT0,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::vector<std::string> nodes;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

// Node-local checks only (states, CPT shape and normalization).
void check_node(const NodeSpec& node, ValidationReport& report);

ValidationReport validate(const Network& net);

// --- documents --------------------------------------------------------------

// Structural parse without semantic validation.  Throws Error{Syntax}.
Network parse_network(std::string_view text);

// parse_network followed by validate; violations raise Error{InvalidNetwork}
// whose message lists each one.
Network load_network(std::string_view text);
Network load_network_file(const std::string& path);

std::string serialize(const Network& net);

// --- lazy expansion ---------------------------------------------------------

inline constexpr std::size_t kDefaultNodeCap = 1'000'000;

// Finite fragment containing `seeds` and every ancestor reached by repeated
// parent resolution, where a node's parents are resolved only while its PL is
// at or above `floor`.  Nodes whose parents were not resolved are kept as
// parentless nodes with a uniform placeholder prior; the fragment is marked
// open_past so nothing downstream mistakes those priors for knowledge.
Network materialize(const NodeSource& source, const std::set<std::string>& seeds,
                    double floor, std::size_t node_cap = kDefaultNodeCap);

}  // namespace plif
