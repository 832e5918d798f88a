#pragma once

// Bottom-up retrieval of the submodel relevant to a query.
//
// A threshold v splits nodes into those at or above it (candidates for the
// interior) and those strictly below it.  Backtracking starts at every query
// or evidence node with PL >= v, walks parent edges, and stops at the first
// node on each path whose PL drops below v.  Those stopping points form the
// frontier; everything visited above the threshold forms the interior.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "plif/model.hpp"

namespace plif {

using NodeSet = std::set<std::string>;

// Inclusive cutoff: a node is interior-eligible iff pl >= v.  The origin
// sentinel (v = -inf) admits every node, i.e. full ancestral retrieval.
struct Threshold {
  double v = 0.0;

  static constexpr Threshold origin() { return Threshold{kNegInf}; }
  bool is_origin() const { return v == kNegInf; }
  bool admits(double pl) const { return pl >= v; }

  bool operator==(const Threshold&) const = default;
};

std::string to_string(const Threshold& th);

struct FrontierStub {
  std::string name;
  std::vector<std::string> states;
  double pl = 0.0;

  bool operator==(const FrontierStub&) const = default;
};

// Interior nodes keep their CPTs; frontier nodes are CPD-less clamp points.
struct Submodel {
  double t0 = 0.0;
  std::map<std::string, NodeSpec> interior;
  std::map<std::string, FrontierStub> frontier;

  bool operator==(const Submodel&) const = default;
};

struct RootSetResult {
  Threshold threshold;
  NodeSet frontier;
  NodeSet interior;
  NodeSet evidence_plus;         // evidence with pl >= v
  NodeSet evidence_in_frontier;  // evidence that landed on the frontier
  NodeSet evidence_minus;        // remaining evidence below v
  Submodel submodel;
  std::size_t expanded_count = 0;  // parent edges traversed so far
};

struct RetrievalOptions {
  std::size_t node_cap = kDefaultNodeCap;
};

// Strict ancestors of `targets`.  A target appears in the result only when
// it is an ancestor of another target.
NodeSet ancestors(const NodeSource& net, const NodeSet& targets);

// d-separation of A and B given C in a finite network (reachability form of
// the criterion).  A, B and C must be disjoint.
bool d_separated(const Network& net, const NodeSet& a, const NodeSet& b, const NodeSet& c);

// Incremental backtracking for one query.  Successive calls to advance()
// with non-increasing thresholds extend the same retrieval, so each deeper
// submodel is built on top of the previous one.
class Retrieval {
 public:
  Retrieval(const NodeSource& source, Query query, RetrievalOptions options = {});

  // Throws Error{InvalidArgument} if th is above the previous threshold,
  // Error{NoStartNodes} if no query node sits at or above th, and
  // Error{ExpansionCap} when the node budget runs out.
  const RootSetResult& advance(Threshold th);

  const RootSetResult& current() const { return result_; }
  const Query& query() const { return query_; }
  const NodeSource& source() const { return source_; }

 private:
  void expand(const std::string& name);
  void refresh_partition();

  const NodeSource& source_;
  Query query_;
  RetrievalOptions options_;
  RootSetResult result_;
  bool started_ = false;
};

RootSetResult root_set(const NodeSource& source, const Query& q, Threshold th,
                       RetrievalOptions options = {});

// The submodel as a network document plus a "frontier" list of stubs.
std::string serialize_root_set(const RootSetResult& rs);

}  // namespace plif
