#include "plif/infer.hpp"

#include <algorithm>
#include <queue>

#include <fmt/format.h>

#include "factor.hpp"

namespace plif {

const char* to_string(Exactness e) {
  switch (e) {
    case Exactness::NotExact: return "NotExact";
    case Exactness::ExactByFrontierSubsetOfEvidence: return "ExactByFrontierSubsetOfEvidence";
    case Exactness::ExactByFullPast: return "ExactByFullPast";
    case Exactness::ExactByCoincidence: return "ExactByCoincidence";
  }
  return "NotExact";
}

Cpl cpl(const NodeSource& source, const Query& q) {
  validate_query(source, q);
  Cpl best{"", std::numeric_limits<double>::infinity()};
  // Assignment is name-ordered, so strict < keeps the smallest name on ties.
  for (const auto& [name, _] : q.objective) {
    double pl = source.at(name).pl;
    if (pl < best.pl) best = {name, pl};
  }
  return best;
}

// --- enumeration ------------------------------------------------------------

namespace {

struct CompiledNode {
  std::size_t card;
  std::vector<std::size_t> parents;  // positions in the compiled order
  std::vector<std::size_t> radix;    // row stride per parent
  std::vector<double> cpt;           // row-major, card columns
  int clamp = -1;
};

// Depth-first sum over joint assignments in topological order.
double enumerate(const std::vector<CompiledNode>& nodes, std::vector<std::size_t>& state,
                 std::size_t k, double weight) {
  if (k == nodes.size()) return weight;
  const CompiledNode& node = nodes[k];
  std::size_t row = 0;
  for (std::size_t i = 0; i < node.parents.size(); ++i) row += state[node.parents[i]] * node.radix[i];
  const double* p = &node.cpt[row * node.card];
  if (node.clamp >= 0) {
    const double w = p[node.clamp];
    if (w == 0.0) return 0.0;
    state[k] = static_cast<std::size_t>(node.clamp);
    return enumerate(nodes, state, k + 1, weight * w);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < node.card; ++s) {
    if (p[s] == 0.0) continue;
    state[k] = s;
    total += enumerate(nodes, state, k + 1, weight * p[s]);
  }
  return total;
}

}  // namespace

double joint_probability(const Network& net, const Assignment& assignment) {
  if (!net.closed_past()) {
    throw Error(ErrorCode::OpenPast,
                "exact inference needs a closed-past network (truncated roots have no priors)");
  }
  NodeSet targets;
  for (const auto& [name, label] : assignment) {
    const NodeSpec& spec = net.at(name);
    if (spec.state_index(label) == npos) {
      throw Error(ErrorCode::InvalidQuery,
                  fmt::format("unknown state '{}' for node '{}'", label, name));
    }
    targets.insert(name);
  }
  NodeSet closure = ancestors(net, targets);
  closure.insert(targets.begin(), targets.end());

  std::vector<const NodeSpec*> order;
  for (const auto& name : closure) order.push_back(&net.at(name));
  // PL strictly increases along edges, so sorting by PL is topological.
  std::sort(order.begin(), order.end(), [](const NodeSpec* a, const NodeSpec* b) {
    return a->pl != b->pl ? a->pl < b->pl : a->name < b->name;
  });
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]->name] = i;

  std::vector<CompiledNode> nodes;
  nodes.reserve(order.size());
  for (const NodeSpec* spec : order) {
    CompiledNode c;
    c.card = spec->states.size();
    std::size_t stride = 1;
    c.radix.assign(spec->parents.size(), 0);
    for (std::size_t i = spec->parents.size(); i-- > 0;) {
      c.radix[i] = stride;
      stride *= net.at(spec->parents[i]).states.size();
    }
    for (const auto& p : spec->parents) c.parents.push_back(pos.at(p));
    for (const auto& row : spec->cpt) c.cpt.insert(c.cpt.end(), row.begin(), row.end());
    if (auto it = assignment.find(spec->name); it != assignment.end()) {
      c.clamp = static_cast<int>(spec->state_index(it->second));
    }
    nodes.push_back(std::move(c));
  }
  std::vector<std::size_t> state(nodes.size(), 0);
  return enumerate(nodes, state, 0, 1.0);
}

double exact_query(const Network& net, const Query& q) {
  validate_query(net, q);
  if (!net.closed_past()) {
    throw Error(ErrorCode::OpenPast,
                "exact inference needs a closed-past network (truncated roots have no priors)");
  }
  const double evidence = joint_probability(net, q.evidence);
  if (!(evidence > 0.0)) {
    throw Error(ErrorCode::ZeroProbability, "evidence has probability zero");
  }
  Assignment both = q.evidence;
  both.insert(q.objective.begin(), q.objective.end());
  return joint_probability(net, both) / evidence;
}

// --- submodel inference -----------------------------------------------------

namespace {

struct SubmodelFactors {
  std::map<std::string, int> id;
  std::vector<std::size_t> card;
  std::vector<std::vector<std::string>> states;
  std::vector<detail::Factor> factors;
};

detail::Factor cpt_factor(const NodeSpec& spec, const std::map<std::string, int>& id,
                          const std::vector<std::size_t>& card) {
  // CPT layout: (parents..., node) with the node fastest.
  std::vector<int> vars;
  for (const auto& p : spec.parents) vars.push_back(id.at(p));
  vars.push_back(id.at(spec.name));

  detail::Factor f;
  f.scope = vars;
  std::sort(f.scope.begin(), f.scope.end());
  for (int v : f.scope) f.cards.push_back(card[static_cast<std::size_t>(v)]);
  std::size_t total = 1;
  for (auto c : f.cards) total *= c;
  f.values.assign(total, 0.0);

  std::vector<std::size_t> sorted_stride(f.scope.size(), 1);
  for (std::size_t i = f.scope.size(); i-- > 1;) sorted_stride[i - 1] = sorted_stride[i] * f.cards[i];
  std::vector<std::size_t> stride_of_var(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    auto at = std::lower_bound(f.scope.begin(), f.scope.end(), vars[i]) - f.scope.begin();
    stride_of_var[i] = sorted_stride[static_cast<std::size_t>(at)];
  }

  std::vector<std::size_t> digit(vars.size(), 0);
  std::size_t target = 0;
  const std::size_t node_card = card[static_cast<std::size_t>(vars.back())];
  for (std::size_t k = 0; k < total; ++k) {
    f.values[target] = spec.cpt[k / node_card][k % node_card];
    for (std::size_t d = vars.size(); d-- > 0;) {
      const std::size_t c = card[static_cast<std::size_t>(vars[d])];
      if (++digit[d] < c) {
        target += stride_of_var[d];
        break;
      }
      digit[d] = 0;
      target -= stride_of_var[d] * (c - 1);
    }
  }
  return f;
}

SubmodelFactors build_factors(const Submodel& sub) {
  SubmodelFactors out;
  // Ids follow name order so clamp tables enumerate names in order.
  std::set<std::string> names;
  for (const auto& [n, _] : sub.interior) names.insert(n);
  for (const auto& [n, _] : sub.frontier) names.insert(n);
  for (const auto& n : names) {
    out.id[n] = static_cast<int>(out.card.size());
    if (auto it = sub.interior.find(n); it != sub.interior.end()) {
      out.states.push_back(it->second.states);
    } else {
      out.states.push_back(sub.frontier.at(n).states);
    }
    out.card.push_back(out.states.back().size());
  }
  for (const auto& [n, spec] : sub.interior) {
    for (const auto& p : spec.parents) {
      if (out.id.count(p) == 0) {
        throw Error(ErrorCode::InconsistentModel,
                    fmt::format("submodel node '{}' has unretrieved parent '{}'", n, p));
      }
    }
    out.factors.push_back(cpt_factor(spec, out.id, out.card));
  }
  return out;
}

std::size_t state_of(const SubmodelFactors& sf, const std::string& name, const std::string& label) {
  const auto& states = sf.states[static_cast<std::size_t>(sf.id.at(name))];
  auto it = std::find(states.begin(), states.end(), label);
  if (it == states.end()) {
    throw Error(ErrorCode::InvalidQuery,
                fmt::format("unknown state '{}' for node '{}'", label, name));
  }
  return static_cast<std::size_t>(it - states.begin());
}

std::vector<detail::Factor> restricted(std::vector<detail::Factor> factors,
                                       const SubmodelFactors& sf, const Assignment& a) {
  for (const auto& [name, label] : a) {
    const int var = sf.id.at(name);
    const std::size_t s = state_of(sf, name, label);
    for (auto& f : factors) f = detail::restrict_to(f, var, s);
  }
  return factors;
}

void require_interior(const Submodel& sub, const Assignment& a, const char* what) {
  for (const auto& [name, _] : a) {
    if (sub.interior.count(name) == 0) {
      throw Error(ErrorCode::InvalidQuery,
                  fmt::format("{} node '{}' is not in the submodel interior", what, name));
    }
  }
}

}  // namespace

double frontier_conditional(const Submodel& sub, const Assignment& objective,
                            const Assignment& frontier_values, const Assignment& evidence_plus) {
  require_interior(sub, objective, "objective");
  require_interior(sub, evidence_plus, "evidence");
  for (const auto& [name, _] : sub.frontier) {
    if (frontier_values.count(name) == 0) {
      throw Error(ErrorCode::UnassignedFrontier,
                  fmt::format("frontier node '{}' has no clamp value", name));
    }
  }
  for (const auto& [name, _] : frontier_values) {
    if (sub.frontier.count(name) == 0) {
      throw Error(ErrorCode::InvalidQuery,
                  fmt::format("clamp names '{}', which is not a frontier node", name));
    }
  }
  SubmodelFactors sf = build_factors(sub);
  auto base = restricted(sf.factors, sf, frontier_values);
  base = restricted(std::move(base), sf, evidence_plus);
  const double evidence = detail::eliminate_all_but(base, {}).values.at(0);
  if (!(evidence > 0.0)) {
    throw Error(ErrorCode::ZeroProbability, "clamp and evidence have probability zero");
  }
  const double joint =
      detail::eliminate_all_but(restricted(std::move(base), sf, objective), {}).values.at(0);
  return joint / evidence;
}

Assignment ClampTable::clamp(std::size_t index) const {
  Assignment a;
  for (std::size_t i = nodes.size(); i-- > 0;) {
    a[nodes[i]] = states[i][index % states[i].size()];
    index /= states[i].size();
  }
  return a;
}

ClampTable clamp_table(const Submodel& sub, const Assignment& objective,
                       const Assignment& observed_frontier, const Assignment& evidence_plus,
                       std::size_t max_assignments) {
  require_interior(sub, objective, "objective");
  require_interior(sub, evidence_plus, "evidence");
  for (const auto& [name, _] : observed_frontier) {
    if (sub.frontier.count(name) == 0) {
      throw Error(ErrorCode::InvalidQuery,
                  fmt::format("'{}' is not a frontier node", name));
    }
  }

  ClampTable table;
  std::size_t total = 1;
  for (const auto& [name, stub] : sub.frontier) {
    if (observed_frontier.count(name) > 0) continue;
    table.nodes.push_back(name);
    table.states.push_back(stub.states);
    if (total > max_assignments / stub.states.size()) {
      throw Error(ErrorCode::FrontierTooWide,
                  fmt::format("frontier too wide: more than {} clamp assignments",
                              max_assignments));
    }
    total *= stub.states.size();
  }
  if (total > max_assignments) {
    throw Error(ErrorCode::FrontierTooWide,
                fmt::format("frontier too wide: {} clamp assignments exceed {}", total,
                            max_assignments));
  }

  SubmodelFactors sf = build_factors(sub);
  std::vector<int> keep;
  detail::Factor ones;
  for (const auto& name : table.nodes) {
    keep.push_back(sf.id.at(name));
    ones.scope.push_back(keep.back());
    ones.cards.push_back(sf.card[static_cast<std::size_t>(keep.back())]);
  }
  ones.values.assign(total, 1.0);

  auto base = restricted(sf.factors, sf, observed_frontier);
  base = restricted(std::move(base), sf, evidence_plus);
  base.push_back(ones);
  detail::Factor evidence = detail::eliminate_all_but(base, keep);
  detail::Factor joint =
      detail::eliminate_all_but(restricted(std::move(base), sf, objective), keep);
  table.evidence = std::move(evidence.values);
  table.joint = std::move(joint.values);
  return table;
}

// --- bounds -----------------------------------------------------------------

Exactness exactness_status(const RootSetResult& rs, Threshold th, double t0, double lower,
                           double upper) {
  if (th.is_origin()) return Exactness::ExactByFullPast;
  if (rs.frontier.size() == rs.evidence_in_frontier.size()) {
    return Exactness::ExactByFrontierSubsetOfEvidence;
  }
  const bool frontier_at_origin =
      std::all_of(rs.submodel.frontier.begin(), rs.submodel.frontier.end(),
                  [&](const auto& kv) { return kv.second.pl == t0; });
  if (frontier_at_origin && rs.evidence_minus.empty()) {
    return Exactness::ExactByFullPast;
  }
  if (upper - lower < kProbTolerance) return Exactness::ExactByCoincidence;
  return Exactness::NotExact;
}

namespace {

Assignment restrict_assignment(const Assignment& a, const NodeSet& names) {
  Assignment out;
  for (const auto& n : names) out.emplace(n, a.at(n));
  return out;
}

void check_threshold(const NodeSource& source, const Query& q, Threshold th) {
  Cpl c = cpl(source, q);
  if (std::isnan(th.v) || th.v > c.pl) {
    throw Error(ErrorCode::ThresholdAboveCpl,
                fmt::format("threshold {} lies above the critical PL {} of '{}'", to_string(th),
                            c.pl, c.node));
  }
  if (th.is_origin() && !source.closed_past()) {
    throw Error(ErrorCode::OpenPast,
                "the origin threshold needs a closed-past model with known root priors");
  }
}

}  // namespace

QueryBounds bounds_for(const NodeSource& source, const Query& q, const RootSetResult& rs,
                       const InferOptions& options) {
  check_threshold(source, q, rs.threshold);
  const double t0 = source.t0();

  QueryBounds out;
  out.threshold = rs.threshold;
  out.frontier_size = rs.frontier.size();
  out.interior_size = rs.interior.size();
  out.expanded_count = rs.expanded_count;

  const Assignment eplus = restrict_assignment(q.evidence, rs.evidence_plus);
  const Assignment efront = restrict_assignment(q.evidence, rs.evidence_in_frontier);

  Exactness structural = exactness_status(rs, rs.threshold, t0, 0.0, 1.0);
  const bool full_past = rs.threshold.is_origin() ||
                         (structural == Exactness::ExactByFullPast && source.closed_past());

  if (full_past) {
    // Frontier nodes sit at T0, so they are roots with known priors: fold
    // them into the interior and the bracket collapses.
    Submodel closed = rs.submodel;
    for (const auto& [name, stub] : rs.submodel.frontier) {
      const NodeSpec& spec = source.at(name);
      if (!spec.parents.empty()) {
        throw Error(ErrorCode::InconsistentModel,
                    fmt::format("frontier node '{}' at T0 has parents", name));
      }
      closed.interior.emplace(name, spec);
    }
    closed.frontier.clear();
    Assignment evidence = eplus;
    evidence.insert(efront.begin(), efront.end());
    ClampTable table = clamp_table(closed, q.objective, {}, evidence, 1);
    if (!(table.evidence.at(0) > 0.0)) {
      throw Error(ErrorCode::ZeroProbability, "evidence has probability zero");
    }
    out.lower = out.upper = table.joint[0] / table.evidence[0];
    out.clamps = 1;
    out.exactness = Exactness::ExactByFullPast;
    return out;
  }

  ClampTable table = clamp_table(rs.submodel, q.objective, efront, eplus,
                                 options.max_frontier_assignments);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table.evidence[i] > 0.0)) {
      ++out.excluded_clamps;
      continue;
    }
    const double p = table.joint[i] / table.evidence[i];
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  out.clamps = table.size();
  if (out.excluded_clamps == table.size()) {
    throw Error(ErrorCode::ZeroProbability,
                fmt::format("every frontier clamp at threshold {} has zero normalizer",
                            to_string(rs.threshold)));
  }
  out.lower = std::clamp(lo, 0.0, 1.0);
  out.upper = std::clamp(hi, 0.0, 1.0);
  out.exactness = exactness_status(rs, rs.threshold, t0, out.lower, out.upper);
  if (out.exactness == Exactness::ExactByFullPast) {
    // Only reachable without known root priors; the bracket stands as is.
    out.exactness = out.width() < kProbTolerance ? Exactness::ExactByCoincidence
                                                 : Exactness::NotExact;
  }
  return out;
}

QueryBounds bounds_at(const NodeSource& source, const Query& q, Threshold th,
                      const InferOptions& options) {
  check_threshold(source, q, th);
  RootSetResult rs = root_set(source, q, th, options.retrieval);
  return bounds_for(source, q, rs, options);
}

// --- schedules and sweeps ---------------------------------------------------

void check_schedule(const NodeSource& source, const Query& q, const Schedule& schedule) {
  if (schedule.thresholds.empty()) {
    throw Error(ErrorCode::InvalidSchedule, "schedule is empty");
  }
  Cpl c = cpl(source, q);
  if (schedule.thresholds.front().v > c.pl) {
    throw Error(ErrorCode::InvalidSchedule,
                fmt::format("schedule starts at {}, above the critical PL {}",
                            to_string(schedule.thresholds.front()), c.pl));
  }
  for (std::size_t i = 1; i < schedule.thresholds.size(); ++i) {
    if (!(schedule.thresholds[i].v < schedule.thresholds[i - 1].v)) {
      throw Error(ErrorCode::InvalidSchedule,
                  fmt::format("schedule is not strictly decreasing at entry {}", i));
    }
  }
}

Schedule default_schedule(const NodeSource& source, const Query& q, std::size_t max_thresholds) {
  const Cpl c = cpl(source, q);
  const double t0 = source.t0();
  std::set<double, std::greater<>> levels;
  if (c.pl != t0) levels.insert(c.pl);

  // Walk ancestors from the latest PL downwards so unbounded models can stop
  // as soon as enough distinct levels are known.
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item> frontier;
  std::set<std::string> seen;
  auto push_parents = [&](const std::string& name) {
    for (const auto& p : source.at(name).parents) {
      if (seen.insert(p).second) frontier.emplace(source.at(p).pl, p);
    }
  };
  for (const auto& [name, _] : q.objective) push_parents(name);
  for (const auto& [name, _] : q.evidence) push_parents(name);

  while (!frontier.empty()) {
    auto [pl, name] = frontier.top();
    // Later pops never carry a higher PL, so no new level can displace these.
    if (levels.size() >= max_thresholds) break;
    frontier.pop();
    if (pl < c.pl && pl != t0) levels.insert(pl);
    push_parents(name);
  }

  Schedule out;
  for (double v : levels) {
    if (out.thresholds.size() >= max_thresholds) break;
    out.thresholds.push_back(Threshold{v});
  }
  if (source.closed_past()) out.thresholds.push_back(Threshold::origin());
  return out;
}

std::vector<QueryBounds> anytime_sweep(const NodeSource& source, const Query& q,
                                       const Schedule& schedule, const SweepOptions& options) {
  check_schedule(source, q, schedule);
  Retrieval retrieval(source, q, options.infer.retrieval);
  std::vector<QueryBounds> out;
  for (const Threshold& th : schedule.thresholds) {
    check_threshold(source, q, th);
    const RootSetResult& rs = retrieval.advance(th);
    out.push_back(bounds_for(source, q, rs, options.infer));
    if (options.stop_when_exact && out.back().exact()) break;
  }
  return out;
}

MapDecision map_decision(const NodeSource& source, const Query& q, const Schedule& schedule,
                         const InferOptions& options) {
  if (q.objective.size() != 1) {
    throw Error(ErrorCode::InvalidQuery, "a MAP decision needs exactly one objective node");
  }
  check_schedule(source, q, schedule);
  const std::string target = q.objective.begin()->first;
  const NodeSpec& spec = source.at(target);

  Retrieval retrieval(source, q, options.retrieval);
  MapDecision decision;
  for (const Threshold& th : schedule.thresholds) {
    const RootSetResult& rs = retrieval.advance(th);
    decision.last.clear();
    bool all_exact = true;
    for (const auto& label : spec.states) {
      Query per_state{{{target, label}}, q.evidence};
      decision.last.emplace_back(label, bounds_for(source, per_state, rs, options));
      all_exact = all_exact && decision.last.back().second.exact();
    }
    for (std::size_t i = 0; i < decision.last.size(); ++i) {
      bool wins = true;
      for (std::size_t j = 0; j < decision.last.size() && wins; ++j) {
        if (j != i && !(decision.last[i].second.lower > decision.last[j].second.upper)) {
          wins = false;
        }
      }
      if (wins) {
        decision.decided = true;
        decision.state = decision.last[i].first;
        decision.at = th;
        return decision;
      }
    }
    if (all_exact) break;
  }
  return decision;
}

}  // namespace plif
