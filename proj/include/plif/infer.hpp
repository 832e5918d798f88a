#pragma once

// Bounds on P(O | E) from partially retrieved submodels.
//
// For a threshold at or below the least objective PL, conditioning on the
// frontier screens the objective off from all evidence below the threshold,
// so P(O | E) is a convex combination of P(O | R, E+) over frontier clamps R.
// The min and max of those terms bracket the query and need only the CPTs of
// the retrieved interior.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plif/model.hpp"
#include "plif/retrieval.hpp"

namespace plif {

inline constexpr double kProbTolerance = 1e-9;
inline constexpr std::size_t kDefaultMaxFrontierAssignments = std::size_t{1} << 16;

enum class Exactness {
  NotExact,
  ExactByFrontierSubsetOfEvidence,  // every frontier node is observed
  ExactByFullPast,                  // frontier sits at T0 and no evidence is left behind
  ExactByCoincidence,               // the bracket collapsed numerically
};

const char* to_string(Exactness e);

struct QueryBounds {
  Threshold threshold;
  double lower = 0.0;
  double upper = 1.0;
  Exactness exactness = Exactness::NotExact;
  std::size_t frontier_size = 0;
  std::size_t interior_size = 0;
  std::size_t expanded_count = 0;
  std::size_t clamps = 0;           // frontier assignments enumerated
  std::size_t excluded_clamps = 0;  // assignments with zero normalizer

  bool exact() const { return exactness != Exactness::NotExact; }
  double width() const { return upper - lower; }
};

struct InferOptions {
  std::size_t max_frontier_assignments = kDefaultMaxFrontierAssignments;
  RetrievalOptions retrieval;
};

struct Cpl {
  std::string node;
  double pl = 0.0;
};

// Least PL among the objective nodes; ties go to the lexicographically
// smallest name.
Cpl cpl(const NodeSource& source, const Query& q);

// P(X = assignment) by enumeration over the ancestral closure of the named
// nodes.  Requires a closed-past network.
double joint_probability(const Network& net, const Assignment& assignment);

// P(O | E) by enumeration.  Throws Error{OpenPast} for networks whose roots
// lack priors and Error{ZeroProbability} when P(E) = 0.
double exact_query(const Network& net, const Query& q);

// P(O | R, E+) from the submodel alone: frontier nodes are clamped to R and
// the remaining interior nodes are summed out.
double frontier_conditional(const Submodel& sub, const Assignment& objective,
                            const Assignment& frontier_values, const Assignment& evidence_plus);

// P(O, E+ | R) and P(E+ | R) for every assignment of the unobserved frontier
// nodes, enumerated in odometer order over the sorted names (last fastest).
struct ClampTable {
  std::vector<std::string> nodes;
  std::vector<std::vector<std::string>> states;
  std::vector<double> joint;
  std::vector<double> evidence;

  std::size_t size() const { return joint.size(); }
  Assignment clamp(std::size_t index) const;
};

ClampTable clamp_table(const Submodel& sub, const Assignment& objective,
                       const Assignment& observed_frontier, const Assignment& evidence_plus,
                       std::size_t max_assignments = kDefaultMaxFrontierAssignments);

Exactness exactness_status(const RootSetResult& rs, Threshold th, double t0, double lower,
                           double upper);

// Bounds for an already retrieved root set.
QueryBounds bounds_for(const NodeSource& source, const Query& q, const RootSetResult& rs,
                       const InferOptions& options = {});

// Throws Error{ThresholdAboveCpl} when th.v exceeds the least objective PL,
// and Error{OpenPast} for the origin sentinel on models without known priors.
QueryBounds bounds_at(const NodeSource& source, const Query& q, Threshold th,
                      const InferOptions& options = {});

struct Schedule {
  std::vector<Threshold> thresholds;
};

// Throws Error{InvalidSchedule} unless the schedule is nonempty, strictly
// decreasing and starts at or below the least objective PL.
void check_schedule(const NodeSource& source, const Query& q, const Schedule& schedule);

// Distinct ancestor PLs below the least objective PL, starting there and
// descending; PLs equal to T0 are folded into the closing origin sentinel,
// which is appended for closed-past networks.  `max_thresholds` bounds the
// finite entries and must be given for unbounded lazy models.
Schedule default_schedule(const NodeSource& source, const Query& q,
                          std::size_t max_thresholds = std::numeric_limits<std::size_t>::max());

struct SweepOptions {
  bool stop_when_exact = true;
  InferOptions infer;
};

// One result per threshold, grown on a single incremental retrieval.
std::vector<QueryBounds> anytime_sweep(const NodeSource& source, const Query& q,
                                       const Schedule& schedule, const SweepOptions& options = {});

struct MapDecision {
  bool decided = false;
  std::string state;            // winning state label when decided
  std::optional<Threshold> at;  // first threshold that separated the states
  // Bounds per objective state at the last threshold examined.
  std::vector<std::pair<std::string, QueryBounds>> last;
};

// Sweeps until one state's lower bound exceeds every other state's upper
// bound.  The query's objective must name exactly one node; its label is
// ignored.
MapDecision map_decision(const NodeSource& source, const Query& q, const Schedule& schedule,
                         const InferOptions& options = {});

}  // namespace plif
