#pragma once

// Test-network generators and the HMM sweep experiment.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "plif/infer.hpp"
#include "plif/model.hpp"

namespace plif {

// Binary HMM unbounded into the past.  Hidden nodes are named x_t, x_t+1,
// x_t-1, ... and observations y_t, y_t-1, ...; state "1" is the event the
// chain is in (or reports) the true state.
struct HmmParams {
  double transition_stay = 0.9;  // P(x_{i+1} = s | x_i = s)
  double emission_true = 0.8;    // P(y_i = s | x_i = s)
  int window = 10;                // observations y_t .. y_{t-window+1}
  double y_pl_offset = 0.5;       // pl(y_i) = pl(x_i) + offset, in (0, 1)
};

// pl(x_{t+i}) = i - 2.
double hmm_x_pl(int offset);
std::string hmm_x(int offset);
std::string hmm_y(int offset);

// Throws Error{InvalidArgument} on probabilities outside (0,1), a window
// below 1 or an offset outside (0,1).
LazyNetwork hmm_model(const HmmParams& p);

// P(x_{t+1} = 1 | y_t .. y_{t-window+1} all = 1).
Query hmm_query(const HmmParams& p);

// Thresholds v = -1, -2, ..., -depth over the HMM query, no early stop.
std::vector<QueryBounds> hmm_sweep_experiment(const HmmParams& p, int depth);

void write_sweep_csv(std::ostream& out, const std::vector<QueryBounds>& rows);
void write_sweep_table(std::ostream& out, const std::vector<QueryBounds>& rows);

struct RandomNetSpec {
  std::uint64_t seed = 0;
  int node_count = 8;   // 1..12
  int max_parents = 3;  // 0..3
  int state_count = 2;  // each node draws 2..state_count states; 2 or 3
  double cpt_floor = 0.05;
};

// Deterministic in the seed.  Nodes n0..n{k-1} in topological order; a
// node's PL is its index, roots are pinned to T0 = 0.
Network random_network(const RandomNetSpec& spec);

// 1-2 objective nodes and 0-3 evidence nodes, disjoint, with P(E) > 0.
Query random_query(const Network& net, std::uint64_t seed);

// Chain n0 -> n1 -> ... -> n{length-1} with PLs 0..length-1.
Network random_chain(std::uint64_t seed, int length, int state_count, double cpt_floor);

}  // namespace plif
