#include "plif/gen.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace plif {

// --- HMM --------------------------------------------------------------------

double hmm_x_pl(int offset) { return static_cast<double>(offset) - 2.0; }

namespace {

std::string offset_name(char prefix, int offset) {
  if (offset == 0) return fmt::format("{}_t", prefix);
  return fmt::format("{}_t{:+d}", prefix, offset);
}

// Parses "x_t", "x_t+3", "y_t-2"; returns false for anything else.
bool parse_hmm_name(const std::string& name, char& kind, int& offset) {
  if (name.size() < 3 || (name[0] != 'x' && name[0] != 'y') || name[1] != '_' || name[2] != 't') {
    return false;
  }
  kind = name[0];
  if (name.size() == 3) {
    offset = 0;
    return true;
  }
  const char sign = name[3];
  if ((sign != '+' && sign != '-') || name.size() == 4) return false;
  int magnitude = 0;
  const char* first = name.data() + 4;
  const char* last = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(first, last, magnitude);
  if (ec != std::errc() || ptr != last || magnitude == 0 || *first == '0') return false;
  offset = sign == '+' ? magnitude : -magnitude;
  return true;
}

std::vector<std::vector<double>> symmetric_cpt(double keep) {
  return {{keep, 1.0 - keep}, {1.0 - keep, keep}};
}

}  // namespace

std::string hmm_x(int offset) { return offset_name('x', offset); }
std::string hmm_y(int offset) { return offset_name('y', offset); }

LazyNetwork hmm_model(const HmmParams& p) {
  auto open01 = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open01(p.transition_stay) || !open01(p.emission_true)) {
    throw Error(ErrorCode::InvalidArgument, "HMM probabilities must lie in (0,1)");
  }
  if (p.window < 1) throw Error(ErrorCode::InvalidArgument, "HMM window must be at least 1");
  if (!open01(p.y_pl_offset)) {
    throw Error(ErrorCode::InvalidArgument, "observation PL offset must lie in (0,1)");
  }
  return LazyNetwork(
      [p](const std::string& name) -> std::optional<NodeSpec> {
        char kind = 0;
        int offset = 0;
        if (!parse_hmm_name(name, kind, offset)) return std::nullopt;
        NodeSpec spec;
        spec.name = name;
        spec.states = {"0", "1"};
        if (kind == 'x') {
          spec.pl = hmm_x_pl(offset);
          spec.parents = {hmm_x(offset - 1)};
          spec.cpt = symmetric_cpt(p.transition_stay);
        } else {
          spec.pl = hmm_x_pl(offset) + p.y_pl_offset;
          spec.parents = {hmm_x(offset)};
          spec.cpt = symmetric_cpt(p.emission_true);
        }
        return spec;
      },
      kNegInf, false);
}

Query hmm_query(const HmmParams& p) {
  Query q;
  q.objective[hmm_x(1)] = "1";
  for (int i = 0; i < p.window; ++i) q.evidence[hmm_y(-i)] = "1";
  return q;
}

std::vector<QueryBounds> hmm_sweep_experiment(const HmmParams& p, int depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidArgument, "sweep depth must be at least 1");
  LazyNetwork model = hmm_model(p);
  Schedule schedule;
  for (int d = 1; d <= depth; ++d) schedule.thresholds.push_back(Threshold{-static_cast<double>(d)});
  SweepOptions options;
  options.stop_when_exact = false;
  return anytime_sweep(model, hmm_query(p), schedule, options);
}

void write_sweep_csv(std::ostream& out, const std::vector<QueryBounds>& rows) {
  out << "threshold,lower,upper,frontier_size,interior_size\n";
  for (const auto& r : rows) {
    fmt::print(out, "{},{:.9f},{:.9f},{},{}\n", to_string(r.threshold), r.lower, r.upper,
               r.frontier_size, r.interior_size);
  }
}

void write_sweep_table(std::ostream& out, const std::vector<QueryBounds>& rows) {
  fmt::print(out, "{:>10}  {:>11}  {:>11}  {:>8}  {:>8}  {}\n", "threshold", "lower", "upper",
             "frontier", "interior", "exactness");
  for (const auto& r : rows) {
    fmt::print(out, "{:>10}  {:>11.9f}  {:>11.9f}  {:>8}  {:>8}  {}\n", to_string(r.threshold),
               r.lower, r.upper, r.frontier_size, r.interior_size, to_string(r.exactness));
  }
}

// --- random networks --------------------------------------------------------

namespace {

std::vector<double> random_row(std::mt19937_64& rng, std::size_t width, double floor) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> raw(width);
  for (auto& u : raw) u = unit(rng) + 1e-12;
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  const double mass = 1.0 - floor * static_cast<double>(width);
  std::vector<double> row(width);
  for (std::size_t j = 0; j < width; ++j) row[j] = floor + mass * raw[j] / sum;
  // Put rounding residue on the largest entry so the row sums to 1.
  const double residue = 1.0 - std::accumulate(row.begin(), row.end(), 0.0);
  *std::max_element(row.begin(), row.end()) += residue;
  return row;
}

std::vector<std::string> state_labels(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::to_string(i));
  return out;
}

}  // namespace

Network random_network(const RandomNetSpec& spec) {
  if (spec.node_count < 1 || spec.node_count > 12 || spec.max_parents < 0 ||
      spec.max_parents > 3 || spec.state_count < 2 || spec.state_count > 3 ||
      !(spec.cpt_floor >= 0.0) || spec.cpt_floor * spec.state_count >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "random network spec out of range");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<NodeSpec> nodes;
  for (int i = 0; i < spec.node_count; ++i) {
    NodeSpec node;
    node.name = fmt::format("n{}", i);
    node.states = state_labels(static_cast<std::size_t>(
        std::uniform_int_distribution<int>(2, spec.state_count)(rng)));

    const int max_k = std::min(i, spec.max_parents);
    const int k = std::uniform_int_distribution<int>(0, max_k)(rng);
    std::vector<int> pool(static_cast<std::size_t>(i));
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());

    std::size_t rows = 1;
    for (int j : pool) {
      node.parents.push_back(nodes[static_cast<std::size_t>(j)].name);
      rows *= nodes[static_cast<std::size_t>(j)].states.size();
    }
    node.pl = node.parents.empty() ? 0.0 : static_cast<double>(i);
    for (std::size_t r = 0; r < rows; ++r) {
      node.cpt.push_back(random_row(rng, node.states.size(), spec.cpt_floor));
    }
    nodes.push_back(std::move(node));
  }
  return Network(0.0, false, std::move(nodes));
}

Network random_chain(std::uint64_t seed, int length, int state_count, double cpt_floor) {
  if (length < 1 || state_count < 2 || cpt_floor * state_count >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "random chain spec out of range");
  }
  std::mt19937_64 rng(seed);
  std::vector<NodeSpec> nodes;
  for (int i = 0; i < length; ++i) {
    NodeSpec node;
    node.name = fmt::format("n{}", i);
    node.states = state_labels(static_cast<std::size_t>(state_count));
    node.pl = static_cast<double>(i);
    std::size_t rows = 1;
    if (i > 0) {
      node.parents = {nodes.back().name};
      rows = nodes.back().states.size();
    }
    for (std::size_t r = 0; r < rows; ++r) {
      node.cpt.push_back(random_row(rng, node.states.size(), cpt_floor));
    }
    nodes.push_back(std::move(node));
  }
  return Network(0.0, false, std::move(nodes));
}

Query random_query(const Network& net, std::uint64_t seed) {
  if (net.size() == 0) throw Error(ErrorCode::InvalidArgument, "network is empty");
  std::mt19937_64 rng(seed);
  const std::size_t n = net.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_obj =
      std::min<std::size_t>(n, std::uniform_int_distribution<std::size_t>(1, 2)(rng));
  std::size_t n_ev =
      std::min<std::size_t>(n - n_obj, std::uniform_int_distribution<std::size_t>(0, 3)(rng));

  auto draw_state = [&](const NodeSpec& spec) {
    return spec.states[std::uniform_int_distribution<std::size_t>(0, spec.states.size() - 1)(rng)];
  };

  Query q;
  for (std::size_t i = 0; i < n_obj; ++i) {
    const NodeSpec& spec = net.nodes()[order[i]];
    q.objective[spec.name] = draw_state(spec);
  }
  for (;;) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      q.evidence.clear();
      for (std::size_t i = 0; i < n_ev; ++i) {
        const NodeSpec& spec = net.nodes()[order[n_obj + i]];
        q.evidence[spec.name] = draw_state(spec);
      }
      if (joint_probability(net, q.evidence) > 0.0) return q;
    }
    if (n_ev == 0) break;
    --n_ev;
  }
  q.evidence.clear();
  return q;
}

}  // namespace plif
