#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "plif/gen.hpp"
#include "plif/infer.hpp"
#include "plif/model.hpp"
#include "plif/retrieval.hpp"

namespace plif::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidNetwork: return kInvalid;
    case ErrorCode::ThresholdAboveCpl: return kAboveCpl;
    case ErrorCode::ZeroProbability: return kZeroEvidence;
    case ErrorCode::OpenPast:
    case ErrorCode::FrontierTooWide:
    case ErrorCode::ExpansionCap:
    case ErrorCode::NoStartNodes:
    case ErrorCode::InconsistentModel:
    case ErrorCode::UnassignedFrontier:
      return kEngine;
    default:
      return kUsage;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, fmt::format("cannot open '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Assignment parse_pairs(const std::vector<std::string>& pairs, const char* flag) {
  Assignment out;
  for (const auto& pair : pairs) {
    auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("{} expects name=state, got '{}'", flag, pair));
    }
    auto [_, inserted] = out.emplace(pair.substr(0, eq), pair.substr(eq + 1));
    if (!inserted) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("{} names '{}' twice", flag, pair.substr(0, eq)));
    }
  }
  return out;
}

NodeSet parse_set(const std::vector<std::string>& items) {
  NodeSet out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) out.insert(name);
    }
  }
  return out;
}

InferOptions infer_options() {
  InferOptions options;
  if (const char* env = std::getenv("PLIF_MAX_FRONTIER")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("PLIF_MAX_FRONTIER must be a positive integer, got '{}'", env));
    }
    options.max_frontier_assignments = static_cast<std::size_t>(v);
  }
  return options;
}

nlohmann::ordered_json number_or_inf(double v) {
  if (v == kNegInf) return "-inf";
  return v;
}

void print_bounds(std::ostream& out, const QueryBounds& b, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json doc;
    doc["threshold"] = number_or_inf(b.threshold.v);
    doc["lower"] = b.lower;
    doc["upper"] = b.upper;
    doc["exactness"] = to_string(b.exactness);
    doc["frontier_size"] = b.frontier_size;
    doc["interior_size"] = b.interior_size;
    doc["clamps"] = b.clamps;
    doc["excluded_clamps"] = b.excluded_clamps;
    out << doc.dump() << "\n";
  } else if (format == "csv") {
    out << "threshold,lower,upper,exactness,frontier_size,interior_size\n";
    fmt::print(out, "{},{:.9f},{:.9f},{},{},{}\n", to_string(b.threshold), b.lower, b.upper,
               to_string(b.exactness), b.frontier_size, b.interior_size);
  } else {
    fmt::print(out, "threshold: {}\nlower: {:.9f}\nupper: {:.9f}\nexactness: {}\n",
               to_string(b.threshold), b.lower, b.upper, to_string(b.exactness));
    fmt::print(out, "frontier_size: {}\ninterior_size: {}\n", b.frontier_size, b.interior_size);
  }
}

// --- subcommands ------------------------------------------------------------

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  Network net;
  try {
    net = parse_network(read_file(path));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  ValidationReport report = validate(net);
  if (report.empty()) {
    fmt::print(out, "OK: {} nodes\n", net.size());
    return kOk;
  }
  for (const auto& v : report) fmt::print(out, "{}: {}\n", to_string(v.kind), v.message);
  return kInvalid;
}

struct QueryArgs {
  std::string net;
  std::vector<std::string> targets;
  std::vector<std::string> observations;
  std::optional<double> threshold;
  std::string at_pl_of;
  bool origin = false;
  bool exact = false;
  std::string format = "human";
  std::string dump_submodel;
};

int cmd_query(const QueryArgs& a, std::ostream& out) {
  Network net = load_network(read_file(a.net));
  Query q{parse_pairs(a.targets, "--target"), parse_pairs(a.observations, "--obs")};
  validate_query(net, q);

  if (a.exact) {
    const double p = exact_query(net, q);
    if (a.format == "json") {
      nlohmann::ordered_json doc;
      doc["exact"] = p;
      out << doc.dump() << "\n";
    } else if (a.format == "csv") {
      fmt::print(out, "exact\n{:.9f}\n", p);
    } else {
      fmt::print(out, "exact: {:.9f}\n", p);
    }
    return kOk;
  }

  Threshold th{cpl(net, q).pl};
  if (a.threshold) th = Threshold{*a.threshold};
  if (!a.at_pl_of.empty()) th = Threshold{net.at(a.at_pl_of).pl};
  if (a.origin) th = Threshold::origin();

  const InferOptions options = infer_options();
  RootSetResult rs;
  {
    // Threshold precondition first so the error names the critical PL.
    const Cpl c = cpl(net, q);
    if (th.v > c.pl) {
      throw Error(ErrorCode::ThresholdAboveCpl,
                  fmt::format("threshold {} lies above the critical PL {} of '{}'",
                              to_string(th), c.pl, c.node));
    }
    rs = root_set(net, q, th, options.retrieval);
  }
  QueryBounds b = bounds_for(net, q, rs, options);
  if (!a.dump_submodel.empty()) {
    std::ofstream dump(a.dump_submodel, std::ios::binary);
    if (!dump) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("cannot write '{}'", a.dump_submodel));
    }
    dump << serialize_root_set(rs) << "\n";
  }
  print_bounds(out, b, a.format);
  return kOk;
}

struct SweepArgs {
  std::string net;
  bool hmm = false;
  std::vector<std::string> targets;
  std::vector<std::string> observations;
  std::vector<double> thresholds;
  std::optional<int> depth;
  bool csv = false;
  bool full_sweep = false;
  HmmParams hmm_params;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  SweepOptions options;
  options.infer = infer_options();
  options.stop_when_exact = !a.full_sweep;

  std::unique_ptr<NodeSource> owned;
  Query q;
  if (a.hmm) {
    owned = std::make_unique<LazyNetwork>(hmm_model(a.hmm_params));
    q = hmm_query(a.hmm_params);
  } else {
    owned = std::make_unique<Network>(load_network(read_file(a.net)));
  }
  if (!a.targets.empty() || !a.observations.empty()) {
    q = Query{parse_pairs(a.targets, "--target"), parse_pairs(a.observations, "--obs")};
  }
  validate_query(*owned, q);

  Schedule schedule;
  if (!a.thresholds.empty()) {
    for (double v : a.thresholds) schedule.thresholds.push_back(Threshold{v});
  } else {
    const int depth = a.depth.value_or(a.hmm ? 10 : 0);
    if (a.hmm || a.depth) {
      if (depth < 1) throw Error(ErrorCode::InvalidArgument, "--depth must be at least 1");
      schedule = default_schedule(*owned, q, static_cast<std::size_t>(depth));
    } else {
      schedule = default_schedule(*owned, q);
    }
  }
  check_schedule(*owned, q, schedule);
  const auto rows = anytime_sweep(*owned, q, schedule, options);
  if (a.csv) {
    write_sweep_csv(out, rows);
  } else {
    write_sweep_table(out, rows);
  }
  return kOk;
}

int cmd_dsep(const std::string& path, const std::vector<std::string>& a,
             const std::vector<std::string>& b, const std::vector<std::string>& c,
             std::ostream& out) {
  Network net = load_network(read_file(path));
  const bool separated = d_separated(net, parse_set(a), parse_set(b), parse_set(c));
  out << (separated ? "true" : "false") << "\n";
  return separated ? kOk : kNotSeparated;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anytime bounds on causal queries over PL-annotated Bayesian networks", "plif"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a network document");
  validate_cmd->add_option("path", validate_path, "Network document")->required();

  QueryArgs qa;
  auto* query_cmd = app.add_subcommand("query", "Bound or compute P(targets | observations)");
  query_cmd->add_option("--net", qa.net, "Network document")->required();
  query_cmd->add_option("--target", qa.targets, "Objective as name=state (repeatable)")->required();
  query_cmd->add_option("--obs", qa.observations, "Evidence as name=state (repeatable)");
  auto* th_opt = query_cmd->add_option("--threshold", qa.threshold, "Inclusive threshold v");
  auto* at_opt = query_cmd->add_option("--at-pl-of", qa.at_pl_of, "Use the PL of this node as v");
  auto* origin_opt = query_cmd->add_flag("--origin", qa.origin, "Full ancestral retrieval");
  auto* exact_opt = query_cmd->add_flag("--exact", qa.exact, "Exact value by enumeration");
  th_opt->excludes(at_opt)->excludes(origin_opt)->excludes(exact_opt);
  at_opt->excludes(origin_opt)->excludes(exact_opt);
  origin_opt->excludes(exact_opt);
  query_cmd->add_option("--format", qa.format, "human, csv or json")
      ->check(CLI::IsMember({"human", "csv", "json"}));
  query_cmd->add_option("--dump-submodel", qa.dump_submodel, "Write the retrieved submodel here");

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Anytime bounds over a threshold schedule");
  auto* net_opt = sweep_cmd->add_option("--net", sa.net, "Network document");
  auto* hmm_opt = sweep_cmd->add_flag("--hmm", sa.hmm, "Use the built-in unbounded HMM");
  net_opt->excludes(hmm_opt);
  sweep_cmd->add_option("--target", sa.targets, "Objective as name=state (repeatable)");
  sweep_cmd->add_option("--obs", sa.observations, "Evidence as name=state (repeatable)");
  auto* list_opt =
      sweep_cmd->add_option("--thresholds", sa.thresholds, "Explicit decreasing thresholds")
          ->delimiter(',');
  auto* depth_opt = sweep_cmd->add_option("--depth", sa.depth, "Number of finite thresholds");
  list_opt->excludes(depth_opt);
  sweep_cmd->add_flag("--csv", sa.csv, "Emit CSV");
  sweep_cmd->add_flag("--full-sweep", sa.full_sweep, "Do not stop once the bounds are exact");
  sweep_cmd->add_option("--stay", sa.hmm_params.transition_stay, "HMM stay probability");
  sweep_cmd->add_option("--emit", sa.hmm_params.emission_true, "HMM emission accuracy");
  sweep_cmd->add_option("--window", sa.hmm_params.window, "HMM observation window");
  sweep_cmd->add_option("--y-offset", sa.hmm_params.y_pl_offset, "HMM observation PL offset");

  std::string dsep_net;
  std::vector<std::string> dsep_a, dsep_b, dsep_c;
  auto* dsep_cmd = app.add_subcommand("dsep", "Test d-separation of A and B given C");
  dsep_cmd->add_option("--net", dsep_net, "Network document")->required();
  dsep_cmd->add_option("--a", dsep_a, "Comma-separated node set")->required();
  dsep_cmd->add_option("--b", dsep_b, "Comma-separated node set")->required();
  dsep_cmd->add_option("--c", dsep_c, "Comma-separated node set");

  RandomNetSpec rspec;
  auto* gen_random_cmd = app.add_subcommand("gen-random", "Emit a seeded random network");
  gen_random_cmd->add_option("--seed", rspec.seed, "RNG seed");
  gen_random_cmd->add_option("--nodes", rspec.node_count, "Node count (1-12)");
  gen_random_cmd->add_option("--max-parents", rspec.max_parents, "Parents per node (0-3)");
  gen_random_cmd->add_option("--states", rspec.state_count, "Maximum states per node (2-3)");
  gen_random_cmd->add_option("--floor", rspec.cpt_floor, "Minimum CPT entry");

  HmmParams hp;
  int hmm_depth = 3;
  auto* gen_hmm_cmd = app.add_subcommand("gen-hmm", "Emit a finite fragment of the HMM");
  gen_hmm_cmd->add_option("--stay", hp.transition_stay, "Stay probability");
  gen_hmm_cmd->add_option("--emit", hp.emission_true, "Emission accuracy");
  gen_hmm_cmd->add_option("--window", hp.window, "Observation window");
  gen_hmm_cmd->add_option("--y-offset", hp.y_pl_offset, "Observation PL offset");
  gen_hmm_cmd->add_option("--depth", hmm_depth, "Retrieve down to threshold -depth");

  std::vector<std::string> argv_store{"plif"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(validate_path, out, err);
    if (*query_cmd) return cmd_query(qa, out);
    if (*sweep_cmd) {
      if (!sa.hmm && sa.net.empty()) {
        err << "error: sweep needs --net or --hmm\n";
        return kUsage;
      }
      return cmd_sweep(sa, out);
    }
    if (*dsep_cmd) return cmd_dsep(dsep_net, dsep_a, dsep_b, dsep_c, out);
    if (*gen_random_cmd) {
      out << serialize(random_network(rspec)) << "\n";
      return kOk;
    }
    if (*gen_hmm_cmd) {
      if (hmm_depth < 1) throw Error(ErrorCode::InvalidArgument, "--depth must be at least 1");
      LazyNetwork model = hmm_model(hp);
      Query q = hmm_query(hp);
      std::set<std::string> seeds;
      for (const auto& [n, _] : q.objective) seeds.insert(n);
      for (const auto& [n, _] : q.evidence) seeds.insert(n);
      out << serialize(materialize(model, seeds, -static_cast<double>(hmm_depth))) << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kUsage;
}

}  // namespace plif::cli
