#include <algorithm>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oracles.hpp"
#include "plif/gen.hpp"
#include "plif/infer.hpp"
#include "plif/retrieval.hpp"

using namespace plif;
using namespace plif::testing;

namespace {

Query chain_query() { return Query{{{"x", "1"}}, {{"y", "1"}}}; }

bool subset(const NodeSet& a, const NodeSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Random disjoint (A, B, C) triple over the network's nodes.
void draw_triple(const Network& net, std::mt19937_64& rng, NodeSet& a, NodeSet& b, NodeSet& c) {
  a.clear();
  b.clear();
  c.clear();
  std::vector<std::string> names;
  for (const auto& n : net.nodes()) names.push_back(n.name);
  std::shuffle(names.begin(), names.end(), rng);
  std::uniform_int_distribution<int> pick(0, 99);
  a.insert(names[0]);
  b.insert(names[1]);
  for (std::size_t i = 2; i < names.size(); ++i) {
    int r = pick(rng);
    if (r < 35) c.insert(names[i]);
  }
}

}  // namespace

TEST(Ancestors, ChainBacktrack) {
  Network chain = load_network(chain_doc());
  EXPECT_EQ(ancestors(chain, {"x"}), (NodeSet{"t1", "t2", "y"}));
  EXPECT_TRUE(ancestors(chain, {"y"}).empty());
  EXPECT_EQ(ancestors(chain, {"x", "t1"}), (NodeSet{"t1", "t2", "y"}));
  EXPECT_THROW(ancestors(chain, {"nope"}), Error);
}

TEST(Ancestors, MatchesTransitiveClosureOnRandomDags) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Network net = random_network({seed, 10, 3, 2, 0.05});
    for (const auto& node : net.nodes()) {
      EXPECT_EQ(ancestors(net, {node.name}), closure_ancestors(net, {node.name}))
          << "seed " << seed << " node " << node.name;
    }
    EXPECT_EQ(ancestors(net, {"n9", "n4"}), closure_ancestors(net, {"n9", "n4"}));
  }
}

TEST(DSeparation, ChainAndCollider) {
  Network chain = load_network(chain_doc());
  EXPECT_TRUE(d_separated(chain, {"x"}, {"y"}, {"t1"}));
  EXPECT_TRUE(d_separated(chain, {"x"}, {"y"}, {"t2"}));
  EXPECT_FALSE(d_separated(chain, {"x"}, {"y"}, {}));

  Network collider = load_network(collider_doc());
  EXPECT_TRUE(d_separated(collider, {"a"}, {"b"}, {}));
  EXPECT_FALSE(d_separated(collider, {"a"}, {"b"}, {"c"}));
}

TEST(DSeparation, ColliderOpenedByDescendant) {
  const std::string doc = R"({"t0": 0, "nodes": [
    {"name":"a","states":["0","1"],"pl":0,"parents":[],"cpt":[[0.5,0.5]]},
    {"name":"b","states":["0","1"],"pl":0,"parents":[],"cpt":[[0.5,0.5]]},
    {"name":"c","states":["0","1"],"pl":1,"parents":["a","b"],"cpt":[[0.9,0.1],[0.5,0.5],[0.5,0.5],[0.1,0.9]]},
    {"name":"d","states":["0","1"],"pl":2,"parents":["c"],"cpt":[[0.8,0.2],[0.3,0.7]]}]})";
  Network net = load_network(doc);
  EXPECT_TRUE(d_separated(net, {"a"}, {"b"}, {}));
  EXPECT_FALSE(d_separated(net, {"a"}, {"b"}, {"d"}));
}

TEST(DSeparation, RejectsOverlapAndUnknownNames) {
  Network chain = load_network(chain_doc());
  try {
    d_separated(chain, {"x"}, {"y"}, {"x"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
  try {
    d_separated(chain, {"x"}, {"q"}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownNode);
  }
}

TEST(DSeparation, ImpliesNumericIndependence) {
  std::mt19937_64 rng(12345);
  int separated = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Network net = random_network({seed + 500, 8, 3, 2, 0.05});
    for (int trial = 0; trial < 6; ++trial) {
      NodeSet a, b, c;
      draw_triple(net, rng, a, b, c);
      if (!d_separated(net, a, b, c)) continue;
      ++separated;
      EXPECT_LT(max_dependence(net, a, b, c), 1e-9) << "seed " << seed;
    }
  }
  EXPECT_GT(separated, 20);
}

// --- root sets --------------------------------------------------------------

TEST(RootSet, ChainAtPlOfTarget) {
  Network chain = load_network(chain_doc());
  RootSetResult rs = root_set(chain, chain_query(), Threshold{chain.at("x").pl});
  EXPECT_EQ(rs.frontier, NodeSet{"t1"});
  EXPECT_EQ(rs.interior, NodeSet{"x"});
  EXPECT_EQ(rs.evidence_minus, NodeSet{"y"});
  EXPECT_TRUE(rs.evidence_plus.empty());
  EXPECT_TRUE(rs.evidence_in_frontier.empty());
  EXPECT_EQ(rs.submodel.interior.size(), 1u);
  EXPECT_EQ(rs.submodel.frontier.at("t1").states, (std::vector<std::string>{"0", "1"}));
}

TEST(RootSet, ChainAtPlOfT2) {
  Network chain = load_network(chain_doc());
  RootSetResult rs = root_set(chain, chain_query(), Threshold{chain.at("t2").pl});
  EXPECT_EQ(rs.frontier, NodeSet{"y"});
  EXPECT_EQ(rs.evidence_in_frontier, NodeSet{"y"});
  EXPECT_TRUE(rs.evidence_plus.empty());
  EXPECT_TRUE(rs.evidence_minus.empty());
  EXPECT_EQ(rs.interior, (NodeSet{"t1", "t2", "x"}));
}

TEST(RootSet, TwoNodeSingleStep) {
  Network net = load_network(two_node_doc());
  Query q{{{"e", "1"}}, {{"c", "1"}}};
  RootSetResult rs = root_set(net, q, Threshold{net.at("e").pl});
  EXPECT_EQ(rs.frontier, NodeSet{"c"});
  EXPECT_TRUE(subset(rs.frontier, NodeSet{"c"}));
  EXPECT_EQ(rs.evidence_in_frontier, NodeSet{"c"});
}

TEST(RootSet, OriginRetrievesAllAncestors) {
  Network chain = load_network(chain_doc());
  RootSetResult rs = root_set(chain, chain_query(), Threshold::origin());
  EXPECT_TRUE(rs.frontier.empty());
  EXPECT_EQ(rs.interior, (NodeSet{"t1", "t2", "x", "y"}));
  EXPECT_EQ(rs.evidence_plus, NodeSet{"y"});
}

TEST(RootSet, ParentlessStartNodeAddsNoFrontier) {
  Network chain = load_network(chain_doc());
  RootSetResult rs = root_set(chain, Query{{{"y", "0"}}, {}}, Threshold{1.0});
  EXPECT_TRUE(rs.frontier.empty());
  EXPECT_EQ(rs.interior, NodeSet{"y"});
}

TEST(RootSet, Errors) {
  Network chain = load_network(chain_doc());
  try {
    root_set(chain, chain_query(), Threshold{10.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoStartNodes);
  }
  Retrieval r(chain, chain_query());
  r.advance(Threshold{3.0});
  EXPECT_THROW(r.advance(Threshold{4.0}), Error);
  EXPECT_THROW(Retrieval(chain, Query{{{"x", "7"}}, {}}), Error);
}

TEST(RootSet, LazyHmmExpansionCap) {
  LazyNetwork hmm = hmm_model({});
  try {
    root_set(hmm, hmm_query({}), Threshold::origin(), RetrievalOptions{500});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExpansionCap);
  }
}

TEST(RootSet, LazyHmmFrontierIsSingleChainNode) {
  HmmParams p;
  LazyNetwork hmm = hmm_model(p);
  for (int d = 1; d <= 10; ++d) {
    RootSetResult rs = root_set(hmm, hmm_query(p), Threshold{-static_cast<double>(d)});
    EXPECT_EQ(rs.frontier, NodeSet{hmm_x(1 - d)}) << d;
    // d hidden nodes above the threshold plus the observations among them.
    EXPECT_EQ(rs.interior.size(), static_cast<std::size_t>(d + (d - 1))) << d;
    EXPECT_EQ(rs.evidence_plus.size(), static_cast<std::size_t>(d - 1));
    EXPECT_EQ(rs.evidence_minus.size(), static_cast<std::size_t>(p.window - (d - 1)));
  }
}

TEST(RootSet, PropertiesOnRandomNetworks) {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    Network net = random_network({seed, 2 + static_cast<int>(seed % 11), 3, 3, 0.05});
    Query q = random_query(net, seed * 31 + 7);
    Schedule sched = default_schedule(net, q);
    Retrieval incremental(net, q);
    NodeSet prev_interior, prev_nodes;
    NodeSet evidence;
    for (const auto& [n, _] : q.evidence) evidence.insert(n);

    for (const Threshold& th : sched.thresholds) {
      RootSetResult rs = root_set(net, q, th);
      for (const auto& f : rs.frontier) EXPECT_LT(net.at(f).pl, th.v);
      for (const auto& i : rs.interior) {
        EXPECT_TRUE(th.admits(net.at(i).pl));
        EXPECT_EQ(rs.frontier.count(i), 0u);
        for (const auto& p : net.at(i).parents) {
          EXPECT_TRUE(rs.interior.count(p) + rs.frontier.count(p) == 1);
        }
      }
      // Partition of the evidence.
      NodeSet all = rs.evidence_plus;
      all.insert(rs.evidence_in_frontier.begin(), rs.evidence_in_frontier.end());
      all.insert(rs.evidence_minus.begin(), rs.evidence_minus.end());
      EXPECT_EQ(all, evidence);
      EXPECT_EQ(rs.evidence_plus.size() + rs.evidence_in_frontier.size() +
                    rs.evidence_minus.size(),
                evidence.size());

      // Screening off of the evidence left below the threshold.
      NodeSet objective;
      for (const auto& [n, _] : q.objective) objective.insert(n);
      NodeSet given = rs.frontier;
      given.insert(rs.evidence_plus.begin(), rs.evidence_plus.end());
      if (!rs.evidence_minus.empty()) {
        EXPECT_TRUE(d_separated(net, objective, rs.evidence_minus, given)) << "seed " << seed;
      }

      // Nesting across thresholds.
      EXPECT_TRUE(subset(prev_interior, rs.interior));
      NodeSet nodes = rs.interior;
      nodes.insert(rs.frontier.begin(), rs.frontier.end());
      EXPECT_TRUE(subset(prev_interior, nodes));
      prev_interior = rs.interior;
      prev_nodes = nodes;

      // Incremental retrieval lands on the same submodel; fresh runs repeat.
      const RootSetResult& inc = incremental.advance(th);
      EXPECT_EQ(inc.submodel, rs.submodel);
      EXPECT_EQ(inc.frontier, rs.frontier);
      EXPECT_EQ(root_set(net, q, th).submodel, rs.submodel);
    }
  }
}

TEST(RootSet, SubmodelSerializesWithFrontierList) {
  Network chain = load_network(chain_doc());
  RootSetResult rs = root_set(chain, chain_query(), Threshold{3.0});
  auto doc = nlohmann::json::parse(serialize_root_set(rs));
  ASSERT_EQ(doc["nodes"].size(), 2u);
  EXPECT_EQ(doc["nodes"][0]["name"], "t1");
  ASSERT_EQ(doc["frontier"].size(), 1u);
  EXPECT_EQ(doc["frontier"][0]["name"], "t2");
  EXPECT_TRUE(doc["open_past"].get<bool>());
  EXPECT_DOUBLE_EQ(doc["threshold"].get<double>(), 3.0);
}
