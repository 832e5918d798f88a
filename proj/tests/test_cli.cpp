#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "oracles.hpp"
#include "plif/gen.hpp"

using namespace plif;
using namespace plif::testing;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("plif_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    auto path = dir_ / name;
    std::ofstream(path) << text;
    return path.string();
  }

  std::filesystem::path dir_;
};

std::string reversed_doc() {
  return R"({"t0": 0, "nodes": [
    {"name":"c","states":["0","1"],"pl":2,"parents":[],"cpt":[[0.7,0.3]]},
    {"name":"e","states":["0","1"],"pl":1,"parents":["c"],"cpt":[[0.9,0.1],[0.2,0.8]]}]})";
}

}  // namespace

TEST_F(CliTest, ValidateExitCodes) {
  Outcome ok = invoke({"validate", write("chain.json", chain_doc())});
  EXPECT_EQ(ok.code, cli::kOk);
  EXPECT_EQ(ok.out, "OK: 4 nodes\n");

  Outcome bad = invoke({"validate", write("bad.json", reversed_doc())});
  EXPECT_EQ(bad.code, cli::kInvalid);
  EXPECT_NE(bad.out.find("temporal precedence"), std::string::npos);

  Outcome syntax = invoke({"validate", write("syntax.json", "{\"t0\": ")});
  EXPECT_EQ(syntax.code, cli::kUsage);
  EXPECT_EQ(invoke({"validate", (dir_ / "missing.json").string()}).code, cli::kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsage);
}

TEST_F(CliTest, QueryExact) {
  const std::string net = write("two.json", two_node_doc());
  Outcome r = invoke({"query", "--net", net, "--target", "e=1", "--exact"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, "exact: 0.310000000\n");
}

TEST_F(CliTest, QueryBoundsFormats) {
  const std::string net = write("chain.json", chain_doc());
  Outcome human = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1"});
  EXPECT_EQ(human.code, cli::kOk);
  EXPECT_EQ(human.out,
            "threshold: 4\nlower: 0.400000000\nupper: 0.850000000\nexactness: NotExact\n"
            "frontier_size: 1\ninterior_size: 1\n");

  Outcome csv = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1", "--threshold", "4",
                 "--format", "csv"});
  EXPECT_EQ(csv.out,
            "threshold,lower,upper,exactness,frontier_size,interior_size\n"
            "4,0.400000000,0.850000000,NotExact,1,1\n");

  Outcome json = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1", "--origin",
                  "--format", "json"});
  EXPECT_EQ(json.code, cli::kOk);
  EXPECT_NE(json.out.find("\"threshold\":\"-inf\""), std::string::npos);
  EXPECT_NE(json.out.find("ExactByFullPast"), std::string::npos);
}

TEST_F(CliTest, QueryAtPlOfMarksFrontierEvidence) {
  const std::string net = write("chain.json", chain_doc());
  Outcome r = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1", "--at-pl-of", "t2"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("exactness: ExactByFrontierSubsetOfEvidence"), std::string::npos);
  Outcome exact = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1", "--exact"});
  const std::string value = exact.out.substr(exact.out.find(' ') + 1);
  EXPECT_NE(r.out.find("lower: " + value), std::string::npos);
}

TEST_F(CliTest, QueryErrors) {
  const std::string net = write("chain.json", chain_doc());
  EXPECT_EQ(invoke({"query", "--net", net, "--target", "x=1", "--threshold", "4.5"}).code,
            cli::kAboveCpl);
  EXPECT_EQ(invoke({"query", "--net", net, "--target", "q=1"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"query", "--net", net, "--target", "x=7"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"query", "--net", net, "--target", "x1"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"query", "--net", net, "--target", "x=1", "--origin", "--exact"}).code,
            cli::kUsage);
  EXPECT_EQ(invoke({"query", "--net", write("bad.json", reversed_doc()), "--target", "e=1"}).code,
            cli::kInvalid);
  const std::string zero = write("zero.json", R"({"t0": 0, "nodes": [
    {"name":"c","states":["0","1"],"pl":0,"parents":[],"cpt":[[1,0]]},
    {"name":"e","states":["0","1"],"pl":1,"parents":["c"],"cpt":[[0.5,0.5],[0.5,0.5]]}]})");
  EXPECT_EQ(invoke({"query", "--net", zero, "--target", "e=1", "--obs", "c=1", "--exact"}).code,
            cli::kZeroEvidence);
}

TEST_F(CliTest, FrontierCapFromEnvironment) {
  const std::string net = write("chain.json", chain_doc());
  ::setenv("PLIF_MAX_FRONTIER", "1", 1);
  Outcome capped = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1"});
  ::setenv("PLIF_MAX_FRONTIER", "abc", 1);
  Outcome garbage = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1"});
  ::unsetenv("PLIF_MAX_FRONTIER");
  EXPECT_EQ(capped.code, cli::kEngine);
  EXPECT_EQ(garbage.code, cli::kUsage);
  EXPECT_EQ(invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1"}).code, cli::kOk);
}

TEST_F(CliTest, DumpSubmodel) {
  const std::string net = write("chain.json", chain_doc());
  const std::string dump = (dir_ / "sub.json").string();
  Outcome r = invoke({"query", "--net", net, "--target", "x=1", "--obs", "y=1", "--threshold", "3",
               "--dump-submodel", dump});
  EXPECT_EQ(r.code, cli::kOk);
  std::ifstream in(dump);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str().substr(0, text.str().find('\n')),
            serialize_root_set(root_set(load_network(chain_doc()), Query{{{"x", "1"}}, {{"y", "1"}}},
                                        Threshold{3.0})));
}

TEST_F(CliTest, HmmSweepMatchesLibrary) {
  Outcome r = invoke({"sweep", "--hmm", "--depth", "10", "--window", "10", "--csv"});
  EXPECT_EQ(r.code, cli::kOk);
  std::ostringstream expected;
  write_sweep_csv(expected, hmm_sweep_experiment(HmmParams{}, 10));
  EXPECT_EQ(r.out, expected.str());

  Outcome one = invoke({"sweep", "--hmm", "--depth", "1", "--csv"});
  EXPECT_EQ(one.out,
            "threshold,lower,upper,frontier_size,interior_size\n-1,0.100000000,0.900000000,1,1\n");

  Outcome human = invoke({"sweep", "--hmm", "--depth", "3"});
  EXPECT_NE(human.out.find("0.643396226"), std::string::npos);
  EXPECT_EQ(invoke({"sweep", "--hmm", "--depth", "3"}).out, human.out);
}

TEST_F(CliTest, SweepOverNetwork) {
  const std::string net = write("chain.json", chain_doc());
  Outcome r = invoke({"sweep", "--net", net, "--target", "x=1", "--obs", "y=1", "--csv"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out,
            "threshold,lower,upper,frontier_size,interior_size\n"
            "4,0.400000000,0.850000000,1,1\n"
            "3,0.490000000,0.692500000,1,2\n"
            "2,0.641875000,0.641875000,1,3\n");
  Outcome full = invoke({"sweep", "--net", net, "--target", "x=1", "--obs", "y=1", "--csv",
                  "--full-sweep"});
  EXPECT_NE(full.out.find("-inf,0.641875000,0.641875000,0,4"), std::string::npos);
  Outcome explicit_list = invoke({"sweep", "--net", net, "--target", "x=1", "--obs", "y=1", "--csv",
                           "--thresholds", "4,2"});
  EXPECT_EQ(explicit_list.out,
            "threshold,lower,upper,frontier_size,interior_size\n"
            "4,0.400000000,0.850000000,1,1\n"
            "2,0.641875000,0.641875000,1,3\n");
  EXPECT_EQ(invoke({"sweep", "--net", net, "--target", "x=1", "--thresholds", "2,4"}).code,
            cli::kUsage);
}

TEST_F(CliTest, Dsep) {
  const std::string chain = write("chain.json", chain_doc());
  Outcome sep = invoke({"dsep", "--net", chain, "--a", "x", "--b", "y", "--c", "t1"});
  EXPECT_EQ(sep.code, cli::kOk);
  EXPECT_EQ(sep.out, "true\n");
  const std::string collider = write("collider.json", collider_doc());
  Outcome open = invoke({"dsep", "--net", collider, "--a", "a", "--b", "b", "--c", "c"});
  EXPECT_EQ(open.code, cli::kNotSeparated);
  EXPECT_EQ(open.out, "false\n");
  EXPECT_EQ(invoke({"dsep", "--net", chain, "--a", "x", "--b", "y", "--c", "x"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"dsep", "--net", chain, "--a", "x", "--b", "zz"}).code, cli::kUsage);
}

TEST_F(CliTest, Generators) {
  Outcome r = invoke({"gen-random", "--seed", "9", "--nodes", "7"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, serialize(random_network({9, 7, 3, 2, 0.05})) + "\n");
  EXPECT_EQ(invoke({"gen-random", "--nodes", "40"}).code, cli::kUsage);

  Outcome h = invoke({"gen-hmm", "--depth", "3", "--window", "3"});
  EXPECT_EQ(h.code, cli::kOk);
  Network frag = load_network(h.out);
  EXPECT_TRUE(frag.open_past());
  EXPECT_TRUE(frag.contains("x_t+1"));
  EXPECT_TRUE(frag.contains("x_t-2"));
  EXPECT_FALSE(frag.contains("x_t-3"));
}
