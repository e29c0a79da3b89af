#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "quadnet/cli.hpp"
#include "quadnet/errors.hpp"

using namespace quadnet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("quadnet-cli-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "quadnet");
  return run_cli(args);
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

std::vector<std::string> barron_args(const fs::path& out) {
  return {"barron-rate", "--d", "3", "--m", "4,8,16", "--trials", "3", "--n-mc", "300", "--out", out.string()};
}

}  // namespace

TEST(Config, Grammar) {
  const auto m = parse_config("# header\n\nseed = 7  # trailing\n  eps=0.05\nname = a b\n");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.at("seed"), "7");
  EXPECT_EQ(m.at("eps"), "0.05");
  EXPECT_EQ(m.at("name"), "a b");
  EXPECT_THROW(parse_config("seed = 1\nseed = 2\n"), ValidationError);
  EXPECT_THROW(parse_config("no equals sign\n"), ValidationError);
  EXPECT_THROW(parse_config("Bad-Key = 1\n"), ValidationError);
}

TEST(Manifest, GitBlobHash) {
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"construct", "--no-such-flag", "1"}), 1);
  const fs::path dir = scratch("bad-config");
  std::ofstream(dir / "c.cfg") << "unknown_key = 1\n";
  EXPECT_EQ(run({"construct", "--config", (dir / "c.cfg").string(), "--out", dir.string()}), 1);
  EXPECT_EQ(run({"construct", "--eps", "2", "--out", dir.string()}), 1);
}

TEST(Cli, ConstructWritesReportAndManifest) {
  const fs::path dir = scratch("construct");
  ASSERT_EQ(run({"construct", "--n", "2", "--d", "1", "--eps", "0.05", "--out", dir.string()}), 0);
  const std::string csv = slurp(dir / "construct.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,d,eps,N,param_used,param_bound,sup_error");
  EXPECT_TRUE(fs::exists(dir / "network.json"));
  const nlohmann::json m = manifest(dir);
  EXPECT_EQ(m["tool"], "quadnet");
  EXPECT_EQ(m["version"], kToolkitVersion);
  EXPECT_EQ(m["status"], 0);
  EXPECT_EQ(m["outputs"]["construct.csv"], git_blob_sha1(csv));
}

TEST(Cli, IdenticalRunsAreByteIdentical) {
  const fs::path a = scratch("same-a");
  const fs::path b = scratch("same-b");
  auto args_a = barron_args(a);
  auto args_b = barron_args(b);
  args_a.insert(args_a.end(), {"--seed", "11"});
  args_b.insert(args_b.end(), {"--seed", "11"});
  ASSERT_EQ(run(args_a), 0);
  ASSERT_EQ(run(args_b), 0);
  EXPECT_EQ(slurp(a / "barron_rate.csv"), slurp(b / "barron_rate.csv"));
  EXPECT_EQ(manifest(a)["outputs_hash"], manifest(b)["outputs_hash"]);

  const fs::path c = scratch("same-c");
  auto args_c = barron_args(c);
  args_c.insert(args_c.end(), {"--seed", "12"});
  ASSERT_EQ(run(args_c), 0);
  EXPECT_NE(slurp(a / "barron_rate.csv"), slurp(c / "barron_rate.csv"));
}

TEST(Cli, SeedFallsBackToEnvironment) {
  const fs::path a = scratch("env-a");
  ::setenv("QUADNET_SEED", "11", 1);
  ASSERT_EQ(run(barron_args(a)), 0);
  ::unsetenv("QUADNET_SEED");
  EXPECT_EQ(manifest(a)["config"]["seed"], "11");

  const fs::path b = scratch("env-b");
  auto args = barron_args(b);
  args.insert(args.end(), {"--seed", "11"});
  ASSERT_EQ(run(args), 0);
  EXPECT_EQ(slurp(a / "barron_rate.csv"), slurp(b / "barron_rate.csv"));

  const fs::path z = scratch("env-z");
  ASSERT_EQ(run(barron_args(z)), 0);
  EXPECT_EQ(manifest(z)["config"]["seed"], "0");
}

TEST(Cli, FlagsOverrideConfig) {
  const fs::path dir = scratch("precedence");
  std::ofstream(dir / "c.cfg") << "eps = 0.1\nn = 2\n";
  ASSERT_EQ(run({"construct", "--config", (dir / "c.cfg").string(), "--eps", "0.05", "--out", dir.string()}), 0);
  const nlohmann::json m = manifest(dir);
  EXPECT_EQ(m["config"]["eps"], "0.05");
  EXPECT_EQ(m["config"]["n"], "2");
}
