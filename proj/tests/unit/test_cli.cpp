#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("act_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(ACT_CLI_PATH) + " " + args + " >" + (work() / "stdout.txt").string() +
                          " 2>" + (work() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string panel_args(const fs::path& synth) {
  return " --features " + (synth / "features.csv").string() + " --prices " + (synth / "prices.csv").string();
}

std::string graph_args(const fs::path& synth) {
  return panel_args(synth) + " --industry " + (synth / "industry.csv").string() + " --region " +
         (synth / "region.csv").string();
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("--out " + work().string()), 2);  // no subcommand
  EXPECT_EQ(run("--out " + work().string() + " frobnicate"), 2);
  EXPECT_EQ(run("--out " + (work() / "s").string() + " --set nonsense_key=1 synth"), 2);
  EXPECT_EQ(run("--out " + (work() / "s").string() + " --set days=12 synth"), 2);  // fails precondition
}

TEST(Cli, DataErrorsExitThree) {
  const fs::path missing = work() / "absent.csv";
  EXPECT_EQ(run("--out " + (work() / "e").string() + " evaluate --features " + missing.string() + " --prices " +
                missing.string() + " --preds " + missing.string()),
            3);
}

TEST(Cli, PipelineWritesArtifactsAndManifest) {
  const fs::path synth = work() / "synth";
  ASSERT_EQ(run("--seed 4 --out " + synth.string() + " --set days=130 --set num_instruments=10 --set lookback=16 synth"),
            0);
  for (const char* f : {"features.csv", "prices.csv", "industry.csv", "region.csv", "factors.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(synth / f)) << f;

  const fs::path train = work() / "train";
  ASSERT_EQ(run("--seed 1 --out " + train.string() + " train" + graph_args(synth) +
                " --d 4 --T 16 --k 3 --epochs 2"),
            0)
      << slurp(work() / "stderr.txt");
  EXPECT_TRUE(fs::exists(train / "model.ckpt"));
  EXPECT_TRUE(fs::exists(train / "history.csv"));

  const auto manifest = nlohmann::json::parse(slurp(train / "manifest.json"));
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["seed"], 1);
  EXPECT_EQ(manifest["config"]["d"], "4");
  ASSERT_TRUE(manifest["artifacts"].is_object() || manifest["artifacts"].is_array());

  const fs::path pred = work() / "pred";
  ASSERT_EQ(run("--out " + pred.string() + " predict" + graph_args(synth) + " --model " +
                (train / "model.ckpt").string()),
            0)
      << slurp(work() / "stderr.txt");
  const fs::path eval = work() / "eval";
  ASSERT_EQ(run("--out " + eval.string() + " evaluate" + panel_args(synth) + " --preds " +
                (pred / "predictions.csv").string() + " --group-by region --membership " +
                (synth / "region.csv").string()),
            0)
      << slurp(work() / "stderr.txt");
  EXPECT_TRUE(fs::exists(eval / "metrics.csv"));
  EXPECT_TRUE(fs::exists(eval / "daily_ic.svg"));
  EXPECT_TRUE(fs::exists(eval / "subgroups_region.csv"));

  const fs::path bt = work() / "bt";
  ASSERT_EQ(run("--out " + bt.string() + " backtest" + panel_args(synth) + " --preds " +
                (pred / "predictions.csv").string() + " --k 3 --n-drop 1"),
            0)
      << slurp(work() / "stderr.txt");
  EXPECT_EQ(slurp(bt / "backtest.csv").rfind("datetime,portfolio_ret,benchmark_ret,excess_ret,cum_excess\n", 0), 0u);
  EXPECT_TRUE(fs::exists(bt / "cumulative_excess.svg"));

  const fs::path reg = work() / "reg";
  ASSERT_EQ(run("--out " + reg.string() + " regress --backtest " + (bt / "backtest.csv").string() + " --factors " +
                (synth / "factors.csv").string() + " --lags 3"),
            0)
      << slurp(work() / "stderr.txt");
  const std::string csv = slurp(reg / "regression.csv");
  EXPECT_NE(csv.find("\nFF3,"), std::string::npos);
  EXPECT_NE(csv.find("\nFF5,"), std::string::npos);
}

TEST(Cli, AblationFlagReachesConfig) {
  const fs::path synth = work() / "synth_ab";
  ASSERT_EQ(run("--out " + synth.string() + " --set days=120 --set num_instruments=8 --set lookback=16 synth"), 0);
  const fs::path train = work() / "train_ab";
  ASSERT_EQ(run("--out " + train.string() + " train" + graph_args(synth) +
                " --d 4 --T 16 --k 3 --epochs 1 --ablation wo_pspe"),
            0)
      << slurp(work() / "stderr.txt");
  const auto manifest = nlohmann::json::parse(slurp(train / "manifest.json"));
  EXPECT_EQ(manifest["config"]["pspe"], "gat_only");
  EXPECT_EQ(run("--out " + train.string() + " train" + graph_args(synth) + " --ablation wo_magic"), 2);
}
