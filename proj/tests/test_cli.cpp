#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "cropyield/commands.hpp"
#include "cropyield/ingest.hpp"
#include "support.hpp"

using namespace cropyield;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

RunConfig small_run(const fs::path& out) {
  RunConfig c;
  c.paths.out = out;
  c.seed = 3;
  c.train_first_year = 2016;
  c.train_last_year = 2017;
  c.synth.years = {{2016, 40, 9.9, 1.4}, {2017, 45, 10.2, 1.8}, {2018, 30, 9.4, 1.75}};
  c.synth.zone_pool = 60;
  for (auto& [kind, p] : c.model_params) {
    p.n_estimators = std::min(p.n_estimators, 20);
    p.svr.iterations = 300;
  }
  return c;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CROPYIELD_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Pipeline, SynthIngestFeaturesEvaluateCompare) {
  const auto dir = testsupport::scratch_dir("pipeline");
  const RunConfig cfg = small_run(dir);
  std::vector<std::string> messages;
  LogSink log = [&](std::string_view s) { messages.emplace_back(s); };

  cmd_synth(cfg, log);
  for (const char* f : {"soil.csv", "weather.csv", "crop.csv"}) EXPECT_TRUE(fs::exists(dir / "data" / f)) << f;
  EXPECT_EQ(line_count(dir / "data" / "crop.csv"), 116u);

  cmd_ingest(cfg, log);
  EXPECT_EQ(line_count(dir / "rejections.csv"), 1u);  // header only
  EXPECT_EQ(slurp(dir / "clean" / "crop.csv"), slurp(dir / "data" / "crop.csv"));

  cmd_features(cfg, log);
  const std::string header = slurp(dir / "features_soil_weather.csv").substr(0, 200);
  EXPECT_EQ(header.rfind("zone_id,year,p,k,mg,ph,soil_type,stone_content,organic_matter,caco3,w17_t_avg,", 0), 0u);
  EXPECT_EQ(line_count(dir / "features_soil_weather.csv"), 116u);
  EXPECT_EQ(line_count(dir / "features_soil.csv"), 116u);

  const Report report = cmd_evaluate(cfg, log);
  EXPECT_EQ(report.models.size(), 6u);
  EXPECT_EQ(report.n_test, 30u);
  EXPECT_EQ(report.n_train, 85u);
  EXPECT_EQ(line_count(dir / "report.csv"), 7u);
  EXPECT_TRUE(fs::exists(dir / "mae_chart.svg"));
  for (const auto& m : report.models) {
    ASSERT_TRUE(m.mae_soil && m.mae_sw && m.paired);
    EXPECT_EQ(m.abs_err_soil.size(), 30u);
  }

  cmd_compare(cfg, log);
  const std::string cmp = slurp(dir / "comparison.txt");
  EXPECT_NE(cmp.find("Random Forest"), std::string::npos);
  const std::string txt = slurp(dir / "report.txt");
  EXPECT_NE(txt.find("== Paired comparison =="), std::string::npos);
  // Running compare again replaces the section instead of appending.
  cmd_compare(cfg, log);
  EXPECT_EQ(slurp(dir / "report.txt"), txt);
  EXPECT_FALSE(messages.empty());
}

TEST(Pipeline, EvaluateIsByteIdenticalAcrossRunsAndThreads) {
  const auto a = testsupport::scratch_dir("det_a");
  const auto b = testsupport::scratch_dir("det_b");
  RunConfig ca = small_run(a), cb = small_run(b);
  ca.threads = 1;
  cb.threads = 4;
  cmd_synth(ca);
  cmd_synth(cb);
  EXPECT_EQ(slurp(a / "data" / "weather.csv"), slurp(b / "data" / "weather.csv"));
  cmd_evaluate(ca);
  cmd_evaluate(cb);
  EXPECT_EQ(slurp(a / "report.csv"), slurp(b / "report.csv"));
  EXPECT_EQ(slurp(a / "report.txt"), slurp(b / "report.txt"));
  cmd_evaluate(ca);
  EXPECT_EQ(slurp(a / "report.csv"), slurp(b / "report.csv"));
}

TEST(Pipeline, SingleModeRunsLeaveOtherColumnsEmpty) {
  const auto dir = testsupport::scratch_dir("single_mode");
  RunConfig cfg = small_run(dir);
  cfg.mode = ModeSelection::soil;
  cfg.models = {learn::ModelKind::decision_tree, learn::ModelKind::random_forest};
  cmd_synth(cfg);
  const Report r = cmd_evaluate(cfg);
  ASSERT_EQ(r.models.size(), 2u);
  EXPECT_TRUE(r.models[0].mae_soil.has_value());
  EXPECT_FALSE(r.models[0].mae_sw.has_value());
  EXPECT_FALSE(r.models[0].paired.has_value());
  std::ifstream in(dir / "report.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("decision_tree,", 0), 0u);
  EXPECT_NE(line.find(",,"), std::string::npos);
  // Without both modes the comparison has nothing to test.
  cmd_compare(cfg);
  const std::string cmp = slurp(dir / "comparison.txt");
  const auto row = cmp.substr(cmp.find("Decision Tree"));
  EXPECT_EQ(row.substr(0, row.find('\n')).back(), '-') << cmp;
}

TEST(Pipeline, MissingInputsAreReported) {
  const auto dir = testsupport::scratch_dir("missing");
  RunConfig cfg = small_run(dir);
  try {
    cmd_ingest(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("soil.csv"), std::string::npos);
  }
  EXPECT_THROW(cmd_compare(cfg), Error);
}

TEST(Binary, HelpListsGlobalFlagsForEverySubcommand) {
  const auto dir = testsupport::scratch_dir("help");
  for (const char* sub : {"synth", "ingest", "features", "evaluate", "compare"}) {
    ASSERT_EQ(run_cli(std::string(sub) + " --help", dir / "help.txt"), 0) << sub;
    const std::string text = slurp(dir / "help.txt");
    for (const char* flag : {"--config", "--seed", "--out", "--mode", "--test-year", "--threads"})
      EXPECT_NE(text.find(flag), std::string::npos) << sub << " " << flag;
  }
}

TEST(Binary, ConfigFileDrivesARunAndErrorsExitNonZero) {
  const auto dir = testsupport::scratch_dir("binary");
  RunConfig cfg = small_run(dir / "out");
  cfg.models = {learn::ModelKind::gradient_boosting};
  {
    std::ofstream f(dir / "run.ini");
    f << dump_config(cfg);
  }
  const std::string conf = "--config " + (dir / "run.ini").string();
  ASSERT_EQ(run_cli("synth " + conf, dir / "log.txt"), 0) << slurp(dir / "log.txt");
  ASSERT_EQ(run_cli("evaluate " + conf + " --threads 2", dir / "log.txt"), 0) << slurp(dir / "log.txt");
  EXPECT_EQ(line_count(dir / "out" / "report.csv"), 2u);
  ASSERT_EQ(run_cli("compare " + conf, dir / "log.txt"), 0) << slurp(dir / "log.txt");

  {
    std::ofstream f(dir / "bad.ini");
    f << "[run]\nsed = 1\n";
  }
  EXPECT_EQ(run_cli("evaluate --config " + (dir / "bad.ini").string(), dir / "log.txt"), 1);
  EXPECT_NE(slurp(dir / "log.txt").find("cropyield: error:"), std::string::npos);
  EXPECT_NE(run_cli("evaluate --mode weather", dir / "log.txt"), 0);
  EXPECT_NE(run_cli("", dir / "log.txt"), 0);
  ASSERT_EQ(run_cli("config", dir / "dump.ini"), 0);
  std::ifstream in(dir / "dump.ini");
  EXPECT_EQ(dump_config(parse_config(in)), dump_config(RunConfig{}));
}
