#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "cropyield/config.hpp"

using namespace cropyield;
using learn::ModelKind;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  RunConfig c = parse("");
  EXPECT_EQ(dump_config(c), dump_config(RunConfig{}));
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.test_year, 2018);
  EXPECT_EQ(c.models.size(), 6u);
  EXPECT_EQ(c.synth.years.size(), 6u);
}

TEST(Config, DumpParseRoundTrip) {
  RunConfig c;
  c.paths.soil = "in/soil.csv";
  c.paths.out = "results dir";
  c.seed = 1234567890123ULL;
  c.threads = 3;
  c.mode = ModeSelection::soil_weather;
  c.test_year = 2017;
  c.train_first_year = 2014;
  c.train_last_year = 2016;
  c.models = {ModelKind::extra_trees, ModelKind::decision_tree};
  c.alternative = Alternative::b_greater_than_a;
  c.min_week_days = 5;
  c.model_params[ModelKind::extra_trees].n_estimators = 17;
  c.model_params[ModelKind::gradient_boosting].learning_rate = 0.037;
  c.model_params[ModelKind::random_forest].bootstrap = false;
  c.model_params[ModelKind::decision_tree].max_depth = learn::kUnlimitedDepth;
  c.model_params[ModelKind::linear_svr].svr.c = 0.25;
  c.validation.humidity = {10, 99.5};
  c.validation.ordinals.of(OrdinalField::caco3) = {"a", "b c", "d"};
  c.synth.years = {{2016, 10, 7.5, 1.1}, {2017, 12, 8.25, 0.9}};
  c.synth.temp.peak_doy = 190;
  c.synth.soil_coefs[5] = -0.123456789;
  c.synth.caco3_probs = {0.1, 0.2, 0.3, 0.4};

  const std::string text = dump_config(c);
  RunConfig back = parse(text);
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(config_digest(back), config_digest(c));
  EXPECT_EQ(back.paths.out, "results dir");
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.models, c.models);
  EXPECT_EQ(back.model_params[ModelKind::extra_trees].n_estimators, 17);
  EXPECT_EQ(back.model_params[ModelKind::gradient_boosting].learning_rate, 0.037);
  EXPECT_FALSE(back.model_params[ModelKind::random_forest].bootstrap);
  EXPECT_EQ(back.validation.ordinals.of(OrdinalField::caco3), c.validation.ordinals.of(OrdinalField::caco3));
  ASSERT_EQ(back.synth.years.size(), 2u);
  EXPECT_EQ(back.synth.years[1].yield_mean, 8.25);
  EXPECT_EQ(back.synth.soil_coefs[5], -0.123456789);
}

TEST(Config, EveryKeyIsDocumentedAndUnique) {
  auto keys = config_keys(RunConfig{});
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& k : keys) {
    EXPECT_FALSE(k.doc.empty()) << k.section << "." << k.key;
    EXPECT_TRUE(seen.insert({k.section, k.key}).second) << k.section << "." << k.key;
  }
  EXPECT_TRUE(seen.count({"run", "seed"}));
  EXPECT_TRUE(seen.count({"model.hist_gradient_boosting", "max_leaves"}));
  EXPECT_TRUE(seen.count({"synth", "weather_weight"}));
}

TEST(Config, CommentsAndPartialFiles) {
  RunConfig c = parse(
      "# leading comment\n"
      "[run]\n"
      "; another comment\n"
      "seed = 7\n"
      "models = random_forest, gradient_boosting\n"
      "[model.random_forest]\n"
      "n_estimators = 12\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.models, (std::vector<ModelKind>{ModelKind::random_forest, ModelKind::gradient_boosting}));
  EXPECT_EQ(c.model_params[ModelKind::random_forest].n_estimators, 12);
  EXPECT_EQ(c.model_params[ModelKind::gradient_boosting].n_estimators, 200);
}

TEST(Config, UnknownSectionsAndKeysAreFatal) {
  EXPECT_NE(error_of("[runn]\nseed = 1\n").find("runn"), std::string::npos);
  EXPECT_NE(error_of("[run]\nsede = 1\n").find("sede"), std::string::npos);
  EXPECT_NE(error_of("[model.knn]\nmax_depth = 1\n").find("knn"), std::string::npos);
  EXPECT_FALSE(error_of("seed = 1\n").empty());  // outside any section
}

TEST(Config, MalformedValuesAreFatal) {
  EXPECT_FALSE(error_of("[run]\nseed = abc\n").empty());
  EXPECT_FALSE(error_of("[run]\ntest_year = 2018.5\n").empty());
  EXPECT_FALSE(error_of("[run]\nmode = weather\n").empty());
  EXPECT_FALSE(error_of("[run]\nalternative = two_sided\n").empty());
  EXPECT_FALSE(error_of("[run]\nmodels = decision_tree,knn\n").empty());
  EXPECT_FALSE(error_of("[model.random_forest]\nbootstrap = maybe\n").empty());
  EXPECT_FALSE(error_of("[synth]\nsoil_type_probs = 0.5 0.5\n").empty());
  EXPECT_FALSE(error_of("[run]\nmin_week_days = 9\n").empty());
}

TEST(Config, YearColumnsMustComeTogether) {
  EXPECT_FALSE(error_of("[synth]\nyears = 2013 2014\n").empty());
  EXPECT_FALSE(error_of("[synth]\nyears = 2013 2014\nzones = 10 10\nyield_mean = 8 9\nyield_std = 1\n").empty());
  RunConfig c = parse("[synth]\nyears = 2013 2014\nzones = 10 20\nyield_mean = 8 9\nyield_std = 1 1.5\n");
  ASSERT_EQ(c.synth.years.size(), 2u);
  EXPECT_EQ(c.synth.years[1].zones, 20);
  EXPECT_EQ(c.synth.years[1].yield_std, 1.5);
}

TEST(Config, InconsistentSettingsFailValidation) {
  EXPECT_FALSE(error_of("[run]\ntrain_first_year = 2017\ntrain_last_year = 2014\n").empty());
  EXPECT_FALSE(error_of("[validation]\nph_min = 9\nph_max = 3\n").empty());
  EXPECT_FALSE(error_of("[model.gradient_boosting]\nlearning_rate = 0\n").empty());
}

TEST(Config, DigestIgnoresPathsAndThreads) {
  RunConfig a, b;
  b.threads = 8;
  b.paths.out = "elsewhere";
  b.paths.crop = "x.csv";
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.seed = 43;
  EXPECT_NE(config_digest(a), config_digest(b));
  RunConfig c;
  c.model_params[ModelKind::extra_trees].max_features = 10;
  EXPECT_NE(config_digest(a), config_digest(c));
  EXPECT_EQ(config_digest(a).size(), 16u);
}

TEST(Config, DefaultInputPathsLiveUnderOut) {
  RunConfig c;
  c.paths.out = "o";
  EXPECT_EQ(c.soil_path(), std::filesystem::path("o/data/soil.csv"));
  EXPECT_EQ(c.crop_path(), std::filesystem::path("o/data/crop.csv"));
  c.paths.weather = "/abs/w.csv";
  EXPECT_EQ(c.weather_path(), std::filesystem::path("/abs/w.csv"));
}

TEST(Config, ExperimentCarriesModelsAndOptions) {
  EXPECT_NE(error_of("[run]\nmodels = random_forest,random_forest\n").find("twice"), std::string::npos);
  RunConfig c = parse(
      "[run]\nseed = 5\nmodels = random_forest,linear_svr\nmin_week_days = 6\n"
      "[model.random_forest]\nmax_depth = 3\n");
  auto e = c.experiment();
  ASSERT_EQ(e.models.size(), 2u);
  EXPECT_EQ(e.models[0].kind, ModelKind::random_forest);
  EXPECT_EQ(e.models[0].max_depth, 3);
  EXPECT_EQ(e.models[1].kind, ModelKind::linear_svr);
  EXPECT_EQ(e.assembly.min_week_days, 6);
  EXPECT_EQ(e.seed, 5u);
  EXPECT_EQ(e.config_digest, config_digest(c));
  EXPECT_NE(model_seed(5, 0), model_seed(5, 1));
}
