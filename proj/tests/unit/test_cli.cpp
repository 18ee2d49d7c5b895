// Integration tests driving the installed command-line binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

#include <json.hpp>

#include "tempofeat/pipeline.hpp"
#include "test_util.hpp"

using test_util::TempDir;
using test_util::read_file;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TEMPOFEAT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("cli pipeline: synth, cv, train, predict, evaluate, ensemble") {
  TempDir dir("cli");
  const std::string data = (dir.path() / "data").string();
  REQUIRE(run_cli("synth --out " + data + " --users 250 --branches 6 --seed 11") == 0);

  SUBCASE("cv writes a valid score report, reproducibly") {
    const std::string out1 = (dir.path() / "cv1").string();
    const std::string out2 = (dir.path() / "cv2").string();
    const std::string common = "cv --data-dir " + data +
                               " --task 2 --model logistic --feature-set FS7"
                               " --scale-features --seed 5 --out ";
    REQUIRE(run_cli(common + out1) == 0);
    REQUIRE(run_cli(common + out2 + " --workers 4") == 0);
    const auto text1 = read_file(dir.path() / "cv1" / "score_report.json");
    const auto text2 = read_file(dir.path() / "cv2" / "score_report.json");
    CHECK(text1 == text2);  // worker count must not leak into the report

    const auto j = nlohmann::json::parse(text1);
    CHECK(j.at("task") == 2);
    CHECK(j.at("metric") == "auc");
    CHECK(j.at("fold_scores").size() == 2);
    CHECK(j.at("mean").get<double>() > 0.5);
    CHECK(j.at("config").contains("seed"));
    CHECK_FALSE(j.at("config").contains("workers"));
  }

  SUBCASE("train then predict then evaluate") {
    const std::string model = (dir.path() / "model.json").string();
    REQUIRE(run_cli("train --data-dir " + data +
                    " --task 2 --model gbt --feature-set FS4 --n-estimators 15"
                    " --seed 2 --model-out " +
                    model) == 0);
    const std::string sub = (dir.path() / "sub.csv").string();
    REQUIRE(run_cli("predict --model " + model + " --data-dir " + data +
                    " --submission " + sub) == 0);
    const auto [ids, scores] = tempofeat::read_task2_submission(sub);
    CHECK(ids.size() == 250);
    for (double s : scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    REQUIRE(run_cli("evaluate --pred " + sub + " --data-dir " + data + " --task 2") == 0);
  }

  SUBCASE("task 1 train/predict produces the b:v submission format") {
    const std::string model = (dir.path() / "model1.json").string();
    REQUIRE(run_cli("train --data-dir " + data +
                    " --task 1 --model ridge --feature-set FS10 --normalize-targets"
                    " --seed 2 --model-out " +
                    model) == 0);
    const std::string sub = (dir.path() / "sub1.csv").string();
    REQUIRE(run_cli("predict --model " + model + " --data-dir " + data +
                    " --submission " + sub) == 0);
    const auto [ids, preds] = tempofeat::read_task1_submission(sub);
    CHECK(ids.size() == 250);
    REQUIRE(!preds.empty());
    CHECK(preds[0].size() <= 5);
    REQUIRE(run_cli("evaluate --pred " + sub + " --data-dir " + data + " --task 1") == 0);
  }

  SUBCASE("ensemble averages submissions element-wise") {
    const auto write_sub = [&](const std::string& name, double v0, double v1) {
      test_util::write_file(dir.path() / name,
                            "user_id,score\n0," + std::to_string(v0) + "\n1," +
                                std::to_string(v1) + "\n");
      return (dir.path() / name).string();
    };
    const auto a = write_sub("a.csv", 0.0, 1.0);
    const auto b = write_sub("b.csv", 1.0, 0.0);
    const auto c = write_sub("c.csv", 0.5, 0.5);
    const auto d = write_sub("d.csv", 0.5, 0.5);
    const std::string out = (dir.path() / "ens.csv").string();
    REQUIRE(run_cli("ensemble " + a + " " + b + " " + c + " " + d + " --out " + out) == 0);
    const auto [ids, scores] = tempofeat::read_task2_submission(out);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0] == 0.5);
    CHECK(scores[1] == 0.5);
  }

  SUBCASE("identical invocations produce byte-identical artifacts") {
    const std::string m1 = (dir.path() / "det1.json").string();
    const std::string m2 = (dir.path() / "det2.json").string();
    const std::string train_args = "train --data-dir " + data +
                                   " --task 2 --model forest --feature-set FS8"
                                   " --n-estimators 10 --seed 6 --model-out ";
    REQUIRE(run_cli(train_args + m1) == 0);
    REQUIRE(run_cli(train_args + m2 + " --workers 4") == 0);
    CHECK(read_file(m1) == read_file(m2));

    const std::string f1 = (dir.path() / "feat1").string();
    const std::string f2 = (dir.path() / "feat2").string();
    const std::string feat_args =
        "featurize --data-dir " + data + " --feature-set FS8 --seed 6 --out ";
    REQUIRE(run_cli(feat_args + f1) == 0);
    REQUIRE(run_cli(feat_args + f2) == 0);
    CHECK(read_file(dir.path() / "feat1" / "features.csv") ==
          read_file(dir.path() / "feat2" / "features.csv"));
    CHECK(read_file(dir.path() / "feat1" / "manifest.json") ==
          read_file(dir.path() / "feat2" / "manifest.json"));
    CHECK(!read_file(dir.path() / "feat1" / "kmeans.json").empty());
  }

  SUBCASE("config file merges under explicit flags") {
    test_util::write_file(dir.path() / "run.json",
                          "{\"task\": 2, \"model\": \"logistic\", \"feature_set\": "
                          "\"FS3\", \"seed\": 8, \"scale_features\": true}");
    const std::string out = (dir.path() / "cfgout").string();
    REQUIRE(run_cli("cv --config " + (dir.path() / "run.json").string() + " --data-dir " +
                    data + " --out " + out + " --cv-folds 2") == 0);
    const auto j =
        nlohmann::json::parse(read_file(dir.path() / "cfgout" / "score_report.json"));
    CHECK(j.at("config").at("feature_set") == "FS3");
    CHECK(j.at("config").at("seed") == 8);
  }
}

TEST_CASE("cli exit codes") {
  TempDir dir("cli_err");
  CHECK(run_cli("definitely-not-a-command") == 2);
  CHECK(run_cli("cv --task 7") == 2);
  // pipeline failure: data dir does not exist
  CHECK(run_cli("cv --data-dir " + (dir.path() / "nope").string() + " --task 2") == 1);
}

TEST_CASE("TEMPOFEAT_SEED env var is the seed fallback") {
  TempDir dir("cli_env");
  const std::string data = (dir.path() / "data").string();
  REQUIRE(run_cli("synth --out " + data + " --users 200 --branches 4 --seed 3") == 0);
  const std::string base = "cv --data-dir " + data +
                           " --task 2 --model logistic --feature-set FS3 --out ";
  const std::string with_env =
      "TEMPOFEAT_SEED=21 " + std::string(TEMPOFEAT_CLI_PATH) + " " + base +
      (dir.path() / "env").string() + " > /dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(with_env.c_str())) == 0);
  REQUIRE(run_cli(base + (dir.path() / "flag").string() + " --seed 21") == 0);
  CHECK(read_file(dir.path() / "env" / "score_report.json") ==
        read_file(dir.path() / "flag" / "score_report.json"));
}
