/*
 * Copyright (c) 2026 The artemis-head Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <string>

#include "artemis/error.hpp"
#include "artemis/harness.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace artemis;

namespace {

template <typename Fn>
std::string error_text(ErrorCode code, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code ? std::string(e.what()) : std::string("wrong code: ") + e.what();
  }
  return "no error";
}

// Small synthetic dataset on disk plus settings text pointing at it.
struct SynthDir {
  std::filesystem::path dir;
  std::string settings;

  SynthDir(const std::string& name, std::size_t subset_size = 0) {
    dir = std::filesystem::temp_directory_path() / ("artemis_test_harness_" + name);
    std::filesystem::remove_all(dir);
    SynthSpec s;
    s.n_train = 128;
    s.n_eval = 24;
    s.gallery_size = 150;
    s.subset_size = subset_size;
    s.seed = 4;
    write_synthetic(generate_synthetic(s), dir.string());
    settings = "images = " + (dir / "images.afb").string() + "\n" +
               "modifiers = " + (dir / "modifiers.afb").string() + "\n" +
               "triplets = " + (dir / "triplets.jsonl").string() + "\n";
    if (subset_size > 0) settings += "subsets = " + (dir / "subsets.jsonl").string() + "\n";
  }
  ~SynthDir() { std::filesystem::remove_all(dir); }
};

}  // namespace

TEST_CASE("settings parsing") {
  const auto kv = parse_settings("# comment\n  epochs = 7  # trailing\n\nflavor=em_only\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"epochs", "7"});
  CHECK(kv[1].second == "em_only");

  const RunConfig c = run_config_from_settings(
      "epochs = 7\nflavor = em_only\nepochs = 9\nmonitor = val,test\nconvention = cirr\n"
      "lr = 1e-3\ndrop_last = false\nsynth.flips = 2\ngradcheck.step = 1e-6\nsplit = val\n"
      "checkpoint = /tmp/x.ahp\n");
  CHECK(c.train.epochs == 9);  // later lines win
  CHECK(c.train.flavor == Flavor::kEmOnly);
  CHECK(c.train.monitor == std::vector<Split>{Split::kVal, Split::kTest});
  CHECK(c.train.convention == Convention::kCirr);
  CHECK(c.train.lr0 == 1e-3);
  CHECK_FALSE(c.train.drop_last);
  CHECK(c.synth.flip_count == 2);
  CHECK(c.gradcheck.step == 1e-6);
  CHECK(c.eval_split == Split::kVal);
  CHECK(path_setting(c, "checkpoint") == "/tmp/x.ahp");
  CHECK(path_setting(c, "log").empty());

  // Defaults.
  const RunConfig d = run_config_from_settings("");
  CHECK(d.train.batch_size == 32);
  CHECK(d.train.lr0 == 5e-4);
  CHECK(d.gradcheck.step == 1e-5);
  CHECK(d.gradcheck.tolerance == 1e-4);
}

TEST_CASE("settings errors name the line") {
  const std::string unknown =
      error_text(ErrorCode::kConfig, [] { run_config_from_settings("epochs = 3\nepoch = 4\n"); });
  CHECK(unknown.find("2") != std::string::npos);
  CHECK(unknown.find("epoch") != std::string::npos);
  CHECK(error_text(ErrorCode::kConfig, [] { run_config_from_settings("epochs = many\n"); })
            .find("epochs") != std::string::npos);
  CHECK(error_text(ErrorCode::kConfig, [] { run_config_from_settings("just words\n"); }) != "no error");
  CHECK(error_text(ErrorCode::kConfig, [] { run_config_from_settings("flavor = fusion\n"); }) !=
        "no error");
  CHECK(error_text(ErrorCode::kConfig, [] { run_config_from_settings("monitor = dev\n"); }) !=
        "no error");
}

TEST_CASE("every documented key is accepted") {
  for (const SettingInfo& info : setting_keys()) {
    CAPTURE(info.key);
    RunConfig c;
    std::string value = "1";
    if (info.key == "flavor") value = "artemis";
    if (info.key == "convention") value = "shoes";
    if (info.key == "monitor" || info.key == "split") value = "val";
    if (info.key == "drop_last" || info.key == "exclude_ref") value = "true";
    CHECK_NOTHROW(apply_setting(c, info.key, value));
  }
}

TEST_CASE("load, train, evaluate and dump") {
  SynthDir synth("eval", 5);
  RunConfig c = run_config_from_settings(synth.settings + "epochs = 2\nconvention = cirr\n");
  const LoadedData data = load_data(c);
  CHECK(data.gallery_ids.size() == 150);
  const TrainResult trained = train(data.view(), c.train);
  const EvalOutcome out = evaluate_checkpoint(data, trained.params, c, true);
  CHECK(out.metrics.count("R@1") == 1);
  CHECK(out.metrics.count("R_subset@1") == 1);
  CHECK(out.report.headline == "combined");
  CHECK(std::count(out.dump.begin(), out.dump.end(), '\n') == 24);
  const auto first = nlohmann::json::parse(out.dump.substr(0, out.dump.find('\n')));
  CHECK(first.at("top").size() == 10);

  // Same inputs, same bytes.
  CHECK(report_json(evaluate_checkpoint(data, trained.params, c, false).report) ==
        report_json(out.report));
}

TEST_CASE("ablation covers the six flavors in order") {
  SynthDir synth("ablate");
  const RunConfig c = run_config_from_settings(synth.settings + "epochs = 1\n");
  const AblationReport report = run_ablation(load_data(c), c);
  REQUIRE(report.rows.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(report.rows[i].flavor == kAllFlavors[i]);
  const auto j = nlohmann::json::parse(ablation_json(report));
  CHECK(j.at("rows").size() == 6);
  CHECK(j.at("rows")[5].at("flavor") == "artemis");
  CHECK(ablation_table(report).find("late_fusion") != std::string::npos);
}

TEST_CASE("bench reports both flavors") {
  SynthDir synth("bench");
  const RunConfig c = run_config_from_settings(synth.settings + "repeats = 2\n");
  const LoadedData data = load_data(c);
  const HeadParams params = init_params(dims_for(data.view(), c.train), 0);
  const LatencyReport r = bench_latency(data, params, c);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].flavor == Flavor::kLateFusion);
  CHECK(r.entries[1].flavor == Flavor::kArtemis);
  CHECK(r.entries[0].runs.size() == 2);
  CHECK(r.queries == 24);
  CHECK(r.candidates == 150);
  CHECK(r.ratio > 0.0);
  CHECK(r.ratio == doctest::Approx(r.entries[1].min_total / r.entries[0].min_total));
  CHECK(nlohmann::json::parse(latency_json(r)).contains("ratio"));
}

TEST_CASE("small gradcheck passes") {
  const RunConfig c =
      run_config_from_settings("gradcheck.instances = 2\ngradcheck.dim = 4\ngradcheck.batch = 3\n");
  const GradcheckSummary s = run_gradcheck(c);
  CHECK(s.passed);
  CHECK(s.max_error <= 1e-4);
  // loss for six flavors plus the two score checks, per instance
  CHECK(s.runs.size() == 2 * 8);
  const auto j = nlohmann::json::parse(gradcheck_json(s));
  CHECK(j.at("passed") == true);
}
