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

// Command-line front end. Links only the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "artemis/artemis.h"

namespace {

constexpr int kExitCheckFailed = 4;

struct Failure {
  int exit_code;
};

// Throws Failure after reporting the last library error.
void check(int status, const char* what) {
  if (status == ARTEMIS_OK) return;
  std::fprintf(stderr, "artemis %s: %s (%s)\n", what, artemis_last_error(),
               artemis_status_name(status));
  throw Failure{artemis_status_exit_code(status)};
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { artemis_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  ~Handle() { Free(ptr); }
};

using Config = Handle<artemis_config, artemis_config_free>;
using Dataset = Handle<artemis_dataset, artemis_dataset_free>;
using Params = Handle<artemis_params, artemis_params_free>;
using TrainResult = Handle<artemis_train_result, artemis_train_result_free>;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::fprintf(stderr, "artemis: cannot write %s\n", path.c_str());
    throw Failure{3};
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "artemis: cannot read config %s\n", path.c_str());
    throw Failure{2};
  }
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Flag spelling of a settings key: dots and underscores become dashes.
std::string flag_for(const std::string& key) {
  std::string out = "--";
  for (char c : key) out += (c == '.' || c == '_') ? '-' : c;
  return out;
}

std::vector<std::pair<std::string, std::string>> documented_keys() {
  OwnedString help;
  check(artemis_config_help(&help.ptr), "help");
  std::vector<std::pair<std::string, std::string>> keys;
  std::istringstream in(help.str());
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    keys.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return keys;
}

std::string path_setting(const artemis_config* config, const char* key) {
  OwnedString value;
  check(artemis_config_get_path(config, key, &value.ptr), "config");
  return value.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARTEMIS scoring head: training, evaluation, ablation and benchmarks"};
  app.require_subcommand(1);
  app.footer(
      "Settings are read from --config (key = value lines, # comments) and then from flags;\n"
      "flags win. Exit codes: 0 success, 2 config error, 3 data error, 4 check failure.");

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "settings file (key = value per line)");
  app.add_option("--set", overrides, "extra key=value setting, repeatable");

  std::vector<std::pair<std::string, std::string>> keys;
  try {
    keys = documented_keys();
  } catch (const Failure& f) {
    return f.exit_code;
  }
  std::vector<std::string> flag_values(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    app.add_option(flag_for(keys[i].first), flag_values[i], keys[i].first + ": " + keys[i].second)
        ->group("Settings");
  }

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset into synth.dir");
  auto* train = app.add_subcommand("train", "train one flavor and write the checkpoint");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  auto* ablate = app.add_subcommand("ablate", "train and evaluate all six flavors");
  auto* gradcheck = app.add_subcommand("gradcheck", "compare tape and finite-difference gradients");
  auto* bench = app.add_subcommand("bench", "time late_fusion and artemis retrieval");
  auto* inspect = app.add_subcommand("inspect-bank", "summarize an AFB1 feature bank");
  std::string bank_path;
  inspect->add_option("bank", bank_path, "bank path")->required();
  for (auto* sub : {synth, train, eval, ablate, gradcheck, bench, inspect}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Config config;
    check(artemis_config_new(&config.ptr), "config");
    if (!config_path.empty()) {
      check(artemis_config_apply_text(config.ptr, read_text(config_path).c_str()), "config");
    }
    // Flags after the file, so they win; --set last of all.
    std::vector<std::pair<std::string, std::string>> given;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (app.count(flag_for(keys[i].first)) > 0) given.emplace_back(keys[i].first, flag_values[i]);
    }
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "artemis: --set expects key=value, got '%s'\n", kv.c_str());
        return 2;
      }
      given.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : given) check(artemis_config_set(config.ptr, k.c_str(), v.c_str()), "config");

    auto lookup = [&](const char* key) { return path_setting(config.ptr, key); };
    const std::string out_path = lookup("out");
    auto emit_json = [&](const std::string& json) {
      if (out_path.empty()) {
        std::cout << json << '\n';
      } else {
        write_text(out_path, json + '\n');
      }
    };

    if (*synth) {
      OwnedString summary;
      check(artemis_synth(config.ptr, &summary.ptr), "synth");
      emit_json(summary.str());
      return 0;
    }
    if (*gradcheck) {
      OwnedString report;
      int passed = 0;
      check(artemis_gradcheck(config.ptr, &report.ptr, &passed), "gradcheck");
      emit_json(report.str());
      std::fprintf(stderr, "gradcheck %s\n", passed ? "passed" : "FAILED");
      return passed ? 0 : kExitCheckFailed;
    }
    if (*inspect) {
      OwnedString summary;
      check(artemis_bank_inspect(bank_path.c_str(), &summary.ptr), "inspect-bank");
      emit_json(summary.str());
      return 0;
    }

    Dataset dataset;
    check(artemis_dataset_load(config.ptr, &dataset.ptr), "load");
    const std::string checkpoint = lookup("checkpoint");

    if (*train) {
      if (checkpoint.empty()) {
        std::fprintf(stderr, "artemis train: checkpoint is required\n");
        return 2;
      }
      TrainResult result;
      check(artemis_train(config.ptr, dataset.ptr, &result.ptr), "train");
      Params final_params;
      check(artemis_train_result_params(result.ptr, nullptr, &final_params.ptr), "train");
      check(artemis_params_save(final_params.ptr, checkpoint.c_str()), "train");
      OwnedString log, best;
      check(artemis_train_result_log(result.ptr, &log.ptr), "train");
      check(artemis_train_result_best(result.ptr, &best.ptr), "train");
      const std::string log_path = lookup("log");
      if (log_path.empty()) {
        std::cout << log.str();
      } else {
        write_text(log_path, log.str());
      }
      // One extra checkpoint per monitored split, at its best epoch.
      const std::string best_json = best.str();
      for (const char* split : {"train", "val", "test"}) {
        if (best_json.find(std::string("\"") + split + "\"") == std::string::npos) continue;
        Params p;
        check(artemis_train_result_params(result.ptr, split, &p.ptr), "train");
        check(artemis_params_save(p.ptr, (checkpoint + ".best-" + split).c_str()), "train");
      }
      std::fprintf(stderr, "best epochs: %s\n", best_json.c_str());
      return 0;
    }

    if (*ablate) {
      OwnedString json, table;
      check(artemis_ablate(config.ptr, dataset.ptr, &json.ptr, &table.ptr), "ablate");
      emit_json(json.str());
      std::cerr << table.str();
      return 0;
    }
    if (checkpoint.empty()) {
      std::fprintf(stderr, "artemis: checkpoint is required\n");
      return 2;
    }
    Params params;
    check(artemis_params_load(checkpoint.c_str(), &params.ptr), "checkpoint");
    if (*eval) {
      const std::string dump_path = lookup("dump");
      OwnedString json, table, dump;
      check(artemis_evaluate(config.ptr, dataset.ptr, params.ptr, &json.ptr, &table.ptr,
                             dump_path.empty() ? nullptr : &dump.ptr),
            "eval");
      emit_json(json.str());
      std::cerr << table.str();
      if (!dump_path.empty()) write_text(dump_path, dump.str());
      return 0;
    }
    if (*bench) {
      OwnedString json, table;
      double ratio = 0.0;
      check(artemis_bench(config.ptr, dataset.ptr, params.ptr, &json.ptr, &table.ptr, &ratio),
            "bench");
      emit_json(json.str());
      std::cerr << table.str();
      return 0;
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return 0;
}
