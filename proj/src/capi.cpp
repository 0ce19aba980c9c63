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

#include "artemis/artemis.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "artemis/checkpoint.hpp"
#include "artemis/error.hpp"
#include "artemis/harness.hpp"
#include "json.hpp"

struct artemis_config {
  artemis::RunConfig value;
};

struct artemis_dataset {
  artemis::LoadedData value;
};

struct artemis_params {
  artemis::HeadParams value;
};

struct artemis_train_result {
  artemis::TrainResult value;
};

namespace {

thread_local std::string g_last_error;

int fail(int status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Fn>
int guarded(Fn&& body) {
  try {
    g_last_error.clear();
    body();
    return ARTEMIS_OK;
  } catch (const artemis::Error& e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ARTEMIS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ARTEMIS_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  if (out != nullptr) *out = duplicate(s);
}

#define ARTEMIS_REQUIRE(cond)                                              \
  do {                                                                     \
    if (!(cond)) return fail(ARTEMIS_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* artemis_version(void) { return "0.1.0"; }

const char* artemis_last_error(void) { return g_last_error.c_str(); }

const char* artemis_status_name(int status) {
  if (status == ARTEMIS_OK) return "Ok";
  if (status == ARTEMIS_INVALID_ARGUMENT) return "InvalidArgument";
  if (status == ARTEMIS_INTERNAL) return "Internal";
  if (status >= 1 && status <= ARTEMIS_PARSE) {
    return artemis::error_code_name(static_cast<artemis::ErrorCode>(status));
  }
  return "Unknown";
}

int artemis_status_exit_code(int status) {
  switch (status) {
    case ARTEMIS_OK: return 0;
    case ARTEMIS_CONFIG:
    case ARTEMIS_SPEC_INVALID:
    case ARTEMIS_INVALID_ARGUMENT: return 2;
    default: return 3;
  }
}

void artemis_string_free(char* s) { std::free(s); }

int artemis_config_new(artemis_config** out) {
  ARTEMIS_REQUIRE(out);
  return guarded([&] { *out = new artemis_config{}; });
}

void artemis_config_free(artemis_config* config) { delete config; }

int artemis_config_set(artemis_config* config, const char* key, const char* value) {
  ARTEMIS_REQUIRE(config && key && value);
  return guarded([&] { artemis::apply_setting(config->value, key, value); });
}

int artemis_config_apply_text(artemis_config* config, const char* text) {
  ARTEMIS_REQUIRE(config && text);
  return guarded([&] {
    // Parse everything first so a bad line leaves the config untouched.
    artemis::RunConfig next = config->value;
    artemis::apply_settings(next, text);
    config->value = std::move(next);
  });
}

int artemis_config_get_path(const artemis_config* config, const char* key, char** out) {
  ARTEMIS_REQUIRE(config && key && out);
  return guarded([&] { emit(out, artemis::path_setting(config->value, key)); });
}

int artemis_config_help(char** out) {
  ARTEMIS_REQUIRE(out);
  return guarded([&] {
    std::string text;
    for (const auto& info : artemis::setting_keys()) {
      text += std::string(info.key) + '\t' + std::string(info.help) + '\n';
    }
    emit(out, text);
  });
}

int artemis_dataset_load(const artemis_config* config, artemis_dataset** out) {
  ARTEMIS_REQUIRE(config && out);
  return guarded([&] { *out = new artemis_dataset{artemis::load_data(config->value)}; });
}

void artemis_dataset_free(artemis_dataset* dataset) { delete dataset; }

int artemis_synth(const artemis_config* config, char** summary) {
  ARTEMIS_REQUIRE(config);
  return guarded([&] {
    const artemis::RunConfig& c = config->value;
    if (c.synth_dir.empty()) throw artemis::Error(artemis::ErrorCode::kConfig, "synth.dir is required");
    artemis::SynthSpec spec = c.synth;
    spec.seed = c.train.seed;
    const artemis::SyntheticData data = artemis::generate_synthetic(spec);
    artemis::write_synthetic(data, c.synth_dir);
    nlohmann::json j;
    j["dir"] = c.synth_dir;
    j["images"] = data.images.rows();
    j["modifiers"] = data.modifiers.rows();
    j["dim_image"] = data.images.dim();
    j["dim_text"] = data.modifiers.dim();
    for (artemis::Split s : {artemis::Split::kTrain, artemis::Split::kVal, artemis::Split::kTest}) {
      j["triplets"][std::string(artemis::split_name(s))] = data.triplets.indices(s).size();
    }
    j["subsets"] = data.triplets.subsets.size();
    j["seed"] = spec.seed;
    emit(summary, j.dump(2));
  });
}

int artemis_params_init(size_t dim_text, size_t dim_image, size_t hidden, uint64_t seed,
                        artemis_params** out) {
  ARTEMIS_REQUIRE(out);
  return guarded([&] {
    if (dim_text == 0 || dim_image == 0 || hidden == 0) {
      throw artemis::Error(artemis::ErrorCode::kConfig, "dims must be positive");
    }
    *out = new artemis_params{artemis::init_params({dim_text, dim_image, hidden}, seed)};
  });
}

int artemis_params_load(const char* path, artemis_params** out) {
  ARTEMIS_REQUIRE(path && out);
  return guarded([&] { *out = new artemis_params{artemis::load_checkpoint(path)}; });
}

int artemis_params_save(const artemis_params* params, const char* path) {
  ARTEMIS_REQUIRE(params && path);
  return guarded([&] { artemis::save_checkpoint(params->value, path); });
}

void artemis_params_free(artemis_params* params) { delete params; }

int artemis_params_count(const artemis_params* params, uint64_t* count) {
  ARTEMIS_REQUIRE(params && count);
  return guarded([&] { *count = artemis::head_param_count(params->value); });
}

int artemis_dims_accounting(size_t dim_text, size_t dim_image, size_t hidden, uint64_t* params,
                            uint64_t* macs) {
  return guarded([&] {
    const artemis::HeadDims dims{dim_text, dim_image, hidden};
    if (params != nullptr) *params = artemis::head_param_count(dims);
    if (macs != nullptr) *macs = artemis::head_mac_count(dims);
  });
}

int artemis_score(const artemis_params* params, const char* flavor, const double* ref,
                  size_t ref_len, const double* mod, size_t mod_len, const double* tgt,
                  size_t tgt_len, double* out) {
  ARTEMIS_REQUIRE(params && flavor && ref && mod && tgt && out);
  return guarded([&] {
    *out = artemis::score({ref, ref_len}, {mod, mod_len}, {tgt, tgt_len}, params->value,
                          artemis::parse_flavor(flavor));
  });
}

int artemis_train(const artemis_config* config, const artemis_dataset* dataset,
                  artemis_train_result** out) {
  ARTEMIS_REQUIRE(config && dataset && out);
  return guarded([&] {
    *out = new artemis_train_result{artemis::train(dataset->value.view(), config->value.train)};
  });
}

void artemis_train_result_free(artemis_train_result* result) { delete result; }

int artemis_train_result_log(const artemis_train_result* result, char** out) {
  ARTEMIS_REQUIRE(result && out);
  return guarded([&] { emit(out, artemis::epoch_log_jsonl(result->value.logs)); });
}

int artemis_train_result_params(const artemis_train_result* result, const char* split,
                                artemis_params** out) {
  ARTEMIS_REQUIRE(result && out);
  return guarded([&] {
    if (split == nullptr) {
      *out = new artemis_params{result->value.params};
      return;
    }
    auto it = result->value.best.find(split);
    if (it == result->value.best.end()) {
      throw artemis::Error(artemis::ErrorCode::kConfig,
                           std::string("split '") + split + "' was not monitored");
    }
    *out = new artemis_params{it->second.second};
  });
}

int artemis_train_result_best(const artemis_train_result* result, char** out) {
  ARTEMIS_REQUIRE(result && out);
  return guarded([&] {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [split, best] : result->value.best) j[split] = best.first;
    emit(out, j.dump());
  });
}

int artemis_evaluate(const artemis_config* config, const artemis_dataset* dataset,
                     const artemis_params* params, char** report_json, char** report_table,
                     char** ranking_dump) {
  ARTEMIS_REQUIRE(config && dataset && params);
  return guarded([&] {
    const artemis::EvalOutcome outcome = artemis::evaluate_checkpoint(
        dataset->value, params->value, config->value, ranking_dump != nullptr);
    emit(report_json, artemis::report_json(outcome.report));
    emit(report_table, artemis::report_table(outcome.report));
    emit(ranking_dump, outcome.dump);
  });
}

int artemis_ablate(const artemis_config* config, const artemis_dataset* dataset,
                   char** report_json, char** report_table) {
  ARTEMIS_REQUIRE(config && dataset);
  return guarded([&] {
    const artemis::AblationReport report = artemis::run_ablation(dataset->value, config->value);
    emit(report_json, artemis::ablation_json(report));
    emit(report_table, artemis::ablation_table(report));
  });
}

int artemis_bench(const artemis_config* config, const artemis_dataset* dataset,
                  const artemis_params* params, char** report_json, char** report_table,
                  double* ratio) {
  ARTEMIS_REQUIRE(config && dataset && params);
  return guarded([&] {
    const artemis::LatencyReport report =
        artemis::bench_latency(dataset->value, params->value, config->value);
    emit(report_json, artemis::latency_json(report));
    emit(report_table, artemis::latency_table(report));
    if (ratio != nullptr) *ratio = report.ratio;
  });
}

int artemis_gradcheck(const artemis_config* config, char** report_json, int* passed) {
  ARTEMIS_REQUIRE(config && passed);
  return guarded([&] {
    const artemis::GradcheckSummary summary = artemis::run_gradcheck(config->value);
    *passed = summary.passed ? 1 : 0;
    emit(report_json, artemis::gradcheck_json(summary));
  });
}

int artemis_bank_inspect(const char* path, char** summary) {
  ARTEMIS_REQUIRE(path && summary);
  return guarded([&] { emit(summary, artemis::bank_summary_json(artemis::read_feature_bank(path))); });
}

}  // extern "C"
