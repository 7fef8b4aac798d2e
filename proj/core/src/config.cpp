// grc/config.cpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "grc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "grc/error.hpp"

namespace grc {

namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& obj, const std::string& where,
                       const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
  }
}

const json& Field(const json& obj, const std::string& key) {
  return obj.at(key);
}

std::size_t GetCount(const json& obj, const std::string& key,
                     std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = Field(obj, key);
  if (!v.is_number_unsigned())
    throw ConfigError("\"" + key + "\" must be a non-negative integer");
  return v.get<std::size_t>();
}

std::uint64_t GetU64(const json& obj, const std::string& key,
                     std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = Field(obj, key);
  if (!v.is_number_unsigned())
    throw ConfigError("\"" + key + "\" must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double GetNumber(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = Field(obj, key);
  if (!v.is_number())
    throw ConfigError("\"" + key + "\" must be a number");
  return v.get<double>();
}

void ParseDims(const json& obj, ModelDims* dims) {
  RejectUnknownKeys(obj, "dims",
                    {"d_x", "d_h", "d_s", "d_e", "d_k", "vocab", "lookahead",
                     "stride"});
  dims->d_x = GetCount(obj, "d_x", dims->d_x);
  dims->d_h = GetCount(obj, "d_h", dims->d_h);
  dims->d_s = GetCount(obj, "d_s", dims->d_s);
  dims->d_e = GetCount(obj, "d_e", dims->d_e);
  dims->d_k = GetCount(obj, "d_k", dims->d_k);
  dims->vocab = GetCount(obj, "vocab", dims->vocab);
  dims->lookahead = GetCount(obj, "lookahead", dims->lookahead);
  dims->stride = GetCount(obj, "stride", dims->stride);
}

void ParseAttention(const json& obj, AttentionSpec* spec) {
  RejectUnknownKeys(obj, "attention", {"kind", "w"});
  if (!obj.contains("kind"))
    throw ConfigError("attention requires \"kind\"");
  if (!Field(obj, "kind").is_string())
    throw ConfigError("attention \"kind\" must be a string");
  spec->kind = AttentionKindFromName(Field(obj, "kind").get<std::string>());
  if (KindUsesWindow(spec->kind)) {
    if (!obj.contains("w"))
      throw ConfigError("attention kind \"" + AttentionKindName(spec->kind) +
                        "\" requires \"w\"");
    spec->w = GetCount(obj, "w", 0);
    if (spec->w < 1) throw ConfigError("attention \"w\" must be at least 1");
  } else {
    if (obj.contains("w"))
      throw ConfigError("attention kind \"" + AttentionKindName(spec->kind) +
                        "\" does not take \"w\"");
    spec->w = 0;
  }
}

void ParseTask(const json& obj, SyntheticTask* task) {
  RejectUnknownKeys(obj, "task",
                    {"vocab", "min_len", "max_len", "repeat", "noise"});
  task->vocab = GetCount(obj, "vocab", task->vocab);
  task->min_len = GetCount(obj, "min_len", task->min_len);
  task->max_len = GetCount(obj, "max_len", task->max_len);
  task->repeat = GetCount(obj, "repeat", task->repeat);
  task->noise = GetNumber(obj, "noise", task->noise);
}

void ParseTrain(const json& obj, TrainSection* train) {
  RejectUnknownKeys(obj, "train",
                    {"examples", "epochs", "batch", "lr", "seed"});
  train->examples = GetCount(obj, "examples", train->examples);
  train->epochs = GetCount(obj, "epochs", train->epochs);
  train->batch = GetCount(obj, "batch", train->batch);
  train->lr = GetNumber(obj, "lr", train->lr);
  train->seed = GetU64(obj, "seed", train->seed);
}

void ParseEval(const json& obj, EvalSection* eval) {
  RejectUnknownKeys(obj, "eval",
                    {"examples", "beam", "max_len", "frame_period"});
  eval->examples = GetCount(obj, "examples", eval->examples);
  eval->beam = GetCount(obj, "beam", eval->beam);
  eval->max_len = GetCount(obj, "max_len", eval->max_len);
  eval->frame_period = GetNumber(obj, "frame_period", eval->frame_period);
}

void ParseSweep(const json& obj, std::vector<double>* nus) {
  RejectUnknownKeys(obj, "sweep", {"nus"});
  if (!obj.contains("nus")) return;
  const json& arr = Field(obj, "nus");
  if (!arr.is_array()) throw ConfigError("sweep \"nus\" must be an array");
  nus->clear();
  for (const json& v : arr) {
    if (!v.is_number()) throw ConfigError("sweep \"nus\" must hold numbers");
    nus->push_back(v.get<double>());
  }
}

}  // namespace

void RunConfig::Validate() const {
  try {
    dims.Validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  if (task.vocab != dims.vocab || task.vocab != dims.d_x)
    throw ConfigError(
        "task vocab must equal dims.vocab and dims.d_x for one-hot input");
  if (task.vocab < 3) throw ConfigError("task vocab has no content ids");
  if (task.min_len < 1 || task.min_len > task.max_len)
    throw ConfigError("task length range is empty");
  if (task.repeat < 1) throw ConfigError("task repeat must be positive");
  if (task.noise < 0.0) throw ConfigError("task noise must be non-negative");
  if (KindUsesWindow(attention.kind)) {
    if (attention.w < 1)
      throw ConfigError("windowed attention kinds need w >= 1");
  } else if (attention.w != 0) {
    throw ConfigError("only windowed attention kinds take w");
  }
  if (train.examples < 1 || train.epochs < 1 || train.batch < 1)
    throw ConfigError("train counts must be positive");
  if (!(train.lr > 0.0)) throw ConfigError("train lr must be positive");
  if (eval.examples < 1 || eval.beam < 1 || eval.max_len < 1)
    throw ConfigError("eval counts must be positive");
  if (!(eval.frame_period > 0.0))
    throw ConfigError("eval frame_period must be positive");
  if (sweep_nus.empty()) throw ConfigError("sweep grid is empty");
  for (double nu : sweep_nus)
    if (!(nu >= 0.0 && nu <= 1.0))
      throw ConfigError("sweep nu values must lie in [0, 1]");
}

RunConfig ParseRunConfig(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  RejectUnknownKeys(root, "config",
                    {"dims", "attention", "task", "train", "eval", "sweep"});

  RunConfig cfg;
  auto section = [&root](const char* name) -> const json* {
    if (!root.contains(name)) return nullptr;
    const json& s = root.at(name);
    if (!s.is_object())
      throw ConfigError(std::string("\"") + name + "\" must be an object");
    return &s;
  };
  if (const json* s = section("dims")) ParseDims(*s, &cfg.dims);
  if (const json* s = section("attention")) ParseAttention(*s, &cfg.attention);
  if (const json* s = section("task")) ParseTask(*s, &cfg.task);
  if (const json* s = section("train")) ParseTrain(*s, &cfg.train);
  if (const json* s = section("eval")) ParseEval(*s, &cfg.eval);
  if (const json* s = section("sweep")) ParseSweep(*s, &cfg.sweep_nus);
  cfg.Validate();
  return cfg;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseRunConfig(buf.str());
}

std::string SerializeRunConfig(const RunConfig& cfg) {
  json root;
  root["dims"] = {{"d_x", cfg.dims.d_x},     {"d_h", cfg.dims.d_h},
                  {"d_s", cfg.dims.d_s},     {"d_e", cfg.dims.d_e},
                  {"d_k", cfg.dims.d_k},     {"vocab", cfg.dims.vocab},
                  {"lookahead", cfg.dims.lookahead},
                  {"stride", cfg.dims.stride}};
  root["attention"] = {{"kind", AttentionKindName(cfg.attention.kind)}};
  if (KindUsesWindow(cfg.attention.kind))
    root["attention"]["w"] = cfg.attention.w;
  root["task"] = {{"vocab", cfg.task.vocab},
                  {"min_len", cfg.task.min_len},
                  {"max_len", cfg.task.max_len},
                  {"repeat", cfg.task.repeat},
                  {"noise", cfg.task.noise}};
  root["train"] = {{"examples", cfg.train.examples},
                   {"epochs", cfg.train.epochs},
                   {"batch", cfg.train.batch},
                   {"lr", cfg.train.lr},
                   {"seed", cfg.train.seed}};
  root["eval"] = {{"examples", cfg.eval.examples},
                  {"beam", cfg.eval.beam},
                  {"max_len", cfg.eval.max_len},
                  {"frame_period", cfg.eval.frame_period}};
  root["sweep"] = {{"nus", cfg.sweep_nus}};
  return root.dump(2);
}

}  // namespace grc
