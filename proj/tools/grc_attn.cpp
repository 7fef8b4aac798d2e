// grc_attn.cpp

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
//
// Command line front end. Every artifact directory receives the exact
// run configuration that produced it, so a run can be reproduced byte for
// byte from the directory alone. Exit codes: 0 success, 1 runtime or
// verification failure, 2 usage or configuration errors.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grc/checkpoint.hpp"
#include "grc/config.hpp"
#include "grc/decode.hpp"
#include "grc/error.hpp"
#include "grc/io.hpp"
#include "grc/metrics.hpp"
#include "grc/pipeline.hpp"
#include "grc/verify.hpp"

namespace {

namespace fs = std::filesystem;

std::size_t ThreadsFromEnv() {
  const char* raw = std::getenv("GRC_ATTN_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  char* end = nullptr;
  unsigned long v = std::strtoul(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0)
    throw grc::ConfigError("GRC_ATTN_THREADS must be a positive integer");
  return static_cast<std::size_t>(v);
}

fs::path PrepareDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw grc::ConfigError("cannot create directory: " + dir);
  return fs::path(dir);
}

void WriteConfigJson(const fs::path& dir, const grc::RunConfig& cfg) {
  std::ofstream out(dir / "config.json", std::ios::trunc);
  if (!out) throw grc::ConfigError("cannot write config.json");
  out << grc::SerializeRunConfig(cfg) << '\n';
}

void PrintTokens(const char* tag, const grc::TokenSequence& toks) {
  std::printf("%s:", tag);
  for (int t : toks) std::printf(" %d", t);
  std::printf("\n");
}

grc::TrainOutcome ModelFromCheckpoint(const std::string& path) {
  grc::Checkpoint ckpt = grc::LoadCheckpoint(path);
  grc::TrainOutcome model;
  model.params = std::move(ckpt.params);
  model.spec = ckpt.spec;
  model.config = ckpt.config;
  return model;
}

int CmdTrain(const std::string& config_path, bool seed_set,
             std::uint64_t seed, const std::string& out_dir) {
  grc::RunConfig cfg =
      config_path.empty() ? grc::RunConfig{} : grc::LoadRunConfig(config_path);
  if (seed_set) cfg.train.seed = seed;
  const fs::path dir = PrepareDir(out_dir);
  grc::TrainOutcome out = grc::RunTrain(cfg, ThreadsFromEnv());
  std::vector<grc::LossRow> curve = grc::LossCurve(out);
  for (const grc::LossRow& row : curve)
    std::printf("epoch %zu train_ce %s dev_ce %s\n", row.epoch,
                grc::FormatDouble(row.train_ce).c_str(),
                grc::FormatDouble(row.dev_ce).c_str());
  grc::EvalOutcome ev = grc::RunEval(out);
  std::printf("eval token_error %s over %zu utterances\n",
              grc::FormatDouble(ev.token_error).c_str(), ev.examples);
  WriteConfigJson(dir, cfg);
  grc::WriteLossCsv((dir / "loss.csv").string(), curve);
  grc::SaveCheckpoint((dir / "model.ckpt").string(), out.params, out.spec,
                      out.config);
  std::printf("saved %s\n", (dir / "model.ckpt").string().c_str());
  return 0;
}

int CmdVerify(std::uint64_t seed, std::size_t trials,
              const std::string& inject_fault) {
  if (trials == 0) throw grc::ConfigError("verify: trials must be >= 1");
  grc::VerifyOptions opts;
  opts.seed = seed;
  opts.trials = trials;
  opts.inject_fault = inject_fault;
  grc::VerifyReport report = grc::RunVerify(opts);
  for (const auto& check : report.checks)
    std::printf("%-22s %-4s %s\n", check.name.c_str(),
                check.pass ? "ok" : "FAIL", check.detail.c_str());
  return report.AllPass() ? 0 : 1;
}

int CmdSweep(const std::string& ckpt_path, const std::vector<double>& nu_list,
             const std::string& out_dir) {
  grc::TrainOutcome model = ModelFromCheckpoint(ckpt_path);
  std::vector<double> nus =
      nu_list.empty() ? model.config.sweep_nus : nu_list;
  grc::SweepOutcome sweep = grc::RunSweep(model, nus);
  for (const auto& row : sweep.rows)
    std::printf("nu %s wer %s al_frames %s endpoint_fraction %s\n",
                grc::FormatDouble(row.nu).c_str(),
                grc::FormatDouble(row.wer).c_str(),
                grc::FormatDouble(row.al_frames).c_str(),
                grc::FormatDouble(row.endpoint_fraction).c_str());
  const fs::path dir = PrepareDir(out_dir);
  grc::RunConfig cfg = model.config;
  cfg.sweep_nus = nus;
  WriteConfigJson(dir, cfg);
  grc::WriteSweepCsv((dir / "sweep.csv").string(), sweep.rows);
  grc::WriteSweepDetail((dir / "utterances.jsonl").string(), sweep.Details());
  std::printf("wrote %s\n", (dir / "sweep.csv").string().c_str());
  return 0;
}

int CmdDumpAttention(const std::string& ckpt_path, std::size_t utt,
                     const std::string& out_dir) {
  grc::TrainOutcome model = ModelFromCheckpoint(ckpt_path);
  std::vector<grc::Example> data = grc::EvalDataset(model.config);
  if (utt >= data.size())
    throw grc::ConfigError("utterance index out of range: have " +
                           std::to_string(data.size()));
  grc::TeacherForcedResult diag = grc::AttentionDiagnostics(model, data[utt]);
  const fs::path dir = PrepareDir(out_dir);
  WriteConfigJson(dir, model.config);
  grc::WriteMatrixCsv((dir / "weights.csv").string(), diag.weights);
  grc::WriteWeightsPgm((dir / "weights.pgm").string(), diag.weights);
  if (diag.has_gates) {
    grc::WriteMatrixCsv((dir / "gates.csv").string(), diag.gates);
    grc::WriteWeightsPgm((dir / "gates.pgm").string(), diag.gates);
  }
  std::printf("wrote %zux%zu maps to %s\n", diag.weights.rows(),
              diag.weights.cols(), dir.string().c_str());
  return 0;
}

int CmdDecode(const std::string& ckpt_path, std::size_t utt, bool nu_set,
              double nu, std::size_t beam, const std::string& out_dir) {
  grc::TrainOutcome model = ModelFromCheckpoint(ckpt_path);
  std::vector<grc::Example> data = grc::EvalDataset(model.config);
  if (utt >= data.size())
    throw grc::ConfigError("utterance index out of range: have " +
                           std::to_string(data.size()));
  const grc::Example& ex = data[utt];
  grc::TokenSequence tokens;
  std::vector<grc::EndpointRecord> endpoints;
  double logp = 0.0;
  bool truncated = false;
  if (nu_set) {
    grc::StreamResult r =
        grc::DecodeUtterance(model, ex, nu, model.config.eval.max_len);
    tokens = std::move(r.tokens);
    endpoints = std::move(r.endpoints);
    logp = r.logp;
    truncated = r.truncated;
  } else {
    grc::Mat64 h = grc::Encode(model.params, ex.x);
    grc::DecodeOptions opts;
    opts.beam = beam;
    opts.max_len = model.config.eval.max_len;
    grc::DecodeResult r = grc::Decode(model.params, model.spec, h, opts);
    tokens = std::move(r.tokens);
    endpoints = std::move(r.endpoints);
    logp = r.logp;
    truncated = r.truncated;
  }
  PrintTokens("ref", grc::StripEnd(ex.y));
  PrintTokens("hyp", tokens);
  std::printf("logp %s%s\n", grc::FormatDouble(logp).c_str(),
              truncated ? " (truncated)" : "");
  if (!out_dir.empty()) {
    const fs::path dir = PrepareDir(out_dir);
    WriteConfigJson(dir, model.config);
    grc::WriteEndpointLog((dir / "endpoints.jsonl").string(), endpoints);
    std::printf("wrote %s\n", (dir / "endpoints.jsonl").string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Softmax-free gated attention toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ckpt_path, inject_fault;
  std::vector<double> nu_list;
  std::uint64_t seed = 20210901;
  std::size_t trials = 200;
  std::size_t utt = 0;
  std::size_t beam = 1;
  double nu = 0.0;

  CLI::App* train = app.add_subcommand("train", "Train on the copy task");
  train->add_option("--config", config_path, "Run configuration JSON");
  CLI::Option* seed_opt =
      train->add_option("--seed", seed, "Override the training seed");
  train->add_option("--out", out_dir, "Artifact directory")->required();

  CLI::App* verify =
      app.add_subcommand("verify", "Run the randomized self-checks");
  verify->add_option("--seed", seed, "Base seed");
  verify->add_option("--trials", trials, "Trials per check");
  verify->add_option("--inject-fault", inject_fault,
                     "Corrupt the named check to prove it can fail");

  CLI::App* sweep =
      app.add_subcommand("sweep", "Latency/accuracy sweep over thresholds");
  sweep->add_option("--checkpoint", ckpt_path, "Trained checkpoint")
      ->required();
  sweep->add_option("--nu", nu_list, "Thresholds, overriding the config list")
      ->delimiter(',');
  sweep->add_option("--out", out_dir, "Artifact directory")->required();

  CLI::App* dump = app.add_subcommand(
      "dump-attention", "Teacher-forced attention maps as CSV and PGM");
  dump->add_option("--checkpoint", ckpt_path, "Trained checkpoint")
      ->required();
  dump->add_option("--utt", utt, "Held-out utterance index");
  dump->add_option("--out", out_dir, "Artifact directory")->required();

  CLI::App* decode =
      app.add_subcommand("decode", "Decode one held-out utterance");
  decode->add_option("--checkpoint", ckpt_path, "Trained checkpoint")
      ->required();
  decode->add_option("--utt", utt, "Held-out utterance index");
  CLI::Option* nu_opt = decode->add_option(
      "--nu", nu, "Streaming stop threshold; omit for offline decoding");
  decode->add_option("--beam", beam, "Offline beam width");
  decode->add_option("--out", out_dir,
                     "Artifact directory for the endpoint log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed())
      return CmdTrain(config_path, seed_opt->count() > 0, seed, out_dir);
    if (verify->parsed()) return CmdVerify(seed, trials, inject_fault);
    if (sweep->parsed()) return CmdSweep(ckpt_path, nu_list, out_dir);
    if (dump->parsed()) return CmdDumpAttention(ckpt_path, utt, out_dir);
    if (decode->parsed())
      return CmdDecode(ckpt_path, utt, nu_opt->count() > 0, nu, beam,
                       out_dir);
  } catch (const grc::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
