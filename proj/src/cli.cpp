// Copyright 2026 The ocrforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ocrforge/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "ocrforge/benchmark.hpp"
#include "ocrforge/config.hpp"
#include "ocrforge/dataprep.hpp"
#include "ocrforge/detect.hpp"
#include "ocrforge/image.hpp"
#include "ocrforge/metrics.hpp"
#include "ocrforge/pipeline.hpp"
#include "ocrforge/vlm.hpp"

namespace ocrforge::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Thrown for bad command-line usage; dispatch() prints the config key
// reference along with the message.
class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << body;
  } else {
    write_file(path, body);
  }
}

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return s.str();
}

std::string slug(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    const bool keep = std::isalnum(c) || c == '.' || c == '_' || c == '-';
    out += keep ? static_cast<char>(std::tolower(c)) : '-';
  }
  return out.empty() ? "model" : out;
}

// ---------------------------------------------------------------------------
// Shared config handling

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
  // Dedicated flags; applied after the file, before --set.
  std::vector<std::pair<std::string, std::string*>> named;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.file, "flat key = value config file");
  cmd->add_option("--set", flags.sets, "override one config key (key=value); repeatable");
}

void bind_flag(CLI::App* cmd, ConfigFlags& flags, const std::string& flag, const std::string& key,
               std::string& storage, const std::string& help) {
  cmd->add_option(flag, storage, help + " (config: " + key + ")");
  flags.named.emplace_back(key, &storage);
}

config::RunConfig resolve(const ConfigFlags& flags) {
  config::RunConfig cfg;
  if (!flags.file.empty()) config::apply_file(cfg, flags.file);
  for (const auto& [key, value] : flags.named) {
    if (!value->empty()) cfg.set(key, *value);
  }
  for (const auto& s : flags.sets) {
    const auto [key, value] = config::split_assignment(s);
    cfg.set(key, value);
  }
  return cfg;
}

std::map<std::string, std::vector<detect::TextBox>> boxes_from_maps(
    const std::filesystem::path& path, const detect::DetectParams& params) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open " + path.string());
  params.validate();
  std::map<std::string, std::vector<detect::TextBox>> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    std::string image;
    std::filesystem::path map_path;
    try {
      const json j = json::parse(line);
      image = j.at("image").get<std::string>();
      map_path = j.at("map").get<std::string>();
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    }
    if (map_path.is_relative()) map_path = path.parent_path() / map_path;
    out[image] = detect::extract_boxes(detect::read_prob_map(map_path), params);
  }
  return out;
}

std::unique_ptr<pipeline::SubprocessBackend> make_backend(const std::string& command) {
  return std::make_unique<pipeline::SubprocessBackend>(
      pipeline::SubprocessBackend::shell(command));
}

// ---------------------------------------------------------------------------
// Subcommands

struct PrepArgs {
  std::string annotations;
  std::string manifest;
  std::string out;
  std::string images_root;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;
  bool per_crop = false;
  std::size_t threads = 4;
};

int run_prep(const PrepArgs& a, std::ostream& out) {
  if (a.annotations.empty() == a.manifest.empty()) {
    throw UsageError("prep needs exactly one of --annotations or --manifest");
  }
  const std::filesystem::path out_dir(a.out);
  dataprep::PairManifest manifest;
  if (!a.annotations.empty()) {
    const auto records = dataprep::read_annotations(a.annotations);
    const auto result = dataprep::crop_dataset(records, out_dir, a.images_root, a.threads);
    manifest = result.manifest;
    out << "regions " << result.stats.regions << "\n"
        << "written " << result.stats.written << "\n"
        << "skipped_empty " << result.stats.skipped_empty << "\n"
        << "skipped_degenerate " << result.stats.skipped_degenerate << "\n"
        << "manifest " << (out_dir / "manifest.jsonl").string() << "\n";
  } else {
    manifest = dataprep::read_manifest(a.manifest);
  }
  if (a.test_fraction > 0.0) {
    const auto [train, test] = dataprep::split(manifest, a.test_fraction, a.seed, a.per_crop);
    dataprep::write_manifest(out_dir / "train.jsonl", train);
    dataprep::write_manifest(out_dir / "test.jsonl", test);
    out << "train " << train.entries.size() << "\n"
        << "test " << test.entries.size() << "\n";
  }
  return kExitOk;
}

struct DetectArgs {
  std::string maps;
  std::string boxes;
  std::string out;
};

int run_detect(const DetectArgs& a, const ConfigFlags& flags, std::ostream& out) {
  if (a.maps.empty() == a.boxes.empty()) {
    throw UsageError("detect needs exactly one of --maps or --boxes");
  }
  const auto cfg = resolve(flags);
  std::vector<detect::BoxRecord> records;
  if (!a.maps.empty()) {
    for (auto& [image, boxes] : boxes_from_maps(a.maps, cfg.detect)) {
      records.push_back({image, std::move(boxes)});
    }
  } else {
    records = detect::read_box_records(a.boxes);
  }
  std::string body;
  for (const auto& r : records) body += detect::to_json(r).dump() + "\n";
  emit(a.out, body, out);
  return kExitOk;
}

struct OcrArgs {
  std::string boxes;
  std::string images_root;
  std::string recognizer;
  std::string out;
};

int run_ocr_cmd(OcrArgs a, const ConfigFlags& flags, std::ostream& out) {
  const auto cfg = resolve(flags);
  if (a.boxes.empty()) a.boxes = cfg.ocr_boxes;
  if (a.recognizer.empty()) a.recognizer = cfg.ocr_recognizer;
  if (a.images_root.empty()) a.images_root = cfg.images_root;
  if (a.boxes.empty()) throw UsageError("ocr needs --boxes (or ocr.boxes)");
  if (a.recognizer.empty()) throw UsageError("ocr needs --recognizer (or ocr.recognizer)");

  const auto records = detect::read_box_records(a.boxes);
  auto backend = make_backend(a.recognizer);
  std::string body;
  for (const auto& r : records) {
    std::filesystem::path p(r.image);
    if (p.is_relative() && !a.images_root.empty()) p = std::filesystem::path(a.images_root) / p;
    const Image image = read_png(p);
    body += pipeline::to_json(pipeline::run_ocr(r.image, image, r.boxes, *backend, cfg.ocr)).dump() +
            "\n";
  }
  emit(a.out, body, out);
  return kExitOk;
}

struct EvalOcrArgs {
  std::string pred;
  std::string ref;
  std::string profile = "exact-nfc";
  bool macro = false;
  std::string format = "text";
};

std::vector<std::pair<std::string, std::string>> read_id_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EnvironmentError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    try {
      const json j = json::parse(line);
      rows.emplace_back(j.at("id").get<std::string>(), j.at("text").get<std::string>());
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    }
    if (!seen.insert(rows.back().first).second) {
      throw ValidationError(where + "duplicate id '" + rows.back().first + "'");
    }
  }
  return rows;
}

int run_eval_ocr(const EvalOcrArgs& a, const ConfigFlags& flags, std::ostream& out) {
  auto cfg = resolve(flags);
  cfg.scoring_profile = a.profile;
  const auto profile = cfg.profile();
  const auto refs = read_id_text(a.ref);
  std::map<std::string, std::string> preds;
  for (auto& [id, text] : read_id_text(a.pred)) preds[id] = std::move(text);

  std::vector<metrics::TextPair> pairs;
  for (const auto& [id, text] : refs) {
    const auto it = preds.find(id);
    if (it == preds.end()) throw ValidationError("no prediction for reference id '" + id + "'");
    pairs.push_back({it->second, text});
  }
  double cer = 0.0;
  try {
    cer = metrics::corpus_cer(pairs, profile,
                              a.macro ? metrics::CerAveraging::kMacro : metrics::CerAveraging::kMicro);
  } catch (const metrics::EmptyReference& e) {
    throw ValidationError("reference '" + refs[e.index().value_or(0)].first +
                          "' is empty after normalization");
  }
  const double acc = metrics::word_accuracy(pairs, profile);
  const char* averaging = a.macro ? "macro" : "micro";

  const auto format = bench::parse_format(a.format);
  if (format == bench::ReportFormat::kJson) {
    const ordered_json j = {{"profile", profile.name}, {"pairs", pairs.size()},
                            {"averaging", averaging}, {"cer", cer},
                            {"word_accuracy", acc}};
    out << j.dump(2) << "\n";
  } else if (format == bench::ReportFormat::kCsv) {
    out << "profile,pairs,averaging,cer,word_accuracy\n"
        << profile.name << ',' << pairs.size() << ',' << averaging << ',' << std::fixed
        << std::setprecision(6) << cer << ',' << acc << "\n";
  } else {
    out << std::left << std::setw(15) << "profile" << profile.name << "\n"
        << std::setw(15) << "pairs" << pairs.size() << "\n"
        << std::setw(15) << "cer" << std::fixed << std::setprecision(2) << 100.0 * cer << "% ("
        << averaging << ")\n"
        << std::setw(15) << "word accuracy" << 100.0 * acc << "%\n";
  }
  return kExitOk;
}

struct EvalVqaArgs {
  std::string benchmark;
  std::string images_root;
  std::string mode;
  std::string replay;
  std::string replay_mode;
  std::string run_dir;
  std::string run_name;
  std::string model;
  std::string boxes;
  std::string recognizer;
};

int run_eval_vqa(const ConfigFlags& flags, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve(flags);
  if (cfg.benchmark.empty()) throw UsageError("eval-vqa needs a benchmark (--benchmark or benchmark =)");
  if (cfg.endpoint.model_id.empty()) {
    throw UsageError("eval-vqa needs a model id (--model or endpoint.model =)");
  }
  cfg.endpoint.validate();

  bench::OcrSetup ocr;
  std::unique_ptr<pipeline::SubprocessBackend> backend;
  const bool ocr_mode = cfg.mode == prompting::PromptMode::kOcr;
  if (ocr_mode) {
    if (cfg.ocr_recognizer.empty() || (cfg.ocr_boxes.empty() && cfg.ocr_maps.empty())) {
      throw prompting::MissingOcr();
    }
  }
  const auto policy = cfg.policy();
  const auto benchmark = bench::load_benchmark(cfg.benchmark, cfg.images_root,
                                               cfg.attach_image || ocr_mode);
  if (ocr_mode) {
    if (!cfg.ocr_boxes.empty()) {
      for (auto& r : detect::read_box_records(cfg.ocr_boxes)) ocr.boxes[r.image] = std::move(r.boxes);
    } else {
      ocr.boxes = boxes_from_maps(cfg.ocr_maps, cfg.detect);
    }
    ocr.options = cfg.ocr;
    backend = make_backend(cfg.ocr_recognizer);
    ocr.backend = backend.get();
  }

  // Completion source.
  std::unique_ptr<vlm::CompletionSource> live;
  std::unique_ptr<vlm::CompletionSource> wrapper;
  std::shared_ptr<vlm::ReplayStore> store;
  vlm::CompletionSource* model = nullptr;
  const bool use_store = !cfg.replay.empty() && cfg.replay_mode != config::ReplayMode::kOff;
  if (use_store && cfg.replay_mode == config::ReplayMode::kReplay) {
    store = std::make_shared<vlm::ReplayStore>(vlm::ReplayStore::load(cfg.replay));
    wrapper = std::make_unique<vlm::ReplayClient>(store);
    model = wrapper.get();
  } else {
    live = std::make_unique<vlm::VlmClient>();
    model = live.get();
    if (use_store) {
      store = std::filesystem::exists(cfg.replay)
                  ? std::make_shared<vlm::ReplayStore>(vlm::ReplayStore::load(cfg.replay))
                  : std::make_shared<vlm::ReplayStore>();
      wrapper = std::make_unique<vlm::RecordingClient>(*live, store);
      model = wrapper.get();
    }
  }

  bench::RunOptions options;
  options.mode = cfg.mode;
  options.templ = cfg.templ;
  options.policy = policy;
  options.endpoint = cfg.endpoint;
  options.concurrency = cfg.concurrency;
  options.attach_image = cfg.attach_image;
  options.config = cfg.to_json();
  const std::string name = cfg.run_name.empty()
                               ? utc_stamp() + "-" + slug(cfg.endpoint.model_id) + "-" +
                                     slug(prompting::mode_name(cfg.mode))
                               : cfg.run_name;
  options.run_dir = std::filesystem::path(cfg.run_dir) / name;

  auto save_store = [&] {
    if (use_store && cfg.replay_mode == config::ReplayMode::kRecord) store->save(cfg.replay);
  };
  bench::RunResult result;
  try {
    result = bench::run_benchmark(benchmark, options, *model, ocr_mode ? &ocr : nullptr);
  } catch (...) {
    save_store();
    err << "partial results in " << options.run_dir->string() << "\n";
    throw;
  }
  save_store();
  out << bench::emit_report(result.report, bench::ReportFormat::kText);
  out << "run directory: " << options.run_dir->string() << "\n";
  return kExitOk;
}

struct RescoreArgs {
  std::string verdicts;
  std::string manifest;
  std::string out;
  std::string format = "text";
};

int run_rescore(const RescoreArgs& a, std::ostream& out) {
  const auto verdicts = bench::read_verdicts(a.verdicts);
  ordered_json manifest = ordered_json::object();
  if (!a.manifest.empty()) {
    try {
      manifest = ordered_json::parse(read_file(a.manifest));
    } catch (const json::parse_error& e) {
      throw ValidationError(a.manifest + ": " + e.what());
    }
  }
  const auto report = bench::rescore_spacing(verdicts, std::move(manifest));
  emit(a.out, bench::emit_report(report, bench::parse_format(a.format)), out);
  return kExitOk;
}

struct ReportArgs {
  std::string report;
  std::string format = "text";
  std::string out;
};

int run_report(const ReportArgs& a, std::ostream& out) {
  const auto report = bench::read_report(a.report);
  emit(a.out, bench::emit_report(report, bench::parse_format(a.format)), out);
  return kExitOk;
}

void print_keys(std::ostream& err) {
  err << "\nconfig keys (file: key = value, flags: --set key=value):\n";
  for (const auto& [key, help] : config::known_keys()) {
    err << "  " << std::left << std::setw(26) << key << help << "\n";
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ocrforge: OCR-augmented VQA evaluation toolkit", "ocrforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bench::kToolkitVersion));

  PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "crop annotated pages into recognition pairs and split them");
  prep_cmd->add_option("--annotations", prep.annotations, "annotation JSONL");
  prep_cmd->add_option("--manifest", prep.manifest, "existing pair manifest to split");
  prep_cmd->add_option("--out", prep.out, "output directory")->required();
  prep_cmd->add_option("--images-root", prep.images_root, "directory image paths resolve against");
  prep_cmd->add_option("--test-fraction", prep.test_fraction, "test share of source pages")
      ->check(CLI::Range(0.0, 1.0));
  prep_cmd->add_option("--seed", prep.seed, "split seed");
  prep_cmd->add_flag("--per-crop", prep.per_crop, "split individual crops instead of pages");
  prep_cmd->add_option("--threads", prep.threads, "worker threads")->check(CLI::PositiveNumber);

  ConfigFlags detect_flags;
  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "probability maps or raw boxes to box records");
  add_config_flags(detect_cmd, detect_flags);
  detect_cmd->add_option("--maps", det.maps, "JSONL of {image, map}");
  detect_cmd->add_option("--boxes", det.boxes, "box records JSONL to validate and normalize");
  detect_cmd->add_option("--out", det.out, "output JSONL (default stdout)");

  ConfigFlags ocr_flags;
  OcrArgs ocr;
  auto* ocr_cmd = app.add_subcommand("ocr", "box records to OCR documents");
  add_config_flags(ocr_cmd, ocr_flags);
  ocr_cmd->add_option("--boxes", ocr.boxes, "box records JSONL");
  ocr_cmd->add_option("--images-root", ocr.images_root, "directory image paths resolve against");
  ocr_cmd->add_option("--recognizer", ocr.recognizer, "recognizer backend command");
  ocr_cmd->add_option("--out", ocr.out, "output JSONL (default stdout)");

  ConfigFlags eval_ocr_flags;
  EvalOcrArgs eval_ocr;
  auto* eval_ocr_cmd = app.add_subcommand("eval-ocr", "CER and word accuracy of recognition output");
  add_config_flags(eval_ocr_cmd, eval_ocr_flags);
  eval_ocr_cmd->add_option("--pred", eval_ocr.pred, "predictions JSONL {id, text}")->required();
  eval_ocr_cmd->add_option("--ref", eval_ocr.ref, "references JSONL {id, text}")->required();
  eval_ocr_cmd->add_option("--profile", eval_ocr.profile, "normalization profile");
  eval_ocr_cmd->add_flag("--macro", eval_ocr.macro, "average CER per pair instead of per character");
  eval_ocr_cmd->add_option("--format", eval_ocr.format, "text | json | csv");

  ConfigFlags vqa_flags;
  EvalVqaArgs vqa;
  auto* vqa_cmd = app.add_subcommand("eval-vqa", "run the VQA benchmark, Base or OCR prompting");
  add_config_flags(vqa_cmd, vqa_flags);
  bind_flag(vqa_cmd, vqa_flags, "--benchmark", "benchmark", vqa.benchmark, "benchmark JSONL");
  bind_flag(vqa_cmd, vqa_flags, "--images-root", "images_root", vqa.images_root, "image directory");
  bind_flag(vqa_cmd, vqa_flags, "--mode", "mode", vqa.mode, "base | ocr");
  bind_flag(vqa_cmd, vqa_flags, "--replay", "replay", vqa.replay, "replay store JSONL");
  bind_flag(vqa_cmd, vqa_flags, "--replay-mode", "replay_mode", vqa.replay_mode, "replay | record | off");
  bind_flag(vqa_cmd, vqa_flags, "--run-dir", "run_dir", vqa.run_dir, "parent of run directories");
  bind_flag(vqa_cmd, vqa_flags, "--run-name", "run_name", vqa.run_name, "run directory name");
  bind_flag(vqa_cmd, vqa_flags, "--model", "endpoint.model", vqa.model, "model id");
  bind_flag(vqa_cmd, vqa_flags, "--boxes", "ocr.boxes", vqa.boxes, "box records JSONL");
  bind_flag(vqa_cmd, vqa_flags, "--recognizer", "ocr.recognizer", vqa.recognizer, "recognizer command");

  RescoreArgs rescore;
  auto* rescore_cmd = app.add_subcommand("rescore", "spacing-forgiven report from stored verdicts");
  rescore_cmd->add_option("--verdicts", rescore.verdicts, "verdicts JSONL")->required();
  rescore_cmd->add_option("--manifest", rescore.manifest, "run manifest to carry into the report");
  rescore_cmd->add_option("--format", rescore.format, "text | json | csv");
  rescore_cmd->add_option("--out", rescore.out, "output file (default stdout)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "render a stored report");
  report_cmd->add_option("--report", report.report, "report JSON")->required();
  report_cmd->add_option("--format", report.format, "text | json | csv");
  report_cmd->add_option("--out", report.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (prep_cmd->parsed()) return run_prep(prep, out);
    if (detect_cmd->parsed()) return run_detect(det, detect_flags, out);
    if (ocr_cmd->parsed()) return run_ocr_cmd(ocr, ocr_flags, out);
    if (eval_ocr_cmd->parsed()) return run_eval_ocr(eval_ocr, eval_ocr_flags, out);
    if (vqa_cmd->parsed()) return run_eval_vqa(vqa_flags, out, err);
    if (rescore_cmd->parsed()) return run_rescore(rescore, out);
    if (report_cmd->parsed()) return run_report(report, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    print_keys(err);
    return kExitValidation;
  } catch (const config::UnknownKey& e) {
    err << "error: " << e.what() << "\n";
    print_keys(err);
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EnvironmentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const vlm::ContentRefused& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    // Filesystem and system errors.
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  }
  return kExitValidation;
}

}  // namespace ocrforge::cli
