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

#include <iomanip>
#include <sstream>

#include "ocrforge/benchmark.hpp"
#include "ocrforge/image.hpp"

namespace ocrforge::bench {

using nlohmann::json;
using nlohmann::ordered_json;

void RunReport::validate() const {
  TaskTally sum;
  for (Task t : kTasks) {
    const auto& tally = (*this)[t];
    if (tally.correct > tally.samples || tally.forgiven > tally.samples) {
      throw ValidationError("task " + std::string(task_key(t)) +
                            ": correct count exceeds sample count");
    }
    if (tally.forgiven < tally.correct) {
      throw ValidationError("task " + std::string(task_key(t)) +
                            ": forgiven count below strict count");
    }
    sum.samples += tally.samples;
    sum.correct += tally.correct;
    sum.forgiven += tally.forgiven;
  }
  if (!(sum == total)) throw ValidationError("report totals do not match the per-task sums");
}

RunReport rescore_spacing(std::span<const Verdict> verdicts, ordered_json manifest) {
  RunReport report;
  report.manifest = std::move(manifest);
  for (const auto& v : verdicts) {
    auto& tally = report.tasks[static_cast<std::size_t>(v.task)];
    ++tally.samples;
    if (v.correct) {
      ++tally.correct;
      ++tally.forgiven;
    } else if (v.error_category == ErrorCategory::kSpacingOnly) {
      ++tally.forgiven;
    }
  }
  for (const auto& tally : report.tasks) {
    report.total.samples += tally.samples;
    report.total.correct += tally.correct;
    report.total.forgiven += tally.forgiven;
  }
  return report;
}

ReportFormat parse_format(std::string_view key) {
  if (key == "text" || key == "text-table") return ReportFormat::kText;
  if (key == "json") return ReportFormat::kJson;
  if (key == "csv") return ReportFormat::kCsv;
  throw ValidationError("unknown report format '" + std::string(key) +
                        "' (expected text, json or csv)");
}

namespace {

std::string manifest_string(const ordered_json& manifest, const char* key) {
  if (manifest.is_object() && manifest.contains(key) && manifest[key].is_string()) {
    return manifest[key].get<std::string>();
  }
  return "-";
}

ordered_json tally_json(const TaskTally& t) {
  return {{"samples", t.samples}, {"correct", t.correct}, {"forgiven", t.forgiven}};
}

TaskTally tally_from_json(const ordered_json& j) {
  return {j.at("samples").get<std::size_t>(), j.at("correct").get<std::size_t>(),
          j.at("forgiven").get<std::size_t>()};
}

// "70" or, when spacing forgiveness changes the count, "70(95)".
std::string cell(const TaskTally& t) {
  std::string s = std::to_string(t.correct);
  if (t.forgiven != t.correct) s += "(" + std::to_string(t.forgiven) + ")";
  return s;
}

std::string render_text(const RunReport& report) {
  std::vector<std::string> header = {"Model", "Prompt"};
  std::vector<std::string> row = {manifest_string(report.manifest, "model"),
                                  manifest_string(report.manifest, "mode")};
  std::vector<std::string> of = {"", "samples"};
  for (Task t : kTasks) {
    header.emplace_back(task_title(t));
    row.push_back(cell(report[t]));
    of.push_back(std::to_string(report[t].samples));
  }
  header.emplace_back("Total");
  row.push_back(cell(report.total));
  of.push_back(std::to_string(report.total.samples));

  std::vector<std::size_t> width(header.size());
  for (const auto* line : {&header, &row, &of}) {
    for (std::size_t i = 0; i < line->size(); ++i) {
      width[i] = std::max(width[i], (*line)[i].size());
    }
  }
  std::ostringstream out;
  for (const auto* line : {&header, &row, &of}) {
    for (std::size_t i = 0; i < line->size(); ++i) {
      if (i > 0) out << "  ";
      // Name columns left-aligned, counts right-aligned.
      if (i < 2) {
        out << std::left << std::setw(static_cast<int>(width[i])) << (*line)[i];
      } else {
        out << std::right << std::setw(static_cast<int>(width[i])) << (*line)[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const RunReport& report) {
  const std::string model = manifest_string(report.manifest, "model");
  const std::string mode = manifest_string(report.manifest, "mode");
  std::ostringstream out;
  out << "model,prompt,task,samples,correct,forgiven\n";
  auto emit = [&](std::string_view task, const TaskTally& t) {
    out << model << ',' << mode << ',' << task << ',' << t.samples << ',' << t.correct << ','
        << t.forgiven << '\n';
  };
  for (Task t : kTasks) emit(task_key(t), report[t]);
  emit("total", report.total);
  return out.str();
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText:
      return render_text(report);
    case ReportFormat::kCsv:
      return render_csv(report);
    case ReportFormat::kJson:
      break;
  }
  ordered_json tasks = ordered_json::object();
  for (Task t : kTasks) tasks[std::string(task_key(t))] = tally_json(report[t]);
  const ordered_json j = {{"manifest", report.manifest},
                          {"tasks", std::move(tasks)},
                          {"total", tally_json(report.total)}};
  return j.dump(2) + "\n";
}

RunReport report_from_json(const ordered_json& j) {
  RunReport report;
  try {
    if (j.contains("manifest")) report.manifest = j.at("manifest");
    for (Task t : kTasks) {
      report.tasks[static_cast<std::size_t>(t)] =
          tally_from_json(j.at("tasks").at(std::string(task_key(t))));
    }
    report.total = tally_from_json(j.at("total"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  report.validate();
  return report;
}

RunReport read_report(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace ocrforge::bench
