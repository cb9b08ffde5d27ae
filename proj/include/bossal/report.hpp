#pragma once

// Run outputs and their readers:
//   curves.csv    repetition,cycle,labeled_size,accuracy,picked_strategy,retrain_count,processed_instances
//   summary.json  per-regime AULC mean/SE, final accuracy, pick frequencies (format "bossal-summary", v1)
//   manifest.json config hash, engine version, timestamps, output paths

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bossal/harness.hpp"

namespace bossal::report {

inline constexpr const char* kEngineVersion = "1.0.0";
inline constexpr const char* kCurvesHeader =
    "repetition,cycle,labeled_size,accuracy,picked_strategy,retrain_count,processed_instances";
inline constexpr int kSummaryVersion = 1;

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string curves_csv(std::span<const LearningCurve> curves) {
  std::string out = std::string(kCurvesHeader) + "\n";
  for (const auto& curve : curves) {
    for (std::size_t c = 0; c < curve.cycles.size(); ++c) {
      const auto& r = curve.cycles[c];
      out += std::to_string(curve.repetition) + "," + std::to_string(c) + "," + std::to_string(r.labeled_size) + "," +
             format_real(r.accuracy) + "," + (r.picked ? std::string(to_string(*r.picked)) : std::string()) + "," +
             std::to_string(r.retrains) + "," + std::to_string(r.processed_instances) + "\n";
    }
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Parses curves.csv back into curves (accuracy, picks and counters only).
inline std::vector<LearningCurve> parse_curves_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCurvesHeader) throw FormatError("curves.csv: unexpected header");
  std::vector<LearningCurve> curves;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 7) throw FormatError("curves.csv line " + std::to_string(line_no) + ": expected 7 columns");
    try {
      const int rep = std::stoi(f[0]);
      const auto cycle = static_cast<std::size_t>(std::stoul(f[1]));
      if (curves.empty() || curves.back().repetition != rep) {
        curves.emplace_back();
        curves.back().repetition = rep;
      }
      auto& cycles = curves.back().cycles;
      if (cycle != cycles.size())
        throw FormatError("curves.csv line " + std::to_string(line_no) + ": cycles out of order");
      CycleRecord r;
      r.labeled_size = std::stoll(f[2]);
      r.accuracy = std::stod(f[3]);
      if (!f[4].empty()) r.picked = parse_strategy(f[4]);
      r.retrains = std::stoll(f[5]);
      r.processed_instances = std::stoll(f[6]);
      cycles.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("curves.csv line " + std::to_string(line_no) + ": malformed number");
    } catch (const ValidationError& e) {
      throw FormatError("curves.csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return curves;
}

inline nlohmann::json summary_json(std::span<const LearningCurve> curves, const ExperimentConfig& cfg) {
  nlohmann::json s;
  s["format"] = "bossal-summary";
  s["version"] = kSummaryVersion;
  s["selector"] = selector_name(cfg.selector);
  s["b"] = cfg.b;
  s["cycles"] = cfg.cycles;
  s["repetitions"] = curves.size();
  nlohmann::json aulc_json = nlohmann::json::object();
  for (Regime r : kRegimes) {
    if (r != Regime::full && cfg.cycles < 20) continue;
    const MeanSe m = aulc_stats(curves, r);
    aulc_json[std::string(to_string(r))] = {{"mean", m.mean}, {"se", m.se}};
  }
  s["aulc"] = aulc_json;
  std::vector<double> final_acc;
  for (const auto& c : curves) final_acc.push_back(c.cycles.back().accuracy);
  const MeanSe fin = mean_se(final_acc);
  s["final_accuracy"] = {{"mean", fin.mean}, {"se", fin.se}};
  switch (kind_of(cfg.selector)) {
    case SelectorKind::strategy: break;
    case SelectorKind::cdo: s["cost_model"] = "processed_instances = m*(b*|L| + b(b+1)/2) per selection"; break;
    case SelectorKind::sas: s["cost_model"] = "processed_instances = (s+g)*(|L|+b) per selection"; break;
    case SelectorKind::boss:
      // Counters follow the formula exactly: b=50, |L|=50, |S|=10, T=100 gives 10,000.
      s["cost_model"] = "processed_instances = floor(T/|S|)*|S|*(|L|+b) per selection";
      break;
  }
  if (kind_of(cfg.selector) == SelectorKind::boss) {
    nlohmann::json picks = nlohmann::json::array();
    for (const auto& row : pick_frequencies(curves)) {
      nlohmann::json r = nlohmann::json::object();
      for (const auto& [id, f] : row) r[std::string(to_string(id))] = f;
      picks.push_back(r);
    }
    s["pick_frequencies"] = picks;
  }
  return s;
}

struct RunManifest {
  std::string config_hash;
  std::string engine_version = kEngineVersion;
  std::string started;
  std::string finished;
  std::map<std::string, std::string> outputs;

  nlohmann::json to_json() const {
    return {{"config_hash", config_hash}, {"engine_version", engine_version}, {"started", started},
            {"finished", finished},       {"outputs", outputs}};
  }
};

// ---------------------------------------------------------------------------
// Aggregation across run directories
// ---------------------------------------------------------------------------

struct RunData {
  std::filesystem::path dir;
  nlohmann::json config;  // config.json written by `run`
  std::vector<LearningCurve> curves;

  std::string selector() const {
    const auto it = config.find("resolved");
    return it != config.end() ? it->value("selector", std::string("?")) : std::string("?");
  }
  std::string label() const { return dir.filename().string().empty() ? dir.parent_path().filename().string()
                                                                     : dir.filename().string(); }
};

inline RunData load_run(const std::filesystem::path& dir) {
  RunData run;
  run.dir = dir;
  run.curves = parse_curves_csv(read_text(dir / "curves.csv"));
  try {
    run.config = nlohmann::json::parse(read_text(dir / "config.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir.string() + "/config.json: " + e.what());
  }
  if (run.curves.empty()) throw FormatError(dir.string() + "/curves.csv: no rows");
  return run;
}

inline std::vector<double> cycle_se(std::span<const LearningCurve> curves, std::size_t cycle) {
  std::vector<double> v;
  for (const auto& c : curves) v.push_back(c.cycles[cycle].accuracy);
  return v;
}

/// Tabular outputs: a CSV and a whitespace-separated .dat for gnuplot.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }

  std::string gnuplot() const {
    std::string out = "#";
    for (const auto& c : columns) out += " " + c;
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? " " : "") + (r[i].empty() ? std::string("-") : r[i]);
      out += "\n";
    }
    return out;
  }
};

inline void require_compatible(std::span<const RunData> runs) {
  require(!runs.empty(), "report: no run directories given");
  const auto n = runs.front().curves.front().cycles.size();
  const auto b0 = runs.front().curves.front().cycles.front().labeled_size;
  for (const auto& r : runs) {
    for (const auto& c : r.curves)
      require(c.cycles.size() == n && c.cycles.front().labeled_size == b0,
              "report: runs do not share A and b (" + r.dir.string() + ")");
  }
}

inline Table curves_table(std::span<const RunData> runs) {
  require_compatible(runs);
  Table t{{"run", "selector", "cycle", "labeled_size", "mean_accuracy", "se"}, {}};
  for (const auto& run : runs) {
    const auto mean = mean_curve(run.curves);
    for (std::size_t c = 0; c < mean.size(); ++c)
      t.rows.push_back({run.label(), run.selector(), std::to_string(c),
                        std::to_string(run.curves.front().cycles[c].labeled_size), format_real(mean[c]),
                        format_real(mean_se(cycle_se(run.curves, c)).se)});
  }
  return t;
}

inline Table relative_table(std::span<const RunData> runs) {
  require_compatible(runs);
  const RunData* baseline = nullptr;
  for (const auto& r : runs)
    if (r.selector() == "random") baseline = &r;
  require(baseline != nullptr, "report: relative mode needs a run with selector = random");
  const auto base = mean_curve(baseline->curves);
  Table t{{"run", "selector", "cycle", "mean_relative_accuracy", "se"}, {}};
  for (const auto& run : runs) {
    std::vector<std::vector<double>> rel;
    for (const auto& c : run.curves) rel.push_back(relative_curve(c.accuracies(), base));
    // Difference of means, so a run compared against itself is exactly zero.
    const auto mean = relative_curve(mean_curve(run.curves), base);
    for (std::size_t c = 0; c < mean.size(); ++c) {
      std::vector<double> at;
      for (const auto& r : rel) at.push_back(r[c]);
      t.rows.push_back({run.label(), run.selector(), std::to_string(c), format_real(mean[c]),
                        format_real(mean_se(at).se)});
    }
  }
  return t;
}

inline Table aulc_table(std::span<const RunData> runs) {
  require_compatible(runs);
  Table t{{"run", "selector", "regime", "aulc_mean", "aulc_se"}, {}};
  for (const auto& run : runs) {
    const auto a = static_cast<int>(run.curves.front().cycles.size()) - 1;
    for (Regime r : kRegimes) {
      if (r != Regime::full && a < 20) continue;
      const MeanSe m = aulc_stats(run.curves, r);
      t.rows.push_back({run.label(), run.selector(), std::string(to_string(r)), format_real(m.mean),
                        format_real(m.se)});
    }
  }
  return t;
}

inline Table picks_table(std::span<const RunData> runs) {
  require_compatible(runs);
  Table t{{"run", "cycle", "strategy", "frequency"}, {}};
  for (const auto& run : runs) {
    const PickTable picks = pick_frequencies(run.curves);
    for (std::size_t c = 0; c < picks.size(); ++c)
      for (const auto& [id, f] : picks[c])
        t.rows.push_back({run.label(), std::to_string(c + 1), std::string(to_string(id)), format_real(f)});
  }
  return t;
}

}  // namespace bossal::report
