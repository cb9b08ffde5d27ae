// bossal: run active-learning experiments, aggregate reports, generate
// synthetic feature files.
//
// Exit codes: 0 success, 1 runtime failure, 2 validation failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bossal/config.hpp"
#include "bossal/data.hpp"
#include "bossal/harness.hpp"
#include "bossal/report.hpp"

namespace fs = std::filesystem;
using namespace bossal;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kValidationFailure = 2;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path default_out_root() {
  if (const char* env = std::getenv("BOSSAL_OUT"); env != nullptr && *env != '\0') return env;
  return "runs";
}

struct RunArgs {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
};

int cmd_run(const RunArgs& args) {
  const fs::path config_path = args.config;
  const auto doc = config::read_document(config_path);
  const auto spec = config::bind(doc, config_path.parent_path(), args.preset, args.seed);
  const Dataset dataset = load_feature_file(spec.dataset);
  spec.experiment.validate(dataset);

  const fs::path out = args.out.empty() ? default_out_root() / config_path.stem() : fs::path(args.out);
  fs::create_directories(out);
  report::RunManifest manifest;
  manifest.config_hash = spec.hash;
  manifest.started = utc_now();

  const auto curves = run_experiment(dataset, spec.experiment, args.jobs);

  report::write_text(out / "curves.csv", report::curves_csv(curves));
  report::write_text(out / "summary.json", report::summary_json(curves, spec.experiment).dump(2) + "\n");
  const nlohmann::json config_json = {
      {"config", spec.canonical},
      {"config_hash", spec.hash},
      {"resolved",
       {{"selector", selector_name(spec.experiment.selector)},
        {"b", spec.experiment.b},
        {"cycles", spec.experiment.cycles},
        {"repetitions", spec.experiment.repetitions},
        {"master_seed", spec.experiment.master_seed},
        {"dataset", spec.dataset.string()}}}};
  report::write_text(out / "config.json", config_json.dump(2) + "\n");
  manifest.finished = utc_now();
  manifest.outputs = {{"curves", (out / "curves.csv").string()},
                      {"summary", (out / "summary.json").string()},
                      {"config", (out / "config.json").string()},
                      {"manifest", (out / "manifest.json").string()}};
  report::write_text(out / "manifest.json", manifest.to_json().dump(2) + "\n");
  std::cout << "wrote " << out.string() << " (" << curves.size() << " repetitions, config " << spec.hash << ")\n";
  return kOk;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& mode, const std::string& out_arg) {
  std::vector<report::RunData> runs;
  for (const auto& d : dirs) runs.push_back(report::load_run(d));
  report::Table table;
  if (mode == "curves")
    table = report::curves_table(runs);
  else if (mode == "relative")
    table = report::relative_table(runs);
  else if (mode == "aulc")
    table = report::aulc_table(runs);
  else if (mode == "picks")
    table = report::picks_table(runs);
  else
    throw ValidationError("unknown report mode '" + mode + "'");

  const fs::path out = out_arg.empty() ? default_out_root() / "report" : fs::path(out_arg);
  fs::create_directories(out);
  report::write_text(out / (mode + ".csv"), table.csv());
  report::write_text(out / (mode + ".dat"), table.gnuplot());
  std::cout << "wrote " << (out / (mode + ".csv")).string() << " and " << (out / (mode + ".dat")).string() << "\n";
  return kOk;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out) {
  const Dataset d = generate_synthetic(spec);
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_feature_file(d, out);
  std::cout << "wrote " << out << " (N=" << d.size() << ", D=" << d.dim() << ", K=" << d.num_classes << ")\n";
  return kOk;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const config::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kValidationFailure;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bossal: pool-based active learning with the BoSS oracle over precomputed features"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", run_args.config, "Experiment config (TOML subset)")->required();
  run->add_option("--out", run_args.out, "Output directory (default $BOSSAL_OUT/<config stem> or runs/<stem>)");
  run->add_option("--jobs", run_args.jobs, "Repetitions run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_args.seed, "Override master_seed");
  run->add_option("--preset", run_args.preset,
                  "Named preset: boss, boss-s, boss-xs, boss-xxs, {cdo,sas}-aligned-{b10,b20,b50,b50-dtd}");

  std::vector<std::string> report_dirs;
  std::string report_mode = "curves";
  std::string report_out;
  auto* rep = app.add_subcommand("report", "Aggregate run directories into plot-ready tables");
  rep->add_option("runs", report_dirs, "Run directories")->required();
  rep->add_option("--mode", report_mode, "curves | relative | aulc | picks")
      ->check(CLI::IsMember({"curves", "relative", "aulc", "picks"}));
  rep->add_option("--out", report_out, "Output directory");

  SyntheticSpec synth_spec;
  std::string synth_out;
  auto* syn = app.add_subcommand("synth", "Write a synthetic Gaussian-mixture ALFX feature file");
  syn->add_option("--out", synth_out, "Output .alfx path")->required();
  syn->add_option("--classes", synth_spec.num_classes, "Number of classes K");
  syn->add_option("--dim", synth_spec.dim, "Feature dimension D");
  syn->add_option("--per-class", synth_spec.per_class, "Instances per class");
  syn->add_option("--spread", synth_spec.cluster_spread, "Within-class standard deviation");
  syn->add_option("--separation", synth_spec.class_separation, "Mean inter-centroid distance");
  syn->add_option("--seed", synth_spec.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationFailure;
  }

  if (run->parsed()) return guarded([&] { return cmd_run(run_args); });
  if (rep->parsed()) return guarded([&] { return cmd_report(report_dirs, report_mode, report_out); });
  if (syn->parsed()) return guarded([&] { return cmd_synth(synth_spec, synth_out); });
  return kValidationFailure;
}
