// fleetpark: single runs, sweeps, plots, trace frames and maneuver-library dumps.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fleetpark/config_io.hpp"
#include "fleetpark/engine.hpp"
#include "fleetpark/experiment.hpp"
#include "fleetpark/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace fleetpark;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kInvalidCells = 3 };

struct Common {
  std::string layout;
  std::string kinematics;
};

struct RunOverrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<int> delta_p;
  std::optional<std::string> lanes;
  std::optional<double> mean_interarrival;
  std::optional<int> vehicles;
  std::string out;
  bool trace = false;
  std::string trace_file;
};

LotLayout load_layout(const Common& c) {
  return build_layout(c.layout.empty() ? default_lot_config() : load_lot_config(c.layout));
}

KinematicParams load_kinematics(const Common& c, KinematicParams base = {}) {
  return c.kinematics.empty() ? base : kinematics_from_json(read_json_file(c.kinematics), base);
}

void add_run_flags(CLI::App* app, RunOverrides& o) {
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--policy", o.policy, "Spot policy: rs, is or fs");
  app->add_option("--delta-p", o.delta_p, "Search interval");
  app->add_option("--lanes", o.lanes, "Lane opening: 1L or 2L");
  app->add_option("--mean-interarrival", o.mean_interarrival, "Mean interarrival time [s]");
  app->add_option("--vehicles", o.vehicles, "Fleet size");
}

RunConfig apply(const RunOverrides& o, RunConfig c) {
  if (o.seed) c.seed = *o.seed;
  if (o.policy) c.policy.kind = parse_policy(*o.policy);
  if (o.delta_p) c.policy.delta_p = *o.delta_p;
  if (o.lanes) c.lanes.mode = parse_lane_mode(*o.lanes);
  if (o.mean_interarrival) c.mean_interarrival_s = *o.mean_interarrival;
  if (o.vehicles) c.n_vehicles = *o.vehicles;
  return c;
}

int cmd_run(const Common& common, const RunOverrides& o) {
  const LotLayout layout = load_layout(common);
  const KinematicParams params = load_kinematics(common);
  RunConfig cfg = o.config.empty() ? RunConfig{} : run_config_from_json(read_json_file(o.config));
  cfg = apply(o, cfg);
  cfg.dt_s = params.dt_s;
  const ManeuverLibrary lib = generate_maneuver_library(layout, params);
  validate(cfg, layout, params);

  std::optional<std::ofstream> trace;
  fs::path trace_path;
  if (!o.trace_file.empty()) {
    trace_path = o.trace_file;
  } else if (o.trace) {
    trace_path = fs::path(o.out.empty() ? "." : o.out) / "traces" /
                 ("run_seed" + std::to_string(cfg.seed) + ".log");
  }
  if (!trace_path.empty()) {
    if (trace_path.has_parent_path()) fs::create_directories(trace_path.parent_path());
    trace.emplace(trace_path);
    if (!*trace) throw std::runtime_error("cannot write " + trace_path.string());
  }
  const RunMetrics m = run_simulation(lib, cfg, trace ? &*trace : nullptr);

  nlohmann::json summary{{"config", to_json(cfg)},
                         {"mtt_s", std::isnan(m.mtt) ? nlohmann::json(nullptr) : nlohmann::json(m.mtt)},
                         {"mql", m.mql},
                         {"finished", m.finished},
                         {"rejected", m.rejected},
                         {"stalled", m.stalled},
                         {"stall_reason", m.stall_reason},
                         {"steps", m.steps},
                         {"deadlocks_detected", m.deadlocks_detected},
                         {"deadlocks_resolved", m.deadlocks_resolved}};
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "run.json") << summary.dump(2) << '\n';
  }
  std::printf("mtt %.3f s  mql %d  parked %d  rejected %d  steps %lld%s\n", m.mtt, m.mql, m.finished,
              m.rejected, static_cast<long long>(m.steps), m.stalled ? "  STALLED" : "");
  if (m.stalled) std::printf("stall: %s\n", m.stall_reason.c_str());
  if (!trace_path.empty()) std::printf("trace: %s\n", trace_path.string().c_str());
  return m.stalled ? kFailure : kOk;
}

int cmd_sweep(const Common& common, const std::string& spec_file, const std::string& out, int jobs,
              bool resume) {
  const SweepSpec spec = sweep_from_json(read_json_file(spec_file));
  const LotLayout layout = load_layout(common);
  const KinematicParams params = load_kinematics(common, spec.kinematics);
  const ManeuverLibrary lib = generate_maneuver_library(layout, params);

  SweepOptions opts;
  opts.jobs = jobs;
  if (resume) opts.resume_dir = fs::path(out) / "cells";
  std::size_t last_pct = 101;
  opts.progress = [&](const SweepProgress& p) {
    const std::size_t pct = 100 * p.done / std::max<std::size_t>(1, p.total);
    if (pct != last_pct && pct % 5 == 0) {
      std::fprintf(stderr, "\r%s: %zu/%zu runs", spec.name.c_str(), p.done, p.total);
      last_pct = pct;
    }
  };
  const auto table = run_sweep(spec, lib, opts);
  std::fprintf(stderr, "\n");
  for (const std::string& w : emit_outputs(out, table)) std::fprintf(stderr, "warning: %s\n", w.c_str());

  int invalid = 0;
  for (const AggregateCell& c : table) {
    if (!c.valid) {
      ++invalid;
      std::fprintf(stderr, "invalid cell %s: %d of %d runs stalled\n", cell_label(c.key).c_str(),
                   c.n_stalled, c.n_runs);
    }
  }
  std::printf("%zu cells written to %s\n", table.size(), out.c_str());
  return invalid ? kInvalidCells : kOk;
}

int cmd_plot(const std::string& in, const std::string& out) {
  std::ifstream f(in);
  if (!f) throw ConfigError("cannot open " + in);
  const auto table = read_results_csv(f);
  if (table.empty()) throw ConfigError(in + " has no rows");
  for (const std::string& w : emit_outputs(out, table)) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("plots written to %s\n", (fs::path(out) / "plots").string().c_str());
  return kOk;
}

int cmd_trace_render(const Common& common, const std::string& in, const std::string& out,
                     int stride) {
  std::ifstream f(in);
  if (!f) throw ConfigError("cannot open " + in);
  const LotLayout layout = load_layout(common);
  const KinematicParams params = load_kinematics(common);
  const int n = render_trace_frames(f, layout, params.body, stride, out);
  std::printf("%d frames written to %s\n", n, out.c_str());
  return kOk;
}

int cmd_library(const Common& common, const std::string& out, const std::string& csv_dir) {
  const LotLayout layout = load_layout(common);
  const KinematicParams params = load_kinematics(common);
  const ManeuverLibrary lib = generate_maneuver_library(layout, params);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    save_library(f, lib);
  }
  if (!csv_dir.empty()) {
    fs::create_directories(csv_dir);
    for (const auto& t : lib.templates()) {
      char name[96];
      std::snprintf(name, sizeof name, "lane%d_x%02d_y%d_%s_r%d.csv", t->spot.lane, t->spot.x,
                    t->spot.y, std::string(to_string(t->key.direction)).c_str(),
                    t->key.offset_class);
      std::ofstream f(fs::path(csv_dir) / name);
      write_template_csv(f, *t);
    }
  }
  int forward = 0;
  int longest = 0;
  for (const auto& t : lib.templates()) {
    forward += t->key.direction == ParkDirection::kForward;
    longest = std::max(longest, t->duration_steps());
  }
  std::printf("%zu templates (%d forward, %zu reverse), longest %d steps\n", lib.templates().size(),
              forward, lib.templates().size() - static_cast<std::size_t>(forward), longest);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fleet parking simulator"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--layout", common.layout, "Layout JSON (default: bundled lot)")
      ->check(CLI::ExistingFile);
  app.add_option("--kinematics", common.kinematics, "Kinematic parameter JSON")
      ->check(CLI::ExistingFile);

  RunOverrides run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one episode");
  run_cmd->add_option("--config", run.config, "Run config JSON")->check(CLI::ExistingFile);
  add_run_flags(run_cmd, run);
  run_cmd->add_option("--out", run.out, "Output directory for run.json and traces/");
  run_cmd->add_flag("--trace", run.trace, "Write a trace under <out>/traces/");
  run_cmd->add_option("--trace-file", run.trace_file, "Write the trace to this path");

  std::string spec_file;
  std::string sweep_out = "results";
  int jobs = 1;
  bool resume = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep_cmd->add_option("spec", spec_file, "Sweep spec JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", sweep_out, "Output directory");
  sweep_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--resume", resume, "Keep per-cell results under <out>/cells and reuse them");

  std::string plot_in;
  std::string plot_out = "results";
  auto* plot_cmd = app.add_subcommand("plot", "Render plots from results.csv");
  plot_cmd->add_option("results", plot_in, "results.csv")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_out, "Output directory");

  std::string trace_in;
  std::string frames_out = "frames";
  int stride = 10;
  auto* trace_cmd = app.add_subcommand("trace-render", "Render a trace as SVG frames");
  trace_cmd->add_option("trace", trace_in, "Trace file")->required()->check(CLI::ExistingFile);
  trace_cmd->add_option("--out", frames_out, "Output directory");
  trace_cmd->add_option("--stride", stride, "Render every n-th step")->check(CLI::PositiveNumber);

  std::string lib_out;
  std::string lib_csv;
  auto* lib_cmd = app.add_subcommand("library", "Generate and inspect maneuver templates");
  lib_cmd->add_option("--out", lib_out, "Write the library as JSON");
  lib_cmd->add_option("--csv", lib_csv, "Write one pose CSV per template into this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(common, run);
    if (*sweep_cmd) return cmd_sweep(common, spec_file, sweep_out, jobs, resume);
    if (*plot_cmd) return cmd_plot(plot_in, plot_out);
    if (*trace_cmd) return cmd_trace_render(common, trace_in, frames_out, stride);
    if (*lib_cmd) return cmd_library(common, lib_out, lib_csv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const GenerationError& e) {
    std::fprintf(stderr, "maneuver generation failed: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
