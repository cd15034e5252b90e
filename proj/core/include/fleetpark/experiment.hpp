#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fleetpark/engine.hpp"

namespace fleetpark {

/// Cartesian sweep over arrival rate, policy, lane mode and delta_p, with the
/// same seed list in every cell. RS ignores delta_p and gets one cell per
/// (rate, lanes).
struct SweepSpec {
  std::string name = "sweep";
  RunConfig base;
  KinematicParams kinematics;
  std::vector<double> mean_interarrivals{2.0};
  std::vector<int> delta_ps{4};
  std::vector<PolicyKind> policies{PolicyKind::kIS};
  std::vector<LaneMode> lane_modes{LaneMode::kOneLane};
  std::vector<std::uint64_t> seeds{1};
};

/// Schema: name, base (run config), kinematics, mean_interarrival_s[],
/// delta_p[], policies[], lanes[], and either seeds[] or
/// seeds_per_cell + seed_base (seeds seed_base .. seed_base + n - 1).
SweepSpec sweep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepSpec& spec);

struct CellKey {
  double mean_interarrival = 2.0;
  PolicyKind policy = PolicyKind::kIS;
  LaneMode lanes = LaneMode::kOneLane;
  std::optional<int> delta_p;  // empty for RS

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

std::string cell_label(const CellKey& key);

/// Cells in a fixed order: rate, lanes, policy, delta_p.
std::vector<CellKey> expand_cells(const SweepSpec& spec);
RunConfig cell_run_config(const SweepSpec& spec, const CellKey& key, std::uint64_t seed);

struct RunSummary {
  std::uint64_t seed = 0;
  double mtt = 0.0;
  int mql = 0;
  bool stalled = false;
  int finished = 0;
  int rejected = 0;
};

RunSummary summarize(std::uint64_t seed, const RunMetrics& m);

/// Linear interpolation between order statistics: position p * (n - 1) in
/// the sorted sample. Throws std::invalid_argument for an empty sample.
double quantile(std::vector<double> sample, double p);

struct Quartiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

struct AggregateCell {
  CellKey key;
  int n_runs = 0;
  int n_stalled = 0;
  bool valid = true;  // stalls at most 10% of runs
  double mtt_mean = 0.0;
  Quartiles mtt;
  double mql_mean = 0.0;
  Quartiles mql;
  double rejected_mean = 0.0;
};

/// Stalled runs are left out of every statistic except the counts.
AggregateCell aggregate(const CellKey& key, std::span<const RunSummary> runs);

struct SweepProgress {
  std::size_t done = 0;
  std::size_t total = 0;
};

struct SweepOptions {
  int jobs = 1;
  // Per-cell result files; cells already present are loaded, not rerun.
  std::optional<std::filesystem::path> resume_dir;
  std::function<void(const SweepProgress&)> progress;
};

std::vector<AggregateCell> run_sweep(const SweepSpec& spec, const ManeuverLibrary& library,
                                     const SweepOptions& options = {});

/// Raw per-run results in cell order; run_sweep aggregates these.
std::vector<std::vector<RunSummary>> run_sweep_raw(const SweepSpec& spec,
                                                   const ManeuverLibrary& library,
                                                   const SweepOptions& options = {});

struct OptimalValue {
  double mean_interarrival = 0.0;
  PolicyKind policy = PolicyKind::kIS;
  LaneMode lanes = LaneMode::kOneLane;
  double t_mtt = 0.0;
  std::optional<int> mtt_delta_p;
  double l_mql = 0.0;
  std::optional<int> mql_delta_p;
};

/// Minimum over delta_p of the cell means per (rate, policy, lanes); ties go
/// to the smaller delta_p. Invalid or empty cells are skipped. Throws
/// std::invalid_argument for an empty table.
std::vector<OptimalValue> optimal_values(std::span<const AggregateCell> table);

/// Columns: mean_interarrival_s, policy, lanes, delta_p ("-" for RS), n_runs,
/// n_stalled, valid, mtt_mean, mtt_q25, mtt_median, mtt_q75, mql_mean,
/// mql_q25, mql_median, mql_q75, rejected_mean. New columns are only ever
/// appended. The first line is a "# fleetpark-results v<N>" comment.
inline constexpr int kResultsSchemaVersion = 1;
void write_results_csv(std::ostream& out, std::span<const AggregateCell> table);
std::vector<AggregateCell> read_results_csv(std::istream& in);

nlohmann::json optima_to_json(std::span<const OptimalValue> optima);

/// results.csv, optima.json and plots/*.svg under `dir`. Returns warnings.
std::vector<std::string> emit_outputs(const std::filesystem::path& dir,
                                      std::span<const AggregateCell> table);

}  // namespace fleetpark
