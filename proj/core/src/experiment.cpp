#include "fleetpark/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fleetpark/config_io.hpp"
#include "fleetpark/svg_plot.hpp"

namespace fleetpark {

using nlohmann::json;

SweepSpec sweep_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("sweep spec must be a JSON object");
  static const std::vector<std::string> known{
      "name",     "base",    "kinematics", "mean_interarrival_s", "delta_p",
      "policies", "lanes",   "seeds",      "seeds_per_cell",      "seed_base"};
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw ConfigError("unknown key '" + k + "' in sweep spec");
    }
  }
  SweepSpec s;
  try {
    s.name = j.value("name", s.name);
    if (j.contains("base")) s.base = run_config_from_json(j.at("base"));
    if (j.contains("kinematics")) s.kinematics = kinematics_from_json(j.at("kinematics"));
    if (j.contains("mean_interarrival_s")) {
      s.mean_interarrivals = j.at("mean_interarrival_s").get<std::vector<double>>();
    }
    if (j.contains("delta_p")) s.delta_ps = j.at("delta_p").get<std::vector<int>>();
    if (j.contains("policies")) {
      s.policies.clear();
      for (const auto& p : j.at("policies")) s.policies.push_back(parse_policy(p.get<std::string>()));
    }
    if (j.contains("lanes")) {
      s.lane_modes.clear();
      for (const auto& l : j.at("lanes")) {
        s.lane_modes.push_back(
            parse_lane_mode(l.is_number() ? std::to_string(l.get<int>()) : l.get<std::string>()));
      }
    }
    if (j.contains("seeds")) {
      s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else if (j.contains("seeds_per_cell")) {
      const int n = j.at("seeds_per_cell").get<int>();
      const auto base = j.value("seed_base", std::uint64_t{1});
      if (n < 1) throw ConfigError("seeds_per_cell must be positive");
      s.seeds.clear();
      for (int i = 0; i < n; ++i) s.seeds.push_back(base + static_cast<std::uint64_t>(i));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed sweep spec: ") + e.what());
  }
  if (s.mean_interarrivals.empty() || s.policies.empty() || s.lane_modes.empty() ||
      s.seeds.empty()) {
    throw ConfigError("sweep spec has an empty axis");
  }
  const bool needs_dp = std::any_of(s.policies.begin(), s.policies.end(),
                                    [](PolicyKind p) { return p != PolicyKind::kRS; });
  if (needs_dp && s.delta_ps.empty()) throw ConfigError("sweep spec has no delta_p values");
  for (double m : s.mean_interarrivals) {
    if (!(m > 0.0)) throw ConfigError("mean interarrival values must be positive");
  }
  for (int d : s.delta_ps) {
    if (d < 0) throw ConfigError("delta_p values must be non-negative");
  }
  return s;
}

json to_json(const SweepSpec& s) {
  json policies = json::array();
  for (PolicyKind p : s.policies) policies.push_back(std::string(to_string(p)));
  json lanes = json::array();
  for (LaneMode l : s.lane_modes) lanes.push_back(std::string(to_string(l)));
  return {{"name", s.name},
          {"base", to_json(s.base)},
          {"kinematics", to_json(s.kinematics)},
          {"mean_interarrival_s", s.mean_interarrivals},
          {"delta_p", s.delta_ps},
          {"policies", policies},
          {"lanes", lanes},
          {"seeds", s.seeds}};
}

std::string cell_label(const CellKey& key) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "ia%g_%s_%s_dp%s", key.mean_interarrival,
                std::string(to_string(key.policy)).c_str(),
                std::string(to_string(key.lanes)).c_str(),
                key.delta_p ? std::to_string(*key.delta_p).c_str() : "-");
  return buf;
}

std::vector<CellKey> expand_cells(const SweepSpec& spec) {
  std::vector<CellKey> out;
  for (double ia : spec.mean_interarrivals) {
    for (LaneMode lanes : spec.lane_modes) {
      for (PolicyKind p : spec.policies) {
        if (p == PolicyKind::kRS) {
          out.push_back({ia, p, lanes, std::nullopt});
          continue;
        }
        for (int dp : spec.delta_ps) out.push_back({ia, p, lanes, dp});
      }
    }
  }
  return out;
}

RunConfig cell_run_config(const SweepSpec& spec, const CellKey& key, std::uint64_t seed) {
  RunConfig c = spec.base;
  c.seed = seed;
  c.mean_interarrival_s = key.mean_interarrival;
  c.policy.kind = key.policy;
  c.policy.delta_p = key.delta_p.value_or(0);
  c.lanes.mode = key.lanes;
  c.dt_s = spec.kinematics.dt_s;
  return c;
}

RunSummary summarize(std::uint64_t seed, const RunMetrics& m) {
  return RunSummary{seed, m.mtt, m.mql, m.stalled, m.finished, m.rejected};
}

double quantile(std::vector<double> sample, double p) {
  if (sample.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  std::sort(sample.begin(), sample.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

namespace {

Quartiles quartiles(const std::vector<double>& v) {
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  return {quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)};
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

AggregateCell aggregate(const CellKey& key, std::span<const RunSummary> runs) {
  AggregateCell c;
  c.key = key;
  c.n_runs = static_cast<int>(runs.size());
  std::vector<double> mtt;
  std::vector<double> mql;
  std::vector<double> rejected;
  for (const RunSummary& r : runs) {
    if (r.stalled) {
      ++c.n_stalled;
      continue;
    }
    if (!std::isnan(r.mtt)) mtt.push_back(r.mtt);
    mql.push_back(r.mql);
    rejected.push_back(r.rejected);
  }
  c.valid = c.n_runs > 0 && 10 * c.n_stalled <= c.n_runs;
  c.mtt_mean = mean(mtt);
  c.mtt = quartiles(mtt);
  c.mql_mean = mean(mql);
  c.mql = quartiles(mql);
  c.rejected_mean = mean(rejected);
  return c;
}

namespace {

json summaries_json(const CellKey& key, const std::vector<RunSummary>& runs) {
  json arr = json::array();
  for (const RunSummary& r : runs) {
    arr.push_back({{"seed", r.seed},
                   {"mtt", std::isnan(r.mtt) ? json(nullptr) : json(r.mtt)},
                   {"mql", r.mql},
                   {"stalled", r.stalled},
                   {"finished", r.finished},
                   {"rejected", r.rejected}});
  }
  return {{"version", 1}, {"cell", cell_label(key)}, {"runs", arr}};
}

std::optional<std::vector<RunSummary>> load_summaries(const std::filesystem::path& file,
                                                      const CellKey& key,
                                                      const std::vector<std::uint64_t>& seeds) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.at("version").get<int>() != 1 || j.at("cell").get<std::string>() != cell_label(key)) {
      return std::nullopt;
    }
    std::vector<RunSummary> out;
    for (const json& r : j.at("runs")) {
      RunSummary s;
      s.seed = r.at("seed").get<std::uint64_t>();
      s.mtt = r.at("mtt").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                    : r.at("mtt").get<double>();
      s.mql = r.at("mql").get<int>();
      s.stalled = r.at("stalled").get<bool>();
      s.finished = r.at("finished").get<int>();
      s.rejected = r.at("rejected").get<int>();
      out.push_back(s);
    }
    if (out.size() != seeds.size()) return std::nullopt;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (out[i].seed != seeds[i]) return std::nullopt;
    }
    return out;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<std::vector<RunSummary>> run_sweep_raw(const SweepSpec& spec,
                                                   const ManeuverLibrary& library,
                                                   const SweepOptions& options) {
  const std::vector<CellKey> cells = expand_cells(spec);
  const std::size_t n_seeds = spec.seeds.size();
  std::vector<std::vector<RunSummary>> results(cells.size(), std::vector<RunSummary>(n_seeds));
  std::vector<char> cached(cells.size(), 0);

  auto cell_file = [&](std::size_t c) {
    return *options.resume_dir / (cell_label(cells[c]) + ".json");
  };
  if (options.resume_dir) {
    std::filesystem::create_directories(*options.resume_dir);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (auto loaded = load_summaries(cell_file(c), cells[c], spec.seeds)) {
        results[c] = std::move(*loaded);
        cached[c] = 1;
      }
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (cached[c]) continue;
    for (std::size_t s = 0; s < n_seeds; ++s) tasks.emplace_back(c, s);
  }

  // Validate every cell up front so configuration errors surface before work starts.
  for (const CellKey& key : cells) {
    validate(cell_run_config(spec, key, spec.seeds.front()), library.layout(), library.params());
  }

  std::vector<std::size_t> remaining(cells.size(), n_seeds);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t done = cells.size() * n_seeds - tasks.size();
  const std::size_t total = cells.size() * n_seeds;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto [c, s] = tasks[t];
      RunSummary r;
      try {
        const RunMetrics m = run_simulation(library, cell_run_config(spec, cells[c], spec.seeds[s]));
        r = summarize(spec.seeds[s], m);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
      std::lock_guard lock(mu);
      results[c][s] = r;
      ++done;
      if (--remaining[c] == 0 && options.resume_dir) {
        std::ofstream out(cell_file(c));
        out << summaries_json(cells[c], results[c]).dump(1) << '\n';
      }
      if (options.progress) options.progress(SweepProgress{done, total});
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<AggregateCell> run_sweep(const SweepSpec& spec, const ManeuverLibrary& library,
                                     const SweepOptions& options) {
  const std::vector<CellKey> cells = expand_cells(spec);
  const auto raw = run_sweep_raw(spec, library, options);
  std::vector<AggregateCell> out;
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) out.push_back(aggregate(cells[c], raw[c]));
  return out;
}

std::vector<OptimalValue> optimal_values(std::span<const AggregateCell> table) {
  if (table.empty()) {
    throw std::invalid_argument("optimal values of an empty table");
  }
  struct Group {
    OptimalValue v;
    bool has_mtt = false;
    bool has_mql = false;
  };
  std::vector<Group> groups;
  auto better = [](double value, std::optional<int> dp, double best, std::optional<int> best_dp) {
    if (value < best) return true;
    if (value > best) return false;
    return dp.value_or(-1) < best_dp.value_or(-1);
  };
  for (const AggregateCell& c : table) {
    Group* g = nullptr;
    for (Group& e : groups) {
      if (e.v.mean_interarrival == c.key.mean_interarrival && e.v.policy == c.key.policy &&
          e.v.lanes == c.key.lanes) {
        g = &e;
        break;
      }
    }
    if (!g) {
      groups.push_back({});
      g = &groups.back();
      g->v.mean_interarrival = c.key.mean_interarrival;
      g->v.policy = c.key.policy;
      g->v.lanes = c.key.lanes;
      g->v.t_mtt = std::numeric_limits<double>::quiet_NaN();
      g->v.l_mql = std::numeric_limits<double>::quiet_NaN();
    }
    if (!c.valid) continue;
    if (!std::isnan(c.mtt_mean) &&
        (!g->has_mtt || better(c.mtt_mean, c.key.delta_p, g->v.t_mtt, g->v.mtt_delta_p))) {
      g->v.t_mtt = c.mtt_mean;
      g->v.mtt_delta_p = c.key.delta_p;
      g->has_mtt = true;
    }
    if (!std::isnan(c.mql_mean) &&
        (!g->has_mql || better(c.mql_mean, c.key.delta_p, g->v.l_mql, g->v.mql_delta_p))) {
      g->v.l_mql = c.mql_mean;
      g->v.mql_delta_p = c.key.delta_p;
      g->has_mql = true;
    }
  }
  std::vector<OptimalValue> out;
  for (const Group& g : groups) out.push_back(g.v);
  return out;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("bad number '" + s + "' in results CSV");
  return v;
}

const char* kCsvHeader =
    "mean_interarrival_s,policy,lanes,delta_p,n_runs,n_stalled,valid,mtt_mean,mtt_q25,"
    "mtt_median,mtt_q75,mql_mean,mql_q25,mql_median,mql_q75,rejected_mean";

}  // namespace

void write_results_csv(std::ostream& out, std::span<const AggregateCell> table) {
  out << "# fleetpark-results v" << kResultsSchemaVersion << '\n' << kCsvHeader << '\n';
  for (const AggregateCell& c : table) {
    out << num(c.key.mean_interarrival) << ',' << to_string(c.key.policy) << ','
        << to_string(c.key.lanes) << ','
        << (c.key.delta_p ? std::to_string(*c.key.delta_p) : std::string("-")) << ','
        << c.n_runs << ',' << c.n_stalled << ',' << (c.valid ? 1 : 0) << ',' << num(c.mtt_mean)
        << ',' << num(c.mtt.q25) << ',' << num(c.mtt.median) << ',' << num(c.mtt.q75) << ','
        << num(c.mql_mean) << ',' << num(c.mql.q25) << ',' << num(c.mql.median) << ','
        << num(c.mql.q75) << ',' << num(c.rejected_mean) << '\n';
  }
}

std::vector<AggregateCell> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# fleetpark-results v", 0) != 0) {
    throw ConfigError("results CSV lacks the schema comment line");
  }
  if (!std::getline(in, line) || line.rfind(kCsvHeader, 0) != 0) {
    throw ConfigError("results CSV header does not match the schema");
  }
  std::vector<AggregateCell> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() < 16) throw ConfigError("results CSV row has too few columns");
    AggregateCell c;
    c.key.mean_interarrival = parse_num(f[0]);
    c.key.policy = parse_policy(f[1]);
    c.key.lanes = parse_lane_mode(f[2]);
    if (f[3] != "-") c.key.delta_p = std::stoi(f[3]);
    c.n_runs = std::stoi(f[4]);
    c.n_stalled = std::stoi(f[5]);
    c.valid = f[6] == "1";
    c.mtt_mean = parse_num(f[7]);
    c.mtt = {parse_num(f[8]), parse_num(f[9]), parse_num(f[10])};
    c.mql_mean = parse_num(f[11]);
    c.mql = {parse_num(f[12]), parse_num(f[13]), parse_num(f[14])};
    c.rejected_mean = parse_num(f[15]);
    out.push_back(c);
  }
  return out;
}

json optima_to_json(std::span<const OptimalValue> optima) {
  json arr = json::array();
  auto val = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  auto dp = [](const std::optional<int>& d) { return d ? json(*d) : json(nullptr); };
  for (const OptimalValue& o : optima) {
    arr.push_back({{"mean_interarrival_s", o.mean_interarrival},
                   {"policy", std::string(to_string(o.policy))},
                   {"lanes", std::string(to_string(o.lanes))},
                   {"t_mtt", val(o.t_mtt)},
                   {"mtt_delta_p", dp(o.mtt_delta_p)},
                   {"l_mql", val(o.l_mql)},
                   {"mql_delta_p", dp(o.mql_delta_p)}});
  }
  return {{"version", 1}, {"optima", arr}};
}

std::vector<std::string> emit_outputs(const std::filesystem::path& dir,
                                      std::span<const AggregateCell> table) {
  if (table.empty()) {
    throw std::invalid_argument("nothing to emit: empty table");
  }
  std::vector<std::string> warnings;
  std::filesystem::create_directories(dir / "plots");
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(dir / "results.csv");
    write_results_csv(out, table);
  }
  const auto optima = optimal_values(table);
  {
    auto out = open(dir / "optima.json");
    out << optima_to_json(optima).dump(2) << '\n';
  }
  std::vector<double> rates;
  std::vector<LaneMode> lane_modes;
  for (const AggregateCell& c : table) {
    if (std::find(rates.begin(), rates.end(), c.key.mean_interarrival) == rates.end()) {
      rates.push_back(c.key.mean_interarrival);
    }
    if (std::find(lane_modes.begin(), lane_modes.end(), c.key.lanes) == lane_modes.end()) {
      lane_modes.push_back(c.key.lanes);
    }
  }
  for (Metric metric : {Metric::kMtt, Metric::kMql}) {
    for (LaneMode lanes : lane_modes) {
      for (double ia : rates) {
        char name[96];
        std::snprintf(name, sizeof name, "%s_%s_ia%g.svg", std::string(to_string(metric)).c_str(),
                      std::string(to_string(lanes)).c_str(), ia);
        std::ostringstream svg;
        if (!write_metric_plot(svg, table, metric, ia, lanes)) {
          warnings.push_back(std::string("no data for ") + name + "; plot omitted");
          continue;
        }
        auto out = open(dir / "plots" / name);
        out << svg.str();
      }
      char name[96];
      std::snprintf(name, sizeof name, "optimal_%s_%s.svg", std::string(to_string(metric)).c_str(),
                    std::string(to_string(lanes)).c_str());
      std::ostringstream svg;
      if (!write_optimal_plot(svg, optima, metric, lanes)) {
        warnings.push_back(std::string("no data for ") + name + "; plot omitted");
        continue;
      }
      auto out = open(dir / "plots" / name);
      out << svg.str();
    }
  }
  return warnings;
}

}  // namespace fleetpark
