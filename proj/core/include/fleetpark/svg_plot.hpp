#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>

#include "fleetpark/experiment.hpp"

namespace fleetpark {

enum class Metric { kMtt, kMql };
std::string_view to_string(Metric m);

/// Metric against delta_p for one (rate, lane mode): IS and FS as markers with
/// interquartile bars, RS as a horizontal dashed line. Returns false and
/// writes nothing when no valid cell matches.
bool write_metric_plot(std::ostream& out, std::span<const AggregateCell> table, Metric metric,
                       double mean_interarrival, LaneMode lanes);

/// Optimal value against mean interarrival time, one series per policy.
bool write_optimal_plot(std::ostream& out, std::span<const OptimalValue> optima, Metric metric,
                        LaneMode lanes);

/// Renders every `stride`-th step of a JSONL trace as frame_<k>.svg in
/// `dir`. Returns the number of frames written.
int render_trace_frames(std::istream& trace, const LotLayout& layout, const BodyDims& body,
                        int stride, const std::filesystem::path& dir);

}  // namespace fleetpark
