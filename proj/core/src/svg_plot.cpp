#include "fleetpark/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fleetpark {

std::string_view to_string(Metric m) { return m == Metric::kMtt ? "mtt" : "mql"; }

namespace {

constexpr double kW = 480.0;
constexpr double kH = 320.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 45.0;

struct Axes {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); }
  double py(double y) const { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Axes make_axes(double xmin, double xmax, double ymin, double ymax) {
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double pad = 0.08 * (ymax - ymin);
  return {xmin, xmax, std::max(0.0, ymin - pad), ymax + pad};
}

void frame(std::ostream& out, const Axes& a, const std::string& title, const std::string& xlabel,
           const std::string& ylabel) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title
      << "</text>\n";
  const double bx = a.px(a.x0), by = a.py(a.y0), tx = a.px(a.x1), ty = a.py(a.y1);
  out << "<rect x=\"" << bx << "\" y=\"" << ty << "\" width=\"" << tx - bx << "\" height=\""
      << by - ty << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = a.x0 + (a.x1 - a.x0) * i / 5.0;
    const double yv = a.y0 + (a.y1 - a.y0) * i / 5.0;
    out << "<text x=\"" << a.px(xv) << "\" y=\"" << by + 14 << "\" text-anchor=\"middle\">"
        << fmt("%.3g", xv) << "</text>\n";
    out << "<text x=\"" << bx - 5 << "\" y=\"" << a.py(yv) + 4 << "\" text-anchor=\"end\">"
        << fmt("%.3g", yv) << "</text>\n";
    out << "<line x1=\"" << bx << "\" x2=\"" << tx << "\" y1=\"" << a.py(yv) << "\" y2=\""
        << a.py(yv) << "\" stroke=\"#ddd\"/>\n";
  }
  out << "<text x=\"" << (bx + tx) / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
      << xlabel << "</text>\n";
  out << "<text transform=\"translate(14," << (by + ty) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << ylabel << "</text>\n";
}

void marker(std::ostream& out, PolicyKind p, double x, double y) {
  if (p == PolicyKind::kIS) {
    out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"4\" fill=\"none\" stroke=\"red\"/>\n";
  } else {
    out << "<polygon points=\"" << x - 4.5 << ',' << y - 3.5 << ' ' << x + 4.5 << ',' << y - 3.5
        << ' ' << x << ',' << y + 4.5 << "\" fill=\"none\" stroke=\"blue\"/>\n";
  }
}

const char* colour(PolicyKind p) {
  switch (p) {
    case PolicyKind::kRS: return "black";
    case PolicyKind::kIS: return "red";
    case PolicyKind::kFS: return "blue";
  }
  return "black";
}

void legend(std::ostream& out, const std::vector<PolicyKind>& present) {
  double y = kTop + 12;
  for (PolicyKind p : present) {
    const double x = kW - kRight - 70;
    if (p == PolicyKind::kRS) {
      out << "<line x1=\"" << x - 8 << "\" x2=\"" << x + 8 << "\" y1=\"" << y << "\" y2=\"" << y
          << "\" stroke=\"black\" stroke-dasharray=\"5,3\"/>\n";
    } else {
      marker(out, p, x, y);
    }
    out << "<text x=\"" << x + 14 << "\" y=\"" << y + 4 << "\">" << to_string(p) << "</text>\n";
    y += 16;
  }
}

double metric_mean(const AggregateCell& c, Metric m) {
  return m == Metric::kMtt ? c.mtt_mean : c.mql_mean;
}
const Quartiles& metric_q(const AggregateCell& c, Metric m) {
  return m == Metric::kMtt ? c.mtt : c.mql;
}

const char* metric_label(Metric m) {
  return m == Metric::kMtt ? "mean task time [s]" : "maximum queue length";
}

}  // namespace

bool write_metric_plot(std::ostream& out, std::span<const AggregateCell> table, Metric metric,
                       double mean_interarrival, LaneMode lanes) {
  std::vector<const AggregateCell*> cells;
  for (const AggregateCell& c : table) {
    if (c.key.mean_interarrival != mean_interarrival || c.key.lanes != lanes || !c.valid) continue;
    if (std::isnan(metric_mean(c, metric))) continue;
    cells.push_back(&c);
  }
  if (cells.empty()) return false;

  double xmin = 0.0, xmax = 1.0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  bool any_dp = false;
  for (const AggregateCell* c : cells) {
    const Quartiles& q = metric_q(*c, metric);
    ymin = std::min({ymin, metric_mean(*c, metric), q.q25});
    ymax = std::max({ymax, metric_mean(*c, metric), q.q75});
    if (c->key.delta_p) {
      if (!any_dp) xmin = xmax = *c->key.delta_p;
      any_dp = true;
      xmin = std::min<double>(xmin, *c->key.delta_p);
      xmax = std::max<double>(xmax, *c->key.delta_p);
    }
  }
  const Axes a = make_axes(xmin, xmax, ymin, ymax);
  frame(out, a,
        std::string(to_string(metric)) + ", " + std::string(to_string(lanes)) +
            ", mean interarrival " + fmt("%g", mean_interarrival) + " s",
        "delta_p", metric_label(metric));

  std::vector<PolicyKind> present;
  for (PolicyKind p : {PolicyKind::kRS, PolicyKind::kIS, PolicyKind::kFS}) {
    std::vector<const AggregateCell*> series;
    for (const AggregateCell* c : cells) {
      if (c->key.policy == p) series.push_back(c);
    }
    if (series.empty()) continue;
    present.push_back(p);
    if (p == PolicyKind::kRS) {
      const AggregateCell& c = *series.front();
      const Quartiles& q = metric_q(c, metric);
      out << "<rect x=\"" << a.px(a.x0) << "\" y=\"" << a.py(q.q75) << "\" width=\""
          << a.px(a.x1) - a.px(a.x0) << "\" height=\"" << a.py(q.q25) - a.py(q.q75)
          << "\" fill=\"black\" fill-opacity=\"0.08\"/>\n";
      out << "<line x1=\"" << a.px(a.x0) << "\" x2=\"" << a.px(a.x1) << "\" y1=\""
          << a.py(metric_mean(c, metric)) << "\" y2=\"" << a.py(metric_mean(c, metric))
          << "\" stroke=\"black\" stroke-dasharray=\"5,3\"/>\n";
      continue;
    }
    std::sort(series.begin(), series.end(),
              [](const AggregateCell* l, const AggregateCell* r) { return l->key.delta_p < r->key.delta_p; });
    out << "<polyline fill=\"none\" stroke=\"" << colour(p) << "\" stroke-opacity=\"0.5\" points=\"";
    for (const AggregateCell* c : series) {
      out << a.px(*c->key.delta_p) << ',' << a.py(metric_mean(*c, metric)) << ' ';
    }
    out << "\"/>\n";
    for (const AggregateCell* c : series) {
      const double x = a.px(*c->key.delta_p);
      const Quartiles& q = metric_q(*c, metric);
      out << "<line x1=\"" << x << "\" x2=\"" << x << "\" y1=\"" << a.py(q.q25) << "\" y2=\""
          << a.py(q.q75) << "\" stroke=\"" << colour(p) << "\"/>\n";
      marker(out, p, x, a.py(metric_mean(*c, metric)));
    }
  }
  legend(out, present);
  out << "</svg>\n";
  return true;
}

bool write_optimal_plot(std::ostream& out, std::span<const OptimalValue> optima, Metric metric,
                        LaneMode lanes) {
  std::vector<const OptimalValue*> rows;
  for (const OptimalValue& o : optima) {
    const double v = metric == Metric::kMtt ? o.t_mtt : o.l_mql;
    if (o.lanes == lanes && !std::isnan(v)) rows.push_back(&o);
  }
  if (rows.empty()) return false;
  auto value = [&](const OptimalValue* o) { return metric == Metric::kMtt ? o->t_mtt : o->l_mql; };
  double xmin = rows.front()->mean_interarrival, xmax = xmin;
  double ymin = value(rows.front()), ymax = ymin;
  for (const OptimalValue* o : rows) {
    xmin = std::min(xmin, o->mean_interarrival);
    xmax = std::max(xmax, o->mean_interarrival);
    ymin = std::min(ymin, value(o));
    ymax = std::max(ymax, value(o));
  }
  const Axes a = make_axes(xmin, xmax, ymin, ymax);
  frame(out, a, "optimal " + std::string(to_string(metric)) + ", " + std::string(to_string(lanes)),
        "mean interarrival time [s]", metric_label(metric));
  std::vector<PolicyKind> present;
  for (PolicyKind p : {PolicyKind::kRS, PolicyKind::kIS, PolicyKind::kFS}) {
    std::vector<const OptimalValue*> series;
    for (const OptimalValue* o : rows) {
      if (o->policy == p) series.push_back(o);
    }
    if (series.empty()) continue;
    present.push_back(p);
    std::sort(series.begin(), series.end(), [](const OptimalValue* l, const OptimalValue* r) {
      return l->mean_interarrival < r->mean_interarrival;
    });
    out << "<polyline fill=\"none\" stroke=\"" << colour(p) << "\""
        << (p == PolicyKind::kRS ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (const OptimalValue* o : series) out << a.px(o->mean_interarrival) << ',' << a.py(value(o)) << ' ';
    out << "\"/>\n";
    if (p != PolicyKind::kRS) {
      for (const OptimalValue* o : series) marker(out, p, a.px(o->mean_interarrival), a.py(value(o)));
    }
  }
  legend(out, present);
  out << "</svg>\n";
  return true;
}

int render_trace_frames(std::istream& trace, const LotLayout& layout, const BodyDims& body,
                        int stride, const std::filesystem::path& dir) {
  if (stride < 1) stride = 1;
  std::filesystem::create_directories(dir);
  constexpr double kScale = 12.0;
  const double w = layout.length_m() * kScale;
  const double h = layout.width_m() * kScale;
  auto sx = [&](double x) { return x * kScale; };
  auto sy = [&](double y) { return h - y * kScale; };

  std::string background;
  {
    std::string s;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n"
                  "<rect width=\"100%%\" height=\"100%%\" fill=\"#f4f4f4\"/>\n",
                  w, h + 20);
    s += buf;
    for (const LaneSpec& l : layout.lanes()) {
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"0\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"#d0d0d0\"/>\n",
                    sy(l.y_max), w, l.width() * kScale);
      s += buf;
    }
    for (int f = 0; f < layout.spot_count(); ++f) {
      const Rect r = spot_world_rect(layout, layout.spot_at(f));
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                    "stroke=\"#999\"/>\n",
                    sx(r.x_min), sy(r.y_max), (r.x_max - r.x_min) * kScale,
                    (r.y_max - r.y_min) * kScale);
      s += buf;
    }
    background = s;
  }

  std::map<long long, std::vector<nlohmann::json>> steps;
  std::string line;
  while (std::getline(trace, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.contains("type")) continue;
    const long long k = j.at("k").get<long long>();
    if (k % stride != 0) continue;
    steps[k].push_back(std::move(j));
  }

  int written = 0;
  for (const auto& [k, records] : steps) {
    char name[64];
    std::snprintf(name, sizeof name, "frame_%06lld.svg", k);
    std::ofstream out(dir / name);
    out << background;
    int outside = 0;
    for (const auto& r : records) {
      if (r.at("x").is_null()) {
        ++outside;
        continue;
      }
      const Pose p{r.at("x").get<double>(), r.at("y").get<double>(), r.at("heading").get<double>()};
      const Quad q = body_corners(p, body);
      const std::string mode = r.at("mode").get<std::string>();
      const bool yielding = r.at("verdict").get<std::string>() == "yield";
      const char* fill = mode == "maneuvering" ? "#5b8def" : mode == "parked" ? "#7c7" : "#f0a030";
      out << "<polygon points=\"";
      for (const Vec2& c : q) out << sx(c.x) << ',' << sy(c.y) << ' ';
      out << "\" fill=\"" << fill << "\" stroke=\"" << (yielding ? "red" : "black") << "\"/>\n";
      out << "<text x=\"" << sx(p.x) << "\" y=\"" << sy(p.y) + 4
          << "\" font-size=\"10\" text-anchor=\"middle\">" << r.at("id").get<int>() << "</text>\n";
    }
    out << "<text x=\"4\" y=\"" << h + 15 << "\" font-size=\"12\">k=" << k
        << " outside queue=" << outside << "</text>\n</svg>\n";
    ++written;
  }
  return written;
}

}  // namespace fleetpark
