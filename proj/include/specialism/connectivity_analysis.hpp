#pragma once

// Threshold connectivity of coupling networks: keep edges of weight >= t,
// then measure components (topics), the giant component and the number of
// distinct authors per topic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "specialism/common.hpp"
#include "specialism/coupling_networks.hpp"
#include "specialism/csv.hpp"
#include "specialism/record_model.hpp"
#include "specialism/union_find.hpp"

namespace specialism {

inline CouplingNetwork filter_edges(const CouplingNetwork& net, double t) {
  if (!(t >= 0.0)) throw UsageError("edge threshold must be >= 0");
  CouplingNetwork out;
  out.kind = net.kind;
  out.nodes = net.nodes;
  out.year_window = net.year_window;
  for (const auto& e : net.edges) {
    if (e.weight >= t) out.edges.push_back(e);
  }
  return out;
}

using Component = std::vector<std::uint32_t>;

/// Maximal components as node indices. Members are sorted by pub_id and
/// components by their smallest pub_id; isolated nodes are singletons.
inline std::vector<Component> connected_components(const CouplingNetwork& net) {
  const std::size_t n = net.node_count();
  UnionFind uf(n);
  for (const auto& e : net.edges) uf.unite(e.u, e.v);
  std::vector<std::uint32_t> by_id(n);
  for (std::uint32_t i = 0; i < n; ++i) by_id[i] = i;
  std::sort(by_id.begin(), by_id.end(),
            [&](std::uint32_t a, std::uint32_t b) { return net.nodes[a] < net.nodes[b]; });
  std::vector<Component> comps;
  std::unordered_map<std::uint32_t, std::size_t> slot;
  for (auto u : by_id) {
    auto [it, inserted] = slot.emplace(uf.find(u), comps.size());
    if (inserted) comps.emplace_back();
    comps[it->second].push_back(u);
  }
  return comps;
}

struct CurvePoint {
  double t = 0.0;
  double c = 0.0;  // components / N
  double g = 0.0;  // giant component size / N
  std::size_t n_components = 0;
  std::size_t giant_size = 0;
};

struct ConnectivityCurve {
  std::vector<CurvePoint> points;  // ascending t
};

/// Evaluates every threshold in one pass: edges are added from heaviest to
/// lightest while the thresholds are visited in descending order.
inline ConnectivityCurve connectivity_curve(const CouplingNetwork& net, const std::vector<double>& thresholds) {
  const std::size_t n = net.node_count();
  if (n == 0) throw UsageError("network has no nodes");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0)) throw UsageError("thresholds must be >= 0");
    if (i && thresholds[i] < thresholds[i - 1]) throw UsageError("thresholds must be ascending");
  }
  std::vector<std::size_t> order(net.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return net.edges[a].weight > net.edges[b].weight; });
  ConnectivityCurve curve;
  curve.points.resize(thresholds.size());
  UnionFind uf(n);
  std::size_t next = 0;
  const double nn = static_cast<double>(n);
  for (std::size_t k = thresholds.size(); k-- > 0;) {
    const double t = thresholds[k];
    while (next < order.size() && net.edges[order[next]].weight >= t) {
      uf.unite(net.edges[order[next]].u, net.edges[order[next]].v);
      ++next;
    }
    auto& p = curve.points[k];
    p.t = t;
    p.n_components = uf.set_count();
    p.giant_size = uf.largest_set();
    p.c = static_cast<double>(p.n_components) / nn;
    p.g = static_cast<double>(p.giant_size) / nn;
  }
  return curve;
}

inline void write_curve_csv(const ConnectivityCurve& curve, std::ostream& out) {
  out << "t,c,g,n_components,giant_size\n";
  for (const auto& p : curve.points) {
    out << format_double(p.t) << ',' << format_double(p.c) << ',' << format_double(p.g) << ','
        << p.n_components << ',' << p.giant_size << '\n';
  }
}

// ---------------------------------------------------------------------------
// Threshold grids

/// {0.00, 0.01, ..., 0.50}, each value k / 100.
inline std::vector<double> default_reference_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 50; ++k) grid.push_back(k / 100.0);
  return grid;
}

/// K thresholds at evenly spaced quantiles (0, 1/(K-1), ..., 1) of the
/// positive edge weights, linear interpolation between order statistics.
inline std::vector<double> quantile_grid(const CouplingNetwork& net, std::size_t k) {
  if (k == 0) throw UsageError("auto-quantile needs K >= 1");
  std::vector<double> w;
  for (const auto& e : net.edges) w.push_back(e.weight);
  if (w.empty()) return std::vector<double>(k, 0.0);
  std::sort(w.begin(), w.end());
  std::vector<double> grid;
  for (std::size_t i = 0; i < k; ++i) {
    const double q = k == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(k - 1);
    const double pos = q * static_cast<double>(w.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, w.size() - 1);
    grid.push_back(w[lo] + (w[hi] - w[lo]) * (pos - static_cast<double>(lo)));
  }
  return grid;
}

struct ThresholdSpec {
  std::vector<double> explicit_values;
  std::optional<std::size_t> quantiles;

  std::vector<double> resolve(const CouplingNetwork& net) const {
    return quantiles ? quantile_grid(net, *quantiles) : explicit_values;
  }
};

namespace detail {

inline double parse_double(std::string_view s, std::string_view context) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw UsageError("invalid number '" + std::string(s) + "' in '" + std::string(context) + "'");
  }
  return v;
}

}  // namespace detail

/// Range "start:stop:step" (inclusive stop, values start + k*step rounded to
/// 12 decimals so that 0:0.95:0.05 yields exact-looking grid points).
inline std::vector<double> parse_range(std::string_view s) {
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
    throw UsageError("range must look like start:stop:step, got '" + std::string(s) + "'");
  }
  const double start = detail::parse_double(s.substr(0, c1), s);
  const double stop = detail::parse_double(s.substr(c1 + 1, c2 - c1 - 1), s);
  const double step = detail::parse_double(s.substr(c2 + 1), s);
  if (!(step > 0.0) || stop < start) throw UsageError("invalid range '" + std::string(s) + "'");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    double v = start + static_cast<double>(k) * step;
    v = std::round(v * 1e12) / 1e12;
    if (v > stop + step * 1e-9) break;
    out.push_back(v);
  }
  return out;
}

/// Comma-separated list, a start:stop:step range, or "auto-quantile:K".
inline ThresholdSpec parse_thresholds(std::string_view s) {
  ThresholdSpec spec;
  s = trim(s);
  constexpr std::string_view kAuto = "auto-quantile:";
  if (s.substr(0, kAuto.size()) == kAuto) {
    const double k = detail::parse_double(s.substr(kAuto.size()), s);
    if (k < 1 || k != std::floor(k)) throw UsageError("auto-quantile needs a positive integer K");
    spec.quantiles = static_cast<std::size_t>(k);
    return spec;
  }
  if (s.find(':') != std::string_view::npos) {
    spec.explicit_values = parse_range(s);
    return spec;
  }
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto part = s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    spec.explicit_values.push_back(detail::parse_double(part, s));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::sort(spec.explicit_values.begin(), spec.explicit_values.end());
  return spec;
}

// ---------------------------------------------------------------------------
// Topics

struct Topic {
  double threshold = 0.0;
  std::vector<std::string> member_pubs;  // sorted, at least two
  std::set<AuthorKey> active_authors;
};

using Authorship = std::unordered_map<std::string, std::vector<AuthorKey>>;

inline Authorship authorship_of(const Corpus& corpus) {
  Authorship a;
  for (const auto& rec : corpus) a.emplace(rec.pub_id, author_keys(rec));
  return a;
}

/// Components with at least two publications at threshold t, each with the
/// union of its members' authors.
inline std::vector<Topic> extract_topics(const CouplingNetwork& net, double t, const Authorship& authorship) {
  if (!(t > 0.0)) throw UsageError("topic threshold must be > 0");
  std::vector<Topic> topics;
  for (const auto& comp : connected_components(filter_edges(net, t))) {
    if (comp.size() < 2) continue;
    Topic topic;
    topic.threshold = t;
    for (auto u : comp) {
      topic.member_pubs.push_back(net.nodes[u]);
      if (auto it = authorship.find(net.nodes[u]); it != authorship.end()) {
        topic.active_authors.insert(it->second.begin(), it->second.end());
      }
    }
    topics.push_back(std::move(topic));
  }
  return topics;
}

struct TopicReportRow {
  double threshold = 0.0;
  std::size_t n_topics = 0;
  MeanMedian topic_size;
  MeanMedian people_to_problem;  // absent when there are no topics
};

struct TopicReport {
  std::vector<TopicReportRow> rows;
};

inline TopicReport topic_report(const std::map<double, std::vector<Topic>>& topics_by_threshold) {
  TopicReport report;
  for (const auto& [t, topics] : topics_by_threshold) {
    TopicReportRow row;
    row.threshold = t;
    row.n_topics = topics.size();
    std::vector<double> sizes, people;
    for (const auto& topic : topics) {
      sizes.push_back(static_cast<double>(topic.member_pubs.size()));
      people.push_back(static_cast<double>(topic.active_authors.size()));
    }
    row.topic_size = mean_median(sizes);
    row.people_to_problem = mean_median(people);
    report.rows.push_back(row);
  }
  return report;
}

inline std::vector<double> default_topic_thresholds() { return {0.1, 0.2, 0.3}; }

inline void write_topic_report_csv(const TopicReport& report, std::ostream& out) {
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "t,n_topics,topic_size_mean,topic_size_median,ptp_mean,ptp_median\n";
  for (const auto& r : report.rows) {
    out << format_double(r.threshold) << ',' << r.n_topics << ',' << cell(r.topic_size.mean) << ','
        << cell(r.topic_size.median) << ',' << cell(r.people_to_problem.mean) << ','
        << cell(r.people_to_problem.median) << '\n';
  }
}

}  // namespace specialism
