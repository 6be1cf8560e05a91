#pragma once

// Reliance on core literature: delete cited sources (most cited first, or in
// random order), rebuild reference coupling over the surviving sources and
// record connectivity of the resulting network at edge threshold zero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specialism/common.hpp"
#include "specialism/connectivity_analysis.hpp"
#include "specialism/coupling_networks.hpp"
#include "specialism/random.hpp"
#include "specialism/reference_linkage.hpp"
#include "specialism/union_find.hpp"

namespace specialism {

/// Directed bipartite citations publication -> source cluster.
struct CitationNetwork {
  std::vector<std::string> publications;
  std::vector<std::string> cluster_ids;
  std::vector<std::vector<std::uint32_t>> cited;   // per publication, sorted unique
  std::vector<std::vector<std::uint32_t>> citing;  // per cluster, sorted unique
  std::vector<std::size_t> citation_count;         // per cluster, == citing[c].size()

  std::size_t publication_count() const { return publications.size(); }
  std::size_t cluster_count() const { return cluster_ids.size(); }
};

inline CitationNetwork build_citation_network(const std::vector<std::string>& publications,
                                              const std::vector<SourceCluster>& clusters) {
  CitationNetwork cn;
  cn.publications = publications;
  for (const auto& c : clusters) cn.cluster_ids.push_back(c.cluster_id);
  cn.cited = cluster_sets(publications, clusters);
  cn.citing.resize(clusters.size());
  for (std::uint32_t p = 0; p < cn.cited.size(); ++p) {
    for (auto c : cn.cited[p]) cn.citing[c].push_back(p);
  }
  for (const auto& list : cn.citing) cn.citation_count.push_back(list.size());
  return cn;
}

inline CitationNetwork build_citation_network(const Corpus& corpus, const std::vector<SourceCluster>& clusters) {
  std::vector<std::string> ids;
  for (const auto& rec : corpus) ids.push_back(rec.pub_id);
  return build_citation_network(ids, clusters);
}

/// Clusters by citation count descending, ties by ascending cluster_id.
inline std::vector<std::uint32_t> removal_order_targeted(const CitationNetwork& cn) {
  if (cn.cluster_count() == 0) throw UsageError("citation network has no cited sources");
  std::vector<std::uint32_t> order(cn.cluster_count());
  for (std::uint32_t c = 0; c < order.size(); ++c) order[c] = c;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (cn.citation_count[a] != cn.citation_count[b]) return cn.citation_count[a] > cn.citation_count[b];
    return cn.cluster_ids[a] < cn.cluster_ids[b];
  });
  return order;
}

inline std::vector<std::uint32_t> removal_order_random(const CitationNetwork& cn, std::uint64_t seed) {
  std::vector<std::uint32_t> order(cn.cluster_count());
  for (std::uint32_t c = 0; c < order.size(); ++c) order[c] = c;
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

/// Number of sources removed at fraction f of M: ceil(f * M), with a small
/// tolerance so grid values such as 0.15 do not round up spuriously.
inline std::size_t removal_count(double fraction, std::size_t m) {
  const double x = fraction * static_cast<double>(m);
  const auto k = static_cast<std::size_t>(std::ceil(x - 1e-9));
  return std::min(k, m);
}

/// Reference coupling network over the sources not removed.
inline CouplingNetwork coupling_network_without(const CitationNetwork& cn, const std::vector<char>& removed) {
  std::vector<std::vector<std::uint32_t>> sets(cn.publication_count());
  for (std::size_t p = 0; p < sets.size(); ++p) {
    for (auto c : cn.cited[p]) {
      if (!removed[c]) sets[p].push_back(c);
    }
  }
  CouplingNetwork net;
  net.kind = NetworkKind::reference;
  net.nodes = cn.publications;
  net.edges = reference_coupling_edges(sets, cn.cluster_count());
  return net;
}

struct RemovalPoint {
  double fraction = 0.0;
  double c = 0.0;
  double g = 0.0;
  std::size_t n_components = 0;
  std::size_t giant_size = 0;
};

namespace detail {

// c and g at t = 0 for every fraction, given one removal order. Any shared
// surviving source yields a positive coupling weight, so components are
// those of the publication/source incidence restricted to survivors.
// Fractions are processed from largest to smallest, adding sources back.
inline std::vector<RemovalPoint> removal_series(const CitationNetwork& cn, const std::vector<std::uint32_t>& order,
                                                const std::vector<double>& fractions) {
  const std::size_t n = cn.publication_count();
  const std::size_t m = cn.cluster_count();
  std::vector<RemovalPoint> out(fractions.size());
  UnionFind uf(n);
  std::size_t restored_from = m;  // order[restored_from, m) survive
  for (std::size_t k = fractions.size(); k-- > 0;) {
    const std::size_t removed = removal_count(fractions[k], m);
    while (restored_from > removed) {
      const auto c = order[--restored_from];
      const auto& citing = cn.citing[c];
      for (std::size_t i = 1; i < citing.size(); ++i) uf.unite(citing[0], citing[i]);
    }
    out[k].fraction = fractions[k];
    out[k].n_components = uf.set_count();
    out[k].giant_size = uf.largest_set();
    out[k].c = static_cast<double>(out[k].n_components) / static_cast<double>(n);
    out[k].g = static_cast<double>(out[k].giant_size) / static_cast<double>(n);
  }
  return out;
}

// Mean and sample standard deviation of counts / n, from exact integer
// sums so that equal counts in every trial give exactly count / n and 0.
inline std::pair<double, double> count_moments(const std::vector<std::size_t>& counts, std::size_t n) {
  unsigned __int128 sum = 0, sum_sq = 0;
  for (auto x : counts) {
    sum += x;
    sum_sq += static_cast<unsigned __int128>(x) * x;
  }
  const auto t = static_cast<unsigned __int128>(counts.size());
  const double nn = static_cast<double>(n);
  const double mean = static_cast<double>(sum) / (static_cast<double>(t) * nn);
  if (t < 2) return {mean, 0.0};
  const unsigned __int128 spread = t * sum_sq - sum * sum;  // >= 0 by Cauchy-Schwarz
  const double var = static_cast<double>(spread) / (static_cast<double>(t) * static_cast<double>(t - 1));
  return {mean, std::sqrt(var) / nn};
}

}  // namespace detail

enum class RemovalStrategy { targeted, random };

inline std::string_view to_string(RemovalStrategy s) { return s == RemovalStrategy::targeted ? "targeted" : "random"; }

inline RemovalStrategy parse_removal_strategy(std::string_view s) {
  if (s == "targeted") return RemovalStrategy::targeted;
  if (s == "random") return RemovalStrategy::random;
  throw UsageError("unknown removal strategy '" + std::string(s) + "' (expected targeted or random)");
}

struct RemovalCurvePoint {
  double fraction = 0.0;
  double c_mean = 0.0;
  double c_std = 0.0;
  double g_mean = 0.0;
  double g_std = 0.0;
};

struct RemovalCurve {
  RemovalStrategy strategy = RemovalStrategy::targeted;
  std::optional<std::uint64_t> seed;  // random strategy only
  std::size_t trials = 1;
  std::vector<RemovalCurvePoint> points;
};

/// {0, 0.05, ..., 0.95}.
inline std::vector<double> default_removal_fractions() { return parse_range("0:0.95:0.05"); }

struct RemovalOptions {
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Random trials use seed + trial index and are aggregated in trial order;
/// std is the sample standard deviation over trials.
inline RemovalCurve removal_experiment(const CitationNetwork& cn, RemovalStrategy strategy,
                                       const std::vector<double>& fractions, RemovalOptions options = {}) {
  if (cn.publication_count() == 0) throw UsageError("citation network has no publications");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0)) throw UsageError("removal fractions must lie in [0, 1]");
    if (i && fractions[i] < fractions[i - 1]) throw UsageError("removal fractions must be ascending");
  }
  RemovalCurve curve;
  curve.strategy = strategy;
  if (strategy == RemovalStrategy::targeted || cn.cluster_count() == 0) {
    const auto order = cn.cluster_count() ? removal_order_targeted(cn) : std::vector<std::uint32_t>{};
    curve.trials = 1;
    for (const auto& p : detail::removal_series(cn, order, fractions)) {
      curve.points.push_back({p.fraction, p.c, 0.0, p.g, 0.0});
    }
    if (strategy == RemovalStrategy::random) {
      curve.seed = options.seed;
      curve.trials = options.trials;
    }
    return curve;
  }
  if (options.trials == 0) throw UsageError("random removal needs at least one trial");
  curve.seed = options.seed;
  curve.trials = options.trials;
  std::vector<std::vector<RemovalPoint>> per_trial(options.trials);
  parallel_for(options.trials, options.jobs, [&](std::size_t t) {
    per_trial[t] = detail::removal_series(cn, removal_order_random(cn, options.seed + t), fractions);
  });
  const std::size_t n = cn.publication_count();
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    std::vector<std::size_t> cs, gs;
    for (const auto& trial : per_trial) {
      cs.push_back(trial[k].n_components);
      gs.push_back(trial[k].giant_size);
    }
    const auto [c_mean, c_std] = detail::count_moments(cs, n);
    const auto [g_mean, g_std] = detail::count_moments(gs, n);
    curve.points.push_back({fractions[k], c_mean, c_std, g_mean, g_std});
  }
  return curve;
}

inline void write_removal_csv_header(std::ostream& out) {
  out << "strategy,fraction,c_mean,c_std,g_mean,g_std,trials,seed\n";
}

inline void write_removal_csv_rows(const RemovalCurve& curve, std::ostream& out) {
  const std::string seed = curve.seed ? std::to_string(*curve.seed) : std::string();
  for (const auto& p : curve.points) {
    out << to_string(curve.strategy) << ',' << format_double(p.fraction) << ',' << format_double(p.c_mean) << ','
        << format_double(p.c_std) << ',' << format_double(p.g_mean) << ',' << format_double(p.g_std) << ','
        << curve.trials << ',' << seed << '\n';
  }
}

inline void write_removal_csv(const RemovalCurve& curve, std::ostream& out) {
  write_removal_csv_header(out);
  write_removal_csv_rows(curve, out);
}

}  // namespace specialism
