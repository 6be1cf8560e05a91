#pragma once

// Straightforward reference implementations used as test oracles. Nothing
// here includes library headers beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

namespace oracle {

// Textbook Jaro-Winkler: window max(|a|,|b|)/2 - 1, t = half the number of
// out-of-order matched characters, prefix bonus 0.1 per char up to 4.
inline double jaro_winkler(const std::string& a, const std::string& b) {
  if (a == b) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const int la = static_cast<int>(a.size()), lb = static_cast<int>(b.size());
  const int window = std::max(0, std::max(la, lb) / 2 - 1);
  std::vector<bool> ma(la, false), mb(lb, false);
  int m = 0;
  for (int i = 0; i < la; ++i) {
    for (int j = std::max(0, i - window); j <= std::min(lb - 1, i + window); ++j) {
      if (!mb[j] && a[i] == b[j]) {
        ma[i] = mb[j] = true;
        ++m;
        break;
      }
    }
  }
  if (m == 0) return 0.0;
  std::string sa, sb;
  for (int i = 0; i < la; ++i)
    if (ma[i]) sa += a[i];
  for (int j = 0; j < lb; ++j)
    if (mb[j]) sb += b[j];
  int half = 0;
  for (int k = 0; k < m; ++k) half += sa[k] != sb[k];
  const double t = half / 2.0;
  const double jaro = (m / double(la) + m / double(lb) + (m - t) / m) / 3.0;
  int l = 0;
  while (l < 4 && l < la && l < lb && a[l] == b[l]) ++l;
  return jaro + l * 0.1 * (1.0 - jaro);
}

// Directed BM25 matrix s[i][j] (query i against document j), k1 = 2,
// b = 0.75, IDF ln((N - n + 0.5) / (n + 0.5)) with negative IDF terms skipped.
inline std::vector<std::vector<double>> bm25_matrix(const std::vector<std::vector<std::string>>& docs) {
  const double n = static_cast<double>(docs.size());
  double avg = 0;
  for (const auto& d : docs) avg += static_cast<double>(d.size());
  avg /= n;
  std::map<std::string, int> df;
  for (const auto& d : docs) {
    std::set<std::string> u(d.begin(), d.end());
    for (const auto& t : u) ++df[t];
  }
  const std::size_t m = docs.size();
  std::vector<std::vector<double>> s(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    const std::set<std::string> query(docs[i].begin(), docs[i].end());
    for (std::size_t j = 0; j < m; ++j) {
      double score = 0;
      for (const auto& z : query) {
        const double idf = std::log((n - df[z] + 0.5) / (df[z] + 0.5));
        if (idf < 0) continue;
        double nz = 0;
        for (const auto& t : docs[j]) nz += (t == z);
        score += idf * nz * 3.0 / (nz + 2.0 * (0.25 + 0.75 * static_cast<double>(docs[j].size()) / avg));
      }
      s[i][j] = score;
    }
  }
  return s;
}

// |A ∩ B| / sqrt(|A| |B|) with std::set arithmetic.
template <typename T>
double coupling_weight(const std::vector<T>& a, const std::vector<T>& b) {
  const std::set<T> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() || sb.empty()) return 0.0;
  std::vector<T> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / std::sqrt(static_cast<double>(sa.size() * sb.size()));
}

// Exhaustive scan: every distinct score as cut, windows recomputed from
// scratch by sorting, best contrast among valid cuts, smallest t on ties.
inline std::optional<double> calibration_cut(const std::vector<std::pair<double, bool>>& rows) {
  std::set<double> cuts;
  for (const auto& r : rows) cuts.insert(r.first);
  std::optional<double> best;
  double best_contrast = -10;
  for (double t : cuts) {
    std::vector<std::pair<double, bool>> above, below;
    for (const auto& r : rows) (r.first > t ? above : below).push_back(r);
    if (above.empty()) continue;
    std::sort(above.begin(), above.end());
    std::sort(below.begin(), below.end(), [](auto& x, auto& y) { return x.first > y.first; });
    auto acc = [](const std::vector<std::pair<double, bool>>& v) {
      const std::size_t n = std::min<std::size_t>(100, v.size());
      double m = 0;
      for (std::size_t i = 0; i < n; ++i) m += v[i].second;
      return m / static_cast<double>(n);
    };
    const double a = acc(above), b = acc(below);
    if (a > 0.5 && b < 0.5 && a - b > best_contrast) {
      best_contrast = a - b;
      best = t;
    }
  }
  return best;
}

using WEdge = std::tuple<int, int, double>;

// Components of the graph restricted to edges with weight >= t, by
// recursive-free DFS over an adjacency matrix. Each component sorted, the
// list sorted by first element.
inline std::vector<std::vector<int>> components(int n, const std::vector<WEdge>& edges, double t) {
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& [a, b, w] : edges) {
    if (w >= t) adj[a][b] = adj[b][a] = 1;
  }
  std::vector<char> seen(n, 0);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<int> comp, stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int v = 0; v < n; ++v) {
        if (adj[u][v] && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(comp);
  }
  return out;
}

struct SmallGraph {
  std::string name;
  int n = 0;
  std::vector<WEdge> edges;
  nlohmann::json expected;
};

inline std::vector<SmallGraph> load_small_graphs(const std::string& path) {
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  std::vector<SmallGraph> out;
  for (const auto& g : j) {
    SmallGraph s;
    s.name = g.at("name").get<std::string>();
    s.n = g.at("n").get<int>();
    for (const auto& e : g.at("edges")) s.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    s.expected = g.at("expected");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace oracle
