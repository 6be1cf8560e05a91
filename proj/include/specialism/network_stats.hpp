#pragma once

// Whole-network statistics: density, isolated nodes, giant-component
// diameter, binary transitivity and greedy agglomerative modularity.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "specialism/common.hpp"
#include "specialism/coupling_networks.hpp"
#include "specialism/union_find.hpp"

namespace specialism {

/// Compressed adjacency lists; neighbours of each node are sorted.
class Adjacency {
 public:
  explicit Adjacency(const CouplingNetwork& net) : offsets_(net.node_count() + 1, 0) {
    for (const auto& e : net.edges) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    targets_.resize(offsets_.back());
    weights_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : net.edges) {
      targets_[fill[e.u]] = e.v;
      weights_[fill[e.u]++] = e.weight;
      targets_[fill[e.v]] = e.u;
      weights_[fill[e.v]++] = e.weight;
    }
    for (std::size_t u = 0; u + 1 < offsets_.size(); ++u) {
      std::vector<std::pair<std::uint32_t, double>> tmp;
      for (std::size_t k = offsets_[u]; k < offsets_[u + 1]; ++k) tmp.emplace_back(targets_[k], weights_[k]);
      std::sort(tmp.begin(), tmp.end());
      for (std::size_t k = 0; k < tmp.size(); ++k) {
        targets_[offsets_[u] + k] = tmp[k].first;
        weights_[offsets_[u] + k] = tmp[k].second;
      }
    }
  }

  std::size_t node_count() const { return offsets_.size() - 1; }
  std::size_t degree(std::size_t u) const { return offsets_[u + 1] - offsets_[u]; }
  std::span<const std::uint32_t> neighbors(std::size_t u) const {
    return {targets_.data() + offsets_[u], degree(u)};
  }
  std::span<const double> weights(std::size_t u) const { return {weights_.data() + offsets_[u], degree(u)}; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
  std::vector<double> weights_;
};

/// Nodes of the largest connected component (ties: the one holding the
/// smallest node index), ascending.
inline std::vector<std::uint32_t> giant_component_nodes(const CouplingNetwork& net) {
  const std::size_t n = net.node_count();
  if (n == 0) return {};
  UnionFind uf(n);
  for (const auto& e : net.edges) uf.unite(e.u, e.v);
  std::uint32_t best_root = uf.find(0);
  std::uint32_t best_size = uf.set_size(0);
  for (std::uint32_t u = 1; u < n; ++u) {
    const auto s = uf.set_size(u);
    if (s > best_size) {
      best_size = s;
      best_root = uf.find(u);
    }
  }
  std::vector<std::uint32_t> nodes;
  for (std::uint32_t u = 0; u < n; ++u) {
    if (uf.find(u) == best_root) nodes.push_back(u);
  }
  return nodes;
}

/// Longest shortest path (in hops) inside the giant component.
inline std::size_t giant_component_diameter(const CouplingNetwork& net, unsigned jobs = 1) {
  const auto giant = giant_component_nodes(net);
  if (giant.size() < 2) return 0;
  const Adjacency adj(net);
  std::vector<std::size_t> ecc(giant.size(), 0);
  parallel_for(giant.size(), jobs, [&](std::size_t s) {
    std::vector<std::int32_t> dist(adj.node_count(), -1);
    std::vector<std::uint32_t> queue;
    queue.reserve(giant.size());
    queue.push_back(giant[s]);
    dist[giant[s]] = 0;
    std::size_t head = 0;
    std::int32_t far = 0;
    while (head < queue.size()) {
      const auto u = queue[head++];
      for (auto v : adj.neighbors(u)) {
        if (dist[v] >= 0) continue;
        dist[v] = dist[u] + 1;
        far = std::max(far, dist[v]);
        queue.push_back(v);
      }
    }
    ecc[s] = static_cast<std::size_t>(far);
  });
  return *std::max_element(ecc.begin(), ecc.end());
}

struct TriangleCounts {
  std::uint64_t triangles = 0;
  std::uint64_t connected_triples = 0;  // paths of length two, sum of C(deg, 2)
};

inline TriangleCounts count_triangles(const CouplingNetwork& net) {
  const Adjacency adj(net);
  const std::size_t n = adj.node_count();
  TriangleCounts out;
  // Orient each edge from lower to higher (degree, id) rank and intersect
  // forward neighbour lists.
  auto rank_less = [&](std::uint32_t a, std::uint32_t b) {
    const auto da = adj.degree(a), db = adj.degree(b);
    return da != db ? da < db : a < b;
  };
  std::vector<std::vector<std::uint32_t>> forward(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    const auto d = adj.degree(u);
    out.connected_triples += static_cast<std::uint64_t>(d) * (d > 0 ? d - 1 : 0) / 2;
    for (auto v : adj.neighbors(u)) {
      if (rank_less(u, v)) forward[u].push_back(v);
    }
  }
  std::vector<char> mark(n, 0);
  for (std::uint32_t u = 0; u < n; ++u) {
    for (auto v : forward[u]) mark[v] = 1;
    for (auto v : forward[u]) {
      for (auto w : forward[v]) out.triangles += mark[w];
    }
    for (auto v : forward[u]) mark[v] = 0;
  }
  return out;
}

inline double global_clustering(const CouplingNetwork& net) {
  const auto t = count_triangles(net);
  if (t.connected_triples == 0) return 0.0;
  return 3.0 * static_cast<double>(t.triangles) / static_cast<double>(t.connected_triples);
}

inline double density(const CouplingNetwork& net) {
  const double n = static_cast<double>(net.node_count());
  if (n < 2) return 0.0;
  return 2.0 * static_cast<double>(net.edges.size()) / (n * (n - 1.0));
}

// ---------------------------------------------------------------------------
// Greedy modularity

/// Weighted modularity of a node -> community assignment:
/// sum over communities of L_c / W - (d_c / 2W)^2.
inline double modularity(const CouplingNetwork& net, const std::vector<std::uint32_t>& community) {
  double total = 0.0;
  for (const auto& e : net.edges) total += e.weight;
  if (total <= 0.0) return 0.0;
  std::unordered_map<std::uint32_t, double> internal, degree;
  for (const auto& e : net.edges) {
    degree[community[e.u]] += e.weight;
    degree[community[e.v]] += e.weight;
    if (community[e.u] == community[e.v]) internal[community[e.u]] += e.weight;
  }
  double q = 0.0;
  for (const auto& [c, d] : degree) {
    auto it = internal.find(c);
    const double in = it == internal.end() ? 0.0 : it->second;
    q += in / total - (d / (2.0 * total)) * (d / (2.0 * total));
  }
  return q;
}

struct ModularityResult {
  std::vector<std::uint32_t> community;  // per node, renumbered by smallest member
  std::size_t n_communities = 0;
  double modularity = 0.0;
  std::vector<double> history;  // modularity after each merge, starting with singletons
};

/// Agglomerative greedy optimisation: repeatedly merges the pair of adjacent
/// communities with the largest modularity gain until no positive gain is
/// left. Ties go to the pair with the smallest (lower, higher) community
/// index; the lower index survives a merge.
inline ModularityResult greedy_modularity(const CouplingNetwork& net) {
  const std::size_t n = net.node_count();
  ModularityResult out;
  double total = 0.0;
  for (const auto& e : net.edges) total += e.weight;
  std::vector<std::uint32_t> parent(n);
  for (std::uint32_t i = 0; i < n; ++i) parent[i] = i;

  if (total > 0.0) {
    const double two_w = 2.0 * total;
    std::vector<double> a(n, 0.0);
    std::vector<std::unordered_map<std::uint32_t, double>> e(n);
    for (const auto& edge : net.edges) {
      const double x = edge.weight / two_w;
      a[edge.u] += x;
      a[edge.v] += x;
      e[edge.u][edge.v] += x;
      e[edge.v][edge.u] += x;
    }
    double q = 0.0;
    for (double ai : a) q -= ai * ai;
    out.history.push_back(q);

    struct Candidate {
      double gain;
      std::uint32_t i, j;  // i < j
      std::uint32_t ver_i, ver_j;
    };
    auto worse = [](const Candidate& x, const Candidate& y) {
      if (x.gain != y.gain) return x.gain < y.gain;
      if (x.i != y.i) return x.i > y.i;
      return x.j > y.j;
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
    std::vector<std::uint32_t> version(n, 0);
    std::vector<char> alive(n, 1);
    auto push = [&](std::uint32_t x, std::uint32_t y, double exy) {
      const auto i = std::min(x, y), j = std::max(x, y);
      heap.push({2.0 * (exy - a[i] * a[j]), i, j, version[i], version[j]});
    };
    for (const auto& edge : net.edges) push(edge.u, edge.v, e[edge.u][edge.v]);

    while (!heap.empty()) {
      const Candidate top = heap.top();
      heap.pop();
      if (!alive[top.i] || !alive[top.j] || version[top.i] != top.ver_i || version[top.j] != top.ver_j) {
        continue;
      }
      if (!(top.gain > 0.0)) break;
      const auto keep = top.i, gone = top.j;
      for (const auto& [k, x] : e[gone]) {
        if (k == keep) continue;
        e[keep][k] += x;
        e[k][keep] += x;
        e[k].erase(gone);
      }
      e[keep].erase(gone);
      e[gone].clear();
      a[keep] += a[gone];
      a[gone] = 0.0;
      alive[gone] = 0;
      parent[gone] = keep;
      ++version[keep];
      q += top.gain;
      out.history.push_back(q);
      for (const auto& [k, x] : e[keep]) push(keep, k, x);
    }
  } else {
    out.history.push_back(0.0);
  }

  // Resolve merge chains, then renumber by smallest member node.
  std::vector<std::uint32_t> root(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t r = i;
    while (parent[r] != r) r = parent[r];
    root[i] = r;
  }
  std::unordered_map<std::uint32_t, std::uint32_t> renumber;
  out.community.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto [it, inserted] = renumber.emplace(root[i], static_cast<std::uint32_t>(renumber.size()));
    out.community[i] = it->second;
  }
  out.n_communities = renumber.size();
  out.modularity = modularity(net, out.community);
  return out;
}

struct NetworkStats {
  std::size_t n_nodes = 0;
  std::size_t n_isolated = 0;
  std::size_t n_edges = 0;
  double density = 0.0;
  std::size_t diameter = 0;  // of the giant component
  double global_clustering = 0.0;
  double modularity = 0.0;
  std::size_t n_communities = 0;
};

inline NetworkStats network_stats(const CouplingNetwork& net, unsigned jobs = 1) {
  if (net.node_count() == 0) throw UsageError("network has no nodes");
  NetworkStats s;
  s.n_nodes = net.node_count();
  s.n_edges = net.edges.size();
  std::vector<char> has_edge(s.n_nodes, 0);
  for (const auto& e : net.edges) has_edge[e.u] = has_edge[e.v] = 1;
  s.n_isolated = static_cast<std::size_t>(std::count(has_edge.begin(), has_edge.end(), 0));
  s.density = density(net);
  s.diameter = giant_component_diameter(net, jobs);
  s.global_clustering = global_clustering(net);
  const auto mod = greedy_modularity(net);
  s.modularity = mod.modularity;
  s.n_communities = mod.n_communities;
  return s;
}

inline nlohmann::ordered_json to_json(const NetworkStats& s) {
  nlohmann::ordered_json j;
  j["n_nodes"] = s.n_nodes;
  j["n_isolated"] = s.n_isolated;
  j["n_edges"] = s.n_edges;
  j["density"] = s.density;
  j["diameter"] = s.diameter;
  j["global_clustering"] = s.global_clustering;
  j["modularity"] = s.modularity;
  j["n_communities"] = s.n_communities;
  return j;
}

}  // namespace specialism
