#pragma once

// Bibliographic coupling networks over publications: cosine overlap of
// unique cited-source sets, and symmetrized BM25 similarity of title plus
// abstract text. Edges exist only for strictly positive weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specialism/common.hpp"
#include "specialism/csv.hpp"
#include "specialism/record_model.hpp"
#include "specialism/reference_linkage.hpp"
#include "specialism/text.hpp"

namespace specialism {

enum class NetworkKind { reference, text };

inline std::string_view to_string(NetworkKind k) {
  return k == NetworkKind::reference ? "ref" : "text";
}

inline NetworkKind parse_network_kind(std::string_view s) {
  if (s == "ref" || s == "reference") return NetworkKind::reference;
  if (s == "text") return NetworkKind::text;
  throw UsageError("unknown network kind '" + std::string(s) + "' (expected ref or text)");
}

struct YearWindow {
  int start = 0;
  int end = 0;

  bool contains(int year) const { return year >= start && year <= end; }
  bool operator==(const YearWindow&) const = default;
};

/// Parses "2011:2015" or a single year "2013".
inline YearWindow parse_year_window(std::string_view s) {
  auto to_int = [&](std::string_view part) {
    part = trim(part);
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw UsageError("invalid year window '" + std::string(s) + "'");
    }
    return v;
  };
  const auto colon = s.find(':');
  YearWindow w;
  if (colon == std::string_view::npos) {
    w.start = w.end = to_int(s);
  } else {
    w.start = to_int(s.substr(0, colon));
    w.end = to_int(s.substr(colon + 1));
  }
  if (w.start > w.end) throw UsageError("year window start after end: '" + std::string(s) + "'");
  return w;
}

struct Edge {
  std::uint32_t u = 0;  // u < v
  std::uint32_t v = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Weighted undirected graph over publications. Edges are sorted by (u, v),
/// at most one per unordered pair, no self-loops, all weights > 0.
struct CouplingNetwork {
  NetworkKind kind = NetworkKind::reference;
  std::vector<std::string> nodes;  // pub_ids
  std::vector<Edge> edges;
  YearWindow year_window;

  std::size_t node_count() const { return nodes.size(); }
};

// ---------------------------------------------------------------------------
// Reference overlap

/// |A ∩ B| / sqrt(|A| |B|) over sorted, duplicate-free id lists. The root
/// of the exact integer product keeps identical sets at exactly 1.
template <typename T>
double reference_coupling_weight(std::span<const T> refs_i, std::span<const T> refs_j) {
  if (refs_i.empty() || refs_j.empty()) return 0.0;
  std::size_t common = 0;
  auto a = refs_i.begin();
  auto b = refs_j.begin();
  while (a != refs_i.end() && b != refs_j.end()) {
    if (*a < *b) ++a;
    else if (*b < *a) ++b;
    else { ++common; ++a; ++b; }
  }
  return static_cast<double>(common) / std::sqrt(static_cast<double>(refs_i.size() * refs_j.size()));
}

inline double reference_coupling_weight(const std::vector<std::string>& refs_i,
                                        const std::vector<std::string>& refs_j) {
  std::vector<std::string> a(refs_i), b(refs_j);
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return reference_coupling_weight<std::string>(a, b);
}

struct BuildOptions {
  unsigned jobs = 1;
};

/// Coupling network from per-node sorted unique source ids in [0, n_sources).
/// Pairs are enumerated through the source -> citing-nodes index, so pairs
/// without any common source are never visited.
inline std::vector<Edge> reference_coupling_edges(const std::vector<std::vector<std::uint32_t>>& sets,
                                                  std::size_t n_sources, BuildOptions options = {}) {
  const std::size_t n = sets.size();
  std::vector<std::vector<std::uint32_t>> citing(n_sources);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (auto c : sets[i]) citing[c].push_back(i);
  }
  std::vector<std::vector<Edge>> rows(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    if (sets[i].empty()) return;
    std::vector<std::uint32_t> common;
    std::vector<std::uint32_t> touched;
    common.assign(n, 0);
    for (auto c : sets[i]) {
      for (auto j : citing[c]) {
        if (j <= i) continue;
        if (common[j]++ == 0) touched.push_back(j);
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& row = rows[i];
    row.reserve(touched.size());
    for (auto j : touched) {
      const double w = static_cast<double>(common[j]) /
                       std::sqrt(static_cast<double>(sets[i].size() * sets[j].size()));
      row.push_back(Edge{static_cast<std::uint32_t>(i), j, w});
    }
  });
  std::vector<Edge> edges;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  edges.reserve(total);
  for (auto& r : rows) edges.insert(edges.end(), r.begin(), r.end());
  return edges;
}

namespace detail {

inline YearWindow corpus_year_span(const Corpus& corpus) {
  if (corpus.empty()) throw UsageError("empty corpus");
  YearWindow w{corpus.front().year, corpus.front().year};
  for (const auto& r : corpus) {
    w.start = std::min(w.start, r.year);
    w.end = std::max(w.end, r.year);
  }
  return w;
}

inline std::vector<std::size_t> window_members(const Corpus& corpus, const YearWindow& w) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (w.contains(corpus[i].year)) idx.push_back(i);
  }
  if (idx.empty()) {
    throw UsageError("empty year window " + std::to_string(w.start) + ":" + std::to_string(w.end));
  }
  return idx;
}

}  // namespace detail

/// Unique source-cluster index sets per publication, indexed like `nodes`.
inline std::vector<std::vector<std::uint32_t>> cluster_sets(const std::vector<std::string>& nodes,
                                                            const std::vector<SourceCluster>& clusters) {
  std::unordered_map<std::string_view, std::uint32_t> node_of;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) node_of.emplace(nodes[i], i);
  std::vector<std::vector<std::uint32_t>> sets(nodes.size());
  for (std::uint32_t c = 0; c < clusters.size(); ++c) {
    for (const auto& ref_id : clusters[c].members) {
      auto it = node_of.find(owner_of_ref_id(ref_id));
      if (it == node_of.end()) continue;
      auto& s = sets[it->second];
      if (s.empty() || s.back() != c) s.push_back(c);
    }
  }
  for (auto& s : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return sets;
}

inline CouplingNetwork build_reference_network(const Corpus& corpus,
                                               const std::vector<SourceCluster>& clusters,
                                               std::optional<YearWindow> window = std::nullopt,
                                               BuildOptions options = {}) {
  CouplingNetwork net;
  net.kind = NetworkKind::reference;
  net.year_window = window ? *window : detail::corpus_year_span(corpus);
  for (auto i : detail::window_members(corpus, net.year_window)) net.nodes.push_back(corpus[i].pub_id);
  net.edges = reference_coupling_edges(cluster_sets(net.nodes, clusters), clusters.size(), options);
  return net;
}

// ---------------------------------------------------------------------------
// Text similarity

/// Lowercases, splits on whitespace, strips non-alphanumeric characters from
/// every token and drops tokens of at most one character.
inline std::vector<std::string> tokenize(std::string_view text_in) {
  std::vector<std::string> tokens;
  std::string cur;
  std::size_t cur_len = 0;  // code points
  auto flush = [&] {
    if (cur_len > 1) tokens.push_back(cur);
    cur.clear();
    cur_len = 0;
  };
  for (char32_t cp : text::decode_utf8(text_in)) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v') {
      flush();
    } else if (text::is_ascii_alpha(cp) || text::is_ascii_digit(cp)) {
      cur.push_back(cp >= 'A' && cp <= 'Z' ? static_cast<char>(cp - 'A' + 'a') : static_cast<char>(cp));
      ++cur_len;
    } else if (text::is_token_char(cp)) {
      text::append_utf8(cur, text::to_lower(cp));
      ++cur_len;
    }
  }
  flush();
  return tokens;
}

inline std::string document_text(const PublicationRecord& rec) {
  if (rec.abstract.empty()) return rec.title;
  return rec.title + " " + rec.abstract;
}

struct Bm25Params {
  double k1 = 2.0;
  double b = 0.75;
};

/// Token statistics for one corpus slice. Documents are indexed 0..N-1.
class TokenStats {
 public:
  struct Term {
    std::uint32_t token;
    std::uint32_t count;
  };

  TokenStats() = default;

  explicit TokenStats(const std::vector<std::vector<std::string>>& docs, std::vector<std::string> ids = {})
      : ids_(std::move(ids)) {
    if (ids_.empty()) {
      for (std::size_t i = 0; i < docs.size(); ++i) ids_.push_back(std::to_string(i));
    }
    if (ids_.size() != docs.size()) throw UsageError("TokenStats: id count differs from document count");
    terms_.resize(docs.size());
    double total = 0.0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::unordered_map<std::uint32_t, std::uint32_t> counts;
      std::vector<std::uint32_t> order;
      for (const auto& tok : docs[d]) {
        auto [it, inserted] = token_id_.emplace(tok, static_cast<std::uint32_t>(tokens_.size()));
        if (inserted) {
          tokens_.push_back(tok);
          df_.push_back(0);
        }
        if (counts[it->second]++ == 0) order.push_back(it->second);
      }
      auto& terms = terms_[d];
      for (auto t : order) {
        terms.push_back({t, counts[t]});
        ++df_[t];
      }
      std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.token < b.token; });
      lengths_.push_back(docs[d].size());
      total += static_cast<double>(docs[d].size());
    }
    avg_length_ = docs.empty() ? 0.0 : total / static_cast<double>(docs.size());
  }

  std::size_t document_count() const { return terms_.size(); }
  std::size_t vocabulary_size() const { return tokens_.size(); }
  double average_length() const { return avg_length_; }
  std::size_t length(std::size_t doc) const { return lengths_[doc]; }
  const std::string& doc_id(std::size_t doc) const { return ids_[doc]; }
  const std::vector<Term>& terms(std::size_t doc) const { return terms_[doc]; }
  const std::string& token(std::uint32_t id) const { return tokens_[id]; }
  std::uint32_t document_frequency(std::uint32_t id) const { return df_[id]; }

  std::optional<std::uint32_t> token_id(std::string_view tok) const {
    auto it = token_id_.find(std::string(tok));
    if (it == token_id_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> token_id_;
  std::vector<std::string> tokens_;
  std::vector<std::uint32_t> df_;
  std::vector<std::vector<Term>> terms_;
  std::vector<std::size_t> lengths_;
  double avg_length_ = 0.0;
};

/// Natural-log IDF, or nullopt when the value is strictly negative (the token
/// is excluded from every score).
inline std::optional<double> idf_from_counts(std::size_t n_docs, std::size_t doc_freq) {
  const double n = static_cast<double>(n_docs);
  const double p = static_cast<double>(doc_freq);
  const double idf = std::log((n - p + 0.5) / (p + 0.5));
  if (idf < 0.0) return std::nullopt;
  return idf;
}

inline std::optional<double> compute_idf(const TokenStats& stats, std::string_view token) {
  auto id = stats.token_id(token);
  if (!id) throw UsageError("token '" + std::string(token) + "' is not in the vocabulary");
  return idf_from_counts(stats.document_count(), stats.document_frequency(*id));
}

namespace detail {

inline double bm25_term(double n_z, double doc_len, double avg_len, const Bm25Params& p) {
  return n_z * (p.k1 + 1.0) / (n_z + p.k1 * (1.0 - p.b + p.b * doc_len / avg_len));
}

}  // namespace detail

/// Directed BM25 score: i acts as the query, j as the document.
inline double bm25_directed(std::size_t i, std::size_t j, const TokenStats& stats,
                            Bm25Params params = {}) {
  const auto& qi = stats.terms(i);
  const auto& dj = stats.terms(j);
  const double len_j = static_cast<double>(stats.length(j));
  double score = 0.0;
  auto b = dj.begin();
  for (const auto& term : qi) {
    while (b != dj.end() && b->token < term.token) ++b;
    if (b == dj.end()) break;
    if (b->token != term.token) continue;
    auto idf = idf_from_counts(stats.document_count(), stats.document_frequency(term.token));
    if (!idf) continue;
    score += *idf * detail::bm25_term(b->count, len_j, stats.average_length(), params);
  }
  return score;
}

inline double symmetrize(double s_ij, double s_ji) { return (s_ij + s_ji) / 2.0; }

/// All-pairs symmetrized BM25 edges. Each pair accumulates contributions
/// only from the tokens it shares, via a token -> documents index.
inline std::vector<Edge> text_similarity_edges(const TokenStats& stats, Bm25Params params = {},
                                               BuildOptions options = {}) {
  const std::size_t n = stats.document_count();
  const double avg = stats.average_length();
  std::vector<double> idf(stats.vocabulary_size(), 0.0);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings(stats.vocabulary_size());
  for (std::uint32_t t = 0; t < stats.vocabulary_size(); ++t) {
    auto v = idf_from_counts(n, stats.document_frequency(t));
    idf[t] = v ? *v : 0.0;
  }
  // postings hold the per-document term factor n_z(k1+1)/(n_z + k1(...)).
  for (std::uint32_t d = 0; d < n; ++d) {
    const double len = static_cast<double>(stats.length(d));
    for (const auto& term : stats.terms(d)) {
      if (idf[term.token] <= 0.0) continue;
      postings[term.token].emplace_back(d, detail::bm25_term(term.count, len, avg, params));
    }
  }
  std::vector<std::vector<Edge>> rows(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    std::vector<double> acc(n, 0.0);
    std::vector<std::uint32_t> touched;
    const double len_i = static_cast<double>(stats.length(i));
    for (const auto& term : stats.terms(i)) {
      const double w = idf[term.token];
      if (w <= 0.0) continue;
      const double own = detail::bm25_term(term.count, len_i, avg, params);
      for (const auto& [j, factor] : postings[term.token]) {
        if (j <= i) continue;
        if (acc[j] == 0.0) touched.push_back(j);
        acc[j] += w * (factor + own);
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& row = rows[i];
    for (auto j : touched) {
      const double weight = acc[j] / 2.0;
      if (weight > 0.0) row.push_back(Edge{static_cast<std::uint32_t>(i), j, weight});
    }
  });
  std::vector<Edge> edges;
  for (auto& r : rows) edges.insert(edges.end(), r.begin(), r.end());
  return edges;
}

/// Token statistics computed over the publications inside the window only.
inline TokenStats window_token_stats(const Corpus& corpus, const YearWindow& window) {
  std::vector<std::vector<std::string>> docs;
  std::vector<std::string> ids;
  for (auto i : detail::window_members(corpus, window)) {
    docs.push_back(tokenize(document_text(corpus[i])));
    ids.push_back(corpus[i].pub_id);
  }
  return TokenStats(docs, std::move(ids));
}

inline CouplingNetwork build_text_network(const Corpus& corpus,
                                          std::optional<YearWindow> window = std::nullopt,
                                          Bm25Params params = {}, BuildOptions options = {}) {
  CouplingNetwork net;
  net.kind = NetworkKind::text;
  net.year_window = window ? *window : detail::corpus_year_span(corpus);
  const TokenStats stats = window_token_stats(corpus, net.year_window);
  for (std::size_t d = 0; d < stats.document_count(); ++d) net.nodes.push_back(stats.doc_id(d));
  net.edges = text_similarity_edges(stats, params, options);
  return net;
}

/// Dispatches on kind; `clusters` is required for reference networks.
inline CouplingNetwork build_network(const Corpus& corpus, NetworkKind kind,
                                     std::optional<YearWindow> window,
                                     const std::vector<SourceCluster>* clusters,
                                     BuildOptions options = {}) {
  if (kind == NetworkKind::reference) {
    if (!clusters) throw UsageError("reference networks need source clusters");
    return build_reference_network(corpus, *clusters, window, options);
  }
  return build_text_network(corpus, window, {}, options);
}

// ---------------------------------------------------------------------------
// Export / import: CSV edge list plus JSON sidecar

inline void write_edges_csv(const CouplingNetwork& net, std::ostream& out) {
  out << "src,dst,weight\n";
  for (const auto& e : net.edges) {
    out << csv::escape(net.nodes[e.u]) << ',' << csv::escape(net.nodes[e.v]) << ','
        << format_double(e.weight) << '\n';
  }
}

inline nlohmann::ordered_json sidecar_json(const CouplingNetwork& net) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(net.kind);
  j["year_window"] = {net.year_window.start, net.year_window.end};
  j["n_nodes"] = net.nodes.size();
  j["node_ids"] = net.nodes;
  return j;
}

inline CouplingNetwork read_network(std::istream& edges_csv, std::istream& sidecar) {
  CouplingNetwork net;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(sidecar);
    net.kind = parse_network_kind(meta.at("kind").get<std::string>());
    const auto yw = meta.at("year_window");
    net.year_window = {yw.at(0).get<int>(), yw.at(1).get<int>()};
    net.nodes = meta.at("node_ids").get<std::vector<std::string>>();
    if (meta.at("n_nodes").get<std::size_t>() != net.nodes.size()) {
      throw DataError("n_nodes does not match node_ids");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid network sidecar: ") + e.what());
  }
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < net.nodes.size(); ++i) {
    if (!index.emplace(net.nodes[i], i).second) throw DataError("duplicate node id " + net.nodes[i]);
  }
  csv::Reader reader(edges_csv);
  auto header = reader.next();
  if (!header || *header != csv::Row{"src", "dst", "weight"}) {
    throw DataError("edge list must start with header src,dst,weight");
  }
  while (auto row = reader.next()) {
    if (row->size() == 1 && row->front().empty()) continue;
    if (row->size() != 3) throw DataError("edge list line " + std::to_string(reader.line()) + ": expected 3 fields");
    auto a = index.find((*row)[0]);
    auto b = index.find((*row)[1]);
    if (a == index.end() || b == index.end()) {
      throw DataError("edge list line " + std::to_string(reader.line()) + ": unknown node");
    }
    double w = 0.0;
    const auto& cell = (*row)[2];
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), w);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !(w > 0.0)) {
      throw DataError("edge list line " + std::to_string(reader.line()) + ": weight must be > 0");
    }
    std::uint32_t u = a->second, v = b->second;
    if (u == v) throw DataError("edge list line " + std::to_string(reader.line()) + ": self-loop");
    if (v < u) std::swap(u, v);
    net.edges.push_back({u, v, w});
  }
  std::sort(net.edges.begin(), net.edges.end(), [](const Edge& x, const Edge& y) {
    return x.u != y.u ? x.u < y.u : x.v < y.v;
  });
  for (std::size_t i = 1; i < net.edges.size(); ++i) {
    if (net.edges[i].u == net.edges[i - 1].u && net.edges[i].v == net.edges[i - 1].v) {
      throw DataError("edge list contains a duplicate pair");
    }
  }
  return net;
}

}  // namespace specialism
