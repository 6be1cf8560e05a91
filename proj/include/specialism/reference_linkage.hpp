#pragma once

// Reference deduplication: raw reference strings are split into an author
// block and the remaining text, then merged into source clusters when the
// first-author surnames agree, the author blocks score at least 0.9 under
// Jaro-Winkler, and the remaining texts score above a per-corpus threshold.
// The threshold itself is calibrated against human-labelled pairs.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specialism/common.hpp"
#include "specialism/csv.hpp"
#include "specialism/record_model.hpp"
#include "specialism/union_find.hpp"

namespace specialism {

// ---------------------------------------------------------------------------
// Jaro-Winkler

/// Jaro similarity over bytes. Two empty strings score 1, one empty string 0.
inline double jaro(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  if (a.size() > b.size()) std::swap(a, b);
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  const std::size_t window = lb / 2 > 0 ? lb / 2 - 1 : 0;
  std::vector<char> a_match(la, 0), b_match(lb, 0);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < la; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(lb, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (!b_match[j] && a[i] == b[j]) {
        a_match[i] = b_match[j] = 1;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;
  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < la; ++i) {
    if (!a_match[i]) continue;
    while (!b_match[j]) ++j;
    if (a[i] != b[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  return (m / static_cast<double>(la) + m / static_cast<double>(lb) + (m - t) / m) / 3.0;
}

struct JaroWinklerParams {
  double prefix_scale = 0.1;
  std::size_t max_prefix = 4;
};

/// Jaro similarity boosted by the common prefix: J + l * p * (1 - J).
inline double jaro_winkler(std::string_view a, std::string_view b,
                           JaroWinklerParams params = {}) {
  const double j = jaro(a, b);
  std::size_t prefix = 0;
  const std::size_t cap = std::min({a.size(), b.size(), params.max_prefix});
  while (prefix < cap && a[prefix] == b[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * params.prefix_scale * (1.0 - j);
}

// ---------------------------------------------------------------------------
// Author/rest splitting

struct SplitReference {
  std::string author_block;
  std::vector<AuthorKey> author_keys;
  std::string rest;
};

struct ParsedReference {
  std::string ref_id;
  std::string owner_pub;
  std::string author_block;
  std::vector<AuthorKey> author_keys;
  std::string rest;
};

namespace detail {

// Heuristic grammar for leading author lists in reference strings:
//   block     := name (sep name)* [sep? "et al."]
//   name      := particle* word (" " word)* [","] initials
//   word      := Capital (letter | "-" | "'")+
//   initials  := (Capital "." ["-" | " "])+  |  Capital{1,3} (no dots, before a delimiter)
//   sep       := "," | ";" | " and " | " & " (commas may be followed by and/&)
// Bytes >= 0x80 are treated as letters so accented names pass through.
class AuthorBlockScanner {
 public:
  explicit AuthorBlockScanner(std::string_view s) : s_(s) {}

  struct Name {
    std::size_t end = 0;
    std::string surname;
    std::string initials;
  };

  std::optional<Name> name_at(std::size_t p) const {
    p = skip_spaces(p);
    std::size_t q = p;
    while (true) {
      const std::size_t after = particle_end(q);
      if (after == q) break;
      q = after;
    }
    std::optional<Name> best;
    while (true) {
      const std::size_t wend = word_end(q);
      if (wend == q) break;
      if (auto ini = initials_after(wend)) {
        best = Name{ini->first, std::string(s_.substr(p, wend - p)), ini->second};
      }
      if (wend < s_.size() && s_[wend] == ' ' && wend + 1 < s_.size()) {
        q = wend + 1;
      } else {
        break;
      }
    }
    return best;
  }

  // End of the separator starting at p, or npos.
  std::size_t separator_end(std::size_t p) const {
    std::size_t q = skip_spaces(p);
    bool found = false;
    if (q < s_.size() && (s_[q] == ',' || s_[q] == ';')) {
      ++q;
      found = true;
      q = skip_spaces(q);
    }
    if (starts_with_word(q, "and")) {
      q = skip_spaces(q + 3);
      found = true;
    } else if (q < s_.size() && s_[q] == '&') {
      q = skip_spaces(q + 1);
      found = true;
    }
    return found ? q : std::string_view::npos;
  }

  std::size_t et_al_end(std::size_t p) const {
    std::size_t q = skip_spaces(p);
    if (q < s_.size() && s_[q] == ',') q = skip_spaces(q + 1);
    if (s_.substr(q, 5) == "et al") {
      q += 5;
      if (q < s_.size() && s_[q] == '.') ++q;
      return q;
    }
    return std::string_view::npos;
  }

 private:
  static bool is_upper(char c) {
    return (c >= 'A' && c <= 'Z') || static_cast<unsigned char>(c) >= 0x80;
  }
  static bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
  static bool is_letter(char c) { return is_upper(c) || is_lower(c); }

  std::size_t skip_spaces(std::size_t p) const {
    while (p < s_.size() && (s_[p] == ' ' || s_[p] == '\t')) ++p;
    return p;
  }

  bool starts_with_word(std::size_t p, std::string_view w) const {
    if (s_.substr(p, w.size()) != w) return false;
    const std::size_t e = p + w.size();
    return e < s_.size() && s_[e] == ' ';
  }

  std::size_t particle_end(std::size_t p) const {
    static constexpr std::string_view kParticles[] = {
        "van", "von", "de", "der", "den", "del", "della", "di", "da", "du",
        "la",  "le",  "dos", "das", "ten", "ter", "al", "el", "zu", "y"};
    for (auto part : kParticles) {
      if (starts_with_word(p, part)) {
        const std::size_t q = p + part.size() + 1;
        if (q < s_.size() && (is_upper(s_[q]) || particle_end(q) != q)) return q;
      }
    }
    return p;
  }

  std::size_t word_end(std::size_t p) const {
    if (p >= s_.size() || !is_upper(s_[p])) return p;
    std::size_t q = p + 1;
    while (q < s_.size() && (is_letter(s_[q]) || s_[q] == '-' || s_[q] == '\'')) ++q;
    // Single capitals would be initials, not surnames.
    if (q - p < 2) return p;
    if (s_[q - 1] == '-' || s_[q - 1] == '\'') return p;
    return q;
  }

  // Initials following a surname ending at p (after optional "," and spaces).
  std::optional<std::pair<std::size_t, std::string>> initials_after(std::size_t p) const {
    std::size_t q = p;
    if (q < s_.size() && s_[q] == ',') ++q;
    if (q >= s_.size() || s_[q] != ' ') return std::nullopt;
    q = skip_spaces(q);
    std::string letters;
    std::size_t end = std::string_view::npos;
    // Dotted form: "M.", "M.M.", "J.-P.", "M. M."
    std::size_t r = q;
    while (r + 1 < s_.size() && s_[r] >= 'A' && s_[r] <= 'Z' && s_[r + 1] == '.') {
      letters.push_back(static_cast<char>(s_[r] - 'A' + 'a'));
      r += 2;
      end = r;
      if (r < s_.size() && s_[r] == '-') {
        ++r;
      } else if (r + 2 < s_.size() && s_[r] == ' ' && s_[r + 1] >= 'A' && s_[r + 1] <= 'Z' &&
                 s_[r + 2] == '.') {
        ++r;
      }
    }
    if (end != std::string_view::npos) {
      if (end < s_.size() && is_letter(s_[end])) return std::nullopt;
      return std::make_pair(end, letters);
    }
    // Undotted form: "MM" directly followed by a delimiter other than a space
    // run into more words ("KESSLER MM, 1963").
    r = q;
    while (r < s_.size() && s_[r] >= 'A' && s_[r] <= 'Z' && r - q < 4) ++r;
    const std::size_t n = r - q;
    if (n >= 1 && n <= 3 && (r >= s_.size() || s_[r] == ',' || s_[r] == ';')) {
      for (std::size_t k = q; k < r; ++k) letters.push_back(static_cast<char>(s_[k] - 'A' + 'a'));
      return std::make_pair(r, letters);
    }
    return std::nullopt;
  }

  std::string_view s_;
};

inline std::string_view strip_leading_delimiters(std::string_view s) {
  while (!s.empty() && (s.front() == ',' || s.front() == ';' || s.front() == ':' ||
                        s.front() == '.' || s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  return trim(s);
}

}  // namespace detail

/// Splits a raw reference into its leading author block and the rest.
/// Returns nullopt (discarded) when no author block can be recognised.
inline std::optional<SplitReference> split_reference(std::string_view raw) {
  const std::string_view s = trim(raw);
  detail::AuthorBlockScanner scanner(s);
  auto first = scanner.name_at(0);
  if (!first) return std::nullopt;
  std::vector<detail::AuthorBlockScanner::Name> names{*first};
  std::size_t block_end = first->end;
  while (true) {
    if (const std::size_t e = scanner.et_al_end(block_end); e != std::string_view::npos) {
      block_end = e;
      break;
    }
    const std::size_t sep = scanner.separator_end(block_end);
    if (sep == std::string_view::npos) break;
    auto next = scanner.name_at(sep);
    if (!next) break;
    names.push_back(*next);
    block_end = next->end;
  }
  SplitReference out;
  out.author_block = std::string(trim(s.substr(0, block_end)));
  out.rest = std::string(detail::strip_leading_delimiters(s.substr(block_end)));
  for (const auto& n : names) {
    AuthorKey key{detail::normalize_surname(n.surname), n.initials};
    if (!key.surname.empty()) out.author_keys.push_back(std::move(key));
  }
  if (out.author_keys.empty()) return std::nullopt;
  return out;
}

inline std::string make_ref_id(std::string_view pub_id, std::size_t index) {
  return std::string(pub_id) + "#" + std::to_string(index);
}

struct ParsedCorpusReferences {
  std::vector<ParsedReference> references;
  std::size_t n_raw = 0;
  std::size_t n_discarded = 0;
};

/// Parses every raw reference of the corpus. ref_id is "<pub_id>#<index>"
/// with the zero-based position in the publication's reference list.
inline ParsedCorpusReferences parse_corpus_references(const Corpus& corpus) {
  ParsedCorpusReferences out;
  for (const auto& rec : corpus) {
    for (std::size_t k = 0; k < rec.raw_references.size(); ++k) {
      ++out.n_raw;
      const auto& raw = rec.raw_references[k];
      std::optional<SplitReference> split;
      if (!trim(raw).empty()) split = split_reference(raw);
      if (!split) {
        ++out.n_discarded;
        continue;
      }
      out.references.push_back(ParsedReference{make_ref_id(rec.pub_id, k), rec.pub_id,
                                               std::move(split->author_block),
                                               std::move(split->author_keys),
                                               std::move(split->rest)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Merging

struct SourceCluster {
  std::string cluster_id;
  std::vector<std::string> members;  // ref_ids in input order
  std::size_t citation_count = 0;    // distinct citing publications
};

inline constexpr double kAuthorBlockThreshold = 0.9;

struct MergeOptions {
  unsigned jobs = 1;
};

inline std::string cluster_id_for(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 7) digits.insert(0, 7 - digits.size(), '0');
  return "c" + digits;
}

/// Single-linkage clustering of references under the three match
/// conditions. Identical (case-folded) author/rest pairs are merged
/// directly; distinct ones are compared pairwise within first-author
/// surname blocks. Clusters are ordered by their first member.
inline std::vector<SourceCluster> merge_references(const std::vector<ParsedReference>& refs,
                                                   double rest_threshold,
                                                   MergeOptions options = {}) {
  if (!(rest_threshold > 0.0 && rest_threshold < 1.0)) {
    throw UsageError("rest threshold must lie in (0, 1)");
  }
  const std::size_t n = refs.size();
  UnionFind uf(n);

  // Deduplicate identical folded strings.
  std::vector<std::string> folded_block(n), folded_rest(n);
  std::vector<std::uint32_t> representative(n);
  std::vector<std::uint32_t> distinct;
  {
    std::unordered_map<std::string, std::uint32_t> seen;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (refs[i].author_keys.empty()) {
        throw DataError("reference '" + refs[i].ref_id + "' has no author keys");
      }
      folded_block[i] = text::fold_lower(refs[i].author_block);
      folded_rest[i] = text::fold_lower(refs[i].rest);
      std::string key = refs[i].author_keys.front().surname;
      key.push_back('\x1f');
      key += folded_block[i];
      key.push_back('\x1f');
      key += folded_rest[i];
      auto [it, inserted] = seen.emplace(std::move(key), i);
      representative[i] = it->second;
      if (inserted) distinct.push_back(i);
      else uf.unite(it->second, i);
    }
  }

  // Surname blocks over distinct representatives, in order of first appearance.
  std::vector<std::vector<std::uint32_t>> blocks;
  {
    std::unordered_map<std::string, std::size_t> block_of;
    for (std::uint32_t i : distinct) {
      const auto& surname = refs[i].author_keys.front().surname;
      auto [it, inserted] = block_of.emplace(surname, blocks.size());
      if (inserted) blocks.emplace_back();
      blocks[it->second].push_back(i);
    }
  }

  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> matches(blocks.size());
  parallel_for(blocks.size(), options.jobs, [&](std::size_t b) {
    const auto& block = blocks[b];
    for (std::size_t x = 0; x < block.size(); ++x) {
      for (std::size_t y = x + 1; y < block.size(); ++y) {
        const auto i = block[x];
        const auto j = block[y];
        if (jaro_winkler(folded_block[i], folded_block[j]) < kAuthorBlockThreshold) continue;
        if (jaro_winkler(folded_rest[i], folded_rest[j]) > rest_threshold) {
          matches[b].emplace_back(i, j);
        }
      }
    }
  });
  for (const auto& block_matches : matches) {
    for (auto [i, j] : block_matches) uf.unite(i, j);
  }

  std::vector<SourceCluster> clusters;
  std::unordered_map<std::uint32_t, std::size_t> cluster_of_root;
  std::vector<std::unordered_set<std::string>> owners;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto root = uf.find(i);
    auto [it, inserted] = cluster_of_root.emplace(root, clusters.size());
    if (inserted) {
      clusters.push_back(SourceCluster{cluster_id_for(clusters.size()), {}, 0});
      owners.emplace_back();
    }
    clusters[it->second].members.push_back(refs[i].ref_id);
    owners[it->second].insert(refs[i].owner_pub);
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) clusters[c].citation_count = owners[c].size();
  return clusters;
}

inline nlohmann::ordered_json to_json(const SourceCluster& c) {
  nlohmann::ordered_json j;
  j["cluster_id"] = c.cluster_id;
  j["members"] = c.members;
  j["citation_count"] = c.citation_count;
  return j;
}

inline void write_clusters_jsonl(const std::vector<SourceCluster>& clusters, std::ostream& out) {
  for (const auto& c : clusters) out << to_json(c).dump() << '\n';
}

inline std::vector<SourceCluster> read_clusters_jsonl(std::istream& in) {
  std::vector<SourceCluster> clusters;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SourceCluster c;
      c.cluster_id = j.at("cluster_id").get<std::string>();
      c.members = j.at("members").get<std::vector<std::string>>();
      c.citation_count = j.at("citation_count").get<std::size_t>();
      if (c.members.empty()) throw DataError("empty cluster");
      clusters.push_back(std::move(c));
    } catch (const std::exception& e) {
      throw DataError("clusters line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return clusters;
}

/// Owning publication of a ref_id ("<pub_id>#<index>").
inline std::string_view owner_of_ref_id(std::string_view ref_id) {
  const auto hash = ref_id.rfind('#');
  if (hash == std::string_view::npos) throw DataError("malformed ref_id '" + std::string(ref_id) + "'");
  return ref_id.substr(0, hash);
}

// ---------------------------------------------------------------------------
// Threshold calibration

struct RefPair {
  std::string a;
  std::string b;

  auto operator<=>(const RefPair&) const = default;
};

inline RefPair canonical_pair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

struct ScoredPair {
  RefPair pair;
  double score = 0.0;
};

using PairLabels = std::map<RefPair, bool>;

struct CalibrationReport {
  double threshold = 0.0;
  double accuracy_above = 0.0;
  double accuracy_below = 0.0;
  std::size_t n_above = 0;  // pairs in the window above (at most 100)
  std::size_t n_below = 0;
  bool short_window = false;  // fewer than 100 pairs on a side
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, std::optional<CalibrationReport> best)
      : Error(what), best_(best) {}
  const std::optional<CalibrationReport>& best_candidate() const { return best_; }

 private:
  std::optional<CalibrationReport> best_;
};

inline constexpr std::size_t kCalibrationWindow = 100;

/// Scans every distinct score as a cut point t (pairs with score > t merge).
/// The window above holds the 100 lowest-scoring pairs with score > t, the
/// window below the 100 highest-scoring pairs with score <= t; accuracy is
/// the share of true matches. Valid cuts have accuracy above > 0.5 and
/// below < 0.5; the reported cut maximises the accuracy contrast (above
/// minus below), smallest t on ties. Unlabelled pairs are ignored.
inline CalibrationReport calibrate_threshold(const std::vector<ScoredPair>& candidate_pairs,
                                             const PairLabels& labels) {
  std::vector<std::pair<double, bool>> rows;  // descending by score
  rows.reserve(candidate_pairs.size());
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& sp : candidate_pairs) {
    if (sp.score > prev) throw UsageError("candidate pairs must be sorted by score descending");
    prev = sp.score;
    auto it = labels.find(canonical_pair(sp.pair.a, sp.pair.b));
    if (it == labels.end()) continue;
    rows.emplace_back(sp.score, it->second);
  }
  if (rows.size() < 2 * kCalibrationWindow) {
    throw UsageError("calibration needs at least 200 labelled pairs, got " +
                     std::to_string(rows.size()));
  }
  const std::size_t n = rows.size();
  std::vector<std::size_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (rows[i].second ? 1 : 0);

  std::optional<CalibrationReport> best_valid;
  std::optional<CalibrationReport> best_any;
  double best_valid_contrast = -2.0;
  double best_any_contrast = -2.0;
  // Walk from the lowest score upwards so ties in contrast keep the smallest t.
  std::size_t k = n;
  while (k > 0) {
    // rows[start, k) share the score t = rows[k-1].first
    std::size_t start = k - 1;
    while (start > 0 && rows[start - 1].first == rows[k - 1].first) --start;
    const double t = rows[k - 1].first;
    const std::size_t above_end = start;  // indices [0, start) have score > t
    k = start;
    if (above_end == 0) break;
    const std::size_t above_begin = above_end > kCalibrationWindow ? above_end - kCalibrationWindow : 0;
    const std::size_t below_begin = above_end;
    const std::size_t below_end = std::min(n, below_begin + kCalibrationWindow);
    CalibrationReport r;
    r.threshold = t;
    r.n_above = above_end - above_begin;
    r.n_below = below_end - below_begin;
    r.accuracy_above = static_cast<double>(prefix[above_end] - prefix[above_begin]) /
                       static_cast<double>(r.n_above);
    r.accuracy_below = static_cast<double>(prefix[below_end] - prefix[below_begin]) /
                       static_cast<double>(r.n_below);
    r.short_window = r.n_above < kCalibrationWindow || r.n_below < kCalibrationWindow;
    const double contrast = r.accuracy_above - r.accuracy_below;
    if (contrast > best_any_contrast) {
      best_any_contrast = contrast;
      best_any = r;
    }
    if (r.accuracy_above > 0.5 && r.accuracy_below < 0.5 && contrast > best_valid_contrast) {
      best_valid_contrast = contrast;
      best_valid = r;
    }
  }
  if (!best_valid) {
    throw CalibrationError("no threshold separates matches from non-matches", best_any);
  }
  return *best_valid;
}

inline nlohmann::ordered_json to_json(const CalibrationReport& r) {
  nlohmann::ordered_json j;
  j["threshold"] = r.threshold;
  j["accuracy_above"] = r.accuracy_above;
  j["accuracy_below"] = r.accuracy_below;
  j["n_above"] = r.n_above;
  j["n_below"] = r.n_below;
  j["short_window"] = r.short_window;
  return j;
}

inline bool parse_bool_cell(std::string_view v) {
  v = trim(v);
  if (v == "1" || v == "true" || v == "True" || v == "TRUE" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "False" || v == "FALSE" || v == "no") return false;
  throw DataError("not a boolean: '" + std::string(v) + "'");
}

/// Labels CSV: `ref_id_a,ref_id_b,is_match` with a header row.
inline PairLabels read_labels_csv(std::istream& in) {
  PairLabels labels;
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->size() < 3 || trim((*header)[0]) != "ref_id_a") {
    throw DataError("labels file must start with header ref_id_a,ref_id_b,is_match");
  }
  while (auto row = reader.next()) {
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;
    if (row->size() < 3) {
      throw DataError("labels line " + std::to_string(reader.line()) + ": expected 3 fields");
    }
    try {
      labels[canonical_pair((*row)[0], (*row)[1])] = parse_bool_cell((*row)[2]);
    } catch (const DataError& e) {
      throw DataError("labels line " + std::to_string(reader.line()) + ": " + e.what());
    }
  }
  return labels;
}

/// Scores each labelled pair by Jaro-Winkler on the (case-folded) rest
/// text, sorted descending by score then by ids.
inline std::vector<ScoredPair> score_labelled_pairs(const std::vector<ParsedReference>& refs,
                                                    const PairLabels& labels) {
  std::unordered_map<std::string, const ParsedReference*> by_id;
  for (const auto& r : refs) by_id.emplace(r.ref_id, &r);
  std::vector<ScoredPair> out;
  for (const auto& [pair, is_match] : labels) {
    auto a = by_id.find(pair.a);
    auto b = by_id.find(pair.b);
    if (a == by_id.end() || b == by_id.end()) continue;
    out.push_back({pair, jaro_winkler(text::fold_lower(a->second->rest),
                                      text::fold_lower(b->second->rest))});
  }
  std::sort(out.begin(), out.end(), [](const ScoredPair& x, const ScoredPair& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.pair < y.pair;
  });
  return out;
}

}  // namespace specialism
