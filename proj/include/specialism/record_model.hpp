#pragma once

// Publication records: ingestion (JSONL canonical, CSV convenience), author
// name keys, and corpus summary statistics.

#include <compare>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "specialism/common.hpp"
#include "specialism/csv.hpp"
#include "specialism/text.hpp"

namespace specialism {

struct PublicationRecord {
  std::string pub_id;
  std::string venue;
  int year = 0;
  std::string title;
  std::string abstract;
  std::optional<int> page_count;
  std::vector<std::string> authors;
  std::vector<std::string> raw_references;

  // Records without any author are kept but excluded from author statistics.
  bool unusable() const { return authors.empty(); }

  bool operator==(const PublicationRecord&) const = default;
};

using Corpus = std::vector<PublicationRecord>;

struct AuthorKey {
  std::string surname;
  std::string initials;

  auto operator<=>(const AuthorKey&) const = default;

  /// Canonical display form, e.g. "smith, j. a.". Normalizing it again
  /// yields the same key.
  std::string to_name() const {
    std::string out = surname + ",";
    for (char32_t cp : text::decode_utf8(initials)) {
      out.push_back(' ');
      text::append_utf8(out, cp);
      out.push_back('.');
    }
    return out;
  }
};

class UnusableNameError : public DataError {
 public:
  using DataError::DataError;
};

namespace detail {

inline std::vector<std::vector<char32_t>> split_letter_runs(std::string_view s) {
  std::vector<std::vector<char32_t>> runs;
  std::vector<char32_t> cur;
  for (char32_t cp : text::decode_utf8(s)) {
    if (text::is_letter(cp)) {
      cur.push_back(cp);
    } else if (!cur.empty()) {
      runs.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) runs.push_back(std::move(cur));
  return runs;
}

inline std::string fold_cp(char32_t cp) {
  std::string tmp;
  text::append_utf8(tmp, cp);
  return text::fold_lower(tmp);
}

inline std::string normalize_surname(std::string_view raw) {
  // Letter runs joined by a single space or hyphen; everything else dropped.
  std::string out;
  bool pending_space = false;
  bool pending_hyphen = false;
  for (char32_t cp : text::decode_utf8(raw)) {
    if (text::is_letter(cp)) {
      if (!out.empty()) {
        if (pending_hyphen) out.push_back('-');
        else if (pending_space) out.push_back(' ');
      }
      pending_space = pending_hyphen = false;
      out += fold_cp(cp);
    } else if (cp == '-') {
      pending_hyphen = true;
    } else if (cp == ' ' || cp == '\t') {
      pending_space = true;
    }
  }
  return out;
}

inline bool is_ascii_upper_run(const std::vector<char32_t>& run) {
  for (char32_t c : run) {
    if (c < 'A' || c > 'Z') return false;
  }
  return true;
}

inline std::string initials_of(std::string_view forenames) {
  std::string out;
  for (const auto& run : split_letter_runs(forenames)) {
    // "JA" in "Smith, JA" is two initials, not a forename.
    if (run.size() >= 2 && run.size() <= 3 && is_ascii_upper_run(run)) {
      for (char32_t c : run) out += fold_cp(c).substr(0, 1);
      continue;
    }
    const std::string folded = fold_cp(run.front());
    if (text::is_ascii_alpha(static_cast<unsigned char>(folded.front()))) {
      out.push_back(folded.front());
    } else {
      out += folded;
    }
  }
  return out;
}

}  // namespace detail

/// Surname is the text before the first comma, or the last whitespace token
/// when there is no comma; the remaining tokens contribute their first
/// letter as initials. Throws UnusableNameError for names with no letters.
inline AuthorKey normalize_author(std::string_view raw_name) {
  const std::string_view name = trim(raw_name);
  std::string_view surname_part;
  std::string_view forename_part;
  if (const auto comma = name.find(','); comma != std::string_view::npos) {
    surname_part = name.substr(0, comma);
    forename_part = name.substr(comma + 1);
  } else {
    const auto last_space = name.find_last_of(" \t");
    if (last_space == std::string_view::npos) {
      surname_part = name;
    } else {
      surname_part = name.substr(last_space + 1);
      forename_part = name.substr(0, last_space);
    }
  }
  AuthorKey key{detail::normalize_surname(surname_part),
                detail::initials_of(forename_part)};
  if (key.surname.empty()) {
    throw UnusableNameError("unusable author name: '" + std::string(raw_name) + "'");
  }
  return key;
}

struct AuthorIndex {
  std::map<AuthorKey, std::set<std::string>> keys;  // key -> pub_ids
  std::size_t mentions = 0;                          // all author-list entries
  std::size_t unusable_mentions = 0;
};

/// Merges author mentions whose surname and initials coincide.
inline AuthorIndex unique_authors(const Corpus& corpus) {
  AuthorIndex index;
  for (const auto& rec : corpus) {
    for (const auto& name : rec.authors) {
      ++index.mentions;
      try {
        index.keys[normalize_author(name)].insert(rec.pub_id);
      } catch (const UnusableNameError&) {
        ++index.unusable_mentions;
      }
    }
  }
  return index;
}

/// Author keys of one publication, skipping unusable names.
inline std::vector<AuthorKey> author_keys(const PublicationRecord& rec) {
  std::vector<AuthorKey> keys;
  keys.reserve(rec.authors.size());
  for (const auto& name : rec.authors) {
    try {
      keys.push_back(normalize_author(name));
    } catch (const UnusableNameError&) {
    }
  }
  return keys;
}

// ---------------------------------------------------------------------------
// Ingestion and export

enum class CorpusFormat { jsonl, csv };

inline CorpusFormat parse_corpus_format(std::string_view s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "csv") return CorpusFormat::csv;
  throw UsageError("unknown corpus format '" + std::string(s) + "' (expected jsonl or csv)");
}

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  Corpus records;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

struct RowError {
  std::string message;
};

inline const nlohmann::json* find_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  const auto* v = find_field(j, key);
  if (!v) return out;
  if (!v->is_array()) throw RowError{std::string("field '") + key + "' must be an array of strings"};
  for (const auto& item : *v) {
    if (!item.is_string()) throw RowError{std::string("field '") + key + "' must contain only strings"};
    out.push_back(item.get<std::string>());
  }
  return out;
}

inline PublicationRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw RowError{"row is not a JSON object"};
  PublicationRecord rec;
  const auto* id = find_field(j, "pub_id");
  if (!id || !id->is_string() || id->get<std::string>().empty()) {
    throw RowError{"missing pub_id"};
  }
  rec.pub_id = id->get<std::string>();
  const auto* title = find_field(j, "title");
  if (!title || !title->is_string() || title->get<std::string>().empty()) {
    throw RowError{"missing title for pub_id '" + rec.pub_id + "'"};
  }
  rec.title = title->get<std::string>();
  const auto* year = find_field(j, "year");
  if (!year || !year->is_number_integer()) {
    throw RowError{"missing or non-integer year for pub_id '" + rec.pub_id + "'"};
  }
  rec.year = year->get<int>();
  if (const auto* venue = find_field(j, "venue")) {
    if (!venue->is_string()) throw RowError{"field 'venue' must be a string"};
    rec.venue = venue->get<std::string>();
  }
  if (const auto* abs = find_field(j, "abstract")) {
    if (!abs->is_string()) throw RowError{"field 'abstract' must be a string"};
    rec.abstract = abs->get<std::string>();
  }
  if (const auto* pages = find_field(j, "pages")) {
    if (!pages->is_number_integer() || pages->get<long long>() < 0) {
      throw RowError{"field 'pages' must be a non-negative integer or null"};
    }
    rec.page_count = pages->get<int>();
  }
  rec.authors = string_list(j, "authors");
  rec.raw_references = string_list(j, "references");
  return rec;
}

inline int parse_int_cell(std::string_view cell, const char* what) {
  cell = trim(cell);
  int value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw RowError{std::string("field '") + what + "' is not an integer: '" + std::string(cell) + "'"};
  }
  return value;
}

class IdRegistry {
 public:
  void add(const std::string& id, std::size_t line) {
    if (!seen_.insert(id).second) {
      throw DataError("duplicate pub_id '" + id + "' on line " + std::to_string(line));
    }
  }

 private:
  std::unordered_set<std::string> seen_;
};

}  // namespace detail

/// One record per JSON line. Malformed rows become diagnostics; a repeated
/// pub_id aborts with DataError. Blank lines are ignored.
inline IngestResult ingest_jsonl(std::istream& in) {
  IngestResult result;
  detail::IdRegistry ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto rec = detail::record_from_json(j);
      ids.add(rec.pub_id, lineno);
      result.records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      result.diagnostics.push_back({lineno, std::string("malformed JSON: ") + e.what()});
    } catch (const detail::RowError& e) {
      result.diagnostics.push_back({lineno, e.message});
    }
  }
  return result;
}

/// CSV with a header row naming the JSONL fields; `authors` and `references`
/// cells hold ';'-joined lists.
inline IngestResult ingest_csv(std::istream& in) {
  IngestResult result;
  detail::IdRegistry ids;
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return result;
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header->size(); ++i) {
    std::string name((*header)[i]);
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
    col.emplace(std::string(trim(name)), i);
  }
  for (const char* required : {"pub_id", "title", "year"}) {
    if (!col.count(required)) {
      throw DataError(std::string("CSV header lacks required column '") + required + "'");
    }
  }
  while (auto row = reader.next()) {
    const std::size_t lineno = reader.line();
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;
    auto cell = [&](const char* name) -> std::string {
      auto it = col.find(name);
      if (it == col.end() || it->second >= row->size()) return {};
      return (*row)[it->second];
    };
    try {
      if (row->size() != header->size()) {
        throw detail::RowError{"expected " + std::to_string(header->size()) + " fields, found " +
                               std::to_string(row->size())};
      }
      PublicationRecord rec;
      rec.pub_id = cell("pub_id");
      if (rec.pub_id.empty()) throw detail::RowError{"missing pub_id"};
      rec.title = cell("title");
      if (rec.title.empty()) throw detail::RowError{"missing title for pub_id '" + rec.pub_id + "'"};
      rec.year = detail::parse_int_cell(cell("year"), "year");
      rec.venue = cell("venue");
      rec.abstract = cell("abstract");
      if (auto pages = cell("pages"); !trim(pages).empty()) {
        const int p = detail::parse_int_cell(pages, "pages");
        if (p < 0) throw detail::RowError{"field 'pages' must be non-negative"};
        rec.page_count = p;
      }
      rec.authors = csv::split_list(cell("authors"));
      rec.raw_references = csv::split_list(cell("references"));
      ids.add(rec.pub_id, lineno);
      result.records.push_back(std::move(rec));
    } catch (const detail::RowError& e) {
      result.diagnostics.push_back({lineno, e.message});
    }
  }
  return result;
}

inline IngestResult ingest_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file '" + path + "'");
  return format == CorpusFormat::jsonl ? ingest_jsonl(in) : ingest_csv(in);
}

inline nlohmann::ordered_json to_json(const PublicationRecord& rec) {
  nlohmann::ordered_json j;
  j["pub_id"] = rec.pub_id;
  j["venue"] = rec.venue;
  j["year"] = rec.year;
  j["title"] = rec.title;
  j["abstract"] = rec.abstract;
  if (rec.page_count) j["pages"] = *rec.page_count;
  else j["pages"] = nullptr;
  j["authors"] = rec.authors;
  j["references"] = rec.raw_references;
  return j;
}

inline void export_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& rec : corpus) out << to_json(rec).dump() << '\n';
}

inline void export_csv(const Corpus& corpus, std::ostream& out) {
  out << "pub_id,venue,year,title,abstract,pages,authors,references\n";
  for (const auto& rec : corpus) {
    out << csv::join_row({rec.pub_id, rec.venue, std::to_string(rec.year), rec.title,
                          rec.abstract, rec.page_count ? std::to_string(*rec.page_count) : "",
                          csv::join_list(rec.authors), csv::join_list(rec.raw_references)});
  }
}

inline Corpus filter_venue(const Corpus& corpus, std::string_view venue) {
  Corpus out;
  for (const auto& rec : corpus) {
    if (rec.venue == venue) out.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary statistics

struct MeanMedian {
  std::optional<double> mean;
  std::optional<double> median;
};

inline MeanMedian mean_median(std::span<const double> xs) { return {mean(xs), median(xs)}; }

struct CorpusSummary {
  std::size_t n_articles = 0;
  std::size_t n_references = 0;
  MeanMedian references_per_article;
  MeanMedian authors_per_article;
  MeanMedian pages_per_article;       // articles with a page count only
  MeanMedian references_per_page;     // articles with a positive page count only
  std::size_t n_articles_without_pages = 0;
  std::map<int, std::size_t> articles_per_year;
  std::size_t n_author_mentions = 0;
  std::size_t n_unique_authors = 0;
  std::size_t n_unusable_author_names = 0;
};

inline CorpusSummary summarize(const Corpus& corpus) {
  if (corpus.empty()) throw DataError("cannot summarize an empty corpus");
  CorpusSummary s;
  s.n_articles = corpus.size();
  std::vector<double> refs, authors, pages, refs_per_page;
  for (const auto& rec : corpus) {
    s.n_references += rec.raw_references.size();
    refs.push_back(static_cast<double>(rec.raw_references.size()));
    authors.push_back(static_cast<double>(rec.authors.size()));
    if (rec.page_count) {
      pages.push_back(*rec.page_count);
      if (*rec.page_count > 0) {
        refs_per_page.push_back(static_cast<double>(rec.raw_references.size()) / *rec.page_count);
      }
    } else {
      ++s.n_articles_without_pages;
    }
    ++s.articles_per_year[rec.year];
  }
  s.references_per_article = mean_median(refs);
  s.authors_per_article = mean_median(authors);
  s.pages_per_article = mean_median(pages);
  s.references_per_page = mean_median(refs_per_page);
  const auto index = unique_authors(corpus);
  s.n_author_mentions = index.mentions;
  s.n_unique_authors = index.keys.size();
  s.n_unusable_author_names = index.unusable_mentions;
  return s;
}

namespace detail {

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json mm_json(const MeanMedian& mm) {
  nlohmann::ordered_json j;
  j["mean"] = opt_json(mm.mean);
  j["median"] = opt_json(mm.median);
  return j;
}

inline std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const CorpusSummary& s) {
  nlohmann::ordered_json j;
  j["n_articles"] = s.n_articles;
  j["n_references"] = s.n_references;
  j["references_per_article"] = detail::mm_json(s.references_per_article);
  j["authors_per_article"] = detail::mm_json(s.authors_per_article);
  j["pages_per_article"] = detail::mm_json(s.pages_per_article);
  j["references_per_page"] = detail::mm_json(s.references_per_page);
  j["n_articles_without_pages"] = s.n_articles_without_pages;
  nlohmann::ordered_json years = nlohmann::ordered_json::object();
  for (auto it = s.articles_per_year.rbegin(); it != s.articles_per_year.rend(); ++it) {
    years[std::to_string(it->first)] = it->second;
  }
  j["articles_per_year"] = years;
  j["n_author_mentions"] = s.n_author_mentions;
  j["n_unique_authors"] = s.n_unique_authors;
  j["n_unusable_author_names"] = s.n_unusable_author_names;
  return j;
}

/// Two-column table whose rows follow the usual corpus-summary layout
/// (counts, mean/median rows, articles per year from latest to earliest).
inline void write_summary_csv(const CorpusSummary& s, std::ostream& out) {
  auto row = [&](const std::string& k, const std::string& v) { out << csv::join_row({k, v}); };
  auto mm = [&](const std::string& what, const MeanMedian& m) {
    row("mean " + what, detail::opt_cell(m.mean));
    row("median " + what, detail::opt_cell(m.median));
  };
  row("statistic", "value");
  row("number of articles", std::to_string(s.n_articles));
  row("number of references", std::to_string(s.n_references));
  mm("references per article", s.references_per_article);
  mm("authors per article", s.authors_per_article);
  mm("pages per article", s.pages_per_article);
  mm("references per page", s.references_per_page);
  row("articles without pages", std::to_string(s.n_articles_without_pages));
  for (auto it = s.articles_per_year.rbegin(); it != s.articles_per_year.rend(); ++it) {
    row("number of articles " + std::to_string(it->first), std::to_string(it->second));
  }
  row("number of author mentions", std::to_string(s.n_author_mentions));
  row("number of unique authors", std::to_string(s.n_unique_authors));
  row("unusable author names", std::to_string(s.n_unusable_author_names));
}

}  // namespace specialism
