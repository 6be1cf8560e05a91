#pragma once

// Synthetic specialisms with planted topic structure. This is validation
// scaffolding: corpora have the JSONL schema of real data, with topics as
// disjoint reference pools and vocabularies, an optional shared core of
// sources, and per-topic author populations.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "specialism/common.hpp"
#include "specialism/random.hpp"
#include "specialism/record_model.hpp"

namespace specialism {

struct IntRange {
  int min = 0;
  int max = 0;
  bool operator==(const IntRange&) const = default;
};

struct GeneratorSpec {
  std::size_t n_topics = 1;
  std::size_t pubs_per_topic = 1;
  std::size_t refs_per_pub = 0;
  std::size_t topic_pool_size = 0;   // distinct sources per topic
  std::size_t shared_core_size = 0;  // sources shared by all topics
  double p_core = 0.0;               // chance a reference draw uses the core
  std::size_t authors_per_topic = 1;
  double coauthors_mean = 1.0;
  std::size_t coauthors_max = 1;
  double author_mobility = 0.0;  // chance an author slot is filled from another topic
  std::size_t vocab_per_topic = 50;
  std::size_t shared_vocab = 0;
  double shared_token_prob = 0.0;
  IntRange title_len{6, 12};
  IntRange abstract_len{100, 160};
  IntRange pages{8, 12};
  IntRange years{2011, 2015};
  double reference_noise = 0.0;  // chance a citation string gets a trailing typo
  std::string venue = "synthetic";
  std::uint64_t seed = 0;

  bool operator==(const GeneratorSpec&) const = default;
};

class InfeasibleDrawError : public DataError {
 public:
  using DataError::DataError;
};

inline void validate(const GeneratorSpec& s) {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError(std::string(what) + " must lie in [0, 1]");
  };
  prob(s.p_core, "p_core");
  prob(s.author_mobility, "author_mobility");
  prob(s.shared_token_prob, "shared_token_prob");
  prob(s.reference_noise, "reference_noise");
  if (s.n_topics < 1) throw UsageError("n_topics must be >= 1");
  if (s.pubs_per_topic < 1) throw UsageError("pubs_per_topic must be >= 1");
  if (s.authors_per_topic < 1) throw UsageError("authors_per_topic must be >= 1");
  if (s.coauthors_max < 1 || s.coauthors_mean < 1.0 || s.coauthors_mean > static_cast<double>(s.coauthors_max)) {
    throw UsageError("coauthors_mean must lie in [1, coauthors_max]");
  }
  if (s.coauthors_max > 1 && s.coauthors_mean >= (1.0 + static_cast<double>(s.coauthors_max)) / 2.0) {
    throw UsageError("coauthors_mean too high for a truncated geometric with this maximum");
  }
  if (s.vocab_per_topic < 1) throw UsageError("vocab_per_topic must be >= 1");
  if (s.shared_token_prob > 0.0 && s.shared_vocab == 0) throw UsageError("shared_token_prob > 0 needs shared_vocab > 0");
  for (const auto* r : {&s.title_len, &s.abstract_len, &s.pages, &s.years}) {
    if (r->min > r->max || r->min < 0) throw UsageError("invalid range in generator spec");
  }
  if (s.p_core == 0.0 && s.topic_pool_size < s.refs_per_pub) {
    throw InfeasibleDrawError("topic_pool_size smaller than refs_per_pub");
  }
  if (s.p_core == 1.0 && s.shared_core_size < s.refs_per_pub) {
    throw InfeasibleDrawError("shared_core_size smaller than refs_per_pub");
  }
  if (s.topic_pool_size + s.shared_core_size < s.refs_per_pub) {
    throw InfeasibleDrawError("reference pools smaller than refs_per_pub");
  }
  if (s.authors_per_topic < s.coauthors_max) {
    throw InfeasibleDrawError("authors_per_topic smaller than coauthors_max");
  }
}

/// Continuation probability q of a geometric on {1..max}, truncated, whose
/// mean equals `mean` (bisection; the truncated mean falls as q rises).
inline double truncated_geometric_parameter(double mean, std::size_t max) {
  auto truncated_mean = [max](double q) {
    double num = 0.0, den = 0.0, w = 1.0;
    for (std::size_t k = 1; k <= max; ++k) {
      num += static_cast<double>(k) * w;
      den += w;
      w *= (1.0 - q);
    }
    return num / den;
  };
  if (max <= 1 || mean <= 1.0) return 1.0;
  double lo = 1e-12, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2.0;
    if (truncated_mean(mid) > mean) lo = mid;
    else hi = mid;
  }
  return (lo + hi) / 2.0;
}

struct SyntheticCorpus {
  Corpus records;
  std::vector<std::size_t> topic_of;  // ground-truth topic per record
};

namespace detail {

inline constexpr std::string_view kSyllables[] = {
    "ba", "ke", "lo", "mi", "nu", "ra", "se", "to", "vi", "za", "dor", "fen", "gal", "hur",
    "jin", "kas", "lem", "mor", "nel", "pas", "quis", "rol", "sun", "tev", "ul", "var", "wen",
    "xan", "yor", "zel", "ber", "cal", "dun", "fal", "gor", "hel", "ist", "kor", "lun", "mag"};

inline std::string pseudo_word(Rng& rng, int syllables) {
  std::string w;
  for (int i = 0; i < syllables; ++i) w += kSyllables[rng.below(std::size(kSyllables))];
  return w;
}

inline std::string capitalized(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

inline char initial(Rng& rng) { return static_cast<char>('A' + rng.below(26)); }

inline std::string source_reference(Rng& rng, const GeneratorSpec& spec) {
  std::string s;
  const auto n_auth = 1 + rng.below(3);
  for (std::uint64_t a = 0; a < n_auth; ++a) {
    if (a) s += ", ";
    s += capitalized(pseudo_word(rng, 3)) + " " + initial(rng) + ".";
    if (rng.bernoulli(0.5)) s += std::string(1, initial(rng)) + ".";
  }
  s += ", ";
  const auto n_words = 4 + rng.below(6);
  for (std::uint64_t w = 0; w < n_words; ++w) {
    if (w) s += " ";
    std::string word = pseudo_word(rng, 2 + static_cast<int>(rng.below(2)));
    s += w == 0 ? capitalized(word) : word;
  }
  const int year = static_cast<int>(rng.between(spec.years.min - 40, spec.years.min - 1));
  const auto first_page = 1 + rng.below(400);
  s += ", (" + std::to_string(year) + ") " + capitalized(pseudo_word(rng, 2)) + " " +
       capitalized(pseudo_word(rng, 3)) + ", " + std::to_string(1 + rng.below(60)) + ", pp. " +
       std::to_string(first_page) + "-" + std::to_string(first_page + 5 + rng.below(30));
  return s;
}

// Truncated geometric draw on {1..max} by inverse CDF.
inline std::size_t draw_coauthors(Rng& rng, double q, std::size_t max) {
  if (max <= 1 || q >= 1.0) return 1;
  std::vector<double> w(max);
  double total = 0.0, x = 1.0;
  for (std::size_t k = 0; k < max; ++k) {
    w[k] = x;
    total += x;
    x *= (1.0 - q);
  }
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < max; ++k) {
    if (u < w[k]) return k + 1;
    u -= w[k];
  }
  return max;
}

inline std::string pub_id_for(std::size_t index, std::size_t total) {
  std::string digits = std::to_string(index);
  const std::size_t width = std::max<std::size_t>(5, std::to_string(total).size());
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "p" + digits;
}

}  // namespace detail

/// Deterministic under spec.seed. Publications are emitted topic by topic.
inline SyntheticCorpus generate(const GeneratorSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  SyntheticCorpus out;

  // Author populations with corpus-wide unique (surname, initial) keys.
  std::vector<std::vector<std::string>> authors(spec.n_topics);
  std::set<AuthorKey> used_keys;
  for (auto& pool : authors) {
    while (pool.size() < spec.authors_per_topic) {
      std::string name = detail::capitalized(detail::pseudo_word(rng, 3)) + ", " + detail::initial(rng) + ".";
      if (used_keys.insert(normalize_author(name)).second) pool.push_back(std::move(name));
    }
  }

  std::vector<std::string> core(spec.shared_core_size);
  for (auto& s : core) s = detail::source_reference(rng, spec);
  std::vector<std::vector<std::string>> pools(spec.n_topics, std::vector<std::string>(spec.topic_pool_size));
  for (auto& pool : pools) {
    for (auto& s : pool) s = detail::source_reference(rng, spec);
  }

  const double q = truncated_geometric_parameter(spec.coauthors_mean, spec.coauthors_max);
  const std::size_t total = spec.n_topics * spec.pubs_per_topic;
  for (std::size_t topic = 0; topic < spec.n_topics; ++topic) {
    for (std::size_t k = 0; k < spec.pubs_per_topic; ++k) {
      PublicationRecord rec;
      rec.pub_id = detail::pub_id_for(out.records.size() + 1, total);
      rec.venue = spec.venue;
      rec.year = static_cast<int>(rng.between(spec.years.min, spec.years.max));
      rec.page_count = static_cast<int>(rng.between(spec.pages.min, spec.pages.max));

      // References, without replacement within the publication.
      std::unordered_set<std::string_view> chosen;
      std::vector<char> core_used(core.size(), 0), pool_used(spec.topic_pool_size, 0);
      std::size_t core_left = core.size(), pool_left = spec.topic_pool_size;
      for (std::size_t r = 0; r < spec.refs_per_pub; ++r) {
        bool from_core = rng.bernoulli(spec.p_core);
        if (from_core && core_left == 0) from_core = false;
        if (!from_core && pool_left == 0) {
          if (spec.p_core == 0.0 || core_left == 0) throw InfeasibleDrawError("reference pools exhausted");
          from_core = true;
        }
        auto& used = from_core ? core_used : pool_used;
        const auto& items = from_core ? core : pools[topic];
        std::uint64_t pick;
        do {
          pick = rng.below(items.size());
        } while (used[pick]);
        used[pick] = 1;
        --(from_core ? core_left : pool_left);
        std::string ref = items[pick];
        if (spec.reference_noise > 0.0 && rng.bernoulli(spec.reference_noise)) {
          ref.back() = static_cast<char>('0' + rng.below(10));
        }
        rec.raw_references.push_back(std::move(ref));
      }

      // Authors.
      const std::size_t n_auth = detail::draw_coauthors(rng, q, spec.coauthors_max);
      std::unordered_set<std::string> on_pub;
      for (std::size_t a = 0; a < n_auth; ++a) {
        std::size_t from = topic;
        if (spec.n_topics > 1 && rng.bernoulli(spec.author_mobility)) {
          from = rng.below(spec.n_topics - 1);
          if (from >= topic) ++from;
        }
        const auto& pool = authors[from];
        std::string name;
        do {
          name = pool[rng.below(pool.size())];
        } while (on_pub.count(name));
        on_pub.insert(name);
        rec.authors.push_back(std::move(name));
      }

      // Text: topic vocabulary plus shared vocabulary.
      auto token = [&] {
        if (spec.shared_vocab > 0 && rng.bernoulli(spec.shared_token_prob)) {
          return "shared_word" + std::to_string(rng.below(spec.shared_vocab));
        }
        return "topic" + std::to_string(topic) + "_word" + std::to_string(rng.below(spec.vocab_per_topic));
      };
      auto sentence = [&](const IntRange& len) {
        const auto n = rng.between(len.min, len.max);
        std::string s;
        for (std::int64_t w = 0; w < n; ++w) {
          if (w) s.push_back(' ');
          s += token();
        }
        return s;
      };
      rec.title = sentence(spec.title_len);
      if (rec.title.empty()) rec.title = "untitled";
      rec.abstract = sentence(spec.abstract_len);

      out.records.push_back(std::move(rec));
      out.topic_of.push_back(topic);
    }
  }
  return out;
}

/// Every publication cites one shared core source plus `unique_refs`
/// references nobody else cites.
inline SyntheticCorpus generate_star_core(std::size_t n_pubs, std::size_t unique_refs, std::uint64_t seed) {
  GeneratorSpec base;
  base.seed = seed;
  Rng rng(seed);
  SyntheticCorpus out;
  const std::string core = detail::source_reference(rng, base);
  for (std::size_t p = 0; p < n_pubs; ++p) {
    PublicationRecord rec;
    rec.pub_id = detail::pub_id_for(p + 1, n_pubs);
    rec.venue = "star-core";
    rec.year = 2013;
    rec.page_count = 10;
    rec.title = "star core publication " + std::to_string(p + 1);
    rec.authors.push_back(detail::capitalized(detail::pseudo_word(rng, 3)) + ", " + detail::initial(rng) + ".");
    rec.raw_references.push_back(core);
    for (std::size_t r = 0; r < unique_refs; ++r) rec.raw_references.push_back(detail::source_reference(rng, base));
    out.records.push_back(std::move(rec));
    out.topic_of.push_back(0);
  }
  return out;
}

/// Documented parameterisations. Both have 400 publications; "rural" has
/// many small topics, few authors per topic, near-solo authorship, longer
/// papers with more references and a broad shared core; "urban" has a few
/// large topics with big author populations and team authorship.
inline GeneratorSpec preset(std::string_view name) {
  GeneratorSpec s;
  if (name == "rural") {
    s.n_topics = 40;
    s.pubs_per_topic = 10;
    s.refs_per_pub = 50;
    s.topic_pool_size = 250;
    s.shared_core_size = 300;
    s.p_core = 0.1;
    s.authors_per_topic = 8;
    s.coauthors_mean = 1.2;
    s.coauthors_max = 4;
    s.author_mobility = 0.2;
    s.vocab_per_topic = 60;
    s.pages = {14, 30};
    s.venue = "rural";
  } else if (name == "urban") {
    s.n_topics = 4;
    s.pubs_per_topic = 100;
    s.refs_per_pub = 25;
    s.topic_pool_size = 60;
    s.shared_core_size = 50;
    s.p_core = 0.04;
    s.authors_per_topic = 200;
    s.coauthors_mean = 4.0;
    s.coauthors_max = 15;
    s.author_mobility = 0.05;
    s.vocab_per_topic = 300;
    s.pages = {6, 14};
    s.venue = "urban";
  } else {
    throw UsageError("unknown preset '" + std::string(name) + "' (expected rural or urban)");
  }
  s.shared_vocab = 40;
  s.shared_token_prob = 0.3;
  s.title_len = {6, 12};
  s.abstract_len = {100, 160};
  s.years = {2011, 2015};
  return s;
}

inline nlohmann::ordered_json to_json(const GeneratorSpec& s) {
  nlohmann::ordered_json j;
  j["n_topics"] = s.n_topics;
  j["pubs_per_topic"] = s.pubs_per_topic;
  j["refs_per_pub"] = s.refs_per_pub;
  j["topic_pool_size"] = s.topic_pool_size;
  j["shared_core_size"] = s.shared_core_size;
  j["p_core"] = s.p_core;
  j["authors_per_topic"] = s.authors_per_topic;
  j["coauthors_mean"] = s.coauthors_mean;
  j["coauthors_max"] = s.coauthors_max;
  j["author_mobility"] = s.author_mobility;
  j["vocab_per_topic"] = s.vocab_per_topic;
  j["shared_vocab"] = s.shared_vocab;
  j["shared_token_prob"] = s.shared_token_prob;
  j["title_len"] = {s.title_len.min, s.title_len.max};
  j["abstract_len"] = {s.abstract_len.min, s.abstract_len.max};
  j["pages"] = {s.pages.min, s.pages.max};
  j["years"] = {s.years.min, s.years.max};
  j["reference_noise"] = s.reference_noise;
  j["venue"] = s.venue;
  j["seed"] = s.seed;
  return j;
}

/// Overrides fields of `base` with those present in `j`; unknown keys are
/// rejected.
inline GeneratorSpec generator_spec_from_json(const nlohmann::json& j, GeneratorSpec base = {}) {
  if (!j.is_object()) throw UsageError("generator config must be a JSON object");
  auto range = [](const nlohmann::json& v) {
    if (!v.is_array() || v.size() != 2) throw UsageError("ranges must be [min, max]");
    return IntRange{v[0].get<int>(), v[1].get<int>()};
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "preset") continue;
      if (key == "n_topics") base.n_topics = v.get<std::size_t>();
      else if (key == "pubs_per_topic") base.pubs_per_topic = v.get<std::size_t>();
      else if (key == "refs_per_pub") base.refs_per_pub = v.get<std::size_t>();
      else if (key == "topic_pool_size") base.topic_pool_size = v.get<std::size_t>();
      else if (key == "shared_core_size") base.shared_core_size = v.get<std::size_t>();
      else if (key == "p_core") base.p_core = v.get<double>();
      else if (key == "authors_per_topic") base.authors_per_topic = v.get<std::size_t>();
      else if (key == "coauthors_mean") base.coauthors_mean = v.get<double>();
      else if (key == "coauthors_max") base.coauthors_max = v.get<std::size_t>();
      else if (key == "author_mobility") base.author_mobility = v.get<double>();
      else if (key == "vocab_per_topic") base.vocab_per_topic = v.get<std::size_t>();
      else if (key == "shared_vocab") base.shared_vocab = v.get<std::size_t>();
      else if (key == "shared_token_prob") base.shared_token_prob = v.get<double>();
      else if (key == "title_len") base.title_len = range(v);
      else if (key == "abstract_len") base.abstract_len = range(v);
      else if (key == "pages") base.pages = range(v);
      else if (key == "years") base.years = range(v);
      else if (key == "reference_noise") base.reference_noise = v.get<double>();
      else if (key == "venue") base.venue = v.get<std::string>();
      else if (key == "seed") base.seed = v.get<std::uint64_t>();
      else throw UsageError("unknown generator field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid generator config: ") + e.what());
  }
  return base;
}

inline void write_labels_csv(const SyntheticCorpus& corpus, std::ostream& out) {
  out << "pub_id,topic_id\n";
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    out << corpus.records[i].pub_id << ',' << corpus.topic_of[i] << '\n';
  }
}

}  // namespace specialism
