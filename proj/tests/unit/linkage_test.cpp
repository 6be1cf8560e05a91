#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "specialism/csv.hpp"
#include "specialism/reference_linkage.hpp"
#include "../oracles/naive.hpp"
#include "test_util.hpp"

using namespace specialism;

namespace {

ParsedReference parsed(std::string id, std::string owner, std::string_view raw) {
  auto s = split_reference(raw);
  EXPECT_TRUE(s) << raw;
  return ParsedReference{std::move(id), std::move(owner), s->author_block, s->author_keys, s->rest};
}

std::map<std::string, std::size_t> cluster_index(const std::vector<SourceCluster>& clusters) {
  std::map<std::string, std::size_t> of;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (const auto& m : clusters[c].members) of[m] = c;
  return of;
}

}  // namespace

TEST(JaroWinkler, HandExamples) {
  EXPECT_EQ(jaro_winkler("kitten", "kitten"), 1.0);
  EXPECT_EQ(jaro_winkler("abc", ""), 0.0);
  EXPECT_EQ(jaro_winkler("", ""), 1.0);
  EXPECT_NEAR(jaro_winkler("MARTHA", "MARHTA"), 0.9611, 1e-4);
  EXPECT_NEAR(jaro("MARTHA", "MARHTA"), 0.9444, 1e-4);
  EXPECT_NEAR(jaro_winkler("DWAYNE", "DUANE"), 0.84, 1e-4);
  EXPECT_NEAR(jaro_winkler("DIXON", "DICKSONX"), 0.8133, 1e-4);
}

TEST(JaroWinkler, RandomStringProperties) {
  std::mt19937 gen(12345);
  std::uniform_int_distribution<int> len(0, 12), ch(0, 3);
  auto rnd = [&] {
    std::string s(len(gen), 'a');
    for (auto& c : s) c = static_cast<char>('a' + ch(gen));
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto a = rnd(), b = rnd();
    const double ab = jaro_winkler(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(ab, jaro_winkler(b, a));
    EXPECT_EQ(jaro_winkler(a, a), 1.0);
    EXPECT_EQ(ab == 1.0, a == b) << a << " / " << b;
    EXPECT_NEAR(ab, oracle::jaro_winkler(a, b), 1e-12) << a << " / " << b;
  }
}

TEST(SplitReference, HandLabelledFixture) {
  const auto rows = testutil::read_tsv("split_reference_cases.tsv");
  ASSERT_EQ(rows.size(), 50u);
  for (const auto& row : rows) {
    const auto got = split_reference(row[0]);
    if (row[1] == "DISCARD") {
      EXPECT_FALSE(got) << row[0];
      continue;
    }
    ASSERT_TRUE(got) << row[0];
    ASSERT_EQ(row.size(), 4u);
    EXPECT_EQ(got->author_block, row[1]) << row[0];
    EXPECT_EQ(got->rest, row[2]) << row[0];
    std::vector<std::string> surnames;
    for (const auto& k : got->author_keys) surnames.push_back(k.surname);
    EXPECT_EQ(surnames, testutil::split(row[3], '|')) << row[0];
  }
}

TEST(SplitReference, SpecExamples) {
  const auto s = split_reference("Kessler M.M., Bibliographic coupling..., 1963");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->author_block, "Kessler M.M.");
  EXPECT_EQ(s->rest, "Bibliographic coupling..., 1963");
  EXPECT_EQ(s->author_keys.front(), (AuthorKey{"kessler", "mm"}));
  EXPECT_FALSE(split_reference("Anonymous editorial note"));
  EXPECT_FALSE(split_reference("   "));
}

TEST(CorpusReferences, DiscardsAreCounted) {
  PublicationRecord r;
  r.pub_id = "p";
  r.raw_references = {"Kessler M.M., Coupling, 1963", "Anonymous", "", "Small H., Co-citation, 1973"};
  const auto parsed = parse_corpus_references({r});
  EXPECT_EQ(parsed.n_raw, 4u);
  EXPECT_EQ(parsed.n_discarded, 2u);
  ASSERT_EQ(parsed.references.size(), 2u);
  EXPECT_EQ(parsed.references[1].ref_id, "p#3");
  EXPECT_EQ(owner_of_ref_id("p#3"), "p");
}

TEST(Merge, IdenticalReferencesFromTwoPublications) {
  const std::string raw = "Kessler M.M., Bibliographic coupling between scientific papers, (1963) Am. Doc., 14";
  const auto clusters = merge_references({parsed("a#0", "a", raw), parsed("b#0", "b", raw)}, 0.85);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].citation_count, 2u);
  EXPECT_EQ(clusters[0].members, (std::vector<std::string>{"a#0", "b#0"}));
}

TEST(Merge, SameOwnerCountsOnce) {
  const std::string raw = "Kessler M.M., Bibliographic coupling, 1963";
  const auto clusters = merge_references({parsed("a#0", "a", raw), parsed("a#1", "a", raw)}, 0.85);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].citation_count, 1u);
}

TEST(Merge, DifferentFirstSurnamesNeverMerge) {
  const auto clusters = merge_references({parsed("a#0", "a", "Smith J., A study of networks, 2001"),
                                          parsed("b#0", "b", "Smyth J., A study of networks, 2001")},
                                         0.01);
  EXPECT_EQ(clusters.size(), 2u);
}

TEST(Merge, ThresholdIsStrict) {
  auto a = parsed("a#0", "a", "Smith J., abcdefgh, 2001");
  auto b = parsed("b#0", "b", "Smith J., abcdefxy, 2001");
  const double s = jaro_winkler(text::fold_lower(a.rest), text::fold_lower(b.rest));
  EXPECT_EQ(merge_references({a, b}, s).size(), 2u);
  EXPECT_EQ(merge_references({a, b}, std::nextafter(s, 0.0)).size(), 1u);
}

TEST(Merge, AuthorBlockConditionIsInclusive) {
  // Author blocks scoring below 0.9 keep otherwise identical references apart.
  auto a = parsed("a#0", "a", "Smith J., Brown K., Same title, 2001");
  auto b = parsed("b#0", "b", "Smith J., Zhao Q., Wu X., Same title, 2001");
  ASSERT_LT(jaro_winkler(text::fold_lower(a.author_block), text::fold_lower(b.author_block)), 0.9);
  EXPECT_EQ(merge_references({a, b}, 0.5).size(), 2u);
}

TEST(Merge, InvalidThreshold) {
  EXPECT_THROW(merge_references({}, 0.0), UsageError);
  EXPECT_THROW(merge_references({}, 1.0), UsageError);
}

namespace {

struct Variants {
  std::vector<ParsedReference> refs;
  std::vector<std::string> truth;
};

Variants load_variants() {
  std::ifstream in(testutil::data_path("linkage_variants.csv"));
  csv::Reader reader(in);
  reader.next();
  Variants v;
  std::size_t k = 0;
  while (auto row = reader.next()) {
    const std::string owner = "v" + std::to_string(k++);
    v.refs.push_back(parsed(owner + "#0", owner, (*row)[0]));
    v.truth.push_back((*row)[1]);
  }
  return v;
}

}  // namespace

TEST(Merge, VariantFixturePrecision) {
  const auto v = load_variants();
  ASSERT_EQ(v.refs.size(), 200u);
  const auto clusters = merge_references(v.refs, 0.85);
  const auto of = cluster_index(clusters);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < v.refs.size(); ++i) {
    for (std::size_t j = i + 1; j < v.refs.size(); ++j) {
      const bool same = of.at(v.refs[i].ref_id) == of.at(v.refs[j].ref_id);
      const bool truth = v.truth[i] == v.truth[j];
      tp += same && truth;
      fp += same && !truth;
      fn += !same && truth;
    }
  }
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  RecordProperty("precision", std::to_string(precision));
  RecordProperty("recall", std::to_string(recall));
  EXPECT_GE(precision, 0.9);
  EXPECT_GT(recall, 0.3);
}

TEST(Merge, PartitionAndRefinementProperties) {
  const auto v = load_variants();
  std::vector<std::vector<SourceCluster>> by_threshold;
  for (double t : {0.5, 0.7, 0.85, 0.95}) by_threshold.push_back(merge_references(v.refs, t));
  for (const auto& clusters : by_threshold) {
    std::multiset<std::string> members;
    std::size_t total_citations = 0;
    for (const auto& c : clusters) {
      EXPECT_FALSE(c.members.empty());
      EXPECT_LE(c.citation_count, c.members.size());
      members.insert(c.members.begin(), c.members.end());
      total_citations += c.citation_count;
    }
    EXPECT_EQ(members.size(), v.refs.size());
    EXPECT_EQ(std::set<std::string>(members.begin(), members.end()).size(), v.refs.size());
    EXPECT_LE(total_citations, v.refs.size());
  }
  // A higher threshold only splits clusters.
  for (std::size_t k = 1; k < by_threshold.size(); ++k) {
    const auto coarse = cluster_index(by_threshold[k - 1]);
    for (const auto& c : by_threshold[k]) {
      for (const auto& m : c.members) EXPECT_EQ(coarse.at(m), coarse.at(c.members.front()));
    }
  }
}

TEST(Merge, ParallelMatchesSequential) {
  const auto v = load_variants();
  const auto seq = merge_references(v.refs, 0.85, {1});
  const auto par = merge_references(v.refs, 0.85, {4});
  ASSERT_EQ(seq.size(), par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_EQ(seq[i].members, par[i].members);
}

TEST(Clusters, JsonlRoundTrip) {
  const auto v = load_variants();
  const auto clusters = merge_references(v.refs, 0.85);
  std::stringstream ss;
  write_clusters_jsonl(clusters, ss);
  const auto back = read_clusters_jsonl(ss);
  ASSERT_EQ(back.size(), clusters.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].cluster_id, clusters[i].cluster_id);
    EXPECT_EQ(back[i].members, clusters[i].members);
    EXPECT_EQ(back[i].citation_count, clusters[i].citation_count);
  }
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

struct LabelledScores {
  std::vector<ScoredPair> pairs;
  PairLabels labels;
};

LabelledScores make_scores(const std::vector<std::pair<double, bool>>& rows) {
  LabelledScores out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RefPair p = canonical_pair("r" + std::to_string(i) + "a", "r" + std::to_string(i) + "b");
    out.pairs.push_back({p, rows[i].first});
    out.labels[p] = rows[i].second;
  }
  std::stable_sort(out.pairs.begin(), out.pairs.end(),
                   [](const ScoredPair& x, const ScoredPair& y) { return x.score > y.score; });
  return out;
}

}  // namespace

TEST(Calibration, SeparableLabelsLandInGap) {
  std::vector<std::pair<double, bool>> rows;
  for (int i = 0; i < 150; ++i) rows.push_back({0.91 + i * 0.0005, true});
  for (int i = 0; i < 150; ++i) rows.push_back({0.5 + i * 0.002, false});
  const auto d = make_scores(rows);
  const auto r = calibrate_threshold(d.pairs, d.labels);
  EXPECT_GE(r.threshold, 0.5 + 149 * 0.002);
  EXPECT_LT(r.threshold, 0.91);
  EXPECT_EQ(r.threshold, 0.5 + 149 * 0.002);  // lowest point of the gap
  EXPECT_EQ(r.accuracy_above, 1.0);
  EXPECT_EQ(r.accuracy_below, 0.0);
  EXPECT_FALSE(r.short_window);
  EXPECT_EQ(r.n_above, 100u);
  EXPECT_EQ(r.n_below, 100u);
}

TEST(Calibration, MatchesExhaustiveScanOnMixtures) {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> match(0.9, 0.05), non(0.7, 0.08);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, bool>> rows;
    for (int i = 0; i < 300; ++i) rows.push_back({std::round(std::clamp(match(gen), 0.0, 1.0) * 1000) / 1000, true});
    for (int i = 0; i < 300; ++i) rows.push_back({std::round(std::clamp(non(gen), 0.0, 1.0) * 1000) / 1000, false});
    const auto d = make_scores(rows);
    const auto expected = oracle::calibration_cut(rows);
    ASSERT_TRUE(expected);
    const auto r = calibrate_threshold(d.pairs, d.labels);
    EXPECT_EQ(r.threshold, *expected) << "trial " << trial;
    EXPECT_GT(r.accuracy_above, 0.5);
    EXPECT_LT(r.accuracy_below, 0.5);
  }
}

TEST(Calibration, NoValidCutCarriesBestCandidate) {
  std::vector<std::pair<double, bool>> rows;
  for (int i = 0; i < 250; ++i) rows.push_back({0.5 + i * 0.001, i % 4 == 0});
  const auto d = make_scores(rows);
  try {
    calibrate_threshold(d.pairs, d.labels);
    FAIL() << "expected CalibrationError";
  } catch (const CalibrationError& e) {
    EXPECT_TRUE(e.best_candidate());
  }
}

TEST(Calibration, Preconditions) {
  std::vector<std::pair<double, bool>> rows;
  for (int i = 0; i < 150; ++i) rows.push_back({0.5 + i * 0.001, i > 75});
  auto d = make_scores(rows);
  EXPECT_THROW(calibrate_threshold(d.pairs, d.labels), UsageError);  // < 200 labelled pairs
  for (int i = 150; i < 250; ++i) rows.push_back({0.5 + i * 0.001, i > 75});
  d = make_scores(rows);
  std::reverse(d.pairs.begin(), d.pairs.end());
  EXPECT_THROW(calibrate_threshold(d.pairs, d.labels), UsageError);  // not descending
}

TEST(Calibration, ShortWindowFlagged) {
  std::vector<std::pair<double, bool>> rows;
  for (int i = 0; i < 40; ++i) rows.push_back({0.95 + i * 0.001, true});
  for (int i = 0; i < 200; ++i) rows.push_back({0.4 + i * 0.001, false});
  const auto d = make_scores(rows);
  const auto r = calibrate_threshold(d.pairs, d.labels);
  EXPECT_TRUE(r.short_window);
  EXPECT_EQ(r.n_above, 40u);
}

TEST(Calibration, LabelsCsv) {
  std::istringstream in("ref_id_a,ref_id_b,is_match\nb#1,a#0,1\nc#0,d#2,false\n");
  const auto labels = read_labels_csv(in);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_TRUE(labels.at(canonical_pair("a#0", "b#1")));
  EXPECT_FALSE(labels.at(canonical_pair("d#2", "c#0")));
  std::istringstream bad("ref_id_a,ref_id_b,is_match\na,b,maybe\n");
  EXPECT_THROW(read_labels_csv(bad), DataError);
}
