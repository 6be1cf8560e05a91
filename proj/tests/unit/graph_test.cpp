#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "../oracles/naive.hpp"
#include "specialism/connectivity_analysis.hpp"
#include "specialism/network_stats.hpp"
#include "test_util.hpp"

using namespace specialism;

namespace {

std::string node_name(int i) {
  std::string digits = std::to_string(i);
  return "n" + std::string(3 - std::min<std::size_t>(3, digits.size()), '0') + digits;
}

CouplingNetwork make_network(int n, const std::vector<oracle::WEdge>& edges) {
  CouplingNetwork net;
  for (int i = 0; i < n; ++i) net.nodes.push_back(node_name(i));
  for (const auto& [a, b, w] : edges) {
    net.edges.push_back({static_cast<std::uint32_t>(std::min(a, b)), static_cast<std::uint32_t>(std::max(a, b)), w});
  }
  return net;
}

std::vector<oracle::WEdge> random_edges(std::mt19937_64& g, int n, double p) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<oracle::WEdge> edges;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (u(g) < p) edges.emplace_back(a, b, std::round(u(g) * 20) / 20 + 0.01);
  return edges;
}

std::vector<std::vector<int>> as_ints(const std::vector<Component>& comps) {
  std::vector<std::vector<int>> out;
  for (const auto& c : comps) out.emplace_back(c.begin(), c.end());
  return out;
}

const std::vector<oracle::SmallGraph>& bundled() {
  static const auto graphs = oracle::load_small_graphs(testutil::data_path("small_graphs.json"));
  return graphs;
}

}  // namespace

TEST(GraphStats, NamedExamples) {
  const auto k3 = make_network(3, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}});
  EXPECT_EQ(density(k3), 1.0);
  EXPECT_EQ(giant_component_diameter(k3), 1u);
  EXPECT_EQ(global_clustering(k3), 1.0);
  const auto p4 = make_network(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
  EXPECT_EQ(density(p4), 0.5);
  EXPECT_EQ(giant_component_diameter(p4), 3u);
  EXPECT_EQ(global_clustering(p4), 0.0);
  const auto empty = make_network(4, {});
  const auto s = network_stats(empty);
  EXPECT_EQ(s.density, 0.0);
  EXPECT_EQ(s.diameter, 0u);
  EXPECT_EQ(s.n_isolated, 4u);
  EXPECT_EQ(s.modularity, 0.0);
  EXPECT_EQ(s.n_communities, 4u);
}

TEST(GraphStats, BundledGraphsMatchOracle) {
  ASSERT_GE(bundled().size(), 40u);
  for (const auto& g : bundled()) {
    SCOPED_TRACE(g.name);
    const auto net = make_network(g.n, g.edges);
    const auto& x = g.expected;
    EXPECT_NEAR(density(net), x["density"].get<double>(), 1e-12);
    EXPECT_NEAR(global_clustering(net), x["transitivity"].get<double>(), 1e-12);
    EXPECT_EQ(giant_component_diameter(net, 2), x["giant_diameter"].get<std::size_t>());
    const auto s = network_stats(net);
    EXPECT_EQ(s.n_isolated, x["n_isolated"].get<std::size_t>());
    EXPECT_EQ(s.n_edges, g.edges.size());
  }
}

TEST(GreedyModularity, MatchesExactReplay) {
  for (const auto& g : bundled()) {
    SCOPED_TRACE(g.name);
    const auto net = make_network(g.n, g.edges);
    const auto r = greedy_modularity(net);
    const auto& x = g.expected;
    EXPECT_NEAR(r.modularity, x["greedy_modularity"].get<double>(), 1e-12);
    EXPECT_EQ(r.history.size() - 1, x["greedy_steps"].get<std::size_t>());
    // Same partition, compared as "same label" relations.
    const auto labels = x["greedy_labels"].get<std::vector<int>>();
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) EXPECT_EQ(r.community[i] == r.community[j], labels[i] == labels[j]);
    if (x.contains("optimal_modularity")) {
      EXPECT_LE(r.modularity, x["optimal_modularity"].get<double>() + 1e-12);
    }
    for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_GE(r.history[k], r.history[k - 1]);
    EXPECT_NEAR(r.history.back(), r.modularity, 1e-12);
  }
}

TEST(GreedyModularity, ReachesOptimumOnNamedGraphs) {
  for (const auto& g : bundled()) {
    if (g.name != "K3" && g.name != "P4" && g.name != "two_bridged_5cliques") continue;
    const auto r = greedy_modularity(make_network(g.n, g.edges));
    EXPECT_NEAR(r.modularity, g.expected["optimal_modularity"].get<double>(), 1e-12) << g.name;
  }
  for (const auto& g : bundled()) {
    if (g.name != "two_bridged_5cliques") continue;
    const auto r = greedy_modularity(make_network(g.n, g.edges));
    EXPECT_EQ(r.n_communities, 2u);
    EXPECT_NEAR(r.modularity, 19.0 / 42.0, 1e-12);
  }
}

TEST(GreedyModularity, LargerNetworkHistoryAndRecompute) {
  std::mt19937_64 g(17);
  const auto edges = random_edges(g, 120, 0.05);
  const auto net = make_network(120, edges);
  const auto r = greedy_modularity(net);
  for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_GE(r.history[k], r.history[k - 1]);
  EXPECT_NEAR(r.history.back(), modularity(net, r.community), 1e-9);
  EXPECT_GT(r.modularity, 0.0);
}

TEST(FilterEdges, Examples) {
  const auto net = make_network(5, {{0, 1, 0.1}, {1, 2, 0.2}, {3, 4, 0.3}});
  EXPECT_EQ(filter_edges(net, 0.0).edges.size(), 3u);
  const auto f = filter_edges(net, 0.2);
  ASSERT_EQ(f.edges.size(), 2u);
  EXPECT_EQ(f.edges[0].weight, 0.2);
  EXPECT_EQ(f.edges[1].weight, 0.3);
  EXPECT_EQ(f.nodes, net.nodes);
  EXPECT_TRUE(filter_edges(net, 0.31).edges.empty());
  EXPECT_THROW(filter_edges(net, -0.1), UsageError);
}

TEST(Components, Examples) {
  EXPECT_EQ(connected_components(make_network(4, {})).size(), 4u);
  EXPECT_EQ(connected_components(make_network(3, {{0, 1, 1}, {1, 2, 1}})).size(), 1u);
  // Output order follows pub_id, not node index.
  CouplingNetwork net;
  net.nodes = {"z", "b", "a", "c"};
  net.edges = {{0, 2, 1.0}};
  const auto comps = connected_components(net);
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[0], (Component{2, 0}));
  EXPECT_EQ(comps[1], (Component{1}));
  EXPECT_EQ(comps[2], (Component{3}));
}

TEST(Components, RandomGraphsMatchDfs) {
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<int> size(1, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(g);
    const auto edges = random_edges(g, n, 2.5 / n);
    const auto net = make_network(n, edges);
    std::vector<double> ts;
    for (int k = 0; k < 10; ++k) ts.push_back(k * 0.12);
    const auto curve = connectivity_curve(net, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const auto expected = oracle::components(n, edges, ts[k]);
      EXPECT_EQ(as_ints(connected_components(filter_edges(net, ts[k]))), expected);
      std::size_t giant = 0, total = 0;
      for (const auto& c : expected) {
        giant = std::max(giant, c.size());
        total += c.size();
      }
      EXPECT_EQ(total, static_cast<std::size_t>(n));
      const auto& p = curve.points[k];
      EXPECT_EQ(p.n_components, expected.size());
      EXPECT_EQ(p.giant_size, giant);
      EXPECT_EQ(p.c, static_cast<double>(expected.size()) / n);
      EXPECT_EQ(p.g, static_cast<double>(giant) / n);
      if (k) {
        EXPECT_GE(p.n_components, curve.points[k - 1].n_components);
        EXPECT_LE(p.giant_size, curve.points[k - 1].giant_size);
      }
    }
  }
}

TEST(Curve, TrivialCases) {
  const auto empty = make_network(5, {});
  for (const auto& p : connectivity_curve(empty, {0.0, 0.5}).points) {
    EXPECT_EQ(p.c, 1.0);
    EXPECT_EQ(p.g, 0.2);
  }
  std::vector<oracle::WEdge> complete;
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b) complete.emplace_back(a, b, 1.0);
  for (const auto& p : connectivity_curve(make_network(6, complete), {0.0, 0.5, 1.0}).points) {
    EXPECT_EQ(p.c, 1.0 / 6.0);
    EXPECT_EQ(p.g, 1.0);
  }
  EXPECT_THROW(connectivity_curve(empty, {0.5, 0.1}), UsageError);
  EXPECT_THROW(connectivity_curve(CouplingNetwork{}, {0.1}), UsageError);
}

TEST(Curve, CsvLayout) {
  std::ostringstream out;
  write_curve_csv(connectivity_curve(make_network(4, {{0, 1, 0.5}}), {0.0, 0.6}), out);
  EXPECT_EQ(out.str(), "t,c,g,n_components,giant_size\n0,0.75,0.5,3,2\n0.6,1,0.25,4,1\n");
}

TEST(Thresholds, Parsing) {
  EXPECT_EQ(parse_thresholds("0.3,0.1,0.2").explicit_values, (std::vector<double>{0.1, 0.2, 0.3}));
  const auto r = parse_thresholds("0:0.5:0.01").explicit_values;
  ASSERT_EQ(r.size(), 51u);
  EXPECT_EQ(r, default_reference_grid());
  EXPECT_EQ(parse_range("0:0.95:0.05").size(), 20u);
  EXPECT_EQ(parse_range("0:0.95:0.05")[3], 0.15);
  EXPECT_EQ(*parse_thresholds("auto-quantile:5").quantiles, 5u);
  EXPECT_THROW(parse_thresholds("auto-quantile:0"), UsageError);
  EXPECT_THROW(parse_thresholds("auto-quantile:2.5"), UsageError);
  EXPECT_THROW(parse_thresholds("0.1,abc"), UsageError);
  EXPECT_THROW(parse_thresholds("0.5:0.1:0.1"), UsageError);
  EXPECT_THROW(parse_thresholds("0:1:0"), UsageError);
}

TEST(Thresholds, QuantileGrid) {
  const auto net = make_network(5, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 3.0}, {3, 4, 5.0}});
  EXPECT_EQ(quantile_grid(net, 5), (std::vector<double>{1.0, 1.75, 2.5, 3.5, 5.0}));
  EXPECT_EQ(quantile_grid(net, 1), (std::vector<double>{1.0}));
  EXPECT_EQ(quantile_grid(make_network(3, {}), 3), (std::vector<double>{0.0, 0.0, 0.0}));
  const auto g = parse_thresholds("auto-quantile:3").resolve(net);
  EXPECT_EQ(g, (std::vector<double>{1.0, 2.5, 5.0}));
}

TEST(Topics, SharedAuthorAndSingletons) {
  auto net = make_network(5, {{0, 1, 0.5}, {2, 3, 0.5}, {3, 4, 0.05}});
  Authorship who;
  who[node_name(0)] = {{"smith", "j"}};
  who[node_name(1)] = {{"smith", "j"}, {"jones", "a"}};
  who[node_name(2)] = {{"smith", "j"}};
  who[node_name(3)] = {{"brown", "k"}};
  who[node_name(4)] = {{"lone", "x"}};
  const auto topics = extract_topics(net, 0.1, who);
  ASSERT_EQ(topics.size(), 2u);
  EXPECT_EQ(topics[0].member_pubs, (std::vector<std::string>{"n000", "n001"}));
  EXPECT_EQ(topics[0].active_authors.size(), 2u);
  EXPECT_EQ(topics[1].member_pubs, (std::vector<std::string>{"n002", "n003"}));
  EXPECT_TRUE(topics[1].active_authors.count({"smith", "j"}));
  EXPECT_EQ(extract_topics(net, 0.01, who).size(), 2u);
  EXPECT_EQ(extract_topics(net, 0.01, who)[1].member_pubs.size(), 3u);
  EXPECT_THROW(extract_topics(net, 0.0, who), UsageError);
}

TEST(Topics, PartitionAndInternalConnectivity) {
  std::mt19937_64 g(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 40;
    const auto edges = random_edges(g, n, 0.06);
    const auto net = make_network(n, edges);
    for (double t : {0.1, 0.3, 0.6}) {
      const auto topics = extract_topics(net, t, {});
      std::size_t covered = 0;
      for (const auto& topic : topics) {
        EXPECT_GE(topic.member_pubs.size(), 2u);
        covered += topic.member_pubs.size();
        // Induced subgraph on edges >= t is connected.
        std::vector<int> ids;
        for (const auto& id : topic.member_pubs) ids.push_back(std::stoi(id.substr(1)));
        std::vector<oracle::WEdge> inner;
        for (const auto& [a, b, w] : edges) {
          const bool ia = std::count(ids.begin(), ids.end(), a), ib = std::count(ids.begin(), ids.end(), b);
          if (ia && ib && w >= t) inner.emplace_back(a, b, w);
        }
        std::vector<int> members;
        for (const auto& c : oracle::components(n, inner, t))
          if (c.size() > 1) members = c;
        EXPECT_EQ(members, ids);
      }
      std::size_t singles = 0;
      for (const auto& c : oracle::components(n, edges, t)) singles += c.size() == 1;
      EXPECT_EQ(covered + singles, static_cast<std::size_t>(n));
    }
  }
}

TEST(TopicReport, MeansMediansAndAbsence) {
  Topic a;
  a.member_pubs = {"p1", "p2", "p3"};
  a.active_authors = {{"a", "a"}, {"b", "b"}, {"c", "c"}, {"d", "d"}};
  std::map<double, std::vector<Topic>> by_t{{0.1, {a}}, {0.3, {}}};
  const auto report = topic_report(by_t);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(*report.rows[0].topic_size.mean, 3.0);
  EXPECT_EQ(*report.rows[0].people_to_problem.mean, 4.0);
  EXPECT_FALSE(report.rows[1].topic_size.mean);
  EXPECT_FALSE(report.rows[1].people_to_problem.median);
  std::ostringstream out;
  write_topic_report_csv(report, out);
  EXPECT_EQ(out.str(),
            "t,n_topics,topic_size_mean,topic_size_median,ptp_mean,ptp_median\n0.1,1,3,3,4,4\n0.3,0,,,,\n");
  Topic b = a;
  b.member_pubs = {"q1", "q2"};
  b.active_authors = {{"a", "a"}};
  const auto two = topic_report({{0.2, {a, b}}});
  EXPECT_EQ(*two.rows[0].topic_size.mean, 2.5);
  EXPECT_EQ(*two.rows[0].people_to_problem.median, 2.5);
}
