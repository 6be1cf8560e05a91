// Prints c(t) and g(t) of reference coupling networks for the two synthetic
// presets side by side.
//
//   rural_urban_demo [seed]

#include <cstdint>
#include <cstdio>
#include <string>

#include "specialism/connectivity_analysis.hpp"
#include "specialism/coupling_networks.hpp"
#include "specialism/reference_linkage.hpp"
#include "specialism/synthetic_corpus.hpp"

using namespace specialism;

static ConnectivityCurve curve_for(const char* name, std::uint64_t seed, const std::vector<double>& grid) {
  auto spec = preset(name);
  spec.seed = seed;
  const auto corpus = generate(spec).records;
  const auto clusters = merge_references(parse_corpus_references(corpus).references, 0.85);
  return connectivity_curve(build_reference_network(corpus, clusters), grid);
}

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;
  const auto grid = parse_range("0:0.3:0.05");
  const auto rural = curve_for("rural", seed, grid);
  const auto urban = curve_for("urban", seed, grid);
  std::printf("%6s %10s %10s %10s %10s\n", "t", "c_rural", "c_urban", "g_rural", "g_urban");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::printf("%6.2f %10.4f %10.4f %10.4f %10.4f\n", grid[i], rural.points[i].c, urban.points[i].c,
                rural.points[i].g, urban.points[i].g);
  }
}
