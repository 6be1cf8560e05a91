#include <gtest/gtest.h>

#include "specialism/connectivity_analysis.hpp"
#include "specialism/core_removal.hpp"
#include "specialism/coupling_networks.hpp"
#include "specialism/network_stats.hpp"
#include "specialism/record_model.hpp"
#include "specialism/reference_linkage.hpp"
#include "specialism/synthetic_corpus.hpp"

TEST(Smoke, RuralPresetGenerates) {
  auto corpus = specialism::generate(specialism::preset("rural"));
  EXPECT_EQ(corpus.records.size(), 400u);
}
