#pragma once

#include <cstdint>

#include "grm/types.hpp"

namespace grm {

struct SimulationSpec {
  int n_items = 1;
  int n_subjects = 1;
  std::uint64_t seed = 0;
  int max_resimulations = 1000;
};

// True item parameters: a ~ LogNormal(meanlog 0.05, sdlog 0.5), thresholds
// uniform on the disjoint ranges (-2.5,-1.1), (-1,-0.1), (0.1,1), (1.1,2.5),
// so ordering holds by construction. Deterministic given the seed.
ItemSet sample_item_parameters(int m, std::uint64_t seed);

struct SimulatedData {
  ResponseMatrix data;
  int resimulations = 0;  // discarded whole-dataset attempts before success
};

// Draw psi_i ~ N(0,1) and responses from the category probabilities; whole
// datasets are discarded and redrawn on the next sub-seed until every item
// column contains all five categories.
SimulatedData simulate_dataset(const ItemSet& items, int n_subjects, std::uint64_t seed,
                               int max_resimulations = 1000);

}  // namespace grm
