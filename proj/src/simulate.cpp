#include "grm/simulate.hpp"

#include "grm/model.hpp"
#include "grm/rng.hpp"

namespace grm {

ItemSet sample_item_parameters(int m, std::uint64_t seed) {
  if (m < 1) throw std::domain_error("need at least one item");
  StreamRng rng(seed, 0);
  ItemSet items(m);
  for (int j = 0; j < m; ++j) {
    items[j].item_id = j;
    items[j].a = rng.lognormal(0.05, 0.5);
    items[j].b[0] = rng.uniform(-2.5, -1.1);
    items[j].b[1] = rng.uniform(-1.0, -0.1);
    items[j].b[2] = rng.uniform(0.1, 1.0);
    items[j].b[3] = rng.uniform(1.1, 2.5);
  }
  return items;
}

SimulatedData simulate_dataset(const ItemSet& items, int n_subjects, std::uint64_t seed,
                               int max_resimulations) {
  if (items.empty()) throw std::domain_error("need at least one item");
  if (n_subjects < 1) throw std::domain_error("need at least one subject");
  for (const ItemParameters& item : items) validate(item);

  const int m = static_cast<int>(items.size());
  SimulatedData out;
  out.data.y.resize(n_subjects, m);

  for (int attempt = 0; attempt <= max_resimulations; ++attempt) {
    StreamRng rng(seed, static_cast<std::uint64_t>(attempt));
    std::vector<unsigned> seen(m, 0);
    for (int i = 0; i < n_subjects; ++i) {
      const double psi = rng.normal();
      for (int j = 0; j < m; ++j) {
        const auto p = category_probabilities(items[j], psi);
        const double u = rng.next_double();
        double cum = 0.0;
        int y = kCategories - 1;
        for (int s = 0; s < kCategories; ++s) {
          cum += p[s];
          if (u < cum) {
            y = s;
            break;
          }
        }
        out.data.y(i, j) = y;
        seen[j] |= 1u << y;
      }
    }
    bool complete = true;
    for (int j = 0; j < m; ++j)
      if (seen[j] != 0x1f) {
        complete = false;
        break;
      }
    if (complete) {
      out.resimulations = attempt;
      return out;
    }
  }
  throw SimulationInfeasibleError(
      "could not produce all response categories in " + std::to_string(max_resimulations + 1) +
      " attempts; sample size too small for these items");
}

}  // namespace grm
