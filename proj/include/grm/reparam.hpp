#pragma once

#include <Eigen/Core>

#include "grm/fit.hpp"
#include "grm/types.hpp"

namespace grm {

// Unconstrained coordinates enforcing a > 0 and b1 < b2 < b3 < b4:
// u = (log a, b1, log(b2-b1), log(b3-b2), log(b4-b3)). Both estimators
// optimize in these coordinates so one constraint mechanism covers both.
using ItemVector = Eigen::Matrix<double, 5, 1>;

inline ItemVector pack_item(const ItemParameters& item) {
  ItemVector u;
  u[0] = std::log(item.a);
  u[1] = item.b[0];
  for (int k = 1; k < kThresholds; ++k) u[2 + k - 1] = std::log(item.b[k] - item.b[k - 1]);
  return u;
}

inline ItemParameters unpack_item(int item_id, const ItemVector& u) {
  ItemParameters item;
  item.item_id = item_id;
  item.a = std::exp(u[0]);
  item.b[0] = u[1];
  for (int k = 1; k < kThresholds; ++k) item.b[k] = item.b[k - 1] + std::exp(u[2 + k - 1]);
  return item;
}

Eigen::VectorXd pack_items(const ItemSet& items);
ItemSet unpack_items(const Eigen::VectorXd& u, const std::vector<int>& item_ids);

// Natural-scale box projection that preserves strict threshold ordering
// (minimum gap 1e-6). Applied after each optimizer step.
ItemParameters project_to_bounds(const ItemParameters& item, const ParameterBounds& bounds);

bool within_bounds(const ItemParameters& item, const ParameterBounds& bounds);

}  // namespace grm
