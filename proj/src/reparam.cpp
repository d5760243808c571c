#include "grm/reparam.hpp"

#include <algorithm>

namespace grm {

namespace {
constexpr double kMinGap = 1e-6;
}

Eigen::VectorXd pack_items(const ItemSet& items) {
  Eigen::VectorXd u(5 * static_cast<int>(items.size()));
  for (std::size_t j = 0; j < items.size(); ++j)
    u.segment<5>(5 * static_cast<int>(j)) = pack_item(items[j]);
  return u;
}

ItemSet unpack_items(const Eigen::VectorXd& u, const std::vector<int>& item_ids) {
  if (u.size() != 5 * static_cast<int>(item_ids.size()))
    throw DimensionError("parameter vector length does not match item count");
  ItemSet items(item_ids.size());
  for (std::size_t j = 0; j < item_ids.size(); ++j)
    items[j] = unpack_item(item_ids[j], u.segment<5>(5 * static_cast<int>(j)));
  return items;
}

ItemParameters project_to_bounds(const ItemParameters& item, const ParameterBounds& bounds) {
  ItemParameters out = item;
  out.a = std::clamp(out.a, bounds.a_lower, bounds.a_upper);
  const double hi = bounds.b_upper;
  out.b[0] = std::clamp(out.b[0], bounds.b_lower, hi - 3 * kMinGap);
  for (int k = 1; k < kThresholds; ++k)
    out.b[k] = std::clamp(out.b[k], out.b[k - 1] + kMinGap,
                          hi - (kThresholds - 1 - k) * kMinGap);
  return out;
}

bool within_bounds(const ItemParameters& item, const ParameterBounds& bounds) {
  if (item.a < bounds.a_lower || item.a > bounds.a_upper) return false;
  for (int k = 0; k < kThresholds; ++k)
    if (item.b[k] < bounds.b_lower || item.b[k] > bounds.b_upper) return false;
  return true;
}

}  // namespace grm
