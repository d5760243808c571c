#pragma once

#include <Eigen/Core>
#include <vector>

#include "grm/errors.hpp"

namespace grm {

// Responses are scored 0..4 (five ordered categories, four thresholds).
inline constexpr int kCategories = 5;
inline constexpr int kThresholds = 4;

// One item in the traditional parameterization: discrimination a > 0 and
// strictly ordered thresholds b1 < b2 < b3 < b4.
struct ItemParameters {
  int item_id = 0;
  double a = 1.0;
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
};

using ItemSet = std::vector<ItemParameters>;

// Slope-intercept coordinates (a, d) with d_s = -a * b_s, so the intercepts
// are strictly decreasing.
struct SlopeInterceptParameters {
  int item_id = 0;
  double a = 1.0;
  Eigen::Vector4d d = Eigen::Vector4d::Zero();
};

// N subjects x M items of category indices in {0..4}, no missing values.
// Row-major so per-subject rows are contiguous.
struct ResponseMatrix {
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y;

  int subjects() const { return static_cast<int>(y.rows()); }
  int items() const { return static_cast<int>(y.cols()); }
};

using ResponseRow = Eigen::Ref<const Eigen::RowVectorXi>;

inline void validate(const ItemParameters& item) {
  if (!(item.a > 0.0)) throw std::domain_error("item discrimination must be positive");
  for (int s = 1; s < kThresholds; ++s) {
    if (!(item.b[s - 1] < item.b[s]))
      throw std::domain_error("item thresholds must be strictly increasing");
  }
}

inline void validate(const ResponseMatrix& data) {
  if (data.subjects() < 1 || data.items() < 1)
    throw DimensionError("response matrix must be at least 1x1");
  for (int i = 0; i < data.subjects(); ++i)
    for (int j = 0; j < data.items(); ++j) {
      const int v = data.y(i, j);
      if (v < 0 || v >= kCategories)
        throw std::domain_error("response outside {0..4}");
    }
}

}  // namespace grm
