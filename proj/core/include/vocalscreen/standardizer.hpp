#ifndef VOCALSCREEN_STANDARDIZER_HPP_
#define VOCALSCREEN_STANDARDIZER_HPP_

#include <span>
#include <vector>

#include "vocalscreen/matrix.hpp"

namespace vocalscreen {

// Per-feature z-scoring with population statistics. Constant features get
// scale 1 so they map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& x);
  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& x) const;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace vocalscreen

#endif  // VOCALSCREEN_STANDARDIZER_HPP_
