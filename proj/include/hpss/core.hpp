#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace hpss {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Point = Eigen::Vector2d;

/// Linear operator acting on a complex vector.
using LinearOp = std::function<CVector(const CVector&)>;

inline constexpr double kPi = 3.14159265358979323846;
/// Free-space wave impedance in ohms.
inline constexpr double kEta0 = 376.730313668;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open interval [begin, end) of permuted indices.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool operator==(const IndexRange&) const = default;
};

}  // namespace hpss
