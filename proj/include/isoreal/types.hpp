#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace isoreal {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;

template <int D>
using Mat = Eigen::Matrix<double, D, D>;

/// Raised when a potential is evaluated outside the region where it is defined.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed user input (bad specs, mismatched grids, files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative numerical method fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <int D>
struct Box {
  Vec<D> lo;
  Vec<D> hi;

  static Box cube(double lo, double hi) {
    return {Vec<D>::Constant(lo), Vec<D>::Constant(hi)};
  }

  bool contains(const Vec<D>& x) const {
    for (int i = 0; i < D; ++i) {
      if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    }
    return true;
  }

  /// Distance from x to the nearest face, negative outside.
  double margin(const Vec<D>& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < D; ++i) m = std::min({m, x[i] - lo[i], hi[i] - x[i]});
    return m;
  }

  double diameter() const { return (hi - lo).norm(); }

  Vec<D> center() const { return 0.5 * (lo + hi); }

  Box padded(double fraction) const {
    const Vec<D> ext = (hi - lo) * fraction;
    return {lo - ext, hi + ext};
  }
};

/// Uniform tensor grid including both end points on every axis.
template <int D>
struct GridSpec {
  Box<D> box;
  std::array<int, D> n{};

  GridSpec() = default;
  GridSpec(Box<D> b, std::array<int, D> counts) : box(std::move(b)), n(counts) {
    for (int i = 0; i < D; ++i) {
      if (n[i] < 2) throw InputError("grid needs at least 2 nodes per axis");
      if (!(box.hi[i] > box.lo[i])) throw InputError("grid box must have positive extent");
    }
  }

  /// Grid over the box with spacing as close to h as the box allows.
  static GridSpec with_spacing(const Box<D>& b, double h) {
    std::array<int, D> counts{};
    for (int i = 0; i < D; ++i)
      counts[i] = static_cast<int>(std::lround((b.hi[i] - b.lo[i]) / h)) + 1;
    return GridSpec(b, counts);
  }

  double spacing(int axis) const { return (box.hi[axis] - box.lo[axis]) / (n[axis] - 1); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < D; ++i) s *= static_cast<std::size_t>(n[i]);
    return s;
  }

  /// Linear index, axis 0 fastest.
  std::size_t index(const std::array<int, D>& ijk) const {
    std::size_t idx = 0;
    for (int i = D - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(n[i]) + ijk[i];
    return idx;
  }

  std::array<int, D> multi_index(std::size_t idx) const {
    std::array<int, D> ijk{};
    for (int i = 0; i < D; ++i) {
      ijk[i] = static_cast<int>(idx % static_cast<std::size_t>(n[i]));
      idx /= static_cast<std::size_t>(n[i]);
    }
    return ijk;
  }

  Vec<D> node(const std::array<int, D>& ijk) const {
    Vec<D> x;
    for (int i = 0; i < D; ++i) {
      // exact end points, no accumulated rounding
      x[i] = ijk[i] == n[i] - 1 ? box.hi[i] : box.lo[i] + ijk[i] * spacing(i);
    }
    return x;
  }

  Vec<D> node(std::size_t idx) const { return node(multi_index(idx)); }

  /// Same box, spacing halved on every axis.
  GridSpec refined() const {
    std::array<int, D> counts{};
    for (int i = 0; i < D; ++i) counts[i] = 2 * (n[i] - 1) + 1;
    return GridSpec(box, counts);
  }
};

}  // namespace isoreal
