#pragma once

#include "isoreal/potential.hpp"
#include "isoreal/types.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace isoreal {

enum class Interpolation { Linear = 1, Cubic = 3 };

namespace detail {

// Uniform cubic B-spline weights on [0, 1] for coefficients i-1 .. i+2.
inline void bspline_weights(double t, double* b, double* db, double* d2b) {
  const double s = 1.0 - t;
  b[0] = s * s * s / 6.0;
  b[1] = (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0;
  b[2] = (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0;
  b[3] = t * t * t / 6.0;
  db[0] = -0.5 * s * s;
  db[1] = 1.5 * t * t - 2.0 * t;
  db[2] = -1.5 * t * t + t + 0.5;
  db[3] = 0.5 * t * t;
  d2b[0] = s;
  d2b[1] = 3.0 * t - 2.0;
  d2b[2] = 1.0 - 3.0 * t;
  d2b[3] = t;
}

/// Collocation system of a not-a-knot cubic B-spline through n uniform nodes.
inline Eigen::PartialPivLU<Eigen::MatrixXd> not_a_knot_system(int n) {
  const int m = n + 2;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  // third-derivative continuity at the second and second-to-last node
  const double jump[5] = {-1.0, 4.0, -6.0, 4.0, -1.0};
  for (int k = 0; k < 5; ++k) {
    a(0, k) = jump[k];
    a(m - 1, m - 5 + k) = jump[k];
  }
  for (int i = 0; i < n; ++i) {
    a(i + 1, i) = 1.0 / 6.0;
    a(i + 1, i + 1) = 4.0 / 6.0;
    a(i + 1, i + 2) = 1.0 / 6.0;
  }
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a);
}

template <int D>
class GridModel final : public PotentialModel<D> {
 public:
  GridModel(GridSpec<D> grid, std::vector<double> samples, Interpolation order)
      : grid_(std::move(grid)), samples_(std::move(samples)), order_(order) {
    if (order_ == Interpolation::Cubic) build_coefficients();
  }

  double value(const Vec<D>& x) const override { return eval(x, 0).value; }
  Vec<D> gradient(const Vec<D>& x) const override { return eval(x, 1).grad; }
  Mat<D> hessian(const Vec<D>& x) const override { return eval(x, 2).hess; }
  std::pair<Vec<D>, double> gradient_laplacian(const Vec<D>& x) const override {
    const auto e = eval(x, 2);
    return {e.grad, e.hess.trace()};
  }

 private:
  struct Eval {
    double value = 0.0;
    Vec<D> grad = Vec<D>::Zero();
    Mat<D> hess = Mat<D>::Zero();
  };

  void locate(const Vec<D>& x, std::array<int, D>& cell, std::array<double, D>& t) const {
    for (int a = 0; a < D; ++a) {
      const double h = grid_.spacing(a);
      const double lo = grid_.box.lo[a] + h;
      const double hi = grid_.box.hi[a] - h;
      if (!(x[a] >= lo - 1e-12 * h && x[a] <= hi + 1e-12 * h))
        throw DomainError("grid potential evaluated outside its interior");
      const double r = (x[a] - grid_.box.lo[a]) / h;
      int i = static_cast<int>(std::floor(r));
      i = std::clamp(i, 1, grid_.n[a] - 3);
      cell[a] = i;
      t[a] = r - i;
    }
  }

  Eval eval(const Vec<D>& x, int deriv) const {
    std::array<int, D> cell{};
    std::array<double, D> t{};
    locate(x, cell, t);
    return order_ == Interpolation::Cubic ? eval_cubic(cell, t, deriv) : eval_linear(cell, t);
  }

  Eval eval_cubic(const std::array<int, D>& cell, const std::array<double, D>& t, int deriv) const {
    double w[D][3][4];
    for (int a = 0; a < D; ++a) {
      const double h = grid_.spacing(a);
      bspline_weights(t[a], w[a][0], w[a][1], w[a][2]);
      for (int k = 0; k < 4; ++k) {
        w[a][1][k] /= h;
        w[a][2][k] /= h * h;
      }
    }
    Eval e;
    std::array<int, D> off{};
    const int total = D == 2 ? 16 : 64;
    for (int flat = 0; flat < total; ++flat) {
      int r = flat;
      for (int a = 0; a < D; ++a) {
        off[a] = r % 4;
        r /= 4;
      }
      // coefficient storage is shifted by one: index cell + off corresponds to B_{cell-1+off}
      std::size_t idx = 0;
      for (int a = D - 1; a >= 0; --a) idx = idx * (grid_.n[a] + 2) + (cell[a] + off[a]);
      const double c = coef_[idx];
      double base = 1.0;
      for (int a = 0; a < D; ++a) base *= w[a][0][off[a]];
      e.value += c * base;
      if (deriv < 1) continue;
      for (int a = 0; a < D; ++a) {
        double g = 1.0;
        for (int b = 0; b < D; ++b) g *= w[b][b == a ? 1 : 0][off[b]];
        e.grad[a] += c * g;
      }
      if (deriv < 2) continue;
      for (int a = 0; a < D; ++a) {
        for (int b = a; b < D; ++b) {
          double hh = 1.0;
          for (int k = 0; k < D; ++k) {
            const int order = (k == a) + (k == b);
            hh *= w[k][order][off[k]];
          }
          e.hess(a, b) += c * hh;
        }
      }
    }
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < a; ++b) e.hess(a, b) = e.hess(b, a);
    return e;
  }

  Eval eval_linear(std::array<int, D> cell, std::array<double, D> t) const {
    Eval e;
    const int corners = 1 << D;
    for (int c = 0; c < corners; ++c) {
      std::array<int, D> ijk{};
      double wt = 1.0;
      std::array<double, D> wa{}, da{};
      for (int a = 0; a < D; ++a) {
        const int bit = (c >> a) & 1;
        ijk[a] = cell[a] + bit;
        wa[a] = bit ? t[a] : 1.0 - t[a];
        da[a] = (bit ? 1.0 : -1.0) / grid_.spacing(a);
        wt *= wa[a];
      }
      const double s = samples_[grid_.index(ijk)];
      e.value += s * wt;
      for (int a = 0; a < D; ++a) {
        double g = da[a];
        for (int b = 0; b < D; ++b)
          if (b != a) g *= wa[b];
        e.grad[a] += s * g;
      }
      for (int a = 0; a < D; ++a) {
        for (int b = a + 1; b < D; ++b) {
          double m = da[a] * da[b];
          for (int k = 0; k < D; ++k)
            if (k != a && k != b) m *= wa[k];
          e.hess(a, b) += s * m;
          e.hess(b, a) += s * m;
        }
      }
    }
    return e;
  }

  void build_coefficients() {
    // dims of the coefficient array: n_a + 2 per axis; start from samples and
    // solve one axis at a time.
    std::array<int, D> dims = grid_.n;
    std::vector<double> cur = samples_;
    for (int a = 0; a < D; ++a) {
      if (grid_.n[a] < 4) throw InputError("cubic grid interpolation needs >= 4 nodes per axis");
      const auto lu = not_a_knot_system(grid_.n[a]);
      std::array<int, D> out_dims = dims;
      out_dims[a] = grid_.n[a] + 2;
      std::size_t total_out = 1;
      for (int k = 0; k < D; ++k) total_out *= out_dims[k];
      std::vector<double> next(total_out, 0.0);
      std::size_t stride_in = 1, stride_out = 1;
      for (int k = 0; k < a; ++k) {
        stride_in *= dims[k];
        stride_out *= out_dims[k];
      }
      const std::size_t lines = cur.size() / dims[a];
      Eigen::VectorXd rhs(grid_.n[a] + 2);
      for (std::size_t line = 0; line < lines; ++line) {
        const std::size_t lower = line % stride_in;
        const std::size_t upper = line / stride_in;
        const std::size_t base_in = lower + upper * stride_in * dims[a];
        const std::size_t base_out = lower + upper * stride_out * out_dims[a];
        rhs.setZero();
        for (int i = 0; i < grid_.n[a]; ++i) rhs[i + 1] = cur[base_in + i * stride_in];
        const Eigen::VectorXd c = lu.solve(rhs);
        for (int i = 0; i < grid_.n[a] + 2; ++i) next[base_out + i * stride_out] = c[i];
      }
      cur = std::move(next);
      dims = out_dims;
    }
    coef_ = std::move(cur);
  }

  GridSpec<D> grid_;
  std::vector<double> samples_;
  Interpolation order_;
  std::vector<double> coef_;
};

}  // namespace detail

/// Potential interpolated from samples on a uniform grid (axis 0 fastest).
/// Evaluation is allowed on [x_1, x_{n-2}] per axis, one node inside the grid.
template <int D>
Potential<D> make_grid_potential(const GridSpec<D>& grid, std::vector<double> samples,
                                 Interpolation order = Interpolation::Cubic,
                                 std::string id = "grid") {
  if (samples.size() != grid.size())
    throw InputError("grid potential: " + std::to_string(samples.size()) + " samples for " +
                     std::to_string(grid.size()) + " nodes");
  for (double s : samples)
    if (!std::isfinite(s)) throw InputError("grid potential: non-finite sample");
  for (int a = 0; a < D; ++a)
    if (grid.n[a] < 4) throw InputError("grid potential needs at least 4 nodes per axis");
  Box<D> interior = grid.box;
  for (int a = 0; a < D; ++a) {
    interior.lo[a] += grid.spacing(a);
    interior.hi[a] -= grid.spacing(a);
  }
  auto m = std::make_shared<detail::GridModel<D>>(grid, std::move(samples), order);
  return Potential<D>(std::move(id), PotentialKind::GridSampled, std::move(m), interior,
                      order == Interpolation::Cubic ? Smoothness::C2 : Smoothness::C0)
      .with_parameters({{"order", static_cast<double>(order)}});
}

/// Parsed CSV grid: header "x,y[,z],u", rows sorted lexicographically
/// (first coordinate slowest).
struct GridCsv {
  int dimension = 0;
  std::vector<std::vector<double>> axes;
  std::vector<double> values;  // row order as in the file
};

inline GridCsv read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("grid CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  GridCsv out;
  if (line == "x,y,u") out.dimension = 2;
  else if (line == "x,y,z,u") out.dimension = 3;
  else throw InputError("grid CSV: header must be x,y,u or x,y,z,u, got '" + line + "'");
  const int d = out.dimension;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("grid CSV: bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != d + 1) throw InputError("grid CSV: wrong column count");
    rows.push_back(std::move(row));
  }
  out.axes.resize(d);
  for (int a = 0; a < d; ++a) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[a]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    out.axes[a] = std::move(v);
  }
  std::size_t expected = 1;
  for (const auto& ax : out.axes) expected *= ax.size();
  if (expected != rows.size()) throw InputError("grid CSV: rows do not form a rectilinear grid");
  // verify lexicographic order: last coordinate fastest
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t rem = r;
    for (int a = d - 1; a >= 0; --a) {
      const std::size_t i = rem % out.axes[a].size();
      rem /= out.axes[a].size();
      if (rows[r][a] != out.axes[a][i])
        throw InputError("grid CSV: rows are not sorted lexicographically");
    }
    out.values.push_back(rows[r][d]);
  }
  return out;
}

/// Build a grid potential from a parsed CSV. Axes must be uniformly spaced.
template <int D>
Potential<D> grid_potential_from_csv(const GridCsv& csv, Interpolation order,
                                     std::string id = "grid") {
  if (csv.dimension != D) throw InputError("grid CSV dimension mismatch");
  Box<D> box;
  std::array<int, D> n{};
  for (int a = 0; a < D; ++a) {
    const auto& ax = csv.axes[a];
    if (ax.size() < 4) throw InputError("grid CSV: need at least 4 nodes per axis");
    n[a] = static_cast<int>(ax.size());
    box.lo[a] = ax.front();
    box.hi[a] = ax.back();
    const double h = (ax.back() - ax.front()) / (ax.size() - 1);
    for (std::size_t i = 0; i < ax.size(); ++i)
      if (std::abs(ax[i] - (ax.front() + i * h)) > 1e-9 * std::max(1.0, std::abs(ax[i])))
        throw InputError("grid CSV: axis spacing must be uniform");
  }
  GridSpec<D> grid(box, n);
  // file order is first axis slowest; GridSpec order is first axis fastest
  std::vector<double> samples(grid.size());
  for (std::size_t r = 0; r < csv.values.size(); ++r) {
    std::size_t rem = r;
    std::array<int, D> ijk{};
    for (int a = D - 1; a >= 0; --a) {
      ijk[a] = static_cast<int>(rem % n[a]);
      rem /= n[a];
    }
    samples[grid.index(ijk)] = csv.values[r];
  }
  return make_grid_potential<D>(grid, std::move(samples), order, std::move(id));
}

inline GridCsv read_grid_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open grid file '" + path + "'");
  return read_grid_csv(in);
}

}  // namespace isoreal
