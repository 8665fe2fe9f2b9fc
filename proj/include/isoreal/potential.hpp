#pragma once

#include "isoreal/types.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isoreal {

enum class PotentialKind { CatalogClosedForm, Separable, GridSampled };

/// Recorded regularity of a potential. Informational only.
enum class Smoothness { C0, C2, C3, Smooth };

inline const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::CatalogClosedForm: return "catalog";
    case PotentialKind::Separable: return "separable";
    case PotentialKind::GridSampled: return "grid";
  }
  return "?";
}

inline const char* to_string(Smoothness s) {
  switch (s) {
    case Smoothness::C0: return "C0";
    case Smoothness::C2: return "C2";
    case Smoothness::C3: return "C3";
    case Smoothness::Smooth: return "Cinf";
  }
  return "?";
}

/// One-dimensional building block f with its first two derivatives.
struct Component1D {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  /// Period of f' when f' is periodic.
  std::optional<double> period;
  /// Analytic zeros of f' within one period [0, period), when known.
  std::optional<std::vector<double>> derivative_zeros;
  Smoothness smoothness = Smoothness::Smooth;
};

namespace detail {

template <int D>
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;
  virtual double value(const Vec<D>& x) const = 0;
  virtual Vec<D> gradient(const Vec<D>& x) const = 0;
  virtual Mat<D> hessian(const Vec<D>& x) const = 0;
  virtual double laplacian(const Vec<D>& x) const { return hessian(x).trace(); }
  /// Gradient and Laplacian together; models override when sharing work pays.
  virtual std::pair<Vec<D>, double> gradient_laplacian(const Vec<D>& x) const {
    return {gradient(x), laplacian(x)};
  }
};

template <int D>
class ClosedFormModel final : public PotentialModel<D> {
 public:
  using Scalar = std::function<double(const Vec<D>&)>;
  using Vector = std::function<Vec<D>(const Vec<D>&)>;
  using Matrix = std::function<Mat<D>(const Vec<D>&)>;

  ClosedFormModel(Scalar u, Vector grad, Matrix hess)
      : u_(std::move(u)), grad_(std::move(grad)), hess_(std::move(hess)) {}

  double value(const Vec<D>& x) const override { return u_(x); }
  Vec<D> gradient(const Vec<D>& x) const override { return grad_(x); }
  Mat<D> hessian(const Vec<D>& x) const override { return hess_(x); }

 private:
  Scalar u_;
  Vector grad_;
  Matrix hess_;
};

template <int D>
class SeparableModel final : public PotentialModel<D> {
 public:
  explicit SeparableModel(std::array<Component1D, D> c) : c_(std::move(c)) {}

  double value(const Vec<D>& x) const override {
    double s = 0.0;
    for (int i = 0; i < D; ++i) s += c_[i].f(x[i]);
    return s;
  }
  Vec<D> gradient(const Vec<D>& x) const override {
    Vec<D> g;
    for (int i = 0; i < D; ++i) g[i] = c_[i].df(x[i]);
    return g;
  }
  Mat<D> hessian(const Vec<D>& x) const override {
    Mat<D> h = Mat<D>::Zero();
    for (int i = 0; i < D; ++i) h(i, i) = c_[i].d2f(x[i]);
    return h;
  }
  double laplacian(const Vec<D>& x) const override {
    double s = 0.0;
    for (int i = 0; i < D; ++i) s += c_[i].d2f(x[i]);
    return s;
  }

  const std::array<Component1D, D>& components() const { return c_; }

 private:
  std::array<Component1D, D> c_;
};

template <int D>
class ScaledModel final : public PotentialModel<D> {
 public:
  ScaledModel(std::shared_ptr<const PotentialModel<D>> base, double s)
      : base_(std::move(base)), s_(s) {}
  double value(const Vec<D>& x) const override { return s_ * base_->value(x); }
  Vec<D> gradient(const Vec<D>& x) const override { return s_ * base_->gradient(x); }
  Mat<D> hessian(const Vec<D>& x) const override { return s_ * base_->hessian(x); }
  double laplacian(const Vec<D>& x) const override { return s_ * base_->laplacian(x); }
  std::pair<Vec<D>, double> gradient_laplacian(const Vec<D>& x) const override {
    auto [g, l] = base_->gradient_laplacian(x);
    return {s_ * g, s_ * l};
  }

 private:
  std::shared_ptr<const PotentialModel<D>> base_;
  double s_;
};

}  // namespace detail

/// Scalar potential u with gradient, Hessian and Laplacian evaluators.
///
/// A Potential is an immutable value: copies share the underlying model and
/// every evaluator is pure, so one instance may be used from many threads.
template <int D>
class Potential {
  static_assert(D == 2 || D == 3, "potentials are 2-D or 3-D");

 public:
  static constexpr int dimension = D;

  Potential(std::string id, PotentialKind kind, std::shared_ptr<const detail::PotentialModel<D>> m,
            Box<D> domain, Smoothness smoothness = Smoothness::Smooth)
      : id_(std::move(id)), kind_(kind), model_(std::move(m)), domain_(std::move(domain)),
        smoothness_(smoothness) {}

  double value(const Vec<D>& x) const { return model_->value(x); }
  Vec<D> gradient(const Vec<D>& x) const { return model_->gradient(x); }
  Mat<D> hessian(const Vec<D>& x) const { return model_->hessian(x); }
  double laplacian(const Vec<D>& x) const { return model_->laplacian(x); }
  std::pair<Vec<D>, double> gradient_laplacian(const Vec<D>& x) const {
    return model_->gradient_laplacian(x);
  }

  const std::string& id() const { return id_; }
  PotentialKind kind() const { return kind_; }
  const Box<D>& domain() const { return domain_; }
  Smoothness smoothness() const { return smoothness_; }

  /// Per-axis period of the gradient, empty for non-periodic axes.
  const std::array<std::optional<double>, D>& periods() const { return periods_; }
  const std::map<std::string, double>& parameters() const { return params_; }

  /// Components when kind() == Separable, nullptr otherwise.
  const std::array<Component1D, D>* components() const {
    if (auto* s = dynamic_cast<const detail::SeparableModel<D>*>(model_.get()))
      return &s->components();
    return nullptr;
  }

  Potential with_periods(std::array<std::optional<double>, D> p) const {
    Potential q = *this;
    q.periods_ = p;
    return q;
  }
  Potential with_parameters(std::map<std::string, double> p) const {
    Potential q = *this;
    q.params_ = std::move(p);
    return q;
  }
  Potential with_domain(Box<D> b) const {
    Potential q = *this;
    q.domain_ = std::move(b);
    return q;
  }

  /// The potential lambda * u (same kind, same domain).
  Potential scaled(double lambda) const {
    Potential q = *this;
    q.model_ = std::make_shared<detail::ScaledModel<D>>(model_, lambda);
    q.id_ = id_ + "*" + std::to_string(lambda);
    return q;
  }

 private:
  std::string id_;
  PotentialKind kind_;
  std::shared_ptr<const detail::PotentialModel<D>> model_;
  Box<D> domain_;
  Smoothness smoothness_;
  std::array<std::optional<double>, D> periods_{};
  std::map<std::string, double> params_;
};

/// Build a closed-form potential. The Laplacian is the Hessian trace.
template <int D>
Potential<D> make_closed_form(std::string id, typename detail::ClosedFormModel<D>::Scalar u,
                              typename detail::ClosedFormModel<D>::Vector grad,
                              typename detail::ClosedFormModel<D>::Matrix hess, Box<D> domain,
                              Smoothness smoothness = Smoothness::Smooth) {
  auto m = std::make_shared<detail::ClosedFormModel<D>>(std::move(u), std::move(grad),
                                                        std::move(hess));
  return Potential<D>(std::move(id), PotentialKind::CatalogClosedForm, std::move(m),
                      std::move(domain), smoothness);
}

/// u(x) = sum_i c_i(x_i). Periodicity of each axis is inherited from its component.
template <int D>
Potential<D> make_separable(std::array<Component1D, D> components, Box<D> domain,
                            std::string id = {}) {
  std::array<std::optional<double>, D> periods{};
  Smoothness s = Smoothness::Smooth;
  std::string name;
  for (int i = 0; i < D; ++i) {
    if (!components[i].f || !components[i].df || !components[i].d2f)
      throw InputError("separable component " + std::to_string(i) + " lacks an evaluator");
    periods[i] = components[i].period;
    if (static_cast<int>(components[i].smoothness) < static_cast<int>(s))
      s = components[i].smoothness;
    name += (i ? "," : "") + components[i].name;
  }
  if (id.empty()) id = "separable:" + name;
  auto m = std::make_shared<detail::SeparableModel<D>>(std::move(components));
  return Potential<D>(std::move(id), PotentialKind::Separable, std::move(m), std::move(domain), s)
      .with_periods(periods);
}

/// Runtime-sized overload; throws InputError unless components.size() == D.
template <int D>
Potential<D> make_separable(const std::vector<Component1D>& components, Box<D> domain,
                            std::string id = {}) {
  if (components.size() != static_cast<std::size_t>(D))
    throw InputError("separable potential of dimension " + std::to_string(D) + " needs " +
                     std::to_string(D) + " components, got " + std::to_string(components.size()));
  std::array<Component1D, D> arr;
  for (int i = 0; i < D; ++i) arr[i] = components[i];
  return make_separable<D>(std::move(arr), std::move(domain), std::move(id));
}

}  // namespace isoreal
