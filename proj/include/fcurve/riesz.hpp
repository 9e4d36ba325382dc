#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fcurve/dynamics.hpp"
#include "fcurve/space.hpp"

namespace fcurve {

// Riesz basis of the semigroup-invariant subspace attached to a period x0:
// the unit constant plus modes
//   g_n(x) = (1 - exp(l_n x)) / (l_n sqrt(x0)),  l_n = 2 pi i n / x0 - lambda - alpha/2,
// for |n| <= n_max (n = 0 included). Each mode is an eigenvector of the shift
// semigroup up to a constant: U_t g_n = exp(l_n t) g_n + g_n(t).
//
// Coefficient functionals read f' on [0, x0] only, so the projection keeps f
// on [0, x0] and continues it with the damped periodic pattern.
class BiorthogonalSystem {
 public:
  BiorthogonalSystem(Space s, double x0, double lambda, int n_max);

  const Space& space() const { return space_; }
  double x0() const { return x0_; }
  double lambda() const { return lambda_; }
  int n_max() const { return n_max_; }

  Curve constant_mode() const { return Curve::constant(space_, 1.0); }
  std::complex<double> eigenvalue(int n) const;
  const ComplexCurve& mode(int n) const { return modes_.at(index(n)); }
  const ComplexCurve& dual(int n) const { return duals_.at(index(n)); }

  // <f, g_n*>
  std::complex<double> coefficient(const ComplexCurve& f, int n) const;
  std::complex<double> coefficient(const Curve& f, int n) const;

  // Gram matrix of (1, g_{-n_max}, ..., g_{n_max}) and its condition number
  const Eigen::MatrixXcd& gram() const { return gram_; }
  double condition_number() const { return cond_; }
  // max |<g_k, g_n*> - delta_nk|
  double biorthogonality_residual() const;

 private:
  std::size_t index(int n) const;

  Space space_;
  double x0_;
  double lambda_;
  int n_max_;
  std::vector<std::complex<double>> eig_;
  std::vector<ComplexCurve> modes_;
  std::vector<ComplexCurve> duals_;
  Eigen::MatrixXcd gram_;
  double cond_ = 0.0;
};

BiorthogonalSystem build_basis(const Space& s, double x0, double lambda, int n_max);
// lambda defaults to alpha / 2
BiorthogonalSystem build_basis(const Space& s, double x0, int n_max);

struct Projection {
  Curve curve;
  double window_error = 0.0;  // max |f - Pf| over nodes in [0, x0]
};

Projection project_x0(const BiorthogonalSystem& basis, const Curve& f);

// <U_t g_k, g_n*>; equals exp(l_k t) for n = k and 0 otherwise.
std::complex<double> semigroup_dual_action(const BiorthogonalSystem& basis, int n, int k, double t);

// Curve dynamics for state-independent volatility rebuilt from the spot
// channel and one complex OU process per mode:
//   f(t) = S(t) + Y_0(t) g_0 + 2 sum_{n >= 1} Re(Y_n(t) g_n).
// Uses the same noise as simulate_mild for the given path.
ForwardSurface ou_series_reconstruct(const BiorthogonalSystem& basis, const ModelSpec& model, double horizon,
                                     double dt, std::size_t path);

// Damped periodic extension (A f)(x) = exp(-lambda x) f(x mod T) of a function
// given on [0, T), and the bounds
//   e^{-2 T lambda} / (1 - e^{-2 T lambda}) ||f||^2 <= ||Af||^2 <= ||f||^2 / (1 - e^{-2 T lambda}).
struct EmbeddingCheck {
  double f_norm_sq = 0.0;
  double af_norm_sq = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds = false;
};

EmbeddingCheck embedding_bounds_check(const std::function<std::complex<double>(double)>& f, double period,
                                      double lambda);

}  // namespace fcurve
