#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fcurve/space.hpp"

namespace fcurve {

// Bounded linear operator on the discretised space.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual const Space& space() const = 0;
  virtual Curve apply(const Curve& f) const = 0;
  virtual Curve apply_adjoint(const Curve& f) const = 0;
  // Matrix in orthonormal coordinates (see to_coordinates). The default
  // implementation applies the operator to every coordinate basis vector.
  virtual Eigen::MatrixXd matrix() const;
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Space s) : space_(std::move(s)) {}
  const Space& space() const override { return space_; }
  Curve apply(const Curve& f) const override { return f; }
  Curve apply_adjoint(const Curve& f) const override { return f; }

 private:
  Space space_;
};

class ScaledOperator final : public LinearOperator {
 public:
  ScaledOperator(double scale, OperatorPtr op) : scale_(scale), op_(std::move(op)) {}
  const Space& space() const override { return op_->space(); }
  Curve apply(const Curve& f) const override { return scale_ * op_->apply(f); }
  Curve apply_adjoint(const Curve& f) const override { return scale_ * op_->apply_adjoint(f); }

 private:
  double scale_;
  OperatorPtr op_;
};

struct PowerIterationOptions {
  int max_iter = 2000;
  double rel_tol = 1e-10;
  unsigned long long seed = 12345;
};

// Largest singular value by power iteration on A*A; a lower estimate of the norm.
double operator_norm(const LinearOperator& op, const PowerIterationOptions& opts = {});
double matrix_norm(const Eigen::Ref<const Eigen::MatrixXd>& m, const PowerIterationOptions& opts = {});

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Integral operator Tf(x) = int q(x, y) f'(y) dy. The kernel is sampled at
// nodes x_i (rows, N + 1) and cell midpoints y_j (columns, N).
class KernelOperator final : public LinearOperator {
 public:
  KernelOperator(Space s, RowMajorMatrix q);

  static KernelOperator from_function(const Space& s, const std::function<double(double, double)>& q);

  const Space& space() const override { return space_; }
  Curve apply(const Curve& f) const override;
  Curve apply_adjoint(const Curve& g) const override;
  Eigen::MatrixXd matrix() const override;

  const RowMajorMatrix& samples() const { return q_; }
  // d/dx q at midpoint pairs rescaled by sqrt(w(x)/w(y)); N x N.
  Eigen::MatrixXd weighted_x_derivative() const;
  // Row differences q(x_{i+1}, .) - q(x_i, .); N x N.
  Eigen::MatrixXd row_differences() const;

 private:
  Space space_;
  RowMajorMatrix q_;
  std::vector<std::pair<std::size_t, std::size_t>> support_;  // per row [lo, hi)
};

// Averaging kernel over a delivery period of length tau; (Id + T) f(x) is the
// mean of f over [x, x + tau]. Samples are exact cell averages.
KernelOperator delivery_kernel(const Space& s, double tau);
// q(x, y) = exp(-delta |x - y|)
KernelOperator expconv_kernel(const Space& s, double delta);
// q(x, y) = xi(x) theta(y)
KernelOperator separable_kernel(const Space& s, const std::function<double(double)>& xi,
                                const std::function<double(double)>& theta);
// q(x, y) = k(x - y)
KernelOperator convolution_kernel(const Space& s, const std::function<double(double)>& k);

// Parses "delivery(tau=0.5)", "expconv(delta=0.3)", "separable(xi=1,theta=2)"
// (the last meaning xi(x) = exp(-1 x), theta(y) = exp(-2 y)).
KernelOperator parse_kernel(const Space& s, const std::string& spec);

struct SchurBound {
  double row_sup = 0.0;  // sup_x int |b(x, y)| dy
  double col_sup = 0.0;  // sup_y int |b(x, y)| dx
  double c = 0.0;        // operator norm bound
};

SchurBound schur_bound(const KernelOperator& t);

// Adjoint in integral form: T* g = rank_one * g(0) + int q*(., x) g'(x) dx.
struct DualKernel {
  KernelOperator kernel;
  Curve rank_one;
  Curve apply(const Curve& g) const;
};

DualKernel dual_kernel(const KernelOperator& t);

// q3(x, z) = int q1(x, y) d/dy q2(y, z) dy, so that T_{q3} = T_{q1} T_{q2}.
KernelOperator compose_kernels(const KernelOperator& q1, const KernelOperator& q2);

// f -> m f
class MultiplicationOperator final : public LinearOperator {
 public:
  explicit MultiplicationOperator(Curve m) : m_(std::move(m)) {}
  const Space& space() const override { return m_.space(); }
  Curve apply(const Curve& f) const override { return multiply(m_, f); }
  Curve apply_adjoint(const Curve& u) const override;
  const Curve& multiplier() const { return m_; }
  // sqrt(5 + 4 k^2) ||m||
  double norm_bound() const;

 private:
  Curve m_;
};

// Hilbert-Schmidt operator
//   Cf(x) = c f(0) + <g, f> + f(0) h(x) + int q(x, z) f'(z) dz,
//   q(x, z) = int_0^x sqrt(w(z) / w(y)) b(y, z) dy.
// b is sampled at midpoint pairs (N x N).
struct HSRepresentation {
  double c = 0.0;
  Curve g;
  Curve h;
  Eigen::MatrixXd b;
};

class HSOperator final : public LinearOperator {
 public:
  explicit HSOperator(HSRepresentation rep);
  const Space& space() const override { return rep_.g.space(); }
  Curve apply(const Curve& f) const override;
  Curve apply_adjoint(const Curve& f) const override;
  Eigen::MatrixXd matrix() const override;
  const HSRepresentation& representation() const { return rep_; }
  const KernelOperator& kernel() const { return kernel_; }

 private:
  HSRepresentation rep_;
  KernelOperator kernel_;
};

HSOperator hs_build(const HSRepresentation& rep);
double hs_norm(const HSRepresentation& rep);
KernelOperator hs_kernel(const Space& s, const Eigen::MatrixXd& b);
bool is_symmetric(const HSRepresentation& rep, double tol = 1e-10);

}  // namespace fcurve
