#pragma once

#include "fcurve/operators.hpp"

namespace fcurve {

// Positive trace-class operator Q = C^2 for a symmetric Hilbert-Schmidt C,
// described by c >= 0 and the kernel l(x, z) = w(z) h'(z) + q(x, z) sampled
// like an integral kernel (nodes x rows, midpoints z columns).
struct TraceClassSpec {
  double c = 0.0;
  RowMajorMatrix ell;
};

class TraceClassOperator final : public LinearOperator {
 public:
  TraceClassOperator(Space s, TraceClassSpec spec);

  const Space& space() const override { return space_; }
  Curve apply(const Curve& f) const override;
  Curve apply_adjoint(const Curve& f) const override { return apply(f); }

  // <Qf, f> written as a sum of squares.
  double quadratic_form(const Curve& f) const;
  double trace() const;
  const TraceClassSpec& spec() const { return spec_; }

 private:
  Space space_;
  TraceClassSpec spec_;
  Eigen::VectorXd ell0_;       // l(0, z_j)
  Eigen::MatrixXd b_;          // sqrt(w(x)/w(z)) d/dx l(x, z) at midpoint pairs
  Curve level_;                // c + int_0^x l(0, z)/w(z) dz
  Eigen::VectorXd cross_;      // int l(x_k, z) l(0, z)/w(z) dz at nodes
  RowMajorMatrix composed_;    // int l(x, z) d/dz l(z, y) dz
};

TraceClassOperator trace_class_build(const Space& s, const TraceClassSpec& spec);

// Builds C^2 for a symmetric Hilbert-Schmidt representation (g = h, b symmetric).
TraceClassSpec to_trace_class(const HSRepresentation& rep);

}  // namespace fcurve
