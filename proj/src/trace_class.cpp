#include "fcurve/trace_class.hpp"

#include <cmath>

#include "fcurve/errors.hpp"

namespace fcurve {

TraceClassOperator::TraceClassOperator(Space s, TraceClassSpec spec) : space_(std::move(s)), spec_(std::move(spec)) {
  const auto n = static_cast<Eigen::Index>(space_.cells());
  if (spec_.ell.rows() != n + 1 || spec_.ell.cols() != n) throw std::invalid_argument("ell must be (N+1) x N");
  if (!(spec_.c >= 0.0)) throw SpecViolation("trace-class constant c must be non-negative");
  if (!spec_.ell.allFinite()) throw SpecViolation("trace-class kernel is not finite");

  const double dx = space_.dx();
  const auto w = space_.mid_weights();
  Eigen::VectorXd sw(n);
  Eigen::VectorXd inv_w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sw[j] = std::sqrt(w[static_cast<std::size_t>(j)]);
    inv_w[j] = 1.0 / w[static_cast<std::size_t>(j)];
  }
  ell0_ = spec_.ell.row(0).transpose();
  const Eigen::MatrixXd dl = (spec_.ell.bottomRows(n) - spec_.ell.topRows(n)) / dx;
  b_ = sw.asDiagonal() * dl * sw.cwiseInverse().asDiagonal();

  const double scale = std::max(1.0, b_.cwiseAbs().maxCoeff());
  if ((b_ - b_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw SpecViolation("trace-class kernel: sqrt(w(x)/w(z)) d/dx l(x, z) is not symmetric");
  }

  level_ = Curve(space_);
  level_.set_f0(spec_.c);
  for (Eigen::Index j = 0; j < n; ++j) level_.deriv()[static_cast<std::size_t>(j)] = ell0_[j] * inv_w[j];

  cross_ = spec_.ell * (ell0_.cwiseProduct(inv_w)) * dx;
  // int l(x, z) dl/dz(z, y) dz with dl/dz(z_i, y_j) from row differences
  composed_ = spec_.ell * (spec_.ell.bottomRows(n) - spec_.ell.topRows(n));
}

Curve TraceClassOperator::apply(const Curve& f) const {
  require_same_space(space_, f.space());
  const auto n = static_cast<Eigen::Index>(space_.cells());
  const double dx = space_.dx();
  const Eigen::Map<const Eigen::VectorXd> fd(f.deriv().data(), n);
  const double s = f.f0() * spec_.c + ell0_.dot(fd) * dx;
  const Eigen::VectorXd last = composed_ * fd * dx;
  const auto lv = level_.node_values();
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  for (Eigen::Index k = 0; k <= n; ++k) {
    nodes[static_cast<std::size_t>(k)] = s * lv[static_cast<std::size_t>(k)] + f.f0() * cross_[k] + last[k];
  }
  return Curve::from_nodes(space_, nodes);
}

double TraceClassOperator::quadratic_form(const Curve& f) const {
  require_same_space(space_, f.space());
  const auto n = static_cast<Eigen::Index>(space_.cells());
  const double dx = space_.dx();
  const auto w = space_.mid_weights();
  const Eigen::Map<const Eigen::VectorXd> fd(f.deriv().data(), n);
  const double head = f.f0() * spec_.c + ell0_.dot(fd) * dx;
  // w(x) d/dx l(x, z) = sqrt(w(x) w(z)) b(x, z)
  Eigen::VectorXd sw(n);
  for (Eigen::Index j = 0; j < n; ++j) sw[j] = std::sqrt(w[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd inner = sw.asDiagonal() * (b_ * sw.asDiagonal() * fd) * dx;
  double tail = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = f.f0() * ell0_[i] + inner[i];
    tail += v * v / w[static_cast<std::size_t>(i)];
  }
  return head * head + tail * dx;
}

double TraceClassOperator::trace() const {
  const double dx = space_.dx();
  const auto w = space_.mid_weights();
  double h2 = 0.0;
  for (Eigen::Index j = 0; j < ell0_.size(); ++j) h2 += ell0_[j] * ell0_[j] / w[static_cast<std::size_t>(j)];
  return spec_.c * spec_.c + 2.0 * h2 * dx + b_.squaredNorm() * dx * dx;
}

TraceClassOperator trace_class_build(const Space& s, const TraceClassSpec& spec) {
  return TraceClassOperator(s, spec);
}

TraceClassSpec to_trace_class(const HSRepresentation& rep) {
  if (!is_symmetric(rep, 1e-10)) throw SpecViolation("trace-class square needs a symmetric HS representation");
  const Space& s = rep.h.space();
  const auto n = static_cast<Eigen::Index>(s.cells());
  const auto w = s.mid_weights();
  TraceClassSpec out;
  out.c = rep.c;
  out.ell = hs_kernel(s, rep.b).samples();
  for (Eigen::Index k = 0; k <= n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.ell(k, j) += w[static_cast<std::size_t>(j)] * rep.h.deriv()[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace fcurve
