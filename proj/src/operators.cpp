#include "fcurve/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <regex>

#include "fcurve/errors.hpp"

namespace fcurve {

Eigen::MatrixXd LinearOperator::matrix() const {
  const Space& s = space();
  const Eigen::Index n = static_cast<Eigen::Index>(s.cells()) + 1;
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    m.col(j) = to_coordinates(apply(from_coordinates(s, e)));
    e[j] = 0.0;
  }
  return m;
}

namespace {

Eigen::VectorXd random_unit(Eigen::Index n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v / v.norm();
}

template <class ApplyAtA>
double power_iterate(Eigen::VectorXd v, const ApplyAtA& step, const PowerIterationOptions& opts) {
  double est = 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    auto [av_norm, ata_v] = step(v);
    const double prev = est;
    est = av_norm;
    const double n = ata_v.norm();
    if (n == 0.0) return 0.0;
    v = ata_v / n;
    if (it > 2 && std::abs(est - prev) <= opts.rel_tol * est) break;
  }
  return est;
}

}  // namespace

double operator_norm(const LinearOperator& op, const PowerIterationOptions& opts) {
  const Space& s = op.space();
  const Eigen::VectorXd v0 = random_unit(static_cast<Eigen::Index>(s.cells()) + 1, opts.seed);
  return power_iterate(
      v0,
      [&](const Eigen::VectorXd& v) {
        const Curve av = op.apply(from_coordinates(s, v));
        const Curve atav = op.apply_adjoint(av);
        return std::pair<double, Eigen::VectorXd>(norm(av), to_coordinates(atav));
      },
      opts);
}

double matrix_norm(const Eigen::Ref<const Eigen::MatrixXd>& m, const PowerIterationOptions& opts) {
  const Eigen::VectorXd v0 = random_unit(m.cols(), opts.seed);
  return power_iterate(
      v0,
      [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd av = m * v;
        return std::pair<double, Eigen::VectorXd>(av.norm(), m.transpose() * av);
      },
      opts);
}

// ---------------------------------------------------------------------------
// Kernel operators

KernelOperator::KernelOperator(Space s, RowMajorMatrix q) : space_(std::move(s)), q_(std::move(q)) {
  const auto n = static_cast<Eigen::Index>(space_.cells());
  if (q_.rows() != n + 1 || q_.cols() != n) {
    throw std::invalid_argument("kernel samples must be (N+1) x N");
  }
  if (!q_.allFinite()) throw SpecViolation("kernel samples are not finite");
  support_.resize(static_cast<std::size_t>(n) + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    Eigen::Index lo = 0;
    Eigen::Index hi = n;
    while (lo < n && q_(i, lo) == 0.0) ++lo;
    while (hi > lo && q_(i, hi - 1) == 0.0) --hi;
    support_[static_cast<std::size_t>(i)] = {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }
}

KernelOperator KernelOperator::from_function(const Space& s,
                                             const std::function<double(double, double)>& q) {
  const auto n = static_cast<Eigen::Index>(s.cells());
  RowMajorMatrix m(n + 1, n);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const double x = s.node(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = q(x, s.midpoint(static_cast<std::size_t>(j)));
  }
  return KernelOperator(s, std::move(m));
}

Curve KernelOperator::apply(const Curve& f) const {
  require_same_space(space_, f.space());
  const auto& d = f.deriv();
  const double dx = space_.dx();
  std::vector<double> nodes(space_.cells() + 1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [lo, hi] = support_[i];
    const double* row = q_.data() + i * space_.cells();
    double acc = 0.0;
    for (std::size_t j = lo; j < hi; ++j) acc += row[j] * d[j];
    nodes[i] = acc * dx;
  }
  return Curve::from_nodes(space_, nodes);
}

Curve KernelOperator::apply_adjoint(const Curve& g) const {
  require_same_space(space_, g.space());
  const std::size_t n = space_.cells();
  const auto w = space_.mid_weights();
  const auto& gd = g.deriv();
  // (T* g)'_j = (sum_k q(x_k, y_j) v_k) / w_j with v built from w g'
  std::vector<double> v(n + 1);
  v[0] = g.f0() - w[0] * gd[0];
  for (std::size_t k = 1; k < n; ++k) v[k] = w[k - 1] * gd[k - 1] - w[k] * gd[k];
  v[n] = w[n - 1] * gd[n - 1];
  std::vector<double> acc(n, 0.0);
  for (std::size_t k = 0; k <= n; ++k) {
    if (v[k] == 0.0) continue;
    const auto [lo, hi] = support_[k];
    const double* row = q_.data() + k * n;
    for (std::size_t j = lo; j < hi; ++j) acc[j] += v[k] * row[j];
  }
  Curve out(space_);
  for (std::size_t j = 0; j < n; ++j) out.deriv()[j] = acc[j] / w[j];
  return out;
}

Eigen::MatrixXd KernelOperator::row_differences() const {
  const auto n = static_cast<Eigen::Index>(space_.cells());
  return q_.bottomRows(n) - q_.topRows(n);
}

Eigen::MatrixXd KernelOperator::weighted_x_derivative() const {
  const auto n = static_cast<Eigen::Index>(space_.cells());
  const auto w = space_.mid_weights();
  Eigen::MatrixXd b = row_differences() / space_.dx();
  Eigen::VectorXd sw(n);
  for (Eigen::Index i = 0; i < n; ++i) sw[i] = std::sqrt(w[static_cast<std::size_t>(i)]);
  return sw.asDiagonal() * b * sw.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd KernelOperator::matrix() const {
  const auto n = static_cast<Eigen::Index>(space_.cells());
  const auto sc = space_.coord_scale();
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = sc[static_cast<std::size_t>(i)];
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  m.block(0, 1, 1, n) = (q_.row(0).transpose().cwiseQuotient(s) * space_.dx()).transpose();
  m.block(1, 1, n, n) = s.asDiagonal() * row_differences() * s.cwiseInverse().asDiagonal();
  return m;
}

KernelOperator delivery_kernel(const Space& s, double tau) {
  if (!(tau > 0.0)) throw ConfigError("delivery period must be positive");
  const auto n = static_cast<Eigen::Index>(s.cells());
  const double dx = s.dx();
  RowMajorMatrix m = RowMajorMatrix::Zero(n + 1, n);
  for (Eigen::Index i = 0; i <= n; ++i) {
    const double x = s.node(static_cast<std::size_t>(i));
    const double end = x + tau;
    const auto j0 = static_cast<Eigen::Index>(std::floor(x / dx + 1e-9));
    const auto j1 = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::ceil(end / dx - 1e-9)));
    for (Eigen::Index j = j0; j < j1; ++j) {
      const double lo = std::max(static_cast<double>(j) * dx, x);
      const double hi = std::min(static_cast<double>(j + 1) * dx, end);
      if (hi <= lo) continue;
      const double a = end - lo;
      const double b = end - hi;
      m(i, j) = (a * a - b * b) / (2.0 * tau * dx);
    }
  }
  return KernelOperator(s, std::move(m));
}

KernelOperator expconv_kernel(const Space& s, double delta) {
  if (!(delta > 0.0)) throw ConfigError("expconv delta must be positive");
  return KernelOperator::from_function(s, [delta](double x, double y) { return std::exp(-delta * std::abs(x - y)); });
}

KernelOperator separable_kernel(const Space& s, const std::function<double(double)>& xi,
                                const std::function<double(double)>& theta) {
  return KernelOperator::from_function(s, [&](double x, double y) { return xi(x) * theta(y); });
}

KernelOperator convolution_kernel(const Space& s, const std::function<double(double)>& k) {
  return KernelOperator::from_function(s, [&](double x, double y) { return k(x - y); });
}

KernelOperator parse_kernel(const Space& s, const std::string& spec) {
  static const std::regex call(R"(^\s*([a-z_]+)\s*\((.*)\)\s*$)");
  static const std::regex arg(R"(\s*([a-z_]+)\s*=\s*([-+0-9.eE]+)\s*)");
  std::smatch m;
  if (!std::regex_match(spec, m, call)) throw ConfigError("malformed kernel spec: " + spec);
  const std::string name = m[1];
  std::map<std::string, double> args;
  const std::string body = m[2];
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t comma = body.find(',', pos);
    const std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::smatch am;
    if (!std::regex_match(item, am, arg)) throw ConfigError("malformed kernel argument '" + item + "' in " + spec);
    try {
      args[am[1]] = std::stod(am[2]);
    } catch (const std::exception&) {
      throw ConfigError("bad number in kernel spec: " + spec);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  auto need = [&](const std::string& key) {
    auto it = args.find(key);
    if (it == args.end()) throw ConfigError("kernel " + name + " needs argument " + key);
    return it->second;
  };
  if (name == "delivery") return delivery_kernel(s, need("tau"));
  if (name == "expconv") return expconv_kernel(s, need("delta"));
  if (name == "separable") {
    const double a = need("xi");
    const double b = need("theta");
    return separable_kernel(s, [a](double x) { return std::exp(-a * x); }, [b](double y) { return std::exp(-b * y); });
  }
  throw ConfigError("unknown kernel: " + name);
}

SchurBound schur_bound(const KernelOperator& t) {
  const Space& s = t.space();
  const double dx = s.dx();
  const Eigen::MatrixXd b = t.weighted_x_derivative().cwiseAbs();
  SchurBound out;
  out.row_sup = b.rowwise().sum().maxCoeff() * dx;
  out.col_sup = b.colwise().sum().maxCoeff() * dx;
  if (!std::isfinite(out.row_sup) || !std::isfinite(out.col_sup)) {
    throw SpecViolation("kernel derivative is not integrable: Schur bound diverges");
  }
  const auto w = s.mid_weights();
  double head = 0.0;
  for (std::size_t j = 0; j < s.cells(); ++j) {
    const double q0 = t.samples()(0, static_cast<Eigen::Index>(j));
    head += q0 * q0 / w[j];
  }
  out.c = std::sqrt(head * dx + out.row_sup * out.col_sup);
  return out;
}

Curve DualKernel::apply(const Curve& g) const { return g.f0() * rank_one + kernel.apply(g); }

DualKernel dual_kernel(const KernelOperator& t) {
  const Space& s = t.space();
  const auto n = static_cast<Eigen::Index>(s.cells());
  const auto w = s.mid_weights();
  const Eigen::MatrixXd dq = t.row_differences();  // (i, j): x-cell i, y-cell j
  // q*(y_k, x_i) = sum_{j < k} dq(i, j) w_i / w_j
  RowMajorMatrix qs = RowMajorMatrix::Zero(n + 1, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double inv = 1.0 / w[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < n; ++i) {
      qs(k + 1, i) = qs(k, i) + dq(i, k) * w[static_cast<std::size_t>(i)] * inv;
    }
  }
  Curve rho(s);
  for (Eigen::Index j = 0; j < n; ++j) rho.deriv()[static_cast<std::size_t>(j)] = t.samples()(0, j) / w[static_cast<std::size_t>(j)];
  return DualKernel{KernelOperator(s, std::move(qs)), std::move(rho)};
}

KernelOperator compose_kernels(const KernelOperator& q1, const KernelOperator& q2) {
  require_same_space(q1.space(), q2.space());
  RowMajorMatrix q3 = q1.samples() * q2.row_differences();
  if (!q3.allFinite()) throw NumericalError("kernel composition diverged");
  return KernelOperator(q1.space(), std::move(q3));
}

// ---------------------------------------------------------------------------
// Multiplication operators

Curve MultiplicationOperator::apply_adjoint(const Curve& u) const {
  require_same_space(m_.space(), u.space());
  const Space& s = m_.space();
  const std::size_t n = s.cells();
  const double dx = s.dx();
  const auto w = s.mid_weights();
  const auto mv = m_.node_values();
  const auto& md = m_.deriv();
  const auto& ud = u.deriv();
  Curve out(s);
  double suffix = 0.0;  // sum_{i > j} w_i u'_i dx m'_i
  for (std::size_t jj = n; jj-- > 0;) {
    const double uj = w[jj] * ud[jj] * dx;
    const double mbar = 0.5 * (mv[jj] + mv[jj + 1]);
    out.deriv()[jj] = (uj * (0.5 * md[jj] * dx + mbar) + dx * suffix) / (w[jj] * dx);
    suffix += uj * md[jj];
  }
  out.set_f0(mv[0] * u.f0() + suffix);
  return out;
}

double MultiplicationOperator::norm_bound() const {
  return std::sqrt(5.0 + 4.0 * m_.space().weight().k_squared()) * norm(m_);
}

// ---------------------------------------------------------------------------
// Hilbert-Schmidt operators

KernelOperator hs_kernel(const Space& s, const Eigen::MatrixXd& b) {
  const auto n = static_cast<Eigen::Index>(s.cells());
  if (b.rows() != n || b.cols() != n) throw std::invalid_argument("b must be N x N");
  const auto w = s.mid_weights();
  const double dx = s.dx();
  RowMajorMatrix q = RowMajorMatrix::Zero(n + 1, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double wk = w[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < n; ++j) {
      q(k + 1, j) = q(k, j) + dx * std::sqrt(w[static_cast<std::size_t>(j)] / wk) * b(k, j);
    }
  }
  return KernelOperator(s, std::move(q));
}

namespace {
const HSRepresentation& validated(const HSRepresentation& rep) {
  require_same_space(rep.g.space(), rep.h.space());
  if (std::abs(rep.g.f0()) > 1e-12) throw SpecViolation("HS representation requires g(0) = 0");
  if (std::abs(rep.h.f0()) > 1e-12) throw SpecViolation("HS representation requires h(0) = 0");
  if (!rep.b.allFinite()) throw SpecViolation("HS kernel b is not finite");
  return rep;
}
}  // namespace

HSOperator::HSOperator(HSRepresentation rep)
    : rep_(std::move(validated(rep))), kernel_(hs_kernel(rep_.g.space(), rep_.b)) {}

Curve HSOperator::apply(const Curve& f) const {
  Curve out = kernel_.apply(f);
  out.axpy(f.f0(), rep_.h);
  out.set_f0(out.f0() + rep_.c * f.f0() + inner_product(rep_.g, f));
  return out;
}

Curve HSOperator::apply_adjoint(const Curve& f) const {
  Curve out = kernel_.apply_adjoint(f);
  out.axpy(f.f0(), rep_.g);
  out.set_f0(out.f0() + rep_.c * f.f0() + inner_product(rep_.h, f));
  return out;
}

Eigen::MatrixXd HSOperator::matrix() const {
  const auto n = static_cast<Eigen::Index>(space().cells());
  Eigen::MatrixXd m(n + 1, n + 1);
  m(0, 0) = rep_.c;
  m.block(0, 1, 1, n) = to_coordinates(rep_.g).tail(n).transpose();
  m.block(1, 0, n, 1) = to_coordinates(rep_.h).tail(n);
  m.block(1, 1, n, n) = rep_.b * space().dx();
  return m;
}

HSOperator hs_build(const HSRepresentation& rep) { return HSOperator(rep); }

double hs_norm(const HSRepresentation& rep) {
  validated(rep);
  const double g = norm(rep.g);
  const double h = norm(rep.h);
  const double dx = rep.g.space().dx();
  return std::sqrt(rep.c * rep.c + g * g + h * h + rep.b.squaredNorm() * dx * dx);
}

bool is_symmetric(const HSRepresentation& rep, double tol) {
  const double scale = std::max(1.0, rep.b.cwiseAbs().maxCoeff());
  if ((rep.b - rep.b.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  return distance(rep.g, rep.h) <= tol * std::max(1.0, norm(rep.g));
}

}  // namespace fcurve
