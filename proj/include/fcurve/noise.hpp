#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fcurve/operators.hpp"

namespace fcurve {

// Covariance of a finite factor expansion L = sum_n L_n g_n:
// Qf = sum_n <g_n, f> g_n.
class FactorCovariance final : public LinearOperator {
 public:
  FactorCovariance(Space s, std::vector<Curve> factors);

  const Space& space() const override { return space_; }
  Curve apply(const Curve& f) const override;
  Curve apply_adjoint(const Curve& f) const override { return apply(f); }

  const std::vector<Curve>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  double trace() const;
  Eigen::MatrixXd gram() const;
  // largest eigenvalue of the factor Gram matrix
  double op_norm() const;

 private:
  Space space_;
  std::vector<Curve> factors_;
};

enum class DriverKind { Wiener, NIG };

// Driving noise: independent Wiener processes per factor, or NIG processes
// sharing one inverse-Gaussian time change with E[dTheta] = ig_mu dt.
struct DriverSpec {
  DriverKind kind = DriverKind::Wiener;
  double ig_mu = 1.0;
  double ig_lambda = 1.0;
  std::shared_ptr<const FactorCovariance> covariance;
  std::uint64_t seed = 0;

  // E[L_n(1)^2]
  double variance_scale() const { return kind == DriverKind::NIG ? ig_mu : 1.0; }
  void validate() const;
};

// Counter-based random numbers: every draw is a pure function of
// (seed, path, step, stream), so results do not depend on thread layout.
namespace counter_rng {
std::uint64_t bits(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream,
                   std::uint64_t sub);
double uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream);
double normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream);

inline constexpr std::uint64_t kFactorStream = 0;
inline constexpr std::uint64_t kCompanionStream = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kTimeChangeNormal = std::uint64_t{1} << 21;
inline constexpr std::uint64_t kTimeChangeUniform = (std::uint64_t{1} << 21) + 1;
}  // namespace counter_rng

// Michael-Schucany-Haas transform of a standard normal and a uniform into an
// inverse-Gaussian variate with the given mean and shape.
double inverse_gaussian_transform(double mean, double shape, double normal, double uniform);

struct NoiseIncrements {
  double dt = 0.0;
  Eigen::MatrixXd dL;            // steps x factors
  Eigen::VectorXd time_change;   // steps; empty for Wiener drivers
};

// Factor increments of one step written into out (size = number of factors).
// Returns the time-change increment (dt for Wiener drivers).
double sample_step(const DriverSpec& d, double dt, std::uint64_t path, std::uint64_t step, std::span<double> out);

NoiseIncrements sample_increments(const DriverSpec& d, double dt, std::size_t steps, std::uint64_t path = 0);

// Covariance of (f(x_1), ..., f(x_n)) under Psi Q Psi*, and its PSD square root.
struct ReducedNoise {
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd sqrt;
};

ReducedNoise reduce_to_ndim(const std::vector<double>& points, const LinearOperator& psi,
                            const FactorCovariance& q, double variance_scale = 1.0);

}  // namespace fcurve
