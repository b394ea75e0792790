#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ipid/discretization.hpp"
#include "ipid/rigid_body.hpp"
#include "ipid/signals.hpp"

namespace ipid {

// --- weighted point-mass identification ------------------------------------

struct PMDConfig {
  double c1 = 300.0;
  double lambda = 0.1;
  double weight_sharpness = 3.0;  // the fixed s in tanh(s D / c1)
  DynamismNormalizers normalizers{};
};

/// Blend weight in [0,1): tanh(s D / c1). Zero dynamism keeps the reduced
/// model only; w -> 1 hands the residual to the full model.
double weight(double dynamism_value, const PMDConfig& config);

// --- non-negative least squares ----------------------------------------

struct NnlsOptions {
  double kkt_tol = 1e-8;
  int max_outer = 0;  // 0 selects the default cap of 10 n
};

struct NnlsResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// Raised when the active-set loop hits its iteration cap; carries the best
/// iterate found so far.
class NnlsIterationLimit : public std::runtime_error {
 public:
  NnlsIterationLimit(Eigen::VectorXd best, int iterations)
      : std::runtime_error("nnls iteration cap reached"),
        best_iterate(std::move(best)),
        iterations(iterations) {}
  Eigen::VectorXd best_iterate;
  int iterations;
};

/// Active-set solve of min |A x - b|^2 + lambda |x|^2 subject to x >= 0,
/// with the Tikhonov term handled as appended rows. Deterministic.
NnlsResult nnls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                      double lambda, const NnlsOptions& options = {});

/// Same solver on precomputed normal equations G = A^T A + lambda I,
/// rhs = A^T b.
NnlsResult nnls_solve_normal(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                             const NnlsOptions& options = {});

/// KKT violation of a candidate solution on the normal equations:
/// max of negativity of x, gradient magnitude on free coordinates, and
/// negative gradient on active ones, with gradient G x - rhs.
double nnls_kkt_residual(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                         const Eigen::VectorXd& x);

// --- estimate reporting ----------------------------------------------------

struct EstimateReport {
  std::string estimator;
  InertialParams theta_hat;
  Eigen::VectorXd mass_vector;      // PMD only
  int solver_iterations = 0;
  double wall_time_s = 0.0;
  bool physically_consistent = false;  // recomputed from the pseudo-inertia
  double min_pseudo_eigenvalue = 0.0;
  std::vector<double> weight_trace;    // PMD per-timestep blend weight
  double residual_reduced = 0.0;
  double residual_full = 0.0;
  bool rank_deficient = false;  // OLS
  int rank = 0;
  bool ambiguity = false;  // RTLS smallest-singular-value tie at any step
};

/// Fill the consistency fields from the pseudo-inertia of theta_hat.
void stamp_consistency(EstimateReport& report);

// --- identification algorithms -----------------------------------------------

/// Point-mass discretization: weighted non-negative least squares over the
/// per-point masses, blending reduced and full models by per-timestep
/// dynamism, then aggregated to the body-frame parameters.
EstimateReport pmd_identify(const MeasurementSeries& batch, const PointMatrix& points_body,
                            const PMDConfig& config, const GravityConvention& gravity);

/// Ordinary least squares on the stacked full regressor. Minimum-norm
/// solution from a rank-revealing decomposition; never consistency-corrected.
EstimateReport ols_identify(const MeasurementSeries& batch, const GravityConvention& gravity);

struct RtlsConfig {
  double forgetting = 0.999;
  int min_blocks = 11;          // row blocks accumulated before estimates start
  double ambiguity_tol = 1e-10; // relative gap for a smallest-singular-value tie
};

/// Total-least-squares core: exponentially forgotten moment matrix of the
/// augmented rows [A | b], estimate dehomogenized from the singular vector
/// of the smallest singular value.
class RtlsCore {
 public:
  explicit RtlsCore(const RtlsConfig& config = {}) : config_(config) {}

  void push(const Eigen::Matrix<double, 6, 11>& block);
  bool ready() const { return blocks_ >= config_.min_blocks; }
  /// Latest estimate; flags a smallest-singular-value tie (the previous
  /// estimate is retained in that case).
  Vec10 estimate(bool& ambiguous);

 private:
  RtlsConfig config_;
  Eigen::Matrix<double, 11, 11> moment_ = Eigen::Matrix<double, 11, 11>::Zero();
  Vec10 previous_ = Vec10::Zero();
  bool have_previous_ = false;
  int blocks_ = 0;
};

/// Recursive total least squares: exponentially forgotten augmented moment
/// matrix, estimate from the singular vector of the smallest singular value.
/// One report per step once min_blocks are in; a tie keeps the previous
/// estimate and flags it.
std::vector<EstimateReport> rtls_identify(const MeasurementSeries& batch,
                                          const RtlsConfig& config,
                                          const GravityConvention& gravity);

}  // namespace ipid
