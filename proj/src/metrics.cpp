#include "ipid/metrics.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ipid {

ErrorReport error_metrics(const InertialParams& estimate, const InertialParams& truth,
                          const ObjectExtent& extent) {
  if (truth.mass <= 0.0) throw std::invalid_argument("true mass must be positive");
  if (extent.ax <= 0.0 || extent.ay <= 0.0 || extent.az <= 0.0)
    throw std::invalid_argument("extents must be positive");

  ErrorReport report;
  report.mass_err = std::abs(estimate.mass - truth.mass) / truth.mass * 100.0;

  const Vec3 c_true = truth.com();
  const Vec3 c_hat = estimate.mass != 0.0
                         ? Vec3(estimate.first_moment / estimate.mass)
                         : Vec3::Constant(std::numeric_limits<double>::infinity());
  for (int i = 0; i < 3; ++i)
    report.com_err_axes(i) = std::abs(c_hat(i) - c_true(i)) / extent[i] * 100.0;
  report.com_err = report.com_err_axes.mean();

  // Denominator: bounding-box inertia scale, diagonal entries against the
  // box moment m/12 (sum - a_i^2), off-diagonals against m/12 a_i a_j.
  const double sq_sum = extent.ax * extent.ax + extent.ay * extent.ay + extent.az * extent.az;
  constexpr int idx_i[6] = {0, 0, 0, 1, 1, 2};
  constexpr int idx_j[6] = {0, 1, 2, 1, 2, 2};
  for (int e = 0; e < 6; ++e) {
    const int i = idx_i[e], j = idx_j[e];
    const double delta = i == j ? 1.0 : 0.0;
    const double den =
        std::abs(truth.mass / 12.0 * (delta * sq_sum - extent[i] * extent[j]));
    report.inertia_err_entries(e) =
        std::abs(estimate.inertia(e) - truth.inertia(e)) / den * 100.0;
  }
  report.inertia_err = report.inertia_err_entries.mean();
  return report;
}

ConditionReport condition_number_scaled(const Eigen::MatrixXd& stacked) {
  if (stacked.rows() < 10) throw std::invalid_argument("need at least 10 stacked rows");
  ConditionReport report;

  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < stacked.cols(); ++j) {
    if (stacked.col(j).norm() > 0.0)
      live.push_back(j);
    else
      report.zero_column = true;
  }
  if (live.empty()) {
    report.infinite = true;
    report.kappa = std::numeric_limits<double>::infinity();
    return report;
  }

  Eigen::MatrixXd scaled(stacked.rows(), static_cast<Eigen::Index>(live.size()));
  for (std::size_t j = 0; j < live.size(); ++j)
    scaled.col(static_cast<Eigen::Index>(j)) = stacked.col(live[j]) / stacked.col(live[j]).norm();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 1e-14 * sv(0)) {
    report.infinite = true;
    report.kappa = std::numeric_limits<double>::infinity();
  } else {
    report.kappa = sv(0) / smin;
  }
  return report;
}

double gravity_dominance(const ManipulationStats& stats, double g) {
  const double force_other = stats.lin_acc + stats.ang_vel * stats.ang_vel * stats.radius;
  const double r = stats.radius;
  const double torque_other =
      r * r * (stats.ang_acc + stats.ang_vel * stats.ang_vel) + r * stats.lin_acc;
  if (force_other <= 0.0 || torque_other <= 0.0)
    return std::numeric_limits<double>::infinity();
  const double force_ratio = g / force_other;
  const double torque_ratio = g * r / torque_other;
  return 0.5 * (force_ratio + torque_ratio);
}

RankDiagnostics reduced_rank_diagnostics(const PointMatrix& points_body,
                                         const std::vector<Pose>& poses,
                                         const GravityConvention& gravity) {
  const Eigen::Index n = points_body.rows();
  if (n < 1) throw std::invalid_argument("empty point set");
  if (poses.empty()) throw std::invalid_argument("no poses given");

  RankDiagnostics diag;

  // Coplanarity of the homogeneous point matrix [p; 1].
  Eigen::MatrixXd P_hom(4, n);
  P_hom.topRows<3>() = points_body.transpose();
  P_hom.row(3).setOnes();
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P_hom);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-9 * sv(0)) ++r;
    diag.coplanar_points = r < 4;
  }

  Eigen::MatrixXd stacked(3 * static_cast<Eigen::Index>(poses.size()), n);
  for (std::size_t j = 0; j < poses.size(); ++j)
    stacked.middleRows<3>(3 * static_cast<Eigen::Index>(j)) =
        reduced_regressor(points_body, poses[j].rotation, poses[j].translation, gravity)
            .bottomRows<3>();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinV);
  diag.singular_values = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < diag.singular_values.size(); ++i)
    if (diag.singular_values(i) > 1e-9 * diag.singular_values(0)) ++rank;
  diag.rank = rank;
  diag.degenerate_poses = rank < 4;
  diag.kernel = svd.matrixV().rightCols(n - rank);
  return diag;
}

KernelCheckReport kernel_invariance_check(const Eigen::MatrixXd& kernel,
                                          const PointMatrix& points_body,
                                          const Eigen::VectorXd& masses) {
  KernelCheckReport report;
  if (kernel.cols() == 0) return report;  // vacuous
  if (kernel.rows() != points_body.rows() || masses.size() != points_body.rows())
    throw std::invalid_argument("kernel/points/masses size mismatch");

  PointMassModel base{points_body, masses};
  const InertialParams agg_base = aggregate(base);

  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    const Eigen::VectorXd dm = kernel.col(c);
    KernelCheckEntry entry;
    entry.mass_sum_abs = std::abs(dm.sum());
    entry.com_moment_norm = (points_body.transpose() * dm).norm();

    // Largest step keeping all masses non-negative, halved for margin.
    double eps = 1.0;
    for (Eigen::Index i = 0; i < dm.size(); ++i)
      if (dm(i) < 0.0) eps = std::min(eps, masses(i) / -dm(i));
    entry.epsilon = 0.5 * eps;

    if (entry.epsilon > 0.0) {
      PointMassModel perturbed{points_body, masses + entry.epsilon * dm};
      const InertialParams agg_p = aggregate(perturbed);
      entry.mass_delta = std::abs(agg_p.mass - agg_base.mass);
      entry.first_moment_delta = (agg_p.first_moment - agg_base.first_moment).norm();
      entry.inertia_delta = (agg_p.inertia_matrix() - agg_base.inertia_matrix()).norm();
    }
    report.entries.push_back(entry);
  }
  return report;
}

double KernelCheckReport::max_mass_sum_abs() const {
  double v = 0.0;
  for (const auto& e : entries) v = std::max(v, e.mass_sum_abs);
  return v;
}

double KernelCheckReport::max_com_moment_norm() const {
  double v = 0.0;
  for (const auto& e : entries) v = std::max(v, e.com_moment_norm);
  return v;
}

double KernelCheckReport::max_inertia_delta() const {
  double v = 0.0;
  for (const auto& e : entries) v = std::max(v, e.inertia_delta);
  return v;
}

}  // namespace ipid
