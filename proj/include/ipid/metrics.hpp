#pragma once

#include <vector>

#include "ipid/discretization.hpp"
#include "ipid/rigid_body.hpp"
#include "ipid/signals.hpp"

namespace ipid {

/// Bounding-box side lengths of the true object, metres.
struct ObjectExtent {
  double ax = 0.0, ay = 0.0, az = 0.0;

  static ObjectExtent from_vec(const Vec3& e) { return {e.x(), e.y(), e.z()}; }
  double operator[](int i) const { return i == 0 ? ax : (i == 1 ? ay : az); }
};

/// Scale-invariant percentage errors: mass relative to true mass, COM per
/// axis relative to the bounding box, inertia entries relative to the
/// bounding-box inertia scale. Scalar values average the three axes and the
/// six unique tensor entries.
struct ErrorReport {
  double mass_err = 0.0;
  Vec3 com_err_axes = Vec3::Zero();
  double com_err = 0.0;
  Eigen::Matrix<double, 6, 1> inertia_err_entries = Eigen::Matrix<double, 6, 1>::Zero();
  double inertia_err = 0.0;
};

ErrorReport error_metrics(const InertialParams& estimate, const InertialParams& truth,
                          const ObjectExtent& extent);

struct ConditionReport {
  double kappa = 0.0;
  bool infinite = false;      // numerically rank-deficient after scaling
  bool zero_column = false;   // column excluded from scaling
};

/// Condition number of the stacked regressor after dividing every column by
/// its own norm. Excitation-quality diagnostic.
ConditionReport condition_number_scaled(const Eigen::MatrixXd& stacked);

/// Ratio of gravitational to non-gravitational force/torque magnitudes at
/// the given average manipulation statistics. Infinite when the motion
/// vanishes (gravity fully dominant).
struct ManipulationStats {
  double lin_acc = 1.45;   // m/s^2
  double ang_vel = 1.08;   // rad/s
  double ang_acc = 11.34;  // rad/s^2
  double mass = 0.257;     // kg
  double radius = 0.081;   // m, COM to edge
};

double gravity_dominance(const ManipulationStats& stats = {}, double g = 9.81);

// --- reduced-model observability ----------------------------------------

struct RankDiagnostics {
  int rank = 0;
  Eigen::MatrixXd kernel;  // orthonormal basis, n x (n - rank)
  Eigen::VectorXd singular_values;
  bool coplanar_points = false;
  bool degenerate_poses = false;  // rank below 4
};

/// Numerical rank (threshold 1e-9 of the largest singular value) and kernel
/// of the stacked torque-row reduced model over the given poses.
RankDiagnostics reduced_rank_diagnostics(const PointMatrix& points_body,
                                         const std::vector<Pose>& poses,
                                         const GravityConvention& gravity);

struct KernelCheckEntry {
  double mass_sum_abs = 0.0;         // |sum dm|
  double com_moment_norm = 0.0;      // |P dm|
  double epsilon = 0.0;              // feasible perturbation magnitude used
  double mass_delta = 0.0;           // aggregate mass change under m + eps dm
  double first_moment_delta = 0.0;
  double inertia_delta = 0.0;        // Frobenius change of the tensor
};

struct KernelCheckReport {
  std::vector<KernelCheckEntry> entries;
  bool vacuous() const { return entries.empty(); }
  double max_mass_sum_abs() const;
  double max_com_moment_norm() const;
  double max_inertia_delta() const;
};

/// Verify the kernel of the reduced model conserves total mass and the
/// weighted COM while still moving the aggregated inertia tensor.
KernelCheckReport kernel_invariance_check(const Eigen::MatrixXd& kernel,
                                          const PointMatrix& points_body,
                                          const Eigen::VectorXd& masses);

}  // namespace ipid
