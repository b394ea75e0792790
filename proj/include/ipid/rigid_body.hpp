#pragma once

#include <Eigen/Dense>
#include <string>

namespace ipid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat6x10 = Eigen::Matrix<double, 6, 10>;

/// Skew-symmetric matrix such that skew(u) * v == u.cross(v).
Mat3 skew(const Vec3& u);

/// 3x6 operator L(v) with L(v) * vech(J) == J * v, vech ordered
/// (Jxx, Jxy, Jxz, Jyy, Jyz, Jzz).
Eigen::Matrix<double, 3, 6> inertia_product_operator(const Vec3& v);

/// The ten inertial parameters of a rigid body: mass, first mass moment
/// m*c, and the six unique entries of the inertia tensor taken about the
/// frame origin. Stored exactly as the parameter vector is ordered, so
/// symmetry of the tensor is structural.
struct InertialParams {
  double mass = 0.0;
  Vec3 first_moment = Vec3::Zero();          // m * c  [kg m]
  Eigen::Matrix<double, 6, 1> inertia = Eigen::Matrix<double, 6, 1>::Zero();
  std::string frame = "body";

  Vec3 com() const { return first_moment / mass; }
  Mat3 inertia_matrix() const;
  void set_inertia_matrix(const Mat3& J);

  Vec10 to_vector() const;
  static InertialParams from_vector(const Vec10& theta, std::string frame = "body");
};

/// Pose and spatial motion of the body frame relative to the world frame.
/// Linear quantities belong to the body-frame origin; everything is
/// expressed in world coordinates.
struct KinematicSample {
  double t = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();
  Vec3 lin_acc = Vec3::Zero();
  Vec3 ang_acc = Vec3::Zero();

  bool finite() const;
  /// Orthonormal with determinant +1 within tol.
  bool rotation_valid(double tol = 1e-9) const;
};

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  std::string frame = "world";

  Vec6 to_vector() const;  // [f; tau]
  bool finite() const;
};

struct GravityConvention {
  Vec3 g = Vec3(0.0, 0.0, -9.81);
};

/// Wrench produced by a rigid body with body-frame parameters moving
/// through `state`, reported about the world origin in world coordinates.
/// The sensor-side sign convention makes a statically held body produce
/// f = -m g (the holding force).
Wrench newton_euler_wrench(const InertialParams& params,
                           const KinematicSample& state,
                           const GravityConvention& gravity);

/// 6x10 matrix A with A * theta == newton_euler_wrench(theta, state) for
/// every body-frame parameter vector theta.
Mat6x10 full_regressor(const KinematicSample& state,
                       const GravityConvention& gravity);

/// Per-unit-mass parameter vector of a point mass at body position p:
/// [1, p, vech(|p|^2 I - p p^T)].
Vec10 point_mass_params(const Vec3& p);

/// 6xn matrix whose column i is full_regressor(state) * point_mass_params(p_i);
/// K * m is the wrench of the discretized body under the full dynamics.
Eigen::MatrixXd point_full_regressor(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points_body,
                                     const KinematicSample& state,
                                     const GravityConvention& gravity);

/// Gravity-only reduced model. Torque rows of column i are -[w_p_i]x g with
/// w_p_i the world position of point i; force rows are -g per unit mass, the
/// static limit of the full model.
Eigen::MatrixXd reduced_regressor(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points_body,
                                  const Mat3& rotation, const Vec3& translation,
                                  const GravityConvention& gravity);

/// 4x4 pseudo-inertia [ 0.5 tr(J) I - J, h; h^T, m ]. Physically consistent
/// parameters have a positive semidefinite pseudo-inertia.
Eigen::Matrix4d pseudo_inertia(const InertialParams& params);

/// All pseudo-inertia eigenvalues >= -tol.
bool is_physically_consistent(const InertialParams& params, double tol = 1e-8);

/// Minimum eigenvalue of the pseudo-inertia, for reporting.
double pseudo_inertia_min_eigenvalue(const InertialParams& params);

/// Re-express parameters in a frame F' with x' = R x + t. Mass is invariant,
/// the first moment rotates and shifts, the origin inertia follows the
/// rotation plus parallel-axis rule. Throws if R is not a rotation.
InertialParams transform_params(const InertialParams& params,
                                const Mat3& rotation, const Vec3& translation);

/// Transport a wrench to a frame F' with x' = R x + t (forces rotate,
/// torques pick up the lever arm of the new origin).
Wrench transform_wrench(const Wrench& w, const Mat3& rotation, const Vec3& translation);

}  // namespace ipid
