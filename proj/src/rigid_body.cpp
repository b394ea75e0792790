#include "ipid/rigid_body.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace ipid {

Mat3 skew(const Vec3& u) {
  Mat3 s;
  s << 0.0, -u.z(), u.y(),
       u.z(), 0.0, -u.x(),
      -u.y(), u.x(), 0.0;
  return s;
}

Eigen::Matrix<double, 3, 6> inertia_product_operator(const Vec3& v) {
  Eigen::Matrix<double, 3, 6> L = Eigen::Matrix<double, 3, 6>::Zero();
  L(0, 0) = v.x(); L(0, 1) = v.y(); L(0, 2) = v.z();
  L(1, 1) = v.x(); L(1, 3) = v.y(); L(1, 4) = v.z();
  L(2, 2) = v.x(); L(2, 4) = v.y(); L(2, 5) = v.z();
  return L;
}

Mat3 InertialParams::inertia_matrix() const {
  Mat3 J;
  J << inertia(0), inertia(1), inertia(2),
       inertia(1), inertia(3), inertia(4),
       inertia(2), inertia(4), inertia(5);
  return J;
}

void InertialParams::set_inertia_matrix(const Mat3& J) {
  inertia << J(0, 0), 0.5 * (J(0, 1) + J(1, 0)), 0.5 * (J(0, 2) + J(2, 0)),
             J(1, 1), 0.5 * (J(1, 2) + J(2, 1)), J(2, 2);
}

Vec10 InertialParams::to_vector() const {
  Vec10 theta;
  theta << mass, first_moment, inertia;
  return theta;
}

InertialParams InertialParams::from_vector(const Vec10& theta, std::string frame) {
  InertialParams p;
  p.mass = theta(0);
  p.first_moment = theta.segment<3>(1);
  p.inertia = theta.segment<6>(4);
  p.frame = std::move(frame);
  return p;
}

bool KinematicSample::finite() const {
  return std::isfinite(t) && rotation.allFinite() && translation.allFinite() &&
         lin_vel.allFinite() && ang_vel.allFinite() && lin_acc.allFinite() &&
         ang_acc.allFinite();
}

bool KinematicSample::rotation_valid(double tol) const {
  if (!rotation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Vec6 Wrench::to_vector() const {
  Vec6 v;
  v << force, torque;
  return v;
}

bool Wrench::finite() const { return force.allFinite() && torque.allFinite(); }

namespace {

void check_state(const KinematicSample& state) {
  if (!state.finite()) throw std::invalid_argument("kinematic sample has non-finite entries");
}

// Body-frame kinematics feeding the Newton-Euler balance: proper linear
// acceleration of the body origin plus angular rate/acceleration, all
// rotated into body coordinates.
struct BodyKinematics {
  Vec3 a_proper;
  Vec3 omega;
  Vec3 alpha;
};

BodyKinematics to_body(const KinematicSample& state, const GravityConvention& gravity) {
  const Mat3 Rt = state.rotation.transpose();
  return {Rt * (state.lin_acc - gravity.g), Rt * state.ang_vel, Rt * state.ang_acc};
}

}  // namespace

Wrench newton_euler_wrench(const InertialParams& params,
                           const KinematicSample& state,
                           const GravityConvention& gravity) {
  check_state(state);
  const auto [a, omega, alpha] = to_body(state, gravity);
  const Vec3 h = params.first_moment;
  const Mat3 J = params.inertia_matrix();

  const Vec3 f_body = params.mass * a - h.cross(alpha) + omega.cross(omega.cross(h));
  const Vec3 tau_body = h.cross(a) + J * alpha + omega.cross(J * omega);

  Wrench w;
  w.force = state.rotation * f_body;
  w.torque = state.rotation * tau_body + state.translation.cross(w.force);
  w.frame = "world";
  return w;
}

Mat6x10 full_regressor(const KinematicSample& state, const GravityConvention& gravity) {
  check_state(state);
  const auto [a, omega, alpha] = to_body(state, gravity);

  Mat6x10 A_body = Mat6x10::Zero();
  A_body.block<3, 1>(0, 0) = a;
  A_body.block<3, 3>(0, 1) = skew(alpha) + skew(omega) * skew(omega);
  A_body.block<3, 3>(3, 1) = -skew(a);
  A_body.block<3, 6>(3, 4) =
      inertia_product_operator(alpha) + skew(omega) * inertia_product_operator(omega);

  // Transport the body-origin wrench to the world origin.
  Mat6x10 A = Mat6x10::Zero();
  A.topRows<3>() = state.rotation * A_body.topRows<3>();
  A.bottomRows<3>() =
      state.rotation * A_body.bottomRows<3>() + skew(state.translation) * A.topRows<3>();
  return A;
}

Vec10 point_mass_params(const Vec3& p) {
  Vec10 phi;
  const double n2 = p.squaredNorm();
  phi << 1.0, p,
      n2 - p.x() * p.x(), -p.x() * p.y(), -p.x() * p.z(),
      n2 - p.y() * p.y(), -p.y() * p.z(),
      n2 - p.z() * p.z();
  return phi;
}

Eigen::MatrixXd point_full_regressor(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points_body,
                                     const KinematicSample& state,
                                     const GravityConvention& gravity) {
  if (points_body.rows() < 1) throw std::invalid_argument("point set is empty");
  const Mat6x10 A = full_regressor(state, gravity);
  Eigen::MatrixXd K(6, points_body.rows());
  for (Eigen::Index i = 0; i < points_body.rows(); ++i)
    K.col(i) = A * point_mass_params(points_body.row(i).transpose());
  return K;
}

Eigen::MatrixXd reduced_regressor(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points_body,
                                  const Mat3& rotation, const Vec3& translation,
                                  const GravityConvention& gravity) {
  if (points_body.rows() < 1) throw std::invalid_argument("point set is empty");
  Eigen::MatrixXd K(6, points_body.rows());
  for (Eigen::Index i = 0; i < points_body.rows(); ++i) {
    const Vec3 p_world = rotation * points_body.row(i).transpose() + translation;
    K.block<3, 1>(0, i) = -gravity.g;
    K.block<3, 1>(3, i) = -p_world.cross(gravity.g);
  }
  return K;
}

Eigen::Matrix4d pseudo_inertia(const InertialParams& params) {
  const Mat3 J = params.inertia_matrix();
  Eigen::Matrix4d P;
  P.topLeftCorner<3, 3>() = 0.5 * J.trace() * Mat3::Identity() - J;
  P.topRightCorner<3, 1>() = params.first_moment;
  P.bottomLeftCorner<1, 3>() = params.first_moment.transpose();
  P(3, 3) = params.mass;
  return P;
}

double pseudo_inertia_min_eigenvalue(const InertialParams& params) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(pseudo_inertia(params));
  return es.eigenvalues().minCoeff();
}

bool is_physically_consistent(const InertialParams& params, double tol) {
  return pseudo_inertia_min_eigenvalue(params) >= -tol;
}

namespace {

void check_rotation(const Mat3& R) {
  if ((R.transpose() * R - Mat3::Identity()).norm() > 1e-9 ||
      std::abs(R.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("matrix is not a rotation");
}

}  // namespace

InertialParams transform_params(const InertialParams& params,
                                const Mat3& rotation, const Vec3& translation) {
  check_rotation(rotation);
  InertialParams out = params;
  const Vec3 h_rot = rotation * params.first_moment;
  out.first_moment = h_rot + params.mass * translation;
  // J' = R J R^T + 2 (t . Rh) I - Rh t^T - t (Rh)^T + m (|t|^2 I - t t^T),
  // the origin-inertia transform under x' = R x + t.
  const Mat3 J = rotation * params.inertia_matrix() * rotation.transpose();
  const Mat3 Jp = J + 2.0 * translation.dot(h_rot) * Mat3::Identity() -
                  h_rot * translation.transpose() - translation * h_rot.transpose() +
                  params.mass * (translation.squaredNorm() * Mat3::Identity() -
                                 translation * translation.transpose());
  out.set_inertia_matrix(Jp);
  return out;
}

Wrench transform_wrench(const Wrench& w, const Mat3& rotation, const Vec3& translation) {
  Wrench out;
  out.force = rotation * w.force;
  out.torque = rotation * w.torque + translation.cross(out.force);
  out.frame = w.frame;
  return out;
}

}  // namespace ipid
