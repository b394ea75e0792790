#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipid/rigid_body.hpp"

namespace ipid {

// --- serial kinematic chain -------------------------------------------------

struct Joint {
  Vec3 axis = Vec3::UnitZ();     // unit rotation axis in the parent frame
  Vec3 offset = Vec3::Zero();    // link translation after the joint, metres
};

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

struct KinematicChain {
  std::vector<Joint> joints;
  Pose base;

  std::size_t dof() const { return joints.size(); }
  /// Six-revolute arm with alternating z/y axes used throughout the
  /// benchmark when no chain is configured.
  static KinematicChain default_arm();
};

Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& joint_angles);

// --- trajectory generation --------------------------------------------------

/// Joint-space sinusoids q_n(t) = alpha_n + A_n sin(2 pi f_n k t / 240),
/// with k the speed scale factor. Kinematic derivatives come from central
/// differences of the pose sequence (matrix-log rates for rotation).
struct TrajectoryConfig {
  double duration = 35.0;       // s
  double sample_rate = 100.0;   // Hz
  std::vector<double> amplitude;    // rad per joint
  std::vector<double> frequency;    // the f_n values
  std::vector<double> initial_angle;
  double speed_scale = 1.0;

  static TrajectoryConfig default_config(std::size_t dof);
};

struct Trajectory {
  std::vector<KinematicSample> samples;
  double avg_angular_speed = 0.0;  // mean |omega| over the samples
  double avg_linear_speed = 0.0;   // mean |v|
};

Trajectory generate_trajectory(const KinematicChain& chain, const TrajectoryConfig& config);

/// Fixed-point adjustment of config.speed_scale until the generated
/// trajectory's average |omega| is within `rel_tol` of the target.
TrajectoryConfig calibrate_speed_scale(const KinematicChain& chain, TrajectoryConfig config,
                                       double target_angular_speed, double rel_tol = 1e-3,
                                       int max_iters = 8);

/// Dwell poses drawn from the chain's trajectory with all velocity and
/// acceleration signals zeroed: data collection at rest in varied poses.
Trajectory make_stop_and_go(const KinematicChain& chain, const TrajectoryConfig& config,
                            int num_poses, int dwell_samples);

// --- measurement simulation ---------------------------------------------

enum class NoiseLevel { None, Low, Moderate, High };

/// Standard deviations of the zero-mean Gaussian sensor noise presets,
/// in rad/s^2, m/s^2, N and N m.
struct NoiseSpec {
  NoiseLevel level = NoiseLevel::None;
  double sigma_ang_acc = 0.0;
  double sigma_lin_acc = 0.0;
  double sigma_force = 0.0;
  double sigma_torque = 0.0;

  static NoiseSpec preset(NoiseLevel level);
};

const char* to_string(NoiseLevel level);
NoiseLevel noise_level_from_string(const std::string& name);

struct MeasurementSeries {
  std::vector<KinematicSample> states;
  std::vector<Wrench> wrenches;

  std::size_t size() const { return states.size(); }
};

/// Forward-simulate the wrench of `params_true` along `states` and inject
/// i.i.d. Gaussian noise into (a, alpha, f, tau) at the preset sigmas.
/// NoiseLevel::None passes the signals through untouched.
MeasurementSeries simulate_measurements(const InertialParams& params_true,
                                        const std::vector<KinematicSample>& states,
                                        const NoiseSpec& noise,
                                        const GravityConvention& gravity,
                                        std::uint64_t seed);

// --- Kalman velocity/acceleration estimation ---------------------------------

/// Per-axis constant-acceleration Kalman filter over (position, velocity,
/// acceleration). Translation axes observe body-origin position; rotation
/// axes observe the accumulated incremental rotation vector. The noisy
/// acceleration channels are fused as a second observation when their
/// sigma is known.
struct KalmanConfig {
  double process_psd = 10.0;      // white-jerk spectral density
  double pos_obs_sigma = 5e-4;    // m, pose channel
  double ang_obs_sigma = 5e-4;    // rad, integrated orientation channel
  double lin_acc_obs_sigma = 0.0; // 0 disables the acceleration observation
  double ang_acc_obs_sigma = 0.0;
};

struct SmoothedSeries {
  std::vector<KinematicSample> states;
  std::vector<double> uncertainty_trace;  // summed covariance trace per sample
  /// First index at which the trace change stayed below 1% over 10 samples,
  /// or size() if it never stabilized.
  std::size_t stabilization_index = 0;
};

SmoothedSeries kalman_smooth(const std::vector<KinematicSample>& samples,
                             const KalmanConfig& config);

/// Scalar 3-state filter used by kalman_smooth; exposed for direct use on
/// synthetic signals.
class AxisKalman {
 public:
  AxisKalman(double process_psd, double pos_sigma, double acc_sigma);
  void init(double pos, double vel, double acc, double pos_var, double vel_var, double acc_var);
  void step(double dt, double pos_obs, std::optional<double> acc_obs);
  double position() const { return x_(0); }
  double velocity() const { return x_(1); }
  double acceleration() const { return x_(2); }
  double covariance_trace() const { return P_.trace(); }

 private:
  Eigen::Vector3d x_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d P_ = Eigen::Matrix3d::Identity();
  double q_;
  double pos_var_;
  double acc_var_;
};

// --- dynamism ---------------------------------------------------------------

struct DynamismNormalizers {
  double n1 = 1.0;  // linear acceleration
  double n2 = 1.0;  // angular acceleration
  double n3 = 0.5;  // angular velocity
};

/// Heuristic motion-magnitude scalar |(|a|/n1, |alpha|/n2, |omega|/n3)|^2
/// computed from gravity-free kinematic acceleration.
double dynamism(const KinematicSample& sample, const DynamismNormalizers& norm = {});

/// Rotation vector of R (matrix logarithm).
Vec3 rotation_log(const Mat3& R);
Mat3 rotation_exp(const Vec3& phi);
Mat3 axis_angle(const Vec3& axis, double angle);

}  // namespace ipid
