#include "ipid/signals.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ipid {

Mat3 rotation_exp(const Vec3& phi) {
  const double angle = phi.norm();
  if (angle < 1e-12) return Mat3::Identity() + skew(phi);
  const Vec3 axis = phi / angle;
  return axis_angle(axis, angle);
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  const Mat3 K = skew(axis);
  return Mat3::Identity() + std::sin(angle) * K + (1.0 - std::cos(angle)) * K * K;
}

Vec3 rotation_log(const Mat3& R) {
  const double cos_angle = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  const Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (angle < 1e-7) return 0.5 * w;  // first order
  if (angle > M_PI - 1e-5) {
    // Near pi the antisymmetric part vanishes; recover the axis from the
    // symmetric part instead.
    const Mat3 S = 0.5 * (R + Mat3::Identity());
    int k;
    S.diagonal().maxCoeff(&k);
    Vec3 axis = S.col(k) / std::sqrt(std::max(S(k, k), 1e-16));
    axis.normalize();
    if (Vec3(w).dot(axis) < 0.0) axis = -axis;
    return angle * axis;
  }
  return angle / (2.0 * std::sin(angle)) * w;
}

KinematicChain KinematicChain::default_arm() {
  KinematicChain chain;
  chain.joints = {
      {Vec3::UnitZ(), Vec3(0.0, 0.0, 0.30)},
      {Vec3::UnitY(), Vec3(0.0, 0.0, 0.25)},
      {Vec3::UnitZ(), Vec3(0.20, 0.0, 0.0)},
      {Vec3::UnitY(), Vec3(0.10, 0.0, 0.0)},
      {Vec3::UnitZ(), Vec3(0.10, 0.0, 0.0)},
      {Vec3::UnitY(), Vec3(0.08, 0.0, 0.0)},
  };
  return chain;
}

Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& joint_angles) {
  if (static_cast<std::size_t>(joint_angles.size()) != chain.dof())
    throw std::invalid_argument("joint angle count does not match chain dof");
  Pose pose = chain.base;
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Joint& joint = chain.joints[i];
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("joint axis is not a unit vector");
    const Mat3 R = axis_angle(joint.axis, joint_angles(static_cast<Eigen::Index>(i)));
    pose.rotation = pose.rotation * R;
    pose.translation += pose.rotation * joint.offset;
  }
  return pose;
}

TrajectoryConfig TrajectoryConfig::default_config(std::size_t dof) {
  TrajectoryConfig cfg;
  cfg.amplitude.assign(dof, 0.0);
  cfg.frequency.assign(dof, 0.0);
  cfg.initial_angle.assign(dof, 0.0);
  const double a45 = 45.0 * M_PI / 180.0;
  if (dof >= 6) {
    cfg.amplitude[dof - 3] = a45;
    cfg.amplitude[dof - 2] = a45;
    cfg.amplitude[dof - 1] = a45;
    cfg.frequency[dof - 3] = 0.10;
    cfg.frequency[dof - 2] = 0.13;
    cfg.frequency[dof - 1] = 0.16;
    cfg.initial_angle = std::vector<double>{0.0, 0.4, 0.3, -0.5, 0.6, 0.2};
    cfg.initial_angle.resize(dof, 0.0);
  } else {
    for (std::size_t i = 0; i < dof; ++i) {
      cfg.amplitude[i] = a45;
      cfg.frequency[i] = 0.10 + 0.03 * static_cast<double>(i);
    }
  }
  return cfg;
}

namespace {

// Fourth-order five-point differences, one-sided at the borders; short
// sequences fall back to low-order stencils.
std::vector<Vec3> differentiate(const std::vector<Vec3>& f, double dt) {
  const std::size_t n = f.size();
  std::vector<Vec3> df(n);
  if (n < 5) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k >= 1 && k + 1 < n)
        df[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
      else if (k + 1 < n)
        df[k] = (f[k + 1] - f[k]) / dt;
      else if (k >= 1)
        df[k] = (f[k] - f[k - 1]) / dt;
      else
        df[k].setZero();
    }
    return df;
  }
  const double s = 1.0 / (12.0 * dt);
  for (std::size_t k = 0; k < n; ++k) {
    if (k >= 2 && k + 2 < n)
      df[k] = s * (-f[k + 2] + 8.0 * f[k + 1] - 8.0 * f[k - 1] + f[k - 2]);
    else if (k == 0)
      df[k] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    else if (k == 1)
      df[k] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    else if (k == n - 2)
      df[k] = s * (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]);
    else
      df[k] = s * (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] +
                   3.0 * f[n - 5]);
  }
  return df;
}

Eigen::VectorXd joint_angles_at(const TrajectoryConfig& cfg, std::size_t dof, double t) {
  Eigen::VectorXd q(static_cast<Eigen::Index>(dof));
  for (std::size_t n = 0; n < dof; ++n) {
    const double amp = n < cfg.amplitude.size() ? cfg.amplitude[n] : 0.0;
    const double freq = n < cfg.frequency.size() ? cfg.frequency[n] : 0.0;
    const double alpha = n < cfg.initial_angle.size() ? cfg.initial_angle[n] : 0.0;
    q(static_cast<Eigen::Index>(n)) =
        alpha + amp * std::sin(2.0 * M_PI * freq * cfg.speed_scale * t / 240.0);
  }
  return q;
}

}  // namespace

Trajectory generate_trajectory(const KinematicChain& chain, const TrajectoryConfig& config) {
  if (config.sample_rate <= 0.0) throw std::invalid_argument("sample rate must be positive");
  if (config.duration <= 0.0) throw std::invalid_argument("duration must be positive");

  const double dt = 1.0 / config.sample_rate;
  const auto count = static_cast<std::size_t>(std::floor(config.duration * config.sample_rate)) + 1;

  std::vector<Pose> poses(count);
  for (std::size_t k = 0; k < count; ++k)
    poses[k] = forward_kinematics(chain, joint_angles_at(config, chain.dof(), static_cast<double>(k) * dt));

  Trajectory traj;
  traj.samples.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    KinematicSample& s = traj.samples[k];
    s.t = static_cast<double>(k) * dt;
    s.rotation = poses[k].rotation;
    s.translation = poses[k].translation;
  }

  // Differentiate positions and the accumulated incremental rotation vector,
  // whose local differences recover the world angular velocity.
  std::vector<Vec3> positions(count), phi(count, Vec3::Zero());
  for (std::size_t k = 0; k < count; ++k) positions[k] = poses[k].translation;
  for (std::size_t k = 1; k < count; ++k)
    phi[k] = phi[k - 1] + rotation_log(poses[k].rotation * poses[k - 1].rotation.transpose());

  const std::vector<Vec3> vel = differentiate(positions, dt);
  const std::vector<Vec3> omega = differentiate(phi, dt);
  const std::vector<Vec3> acc = differentiate(vel, dt);
  const std::vector<Vec3> alpha = differentiate(omega, dt);
  for (std::size_t k = 0; k < count; ++k) {
    traj.samples[k].lin_vel = vel[k];
    traj.samples[k].ang_vel = omega[k];
    traj.samples[k].lin_acc = acc[k];
    traj.samples[k].ang_acc = alpha[k];
  }

  double w_sum = 0.0, v_sum = 0.0;
  for (const auto& s : traj.samples) {
    w_sum += s.ang_vel.norm();
    v_sum += s.lin_vel.norm();
  }
  traj.avg_angular_speed = w_sum / static_cast<double>(count);
  traj.avg_linear_speed = v_sum / static_cast<double>(count);
  return traj;
}

TrajectoryConfig calibrate_speed_scale(const KinematicChain& chain, TrajectoryConfig config,
                                       double target_angular_speed, double rel_tol, int max_iters) {
  if (target_angular_speed <= 0.0) throw std::invalid_argument("target speed must be positive");
  if (config.speed_scale <= 0.0) config.speed_scale = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const Trajectory traj = generate_trajectory(chain, config);
    if (traj.avg_angular_speed <= 0.0) {
      config.speed_scale *= 10.0;
      continue;
    }
    const double ratio = target_angular_speed / traj.avg_angular_speed;
    if (std::abs(ratio - 1.0) < rel_tol) break;
    config.speed_scale *= ratio;
  }
  return config;
}

Trajectory make_stop_and_go(const KinematicChain& chain, const TrajectoryConfig& config,
                            int num_poses, int dwell_samples) {
  if (num_poses < 1 || dwell_samples < 1)
    throw std::invalid_argument("need at least one pose and one dwell sample");
  const double dt = 1.0 / config.sample_rate;
  Trajectory traj;
  traj.samples.reserve(static_cast<std::size_t>(num_poses * dwell_samples));
  std::size_t k = 0;
  for (int i = 0; i < num_poses; ++i) {
    const double t_way = config.duration * static_cast<double>(i) / std::max(1, num_poses - 1);
    const Pose pose = forward_kinematics(chain, joint_angles_at(config, chain.dof(), t_way));
    for (int d = 0; d < dwell_samples; ++d, ++k) {
      KinematicSample s;
      s.t = static_cast<double>(k) * dt;
      s.rotation = pose.rotation;
      s.translation = pose.translation;
      traj.samples.push_back(s);
    }
  }
  return traj;
}

NoiseSpec NoiseSpec::preset(NoiseLevel level) {
  NoiseSpec spec;
  spec.level = level;
  switch (level) {
    case NoiseLevel::None:
      break;
    case NoiseLevel::Low:
      spec.sigma_ang_acc = 0.25;
      spec.sigma_lin_acc = 0.025;
      spec.sigma_force = 0.05;
      spec.sigma_torque = 0.0025;
      break;
    case NoiseLevel::Moderate:
      spec.sigma_ang_acc = 0.5;
      spec.sigma_lin_acc = 0.05;
      spec.sigma_force = 0.1;
      spec.sigma_torque = 0.005;
      break;
    case NoiseLevel::High:
      spec.sigma_ang_acc = 1.0;
      spec.sigma_lin_acc = 0.1;
      spec.sigma_force = 0.33;
      spec.sigma_torque = 0.0067;
      break;
  }
  return spec;
}

const char* to_string(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::None: return "none";
    case NoiseLevel::Low: return "low";
    case NoiseLevel::Moderate: return "moderate";
    case NoiseLevel::High: return "high";
  }
  return "unknown";
}

NoiseLevel noise_level_from_string(const std::string& name) {
  if (name == "none") return NoiseLevel::None;
  if (name == "low") return NoiseLevel::Low;
  if (name == "moderate") return NoiseLevel::Moderate;
  if (name == "high") return NoiseLevel::High;
  throw std::invalid_argument("unknown noise level: " + name);
}

MeasurementSeries simulate_measurements(const InertialParams& params_true,
                                        const std::vector<KinematicSample>& states,
                                        const NoiseSpec& noise,
                                        const GravityConvention& gravity,
                                        std::uint64_t seed) {
  if (states.empty()) throw std::invalid_argument("state sequence is empty");

  MeasurementSeries series;
  series.states = states;
  series.wrenches.reserve(states.size());
  for (const auto& s : states) series.wrenches.push_back(newton_euler_wrench(params_true, s, gravity));

  if (noise.level == NoiseLevel::None) return series;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit;
  auto draw3 = [&rng, &unit](double sigma) {
    const Vec3 v(unit(rng), unit(rng), unit(rng));
    return (sigma * v).eval();
  };
  for (std::size_t k = 0; k < series.size(); ++k) {
    series.states[k].lin_acc += draw3(noise.sigma_lin_acc);
    series.states[k].ang_acc += draw3(noise.sigma_ang_acc);
    // Wrench noise enters at the sensor, i.i.d. per channel, and rides the
    // transport to the world origin: force noise leaks into the world torque
    // through the lever arm.
    const Vec3 f_noise = series.states[k].rotation * draw3(noise.sigma_force);
    series.wrenches[k].force += f_noise;
    series.wrenches[k].torque += series.states[k].rotation * draw3(noise.sigma_torque) +
                                 series.states[k].translation.cross(f_noise);
  }
  return series;
}

// --- Kalman -------------------------------------------------------------

AxisKalman::AxisKalman(double process_psd, double pos_sigma, double acc_sigma)
    : q_(process_psd), pos_var_(pos_sigma * pos_sigma), acc_var_(acc_sigma * acc_sigma) {}

void AxisKalman::init(double pos, double vel, double acc,
                      double pos_var, double vel_var, double acc_var) {
  x_ << pos, vel, acc;
  P_ = Eigen::Vector3d(pos_var, vel_var, acc_var).asDiagonal();
}

void AxisKalman::step(double dt, double pos_obs, std::optional<double> acc_obs) {
  Eigen::Matrix3d F;
  F << 1.0, dt, 0.5 * dt * dt,
       0.0, 1.0, dt,
       0.0, 0.0, 1.0;
  const double d2 = dt * dt, d3 = d2 * dt, d4 = d3 * dt, d5 = d4 * dt;
  Eigen::Matrix3d Q;  // white-jerk process noise
  Q << d5 / 20.0, d4 / 8.0, d3 / 6.0,
       d4 / 8.0, d3 / 3.0, d2 / 2.0,
       d3 / 6.0, d2 / 2.0, dt;
  Q *= q_;

  x_ = F * x_;
  P_ = F * P_ * F.transpose() + Q;

  auto scalar_update = [this](int idx, double z, double r) {
    const Eigen::Vector3d PH = P_.col(idx);
    const double s = PH(idx) + r;
    const Eigen::Vector3d K = PH / s;
    x_ += K * (z - x_(idx));
    P_ -= K * PH.transpose();
    P_ = 0.5 * (P_ + P_.transpose()).eval();
  };
  scalar_update(0, pos_obs, pos_var_);
  if (acc_obs && acc_var_ > 0.0) scalar_update(2, *acc_obs, acc_var_);
}

SmoothedSeries kalman_smooth(const std::vector<KinematicSample>& samples,
                             const KalmanConfig& config) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two samples");
  const double dt = samples[1].t - samples[0].t;
  if (dt <= 0.0) throw std::invalid_argument("timestamps must increase");
  for (std::size_t k = 1; k < samples.size(); ++k)
    if (std::abs(samples[k].t - samples[k - 1].t - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw std::invalid_argument("non-uniform sample timestamps");

  const std::size_t n = samples.size();

  // Accumulated incremental rotation vector: a singularity-free angular
  // position signal whose derivative is the world-frame angular velocity.
  std::vector<Vec3> phi(n, Vec3::Zero());
  for (std::size_t k = 1; k < n; ++k)
    phi[k] = phi[k - 1] + rotation_log(samples[k].rotation * samples[k - 1].rotation.transpose());

  std::array<AxisKalman, 3> lin{
      AxisKalman(config.process_psd, config.pos_obs_sigma, config.lin_acc_obs_sigma),
      AxisKalman(config.process_psd, config.pos_obs_sigma, config.lin_acc_obs_sigma),
      AxisKalman(config.process_psd, config.pos_obs_sigma, config.lin_acc_obs_sigma)};
  std::array<AxisKalman, 3> ang{
      AxisKalman(config.process_psd, config.ang_obs_sigma, config.ang_acc_obs_sigma),
      AxisKalman(config.process_psd, config.ang_obs_sigma, config.ang_acc_obs_sigma),
      AxisKalman(config.process_psd, config.ang_obs_sigma, config.ang_acc_obs_sigma)};

  const double pvar = config.pos_obs_sigma * config.pos_obs_sigma;
  const double avar = config.ang_obs_sigma * config.ang_obs_sigma;
  for (int i = 0; i < 3; ++i) {
    const double v0 = (samples[1].translation(i) - samples[0].translation(i)) / dt;
    const double w0 = (phi[1](i) - phi[0](i)) / dt;
    const double a0 = n > 2 ? (samples[2].translation(i) - 2.0 * samples[1].translation(i) +
                               samples[0].translation(i)) / (dt * dt)
                            : 0.0;
    const double al0 = n > 2 ? (phi[2](i) - 2.0 * phi[1](i) + phi[0](i)) / (dt * dt) : 0.0;
    lin[static_cast<std::size_t>(i)].init(samples[0].translation(i), v0, a0,
                                          pvar, 2.0 * pvar / (dt * dt), 100.0);
    ang[static_cast<std::size_t>(i)].init(phi[0](i), w0, al0,
                                          avar, 2.0 * avar / (dt * dt), 100.0);
  }

  SmoothedSeries out;
  out.states = samples;
  out.uncertainty_trace.resize(n);
  out.uncertainty_trace[0] = 0.0;
  for (const auto& f : lin) out.uncertainty_trace[0] += f.covariance_trace();
  for (const auto& f : ang) out.uncertainty_trace[0] += f.covariance_trace();

  auto write_state = [&](std::size_t k) {
    for (int i = 0; i < 3; ++i) {
      out.states[k].lin_vel(i) = lin[static_cast<std::size_t>(i)].velocity();
      out.states[k].lin_acc(i) = lin[static_cast<std::size_t>(i)].acceleration();
      out.states[k].ang_vel(i) = ang[static_cast<std::size_t>(i)].velocity();
      out.states[k].ang_acc(i) = ang[static_cast<std::size_t>(i)].acceleration();
    }
  };
  write_state(0);

  for (std::size_t k = 1; k < n; ++k) {
    double trace = 0.0;
    for (int i = 0; i < 3; ++i) {
      auto& fl = lin[static_cast<std::size_t>(i)];
      auto& fa = ang[static_cast<std::size_t>(i)];
      fl.step(dt, samples[k].translation(i),
              config.lin_acc_obs_sigma > 0.0 ? std::optional<double>(samples[k].lin_acc(i))
                                             : std::nullopt);
      fa.step(dt, phi[k](i),
              config.ang_acc_obs_sigma > 0.0 ? std::optional<double>(samples[k].ang_acc(i))
                                             : std::nullopt);
      trace += fl.covariance_trace() + fa.covariance_trace();
    }
    out.uncertainty_trace[k] = trace;
    write_state(k);
  }

  // Stabilization: relative trace change below 1% over a 10-sample window.
  out.stabilization_index = n;
  for (std::size_t k = 10; k < n; ++k) {
    bool stable = true;
    for (std::size_t j = k - 9; j <= k; ++j) {
      const double prev = out.uncertainty_trace[j - 1];
      if (prev <= 0.0 || std::abs(out.uncertainty_trace[j] - prev) / prev >= 0.01) {
        stable = false;
        break;
      }
    }
    if (stable) {
      out.stabilization_index = k;
      break;
    }
  }
  return out;
}

double dynamism(const KinematicSample& sample, const DynamismNormalizers& norm) {
  if (norm.n1 <= 0.0 || norm.n2 <= 0.0 || norm.n3 <= 0.0)
    throw std::invalid_argument("dynamism normalizers must be positive");
  const double a = sample.lin_acc.norm() / norm.n1;
  const double al = sample.ang_acc.norm() / norm.n2;
  const double w = sample.ang_vel.norm() / norm.n3;
  return a * a + al * al + w * w;
}

}  // namespace ipid
