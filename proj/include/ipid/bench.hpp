#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipid/discretization.hpp"
#include "ipid/estimation.hpp"
#include "ipid/metrics.hpp"
#include "ipid/signals.hpp"

namespace ipid {

enum class EstimatorKind { Pmd, Ols, Rtls };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

/// Everything needed to reproduce one experiment: object, discretization,
/// motion, noise, estimator settings and the seed.
struct TrialSpec {
  TestObjectConfig object = TestObjectConfig::Uniform;
  TestObjectGeometry geometry{};
  double density = 0.04;                  // points/cm^3
  double target_angular_speed = 1.0;      // rad/s average
  NoiseLevel noise = NoiseLevel::Moderate;
  std::vector<EstimatorKind> estimators = {EstimatorKind::Pmd, EstimatorKind::Ols,
                                           EstimatorKind::Rtls};
  PMDConfig pmd{};
  RtlsConfig rtls{};
  KalmanConfig kalman{};
  bool use_kalman = true;   // applied when the noise level injects anything
  int observation_cap = 0;  // 0 keeps the whole trajectory
  std::vector<int> checkpoints;  // optional extra windows (sample counts)

  bool stop_and_go = false;
  int stop_poses = 25;
  int dwell_samples = 8;

  std::uint64_t seed = 1;
  std::uint64_t sampling_seed = 0;  // 0 = canonical lattice

  TrajectoryConfig trajectory;  // speed_scale is calibrated per target speed
  KinematicChain chain;
  GravityConvention gravity{};

  TrialSpec();
};

struct TrialRow {
  std::string estimator;
  int window = 0;  // observations consumed
  bool failed = false;
  std::string error;
  EstimateReport report;
  ErrorReport errors;
};

struct TrialResult {
  double achieved_angular_speed = 0.0;
  double achieved_linear_speed = 0.0;
  double condition_number = 0.0;
  bool condition_infinite = false;
  int observations = 0;
  int num_points = 0;
  std::size_t stabilization_index = 0;
  std::vector<TrialRow> rows;
  InertialParams truth;
  ObjectExtent extent;
  MeasurementSeries data;  // populated only when keep_data is requested
};

/// Run every selected estimator on one shared simulated dataset.
/// Estimator failures are recorded in their row; the trial continues.
TrialResult run_trial(const TrialSpec& spec, bool keep_data = false);

/// Cartesian sweep over trial axes. Cells that differ only in density or c1
/// share their measurement stream (the seed mix excludes those axes).
struct SweepSpec {
  std::vector<TestObjectConfig> objects{TestObjectConfig::Uniform};
  std::vector<double> densities{0.04};
  std::vector<double> speeds{1.0};
  std::vector<NoiseLevel> noises{NoiseLevel::Moderate};
  std::vector<double> c1_values{300.0};
  int repetitions = 1;
  std::uint64_t seed_base = 1;
  TrialSpec base{};
};

struct SweepCell {
  TrialSpec spec;
  std::size_t index = 0;
  bool completed = false;
  std::string error;
  TrialResult result;
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

SweepResult run_sweep(const SweepSpec& spec, int threads = 0);

/// Master CSV plus tidy per-figure series (density, c1, noise x velocity,
/// error over time).
void write_sweep_outputs(const SweepSpec& spec, const SweepResult& result,
                         const std::filesystem::path& out_dir);

// --- wrench prediction ----------------------------------------------------

struct WrenchPrediction {
  std::vector<Wrench> predicted;
  std::vector<Wrench> truth;
  Vec3 force_rmse = Vec3::Zero();
  Vec3 torque_rmse = Vec3::Zero();
  double force_rms_truth = 0.0;   // RMS amplitude of the true force series
  double torque_rms_truth = 0.0;
};

WrenchPrediction predict_wrench(const InertialParams& theta_hat, const InertialParams& theta_true,
                                const std::vector<KinematicSample>& states,
                                const GravityConvention& gravity);

void write_prediction_csv(const std::filesystem::path& path, const WrenchPrediction& prediction,
                          const std::vector<KinematicSample>& states);

}  // namespace ipid
