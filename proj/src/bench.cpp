#include "ipid/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include "ipid/io.hpp"

namespace ipid {

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Pmd: return "pmd";
    case EstimatorKind::Ols: return "ols";
    case EstimatorKind::Rtls: return "rtls";
  }
  return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "pmd") return EstimatorKind::Pmd;
  if (name == "ols") return EstimatorKind::Ols;
  if (name == "rtls") return EstimatorKind::Rtls;
  throw std::invalid_argument("unknown estimator: " + name);
}

TrialSpec::TrialSpec()
    : trajectory(TrajectoryConfig::default_config(6)), chain(KinematicChain::default_arm()) {}

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t s = base ^ (0x9E3779B97F4A7C15ull * (salt + 1));
  return splitmix64(s);
}

std::vector<int> trial_windows(const TrialSpec& spec, int available) {
  std::vector<int> windows = spec.checkpoints;
  int cap = spec.observation_cap > 0 ? std::min(spec.observation_cap, available) : available;
  windows.push_back(cap);
  for (int& w : windows) w = std::min(w, available);
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
  windows.erase(std::remove_if(windows.begin(), windows.end(), [](int w) { return w < 1; }),
                windows.end());
  return windows;
}

MeasurementSeries window_of(const MeasurementSeries& full, int count) {
  MeasurementSeries out;
  out.states.assign(full.states.begin(), full.states.begin() + count);
  out.wrenches.assign(full.wrenches.begin(), full.wrenches.begin() + count);
  return out;
}

}  // namespace

TrialResult run_trial(const TrialSpec& spec, bool keep_data) {
  TrialResult result;

  const TestObject object = build_test_object(spec.object, spec.geometry);
  result.truth = object.truth;
  result.extent = ObjectExtent::from_vec(object.shape.extent());

  // Motion.
  std::vector<KinematicSample> states;
  if (spec.stop_and_go) {
    states = make_stop_and_go(spec.chain, spec.trajectory, spec.stop_poses, spec.dwell_samples)
                 .samples;
    result.achieved_angular_speed = 0.0;
    result.achieved_linear_speed = 0.0;
  } else {
    const TrajectoryConfig cfg =
        calibrate_speed_scale(spec.chain, spec.trajectory, spec.target_angular_speed);
    Trajectory traj = generate_trajectory(spec.chain, cfg);
    result.achieved_angular_speed = traj.avg_angular_speed;
    result.achieved_linear_speed = traj.avg_linear_speed;
    states = std::move(traj.samples);
  }

  // One shared measurement stream per (trajectory, noise, seed).
  const NoiseSpec noise = NoiseSpec::preset(spec.noise);
  MeasurementSeries measured =
      simulate_measurements(object.truth, states, noise, spec.gravity, mix_seed(spec.seed, 17));

  std::size_t start = 0;
  if (spec.use_kalman && noise.level != NoiseLevel::None) {
    KalmanConfig kcfg = spec.kalman;
    kcfg.lin_acc_obs_sigma = noise.sigma_lin_acc;
    kcfg.ang_acc_obs_sigma = noise.sigma_ang_acc;
    SmoothedSeries smoothed = kalman_smooth(measured.states, kcfg);
    measured.states = std::move(smoothed.states);
    result.stabilization_index = smoothed.stabilization_index;
    if (smoothed.stabilization_index < measured.size()) start = smoothed.stabilization_index;
  }
  if (start > 0) {
    measured.states.erase(measured.states.begin(),
                          measured.states.begin() + static_cast<std::ptrdiff_t>(start));
    measured.wrenches.erase(measured.wrenches.begin(),
                            measured.wrenches.begin() + static_cast<std::ptrdiff_t>(start));
  }

  const auto windows = trial_windows(spec, static_cast<int>(measured.size()));
  result.observations = windows.back();

  // Conditioning of the full stack actually consumed.
  {
    const MeasurementSeries win = window_of(measured, result.observations);
    if (win.size() >= 2) {
      Eigen::MatrixXd stacked(6 * static_cast<Eigen::Index>(win.size()), 10);
      for (std::size_t k = 0; k < win.size(); ++k)
        stacked.middleRows<6>(6 * static_cast<Eigen::Index>(k)) =
            full_regressor(win.states[k], spec.gravity);
      const ConditionReport cond = condition_number_scaled(stacked);
      result.condition_number = cond.kappa;
      result.condition_infinite = cond.infinite;
    }
  }

  std::optional<SampleResult> points;
  auto need_points = [&]() -> const PointMatrix& {
    if (!points) points = sample_points(object.shape, spec.density, spec.sampling_seed);
    return points->positions;
  };

  for (const EstimatorKind kind : spec.estimators) {
    // RTLS runs once over the largest window and reports at each checkpoint.
    std::vector<EstimateReport> rtls_reports;
    if (kind == EstimatorKind::Rtls) {
      try {
        rtls_reports = rtls_identify(window_of(measured, result.observations), spec.rtls,
                                     spec.gravity);
      } catch (const std::exception& e) {
        TrialRow row;
        row.estimator = to_string(kind);
        row.window = result.observations;
        row.failed = true;
        row.error = e.what();
        result.rows.push_back(std::move(row));
        continue;
      }
    }

    for (const int window : windows) {
      TrialRow row;
      row.estimator = to_string(kind);
      row.window = window;
      try {
        switch (kind) {
          case EstimatorKind::Pmd:
            row.report = pmd_identify(window_of(measured, window), need_points(), spec.pmd,
                                      spec.gravity);
            break;
          case EstimatorKind::Ols:
            row.report = ols_identify(window_of(measured, window), spec.gravity);
            break;
          case EstimatorKind::Rtls: {
            const int idx = window - spec.rtls.min_blocks;
            if (idx < 0 || rtls_reports.empty())
              throw std::runtime_error("rtls has no estimate at this window");
            row.report = rtls_reports[std::min<std::size_t>(static_cast<std::size_t>(idx),
                                                            rtls_reports.size() - 1)];
            break;
          }
        }
        row.errors = error_metrics(row.report.theta_hat, result.truth, result.extent);
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      result.rows.push_back(std::move(row));
    }
  }

  if (points) result.num_points = static_cast<int>(points->positions.rows());
  if (keep_data) result.data = std::move(measured);
  return result;
}

SweepResult run_sweep(const SweepSpec& spec, int threads) {
  if (spec.objects.empty() || spec.densities.empty() || spec.speeds.empty() ||
      spec.noises.empty() || spec.c1_values.empty() || spec.repetitions < 1)
    throw std::invalid_argument("sweep grid is empty");

  SweepResult result;
  std::size_t index = 0;
  for (int rep = 0; rep < spec.repetitions; ++rep)
    for (std::size_t io_ = 0; io_ < spec.objects.size(); ++io_)
      for (std::size_t is = 0; is < spec.speeds.size(); ++is)
        for (std::size_t in_ = 0; in_ < spec.noises.size(); ++in_)
          for (double density : spec.densities)
            for (double c1 : spec.c1_values) {
              SweepCell cell;
              cell.index = index++;
              cell.spec = spec.base;
              cell.spec.object = spec.objects[io_];
              cell.spec.density = density;
              cell.spec.target_angular_speed = spec.speeds[is];
              cell.spec.noise = spec.noises[in_];
              cell.spec.pmd.c1 = c1;
              // Data seed shared across density/c1 so hyperparameter cells
              // compare on identical streams.
              cell.spec.seed = mix_seed(spec.seed_base,
                                        ((static_cast<std::uint64_t>(rep) * 251 + io_) * 251 + is) * 251 + in_);
              result.cells.push_back(std::move(cell));
            }

  const int workers = threads > 0
                          ? threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  auto work = [&result, &next]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.cells.size()) return;
      SweepCell& cell = result.cells[i];
      try {
        cell.result = run_trial(cell.spec);
        cell.completed = true;
      } catch (const std::exception& e) {
        cell.completed = false;
        cell.error = e.what();
      }
    }
  };
  if (workers <= 1 || result.cells.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return result;
}

namespace {

constexpr const char* kTrialsHeader =
    "# ipid trials v1\n"
    "cell,object,density,n_points,target_omega,achieved_omega,achieved_v,noise,c1,seed,"
    "window,estimator,failed,mass_err,com_err,com_err_x,com_err_y,com_err_z,inertia_err,"
    "consistent,min_pseudo_eig,rank,rank_deficient,ambiguity,iterations,wall_time_s,"
    "cond_number,error\n";

void write_trial_rows(std::ofstream& out, const SweepCell& cell) {
  const TrialSpec& s = cell.spec;
  for (const TrialRow& row : cell.result.rows) {
    out << cell.index << ',' << to_string(s.object) << ',' << io::format_double(s.density) << ','
        << cell.result.num_points << ',' << io::format_double(s.target_angular_speed) << ','
        << io::format_double(cell.result.achieved_angular_speed) << ','
        << io::format_double(cell.result.achieved_linear_speed) << ',' << to_string(s.noise)
        << ',' << io::format_double(s.pmd.c1) << ',' << s.seed << ',' << row.window << ','
        << row.estimator << ',' << (row.failed ? 1 : 0) << ',';
    if (row.failed) {
      out << ",,,,,,,,,,,,,";
    } else {
      out << io::format_double(row.errors.mass_err) << ','
          << io::format_double(row.errors.com_err) << ','
          << io::format_double(row.errors.com_err_axes.x()) << ','
          << io::format_double(row.errors.com_err_axes.y()) << ','
          << io::format_double(row.errors.com_err_axes.z()) << ','
          << io::format_double(row.errors.inertia_err) << ','
          << (row.report.physically_consistent ? 1 : 0) << ','
          << io::format_double(row.report.min_pseudo_eigenvalue) << ',' << row.report.rank << ','
          << (row.report.rank_deficient ? 1 : 0) << ',' << (row.report.ambiguity ? 1 : 0) << ','
          << row.report.solver_iterations << ',' << io::format_double(row.report.wall_time_s)
          << ',';
    }
    out << io::format_double(cell.result.condition_number) << ',' << row.error << "\n";
  }
}

struct Accumulator {
  double mass = 0.0, com = 0.0, inertia = 0.0, wall = 0.0;
  int count = 0;
  void add(const TrialRow& row) {
    mass += row.errors.mass_err;
    com += row.errors.com_err;
    inertia += row.errors.inertia_err;
    wall += row.report.wall_time_s;
    ++count;
  }
};

void write_series(const std::filesystem::path& path, const std::string& key_header,
                  const std::map<std::string, Accumulator>& groups) {
  std::ofstream out(path);
  out << "# ipid series v1\n";
  out << key_header << ",count,mass_err,com_err,inertia_err,wall_time_s\n";
  for (const auto& [key, acc] : groups) {
    const double n = std::max(1, acc.count);
    out << key << ',' << acc.count << ',' << io::format_double(acc.mass / n) << ','
        << io::format_double(acc.com / n) << ',' << io::format_double(acc.inertia / n) << ','
        << io::format_double(acc.wall / n) << "\n";
  }
}

}  // namespace

void write_sweep_outputs(const SweepSpec& spec, const SweepResult& result,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  std::ofstream master(out_dir / "trials.csv");
  if (!master) throw std::runtime_error("cannot write master csv");
  master << kTrialsHeader;
  for (const SweepCell& cell : result.cells)
    if (cell.completed) write_trial_rows(master, cell);

  std::map<std::string, Accumulator> by_density, by_c1, by_noise_speed, by_time;
  for (const SweepCell& cell : result.cells) {
    if (!cell.completed) continue;
    const int final_window = cell.result.observations;
    for (const TrialRow& row : cell.result.rows) {
      if (row.failed) continue;
      std::ostringstream speed;
      speed << io::format_double(cell.spec.target_angular_speed);
      if (row.window == final_window) {
        by_density[io::format_double(cell.spec.density) + "," + row.estimator].add(row);
        if (row.estimator == "pmd")
          by_c1[io::format_double(cell.spec.pmd.c1) + "," + speed.str()].add(row);
        by_noise_speed[std::string(to_string(cell.spec.noise)) + "," + speed.str() + "," +
                       row.estimator]
            .add(row);
      }
      by_time[std::to_string(row.window) + "," + row.estimator].add(row);
    }
  }
  write_series(out_dir / "density_series.csv", "density,estimator", by_density);
  write_series(out_dir / "c1_series.csv", "c1,target_omega", by_c1);
  write_series(out_dir / "noise_velocity_series.csv", "noise,target_omega,estimator",
               by_noise_speed);
  write_series(out_dir / "time_series.csv", "window,estimator", by_time);

  // Machine-readable summary of the sweep configuration and outcome.
  nlohmann::json summary;
  summary["cells"] = result.cells.size();
  std::size_t completed = 0, failed_rows = 0, rows = 0;
  for (const SweepCell& cell : result.cells) {
    if (cell.completed) ++completed;
    for (const TrialRow& row : cell.result.rows) {
      ++rows;
      if (row.failed) ++failed_rows;
    }
  }
  summary["completed_cells"] = completed;
  summary["rows"] = rows;
  summary["failed_rows"] = failed_rows;
  summary["seed_base"] = spec.seed_base;
  summary["repetitions"] = spec.repetitions;
  io::save_json(out_dir / "summary.json", summary);
}

WrenchPrediction predict_wrench(const InertialParams& theta_hat, const InertialParams& theta_true,
                                const std::vector<KinematicSample>& states,
                                const GravityConvention& gravity) {
  if (states.empty()) throw std::invalid_argument("no states to predict over");
  WrenchPrediction pred;
  pred.predicted.reserve(states.size());
  pred.truth.reserve(states.size());

  Vec3 f_sq = Vec3::Zero(), tau_sq = Vec3::Zero();
  double f_rms = 0.0, tau_rms = 0.0;
  for (const auto& s : states) {
    const Wrench w_hat = newton_euler_wrench(theta_hat, s, gravity);
    const Wrench w_true = newton_euler_wrench(theta_true, s, gravity);
    pred.predicted.push_back(w_hat);
    pred.truth.push_back(w_true);
    f_sq += (w_hat.force - w_true.force).cwiseAbs2();
    tau_sq += (w_hat.torque - w_true.torque).cwiseAbs2();
    f_rms += w_true.force.squaredNorm();
    tau_rms += w_true.torque.squaredNorm();
  }
  const double n = static_cast<double>(states.size());
  pred.force_rmse = (f_sq / n).cwiseSqrt();
  pred.torque_rmse = (tau_sq / n).cwiseSqrt();
  pred.force_rms_truth = std::sqrt(f_rms / n);
  pred.torque_rms_truth = std::sqrt(tau_rms / n);
  return pred;
}

void write_prediction_csv(const std::filesystem::path& path, const WrenchPrediction& prediction,
                          const std::vector<KinematicSample>& states) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "# ipid prediction v1\n";
  out << "t,fx_hat,fy_hat,fz_hat,taux_hat,tauy_hat,tauz_hat,"
         "fx_true,fy_true,fz_true,taux_true,tauy_true,tauz_true\n";
  for (std::size_t k = 0; k < prediction.predicted.size(); ++k) {
    out << io::format_double(states[k].t);
    for (int i = 0; i < 3; ++i) out << ',' << io::format_double(prediction.predicted[k].force(i));
    for (int i = 0; i < 3; ++i) out << ',' << io::format_double(prediction.predicted[k].torque(i));
    for (int i = 0; i < 3; ++i) out << ',' << io::format_double(prediction.truth[k].force(i));
    for (int i = 0; i < 3; ++i) out << ',' << io::format_double(prediction.truth[k].torque(i));
    out << "\n";
  }
}

}  // namespace ipid
