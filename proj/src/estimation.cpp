#include "ipid/estimation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <numeric>

namespace ipid {

double weight(double dynamism_value, const PMDConfig& config) {
  if (config.c1 <= 0.0) throw std::invalid_argument("c1 must be positive");
  return std::tanh(config.weight_sharpness * dynamism_value / config.c1);
}

double nnls_kkt_residual(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                         const Eigen::VectorXd& x) {
  const Eigen::VectorXd grad = gram * x - rhs;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    worst = std::max(worst, -x(i));  // feasibility
    if (x(i) > 0.0)
      worst = std::max(worst, std::abs(grad(i)));
    else
      worst = std::max(worst, -grad(i));
  }
  return worst;
}

namespace {

// Solve gram(P,P) z = rhs(P). LDLT first; rank-deficient subproblems
// (possible when lambda = 0) fall back to a minimum-norm solve.
Eigen::VectorXd solve_subproblem(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                 const std::vector<Eigen::Index>& passive) {
  const auto np = static_cast<Eigen::Index>(passive.size());
  Eigen::MatrixXd G(np, np);
  Eigen::VectorXd c(np);
  for (Eigen::Index a = 0; a < np; ++a) {
    c(a) = rhs(passive[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < np; ++b)
      G(a, b) = gram(passive[static_cast<std::size_t>(a)], passive[static_cast<std::size_t>(b)]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  if (ldlt.info() == Eigen::Success) {
    const Eigen::VectorXd z = ldlt.solve(c);
    if ((G * z - c).norm() <= 1e-10 * std::max(1.0, c.norm())) return z;
  }
  return G.completeOrthogonalDecomposition().solve(c);
}

}  // namespace

NnlsResult nnls_solve_normal(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                             const NnlsOptions& options) {
  const Eigen::Index n = gram.cols();
  if (n < 1) throw std::invalid_argument("no columns to solve for");
  if (gram.rows() != n || rhs.size() != n)
    throw std::invalid_argument("normal equation dimensions do not match");

  const int cap = options.max_outer > 0 ? options.max_outer : static_cast<int>(10 * n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> passive;
  int outer = 0;

  while (true) {
    const Eigen::VectorXd grad = rhs - gram * x;  // descent direction per coordinate
    Eigen::Index best = -1;
    double best_grad = options.kkt_tol;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!in_passive[static_cast<std::size_t>(i)] && grad(i) > best_grad) {
        best_grad = grad(i);
        best = i;
      }
    if (best < 0) break;  // KKT satisfied

    if (++outer > cap) throw NnlsIterationLimit(x, outer - 1);
    in_passive[static_cast<std::size_t>(best)] = true;
    passive.push_back(best);

    for (int inner = 0; inner <= n; ++inner) {
      const Eigen::VectorXd z = solve_subproblem(gram, rhs, passive);
      bool feasible = true;
      double alpha = 1.0;
      for (std::size_t a = 0; a < passive.size(); ++a)
        if (z(static_cast<Eigen::Index>(a)) <= 0.0) {
          feasible = false;
          const double xi = x(passive[a]);
          const double zi = z(static_cast<Eigen::Index>(a));
          alpha = std::min(alpha, xi / (xi - zi));
        }
      if (feasible) {
        for (std::size_t a = 0; a < passive.size(); ++a) x(passive[a]) = z(static_cast<Eigen::Index>(a));
        break;
      }
      // Step to the first bound, drop coordinates that hit zero.
      for (std::size_t a = 0; a < passive.size(); ++a) {
        const Eigen::Index idx = passive[a];
        x(idx) += alpha * (z(static_cast<Eigen::Index>(a)) - x(idx));
      }
      std::vector<Eigen::Index> still;
      for (Eigen::Index idx : passive) {
        if (x(idx) <= 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
          x(idx) = 0.0;
          in_passive[static_cast<std::size_t>(idx)] = false;
        } else {
          still.push_back(idx);
        }
      }
      passive = std::move(still);
      if (passive.empty()) break;
    }
  }

  NnlsResult result;
  result.x = std::move(x);
  result.iterations = outer;
  result.kkt_residual = nnls_kkt_residual(gram, rhs, result.x);
  return result;
}

NnlsResult nnls_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                      double lambda, const NnlsOptions& options) {
  if (design.cols() < 1) throw std::invalid_argument("design matrix has no columns");
  if (design.rows() != target.size())
    throw std::invalid_argument("design/target row mismatch");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().array() += lambda;
  return nnls_solve_normal(gram, design.transpose() * target, options);
}

void stamp_consistency(EstimateReport& report) {
  report.min_pseudo_eigenvalue = pseudo_inertia_min_eigenvalue(report.theta_hat);
  report.physically_consistent = report.min_pseudo_eigenvalue >= -1e-8;
}

EstimateReport pmd_identify(const MeasurementSeries& batch, const PointMatrix& points_body,
                            const PMDConfig& config, const GravityConvention& gravity) {
  const Eigen::Index n = points_body.rows();
  if (n < 1) throw std::invalid_argument("pmd needs at least one point");
  if (batch.size() < 1) throw std::invalid_argument("batch is empty");
  if (batch.wrenches.size() != batch.states.size())
    throw std::invalid_argument("batch state/wrench mismatch");

  const auto t0 = std::chrono::steady_clock::now();

  EstimateReport report;
  report.estimator = "pmd";
  report.weight_trace.reserve(batch.size());

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const KinematicSample& s = batch.states[k];
    const double w = weight(dynamism(s, config.normalizers), config);
    report.weight_trace.push_back(w);
    const double wr = (1.0 - w) * (1.0 - w);
    const double wf = w * w;

    const Eigen::MatrixXd K_r = reduced_regressor(points_body, s.rotation, s.translation, gravity);
    const Vec6 b = batch.wrenches[k].to_vector();
    gram.noalias() += wr * K_r.transpose() * K_r;
    rhs.noalias() += wr * K_r.transpose() * b;
    if (wf > 0.0) {
      const Eigen::MatrixXd K_f = point_full_regressor(points_body, s, gravity);
      gram.noalias() += wf * K_f.transpose() * K_f;
      rhs.noalias() += wf * K_f.transpose() * b;
    }
  }
  gram.diagonal().array() += config.lambda;

  const NnlsResult sol = nnls_solve_normal(gram, rhs);
  report.solver_iterations = sol.iterations;
  report.mass_vector = sol.x;

  if (sol.x.sum() <= 0.0)
    throw std::runtime_error("pmd produced a degenerate all-zero mass vector");

  PointMassModel model;
  model.positions = points_body;
  model.masses = sol.x;
  report.theta_hat = aggregate(model);
  stamp_consistency(report);

  // Residual split at the solution, for reporting.
  double res_r = 0.0, res_f = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const KinematicSample& s = batch.states[k];
    const double w = report.weight_trace[k];
    const Vec6 b = batch.wrenches[k].to_vector();
    const Eigen::MatrixXd K_r = reduced_regressor(points_body, s.rotation, s.translation, gravity);
    res_r += std::pow(1.0 - w, 2) * (K_r * sol.x - b).squaredNorm();
    if (w > 0.0) {
      const Eigen::MatrixXd K_f = point_full_regressor(points_body, s, gravity);
      res_f += w * w * (K_f * sol.x - b).squaredNorm();
    }
  }
  report.residual_reduced = std::sqrt(res_r);
  report.residual_full = std::sqrt(res_f);

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

EstimateReport ols_identify(const MeasurementSeries& batch, const GravityConvention& gravity) {
  if (batch.size() < 2) throw std::invalid_argument("ols needs at least two timesteps");
  if (batch.wrenches.size() != batch.states.size())
    throw std::invalid_argument("batch state/wrench mismatch");

  const auto t0 = std::chrono::steady_clock::now();

  const auto m = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd A(6 * m, 10);
  Eigen::VectorXd b(6 * m);
  for (Eigen::Index k = 0; k < m; ++k) {
    A.middleRows<6>(6 * k) = full_regressor(batch.states[static_cast<std::size_t>(k)], gravity);
    b.segment<6>(6 * k) = batch.wrenches[static_cast<std::size_t>(k)].to_vector();
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  cod.setThreshold(1e-10);
  const Eigen::VectorXd theta = cod.solve(b);

  EstimateReport report;
  report.estimator = "ols";
  report.theta_hat = InertialParams::from_vector(theta);
  report.rank = static_cast<int>(cod.rank());
  report.rank_deficient = report.rank < 10;
  report.residual_full = (A * theta - b).norm();
  stamp_consistency(report);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void RtlsCore::push(const Eigen::Matrix<double, 6, 11>& block) {
  moment_ = config_.forgetting * moment_ + block.transpose() * block;
  ++blocks_;
}

Vec10 RtlsCore::estimate(bool& ambiguous) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 11, 11>> es(moment_);
  const Eigen::VectorXd evals = es.eigenvalues();  // ascending
  const double sv0 = std::sqrt(std::max(evals(0), 0.0));
  const double sv1 = std::sqrt(std::max(evals(1), 0.0));
  const double sv_max = std::sqrt(std::max(evals(10), 0.0));

  const Eigen::VectorXd v = es.eigenvectors().col(0);
  const bool tie = (sv1 - sv0) <= config_.ambiguity_tol * std::max(sv_max, 1.0);
  const bool degenerate = std::abs(v(10)) < 1e-12;
  ambiguous = tie || degenerate;
  if (!ambiguous) {
    previous_ = -v.head<10>() / v(10);
    have_previous_ = true;
  }
  return previous_;
}

std::vector<EstimateReport> rtls_identify(const MeasurementSeries& batch,
                                          const RtlsConfig& config,
                                          const GravityConvention& gravity) {
  if (batch.size() < static_cast<std::size_t>(config.min_blocks))
    throw std::invalid_argument("rtls needs at least min_blocks timesteps");

  std::vector<EstimateReport> reports;
  reports.reserve(batch.size());

  RtlsCore core(config);
  bool ever_ambiguous = false;

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < batch.size(); ++k) {
    Eigen::Matrix<double, 6, 11> block;
    block.leftCols<10>() = full_regressor(batch.states[k], gravity);
    block.rightCols<1>() = batch.wrenches[k].to_vector();
    core.push(block);
    if (!core.ready()) continue;

    EstimateReport report;
    report.estimator = "rtls";
    bool ambiguous = false;
    report.theta_hat = InertialParams::from_vector(core.estimate(ambiguous));
    ever_ambiguous = ever_ambiguous || ambiguous;
    report.ambiguity = ever_ambiguous;
    stamp_consistency(report);
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace ipid
