#include "probetopo/probing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>

#include "probetopo/errors.hpp"

namespace probetopo {

ProbingPlan ProbingPlan::sequential(std::vector<NodeId> probing, std::vector<double> delta,
                                    int periods) {
  std::vector<int> t(probing.size(), periods);
  return sequential(std::move(probing), std::move(delta), std::move(t));
}

ProbingPlan ProbingPlan::sequential(std::vector<NodeId> probing, std::vector<double> delta,
                                    std::vector<int> periods) {
  ProbingPlan plan;
  plan.probing = std::move(probing);
  plan.delta = std::move(delta);
  plan.periods = std::move(periods);
  plan.protocol = Protocol::Sequential;
  plan.validate();
  return plan;
}

ProbingPlan ProbingPlan::general_matrix(std::vector<NodeId> probing, Eigen::MatrixXd delta) {
  ProbingPlan plan;
  plan.probing = std::move(probing);
  plan.protocol = Protocol::General;
  plan.general = std::move(delta);
  plan.validate();
  return plan;
}

std::size_t ProbingPlan::total_periods() const {
  if (protocol == Protocol::General) return static_cast<std::size_t>(general.cols());
  std::size_t total = 0;
  for (int t : periods) total += static_cast<std::size_t>(t);
  return total;
}

Eigen::MatrixXd ProbingPlan::matrix() const {
  if (protocol == Protocol::General) return general;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(probing.size()),
                                            static_cast<Eigen::Index>(total_periods()));
  Eigen::Index col = 0;
  for (std::size_t m = 0; m < probing.size(); ++m) {
    d.row(static_cast<Eigen::Index>(m)).segment(col, periods[m]).setConstant(delta[m]);
    col += periods[m];
  }
  return d;
}

void ProbingPlan::validate() const {
  if (probing.empty()) throw Error(ErrorCode::InvalidPlan, "probing set is empty");
  auto sorted = probing;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::InvalidPlan, "probing buses must be distinct");
  }
  if (protocol == Protocol::General) {
    if (general.rows() != static_cast<Eigen::Index>(probing.size())) {
      throw Error(ErrorCode::InvalidPlan, "probing matrix needs one row per probing bus");
    }
    if (general.cols() < general.rows()) {
      throw Error(ErrorCode::RankDeficientProbing, "fewer probing periods than probing buses");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(general.transpose());
    qr.setThreshold(1e-10);
    if (qr.rank() < general.rows()) {
      throw Error(ErrorCode::RankDeficientProbing, "probing matrix lacks full row rank");
    }
    return;
  }
  if (delta.size() != probing.size() || periods.size() != probing.size()) {
    throw Error(ErrorCode::InvalidPlan, "delta and periods need one entry per probing bus");
  }
  for (std::size_t m = 0; m < probing.size(); ++m) {
    if (delta[m] == 0.0 || !std::isfinite(delta[m])) {
      throw Error(ErrorCode::InvalidPlan,
                  "probing magnitude of bus " + std::to_string(probing[m]) + " must be nonzero");
    }
    if (periods[m] < 1) {
      throw Error(ErrorCode::InvalidPlan,
                  "bus " + std::to_string(probing[m]) + " needs at least one probing period");
    }
  }
}

double noise_scale(const NoiseModel& noise, double rho_r, double rho_x) {
  return std::sqrt(noise.sigma_p * noise.sigma_p * rho_r * rho_r +
                   noise.sigma_q * noise.sigma_q * rho_x * rho_x +
                   noise.sigma_w * noise.sigma_w);
}

int design_periods(double r_min, double sigma, double delta) {
  if (!(r_min > 0.0)) throw Error(ErrorCode::NonpositiveRmin, "r_min must be positive");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidPlan, "sigma must be nonnegative");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidPlan, "delta must be positive");
  const double bound = 16.0 * sigma / r_min;
  const double ratio = bound / delta;
  const double exact = ratio * ratio;
  if (exact > static_cast<double>(std::numeric_limits<int>::max() / 2)) {
    throw Error(ErrorCode::InvalidPlan, "design rule needs an impractical number of periods");
  }
  int t = std::max(1, static_cast<int>(std::ceil(exact)));
  while (t > 1 && delta * std::sqrt(static_cast<double>(t - 1)) >= bound) --t;
  while (delta * std::sqrt(static_cast<double>(t)) < bound) ++t;
  return t;
}

ProbingPlan design_plan(double r_min, double sigma, std::vector<NodeId> probing,
                        std::vector<double> delta) {
  if (!(r_min > 0.0)) throw Error(ErrorCode::NonpositiveRmin, "r_min must be positive");
  if (delta.size() != probing.size()) {
    throw Error(ErrorCode::InvalidPlan, "delta needs one entry per probing bus");
  }
  std::vector<int> periods;
  for (double d : delta) periods.push_back(design_periods(r_min, sigma, d));
  return ProbingPlan::sequential(std::move(probing), std::move(delta), std::move(periods));
}

VoltageOracle linearized_distflow(const ResistanceMatrix& model) {
  return [r = model.r(), x = model.x()](const Eigen::MatrixXd& dp, const Eigen::MatrixXd& dq) {
    return Eigen::MatrixXd(r * dp + x * dq);
  };
}

namespace {

std::vector<Eigen::Index> probing_rows(const ResistanceMatrix& model, const ProbingPlan& plan) {
  std::vector<Eigen::Index> rows;
  for (NodeId bus : plan.probing) {
    if (bus == kSubstation) {
      throw Error(ErrorCode::UnknownProbingBus, "the substation cannot be probed");
    }
    try {
      rows.push_back(static_cast<Eigen::Index>(model.index_of(bus)));
    } catch (const Error&) {
      throw Error(ErrorCode::UnknownProbingBus,
                  "probing bus " + std::to_string(bus) + " is not in the feeder");
    }
  }
  return rows;
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                         double sigma) {
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

ProbingRecord finish(const ResistanceMatrix& model, const ProbingPlan& plan,
                     const NoiseModel& noise, Mode mode, const std::vector<Eigen::Index>& prow,
                     Eigen::MatrixXd delta, Eigen::MatrixXd clean) {
  const Eigen::Index n = clean.rows();
  const Eigen::Index t = clean.cols();
  if (!noise.silent()) {
    std::mt19937_64 rng(noise.seed);
    if (noise.sigma_w > 0.0) clean += gaussian(rng, n, t, noise.sigma_w);
    if (noise.sigma_p > 0.0) clean += model.r() * gaussian(rng, n, t, noise.sigma_p);
    if (noise.sigma_q > 0.0) clean += model.x() * gaussian(rng, n, t, noise.sigma_q);
  }

  ProbingRecord record;
  record.mode = mode;
  record.probing = plan.probing;
  record.delta = std::move(delta);
  record.plan = plan;
  record.seed = noise.seed;
  if (mode == Mode::Complete) {
    record.rows.assign(model.buses().begin(), model.buses().end());
    record.voltages = std::move(clean);
  } else {
    record.rows = plan.probing;
    record.voltages.resize(static_cast<Eigen::Index>(prow.size()), t);
    for (std::size_t i = 0; i < prow.size(); ++i) {
      record.voltages.row(static_cast<Eigen::Index>(i)) = clean.row(prow[i]);
    }
  }
  return record;
}

}  // namespace

ProbingRecord simulate_probing(const ResistanceMatrix& model, const ProbingPlan& plan,
                               const NoiseModel& noise, Mode mode) {
  plan.validate();
  const auto prow = probing_rows(model, plan);
  Eigen::MatrixXd delta = plan.matrix();
  Eigen::MatrixXd rp(model.r().rows(), static_cast<Eigen::Index>(prow.size()));
  for (std::size_t j = 0; j < prow.size(); ++j) rp.col(j) = model.r().col(prow[j]);
  Eigen::MatrixXd clean = rp * delta;
  return finish(model, plan, noise, mode, prow, std::move(delta), std::move(clean));
}

ProbingRecord simulate_probing(const FeederGraph& g, const ProbingPlan& plan,
                               const NoiseModel& noise, Mode mode) {
  return simulate_probing(resistance_matrix(g), plan, noise, mode);
}

ProbingRecord simulate_probing(const FeederGraph& g, const ProbingPlan& plan,
                               const NoiseModel& noise, Mode mode,
                               const VoltageOracle& oracle) {
  plan.validate();
  const ResistanceMatrix model = resistance_matrix(g);
  const auto prow = probing_rows(model, plan);
  Eigen::MatrixXd delta = plan.matrix();
  Eigen::MatrixXd dp = Eigen::MatrixXd::Zero(model.r().rows(), delta.cols());
  for (std::size_t j = 0; j < prow.size(); ++j) dp.row(prow[j]) = delta.row(j);
  const Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(dp.rows(), dp.cols());
  Eigen::MatrixXd clean = oracle(dp, dq);
  return finish(model, plan, noise, mode, prow, std::move(delta), std::move(clean));
}

Eigen::VectorXd EstimatedMatrix::column(NodeId bus) const {
  const auto it = std::find(cols.begin(), cols.end(), bus);
  if (it == cols.end()) {
    throw Error(ErrorCode::UnknownNode, "bus " + std::to_string(bus) + " was not probed");
  }
  return values.col(it - cols.begin());
}

EstimatedMatrix estimate_R(const ProbingRecord& record, Estimator estimator) {
  if (record.voltages.cols() != record.delta.cols()) {
    throw Error(ErrorCode::InvalidPlan, "voltage and probing matrices disagree on periods");
  }
  if (record.delta.rows() != static_cast<Eigen::Index>(record.probing.size())) {
    throw Error(ErrorCode::InvalidPlan, "probing matrix needs one row per probing bus");
  }
  EstimatedMatrix est;
  est.rows = record.rows;
  est.cols = record.probing;

  const ProbingPlan& plan = record.plan;
  const bool sequential = plan.protocol == Protocol::Sequential &&
                          plan.probing == record.probing &&
                          plan.total_periods() == static_cast<std::size_t>(record.delta.cols());
  if (estimator == Estimator::Auto && sequential) {
    plan.validate();
    est.values.resize(record.voltages.rows(), static_cast<Eigen::Index>(plan.probing.size()));
    Eigen::Index col = 0;
    for (std::size_t m = 0; m < plan.probing.size(); ++m) {
      const int t = plan.periods[m];
      est.values.col(static_cast<Eigen::Index>(m)) =
          record.voltages.middleCols(col, t).rowwise().sum() / (plan.delta[m] * t);
      col += t;
    }
    return est;
  }

  // Least squares: solve Delta^T Theta^T = V^T with a rank-revealing QR.
  const Eigen::MatrixXd dt = record.delta.transpose();
  if (dt.rows() < dt.cols()) {
    throw Error(ErrorCode::RankDeficientProbing, "fewer probing periods than probing buses");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dt);
  qr.setThreshold(1e-10);
  if (qr.rank() < dt.cols()) {
    throw Error(ErrorCode::RankDeficientProbing,
                "probing matrix has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(dt.cols()));
  }
  est.values = qr.solve(Eigen::MatrixXd(record.voltages.transpose())).transpose();
  return est;
}

}  // namespace probetopo
