#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "probetopo/feeder.hpp"
#include "probetopo/resistance.hpp"

namespace probetopo {

enum class Protocol {
  /// Each bus probes alone with a constant magnitude over its own window of
  /// consecutive periods, windows following the order of `probing`.
  Sequential,
  /// Arbitrary probing matrix; must have full row rank.
  General,
};

struct ProbingPlan {
  std::vector<NodeId> probing;
  std::vector<double> delta;  // pu active power per probing bus
  std::vector<int> periods;   // T_m per probing bus
  Protocol protocol = Protocol::Sequential;
  Eigen::MatrixXd general;    // P x T, used when protocol == General

  /// Sequential plan with the same number of periods for every bus.
  static ProbingPlan sequential(std::vector<NodeId> probing, std::vector<double> delta,
                                int periods);
  static ProbingPlan sequential(std::vector<NodeId> probing, std::vector<double> delta,
                                std::vector<int> periods);
  static ProbingPlan general_matrix(std::vector<NodeId> probing, Eigen::MatrixXd delta);

  std::size_t total_periods() const;
  /// The P x T probing matrix.
  Eigen::MatrixXd matrix() const;
  /// Throws InvalidPlan when sizes disagree, a magnitude is zero or a
  /// window is empty.
  void validate() const;
};

struct NoiseModel {
  double sigma_p = 0.0;  // non-probed active injection deviation per period
  double sigma_q = 0.0;  // non-probed reactive injection deviation per period
  double sigma_w = 0.0;  // measurement and model error
  std::uint64_t seed = 0;

  bool silent() const noexcept { return sigma_p == 0.0 && sigma_q == 0.0 && sigma_w == 0.0; }
};

/// sigma with sigma^2 = sp^2 rho(R)^2 + sq^2 rho(X)^2 + sw^2, an upper
/// bound on the spectral radius of the noise covariance.
double noise_scale(const NoiseModel& noise, double rho_r, double rho_x);

/// Smallest T_m with delta_m * sqrt(T_m) >= 16 sigma / r_min, at least 1.
int design_periods(double r_min, double sigma, double delta);

/// Sequential plan whose windows satisfy the design rule bus by bus.
/// Throws NonpositiveRmin, or InvalidPlan for negative sigma or delta <= 0.
ProbingPlan design_plan(double r_min, double sigma, std::vector<NodeId> probing,
                        std::vector<double> delta);

struct ProbingRecord {
  Mode mode = Mode::Complete;
  std::vector<NodeId> rows;     // metered buses, one per row of `voltages`
  std::vector<NodeId> probing;  // one per row of `delta`
  Eigen::MatrixXd delta;        // P x T
  Eigen::MatrixXd voltages;     // rows x T voltage differences
  ProbingPlan plan;
  std::uint64_t seed = 0;
};

/// Maps injection perturbations (N x T, rows ordered as
/// ResistanceMatrix::buses) to voltage differences (N x T). The default is
/// the linearized DistFlow model v = R p + X q.
using VoltageOracle =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& dp, const Eigen::MatrixXd& dq)>;

VoltageOracle linearized_distflow(const ResistanceMatrix& model);

/// Applies `plan` to the feeder and returns the metered voltage differences
/// with noise n(t) = R p(t) + X q(t) + w(t) drawn from `noise`. In partial
/// mode only the probing buses are metered. Throws UnknownProbingBus.
ProbingRecord simulate_probing(const FeederGraph& g, const ProbingPlan& plan,
                               const NoiseModel& noise, Mode mode);
ProbingRecord simulate_probing(const FeederGraph& g, const ProbingPlan& plan,
                               const NoiseModel& noise, Mode mode,
                               const VoltageOracle& oracle);
/// Same as above with a precomputed model, for repeated simulation.
ProbingRecord simulate_probing(const ResistanceMatrix& model, const ProbingPlan& plan,
                               const NoiseModel& noise, Mode mode);

/// Estimated R_P (complete) or R_PP (partial): rows are metered buses,
/// columns are probing buses.
struct EstimatedMatrix {
  std::vector<NodeId> rows;
  std::vector<NodeId> cols;
  Eigen::MatrixXd values;

  Eigen::VectorXd column(NodeId bus) const;
};

enum class Estimator {
  /// Scaled sample mean per probing window under the sequential protocol,
  /// least squares otherwise.
  Auto,
  /// Least squares V * pinv(Delta).
  LeastSquares,
};

/// Throws RankDeficientProbing when Delta does not have full row rank
/// (relative tolerance 1e-10).
EstimatedMatrix estimate_R(const ProbingRecord& record, Estimator estimator = Estimator::Auto);

}  // namespace probetopo
