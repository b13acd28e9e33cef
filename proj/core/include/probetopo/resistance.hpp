#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "probetopo/feeder.hpp"

namespace probetopo {

/// The LDF sensitivity matrices R and X over the non-root buses, ordered by
/// ascending node ID. Entry (m, n) is the resistance (reactance) shared by
/// the substation-to-m and substation-to-n paths.
class ResistanceMatrix {
 public:
  ResistanceMatrix() = default;
  ResistanceMatrix(std::vector<NodeId> buses, Eigen::MatrixXd r, Eigen::MatrixXd x);

  std::span<const NodeId> buses() const noexcept { return buses_; }
  const Eigen::MatrixXd& r() const noexcept { return r_; }
  const Eigen::MatrixXd& x() const noexcept { return x_; }

  std::size_t index_of(NodeId bus) const;
  double at(NodeId m, NodeId n) const { return r_(index_of(m), index_of(n)); }

  /// Columns of R indexed by `cols` (R_P), all rows.
  Eigen::MatrixXd columns(std::span<const NodeId> cols) const;
  /// Rows `rows` and columns `cols` of R (R_PP when both are P).
  Eigen::MatrixXd block(std::span<const NodeId> rows, std::span<const NodeId> cols) const;
  Eigen::MatrixXd reactance_block(std::span<const NodeId> rows,
                                  std::span<const NodeId> cols) const;

 private:
  std::vector<NodeId> buses_;
  std::unordered_map<NodeId, std::size_t> index_;
  Eigen::MatrixXd r_;
  Eigen::MatrixXd x_;
};

ResistanceMatrix resistance_matrix(const FeederGraph& g);

/// Two-point resistance between m and n; on a tree this is the path sum.
double effective_resistance(const FeederGraph& g, NodeId m, NodeId n);

/// Largest eigenvalue of a symmetric matrix.
double spectral_radius(const Eigen::MatrixXd& symmetric);

}  // namespace probetopo
