#include "probetopo/resistance.hpp"

#include <Eigen/Eigenvalues>

#include "probetopo/errors.hpp"

namespace probetopo {

ResistanceMatrix::ResistanceMatrix(std::vector<NodeId> buses, Eigen::MatrixXd r,
                                   Eigen::MatrixXd x)
    : buses_(std::move(buses)), r_(std::move(r)), x_(std::move(x)) {
  for (std::size_t i = 0; i < buses_.size(); ++i) index_.emplace(buses_[i], i);
}

std::size_t ResistanceMatrix::index_of(NodeId bus) const {
  const auto it = index_.find(bus);
  if (it == index_.end()) {
    throw Error(ErrorCode::UnknownNode, "bus " + std::to_string(bus) + " is not in R");
  }
  return it->second;
}

Eigen::MatrixXd ResistanceMatrix::columns(std::span<const NodeId> cols) const {
  Eigen::MatrixXd out(r_.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = r_.col(index_of(cols[j]));
  return out;
}

namespace {

Eigen::MatrixXd pick(const Eigen::MatrixXd& m, const ResistanceMatrix& idx,
                     std::span<const NodeId> rows, std::span<const NodeId> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto ri = idx.index_of(rows[i]);
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(ri, idx.index_of(cols[j]));
  }
  return out;
}

}  // namespace

Eigen::MatrixXd ResistanceMatrix::block(std::span<const NodeId> rows,
                                        std::span<const NodeId> cols) const {
  return pick(r_, *this, rows, cols);
}

Eigen::MatrixXd ResistanceMatrix::reactance_block(std::span<const NodeId> rows,
                                                  std::span<const NodeId> cols) const {
  return pick(x_, *this, rows, cols);
}

ResistanceMatrix resistance_matrix(const FeederGraph& g) {
  std::vector<NodeId> buses(g.nodes().begin() + 1, g.nodes().end());
  const auto n = static_cast<Eigen::Index>(buses.size());
  Eigen::MatrixXd r(n, n);
  Eigen::MatrixXd x(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const NodeId shared = g.common_ancestor(buses[i], buses[j]);
      r(i, j) = r(j, i) = g.resistance_to_root(shared);
      x(i, j) = x(j, i) = g.reactance_to_root(shared);
    }
  }
  return ResistanceMatrix(std::move(buses), std::move(r), std::move(x));
}

double effective_resistance(const FeederGraph& g, NodeId m, NodeId n) {
  const NodeId shared = g.common_ancestor(m, n);
  return g.resistance_to_root(m) + g.resistance_to_root(n) - 2.0 * g.resistance_to_root(shared);
}

double spectral_radius(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace probetopo
