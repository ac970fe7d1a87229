#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace xcoupler {

// Symmetric (N+2)x(N+2) real coupling matrix in the normalized lowpass
// domain. Row/column 0 is the source, 1..N the resonators and N+1 the load.
class CouplingMatrix {
 public:
  // Zero matrix of the given order with default labels S,1..N,L.
  explicit CouplingMatrix(int order);
  // Throws DomainError unless values is square, at least 3x3, finite,
  // symmetric within sym_tol and zero on the S/S and L/L diagonal.
  CouplingMatrix(const Eigen::MatrixXd& values, double sym_tol = 0.0);

  int order() const noexcept { return order_; }
  int size() const noexcept { return order_ + 2; }
  int source() const noexcept { return 0; }
  int load() const noexcept { return order_ + 1; }

  double operator()(int i, int j) const { return values_(i, j); }
  // Sets both (i,j) and (j,i).
  void set(int i, int j, double v);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  // Resonator-only block (rows/cols 1..N).
  Eigen::MatrixXd resonator_block() const;

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  void set_labels(std::vector<std::string> labels);

  static std::vector<std::string> default_labels(int order);

  friend bool operator==(const CouplingMatrix& a, const CouplingMatrix& b) {
    return a.order_ == b.order_ && a.values_ == b.values_;
  }

 private:
  int order_;
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
};

// Symmetric boolean pattern of permitted couplings over [S,1..N,L].
// Resonator diagonals are always permitted; S-L only when enabled.
class TopologyMask {
 public:
  explicit TopologyMask(int order, bool allow_source_load = false);

  // Mask permitting exactly the listed off-diagonal couplings (plus the
  // resonator diagonals). An (S,L) pair enables the direct coupling.
  static TopologyMask from_edges(int order,
                                 const std::vector<std::pair<int, int>>& edges);
  // Every entry permitted except S/S and L/L; S-L only when requested.
  static TopologyMask full(int order, bool allow_source_load = false);
  // Nonzero off-diagonal entries of m.
  static TopologyMask from_matrix(const CouplingMatrix& m, double tol = 0.0);
  // Order-4 box of the thick-bar filters: S-1, 1-2, 2-3, 3-L, 1-4, 3-4.
  static TopologyMask fig7();

  int order() const noexcept { return order_; }
  int size() const noexcept { return order_ + 2; }
  bool allowed(int i, int j) const;
  void allow(int i, int j, bool on = true);

  // True when a chain of permitted couplings joins S to L.
  bool connects_source_to_load() const;
  // True when every forbidden entry of m has |value| <= tol.
  bool satisfied_by(const CouplingMatrix& m, double tol = 0.0) const;
  // Largest |value| of m at a forbidden position.
  double violation(const CouplingMatrix& m) const;

 private:
  int order_;
  std::vector<bool> bits_;
};

// Diagonal +-1 similarity that makes every edge of a depth-first spanning tree
// rooted at S (neighbours visited in index order) positive. Response
// magnitudes are unchanged; for the order-4 box this fixes M_S1, M_12, M_23,
// M_34 and M_3L positive so the sign asymmetry lands on M_14.
CouplingMatrix normalize_signs(const CouplingMatrix& m, double tol = 1e-12);

}  // namespace xcoupler
