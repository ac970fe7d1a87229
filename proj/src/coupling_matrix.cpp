#include "xcoupler/coupling_matrix.hpp"

#include "xcoupler/error.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace xcoupler {

namespace {

void check_index(int i, int n) {
  if (i < 0 || i >= n) {
    throw DomainError("coupling index " + std::to_string(i) +
                      " out of range for size " + std::to_string(n));
  }
}

}  // namespace

CouplingMatrix::CouplingMatrix(int order)
    : order_(order),
      values_(Eigen::MatrixXd::Zero(order + 2, order + 2)),
      labels_(default_labels(order)) {
  if (order < 1) throw DomainError("coupling matrix order must be >= 1");
}

CouplingMatrix::CouplingMatrix(const Eigen::MatrixXd& values, double sym_tol)
    : order_(static_cast<int>(values.rows()) - 2), values_(values) {
  if (values.rows() != values.cols()) {
    throw DomainError("coupling matrix must be square");
  }
  if (values.rows() < 3) {
    throw DomainError("coupling matrix must be at least 3x3");
  }
  const int n = size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(values_(i, j))) {
        throw DomainError("non-finite coupling at (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
      }
      if (j > i && std::abs(values_(i, j) - values_(j, i)) > sym_tol) {
        std::ostringstream msg;
        msg << "coupling matrix is not symmetric at (" << i << "," << j
            << "): " << values_(i, j) << " vs " << values_(j, i);
        throw DomainError(msg.str());
      }
    }
  }
  if (values_(0, 0) != 0.0 || values_(n - 1, n - 1) != 0.0) {
    throw DomainError("source and load self-couplings must be zero");
  }
  // Exact symmetry even when the input was within tolerance.
  values_ = 0.5 * (values_ + values_.transpose()).eval();
  labels_ = default_labels(order_);
}

void CouplingMatrix::set(int i, int j, double v) {
  check_index(i, size());
  check_index(j, size());
  if (!std::isfinite(v)) throw DomainError("non-finite coupling value");
  if (i == j && (i == source() || i == load()) && v != 0.0) {
    throw DomainError("source and load self-couplings must be zero");
  }
  values_(i, j) = v;
  values_(j, i) = v;
}

Eigen::MatrixXd CouplingMatrix::resonator_block() const {
  return values_.block(1, 1, order_, order_);
}

void CouplingMatrix::set_labels(std::vector<std::string> labels) {
  if (static_cast<int>(labels.size()) != size()) {
    throw DomainError("expected " + std::to_string(size()) + " labels, got " +
                      std::to_string(labels.size()));
  }
  labels_ = std::move(labels);
}

std::vector<std::string> CouplingMatrix::default_labels(int order) {
  std::vector<std::string> out;
  out.reserve(order + 2);
  out.emplace_back("S");
  for (int k = 1; k <= order; ++k) out.push_back(std::to_string(k));
  out.emplace_back("L");
  return out;
}

TopologyMask::TopologyMask(int order, bool allow_source_load)
    : order_(order), bits_((order + 2) * (order + 2), false) {
  if (order < 1) throw DomainError("mask order must be >= 1");
  for (int k = 1; k <= order; ++k) bits_[k * size() + k] = true;
  if (allow_source_load) allow(0, order + 1);
}

TopologyMask TopologyMask::from_edges(
    int order, const std::vector<std::pair<int, int>>& edges) {
  TopologyMask mask(order);
  for (auto [i, j] : edges) mask.allow(i, j);
  return mask;
}

TopologyMask TopologyMask::full(int order, bool allow_source_load) {
  TopologyMask mask(order, allow_source_load);
  const int n = order + 2;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      mask.allow(i, j);
    }
  }
  return mask;
}

TopologyMask TopologyMask::from_matrix(const CouplingMatrix& m, double tol) {
  TopologyMask mask(m.order());
  for (int i = 0; i < m.size(); ++i) {
    for (int j = i + 1; j < m.size(); ++j) {
      if (std::abs(m(i, j)) > tol) mask.allow(i, j);
    }
  }
  return mask;
}

TopologyMask TopologyMask::fig7() {
  return from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 5}, {1, 4}, {3, 4}});
}

bool TopologyMask::allowed(int i, int j) const {
  check_index(i, size());
  check_index(j, size());
  return bits_[i * size() + j];
}

void TopologyMask::allow(int i, int j, bool on) {
  check_index(i, size());
  check_index(j, size());
  if (i == j && (i == 0 || i == size() - 1)) {
    throw DomainError("source/load self-coupling cannot be permitted");
  }
  if (i == j && !on) {
    throw DomainError("resonator self-couplings are always permitted");
  }
  bits_[i * size() + j] = on;
  bits_[j * size() + i] = on;
}

bool TopologyMask::connects_source_to_load() const {
  const int n = size();
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      if (v != u && !seen[v] && bits_[u * n + v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen[n - 1];
}

bool TopologyMask::satisfied_by(const CouplingMatrix& m, double tol) const {
  return m.order() == order_ && violation(m) <= tol;
}

double TopologyMask::violation(const CouplingMatrix& m) const {
  if (m.order() != order_) throw DomainError("mask/matrix order mismatch");
  double worst = 0.0;
  for (int i = 0; i < size(); ++i) {
    for (int j = i; j < size(); ++j) {
      if (!bits_[i * size() + j]) worst = std::max(worst, std::abs(m(i, j)));
    }
  }
  return worst;
}

CouplingMatrix normalize_signs(const CouplingMatrix& m, double tol) {
  const int n = m.size();
  std::vector<double> sign(n, 0.0);
  std::function<void(int)> visit = [&](int u) {
    for (int v = 0; v < n; ++v) {
      if (v == u || sign[v] != 0.0 || std::abs(m(u, v)) <= tol) continue;
      sign[v] = m(u, v) * sign[u] > 0.0 ? 1.0 : -1.0;
      visit(v);
    }
  };
  sign[0] = 1.0;
  visit(0);
  for (auto& s : sign) {
    if (s == 0.0) s = 1.0;
  }
  Eigen::MatrixXd out = m.values();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) *= sign[i] * sign[j];
  }
  CouplingMatrix result(out);
  result.set_labels(m.labels());
  return result;
}

}  // namespace xcoupler
