/// @file  kernels.hpp
/// @brief Dense symmetric kernel matrices, conic combination, and projection
///        onto the PSD cone.

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rckl {

/// A dense symmetric n-by-n similarity matrix. `psd_certified` marks matrices
/// whose minimum eigenvalue is known to be >= -1e-8 (projection output,
/// Gram-matrix constructions, conic combinations of certified members).
class KernelMatrix {
 public:
  KernelMatrix() = default;

  /// Requires a square matrix with finite entries, symmetric to within
  /// 1e-12 entrywise.
  explicit KernelMatrix(Eigen::MatrixXd entries, bool psd_certified = false);

  int n() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  bool psd_certified() const { return psd_certified_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  double trace() const { return entries_.trace(); }

 private:
  Eigen::MatrixXd entries_;
  bool psd_certified_ = false;
};

/// A fixed list of auxiliary kernels over a shared object set together with a
/// nonnegative weight vector. Banks fed to the learning pipeline are
/// unit-trace normalized; `unit_trace()` checks that property.
class AuxKernelBank {
 public:
  AuxKernelBank() = default;
  AuxKernelBank(std::vector<KernelMatrix> kernels, Eigen::VectorXd weights);

  int size() const { return static_cast<int>(kernels_.size()); }
  bool empty() const { return kernels_.empty(); }
  int n() const { return kernels_.empty() ? 0 : kernels_.front().n(); }

  const std::vector<KernelMatrix>& kernels() const { return kernels_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  /// Replaces the weight vector; must match the bank size and be >= 0.
  void set_weights(Eigen::VectorXd weights);

  bool unit_trace(double tol = 1e-10) const;

 private:
  std::vector<KernelMatrix> kernels_;
  Eigen::VectorXd weights_;
};

/// Squared RKHS distance K_aa + K_bb - 2 K_ab. Requires a != b.
double kernel_distance(const KernelMatrix& kernel, int a, int b);

/// Weighted sum of the bank's kernels under its weights.
KernelMatrix conic_combine(const AuxKernelBank& bank);

/// k0 plus the bank's weighted sum; the learned combination.
KernelMatrix compose_ak(const KernelMatrix& k0, const AuxKernelBank& bank);

/// Frobenius-nearest PSD matrix: eigendecompose, zero all eigenvalues below
/// 1e-12, reassemble. The input is symmetrized first. Idempotent.
KernelMatrix project_psd(const Eigen::MatrixXd& symmetric);

/// Gram matrix F F^T of row-major feature vectors.
KernelMatrix linear_kernel(const Eigen::MatrixXd& features);

/// K_ij = exp(-||f_i - f_j||^2 / (2 sigma^2)). Requires sigma > 0.
KernelMatrix gaussian_kernel(const Eigen::MatrixXd& features, double sigma);

/// K / trace(K). Requires trace(K) > 1e-14.
KernelMatrix unit_trace_normalize(const KernelMatrix& kernel);

/// Number of eigenvalues above tol times the largest eigenvalue.
int numerical_rank(const KernelMatrix& kernel, double tol);

}  // namespace rckl
