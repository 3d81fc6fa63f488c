#include "rckl/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rckl/errors.hpp"

namespace rckl {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenFloor = 1e-12;

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  return solver;
}

}  // namespace

KernelMatrix::KernelMatrix(Eigen::MatrixXd entries, bool psd_certified)
    : entries_(std::move(entries)), psd_certified_(psd_certified) {
  if (entries_.rows() != entries_.cols()) {
    throw DimensionError("kernel matrix must be square");
  }
  if (!entries_.allFinite()) {
    throw std::invalid_argument("kernel matrix has non-finite entries");
  }
  if (entries_.size() > 0 &&
      (entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw std::invalid_argument("kernel matrix is not symmetric");
  }
}

AuxKernelBank::AuxKernelBank(std::vector<KernelMatrix> kernels, Eigen::VectorXd weights)
    : kernels_(std::move(kernels)), weights_(std::move(weights)) {
  if (static_cast<int>(kernels_.size()) != weights_.size()) {
    throw DimensionError("bank weight vector length must match kernel count");
  }
  for (const KernelMatrix& k : kernels_) {
    if (k.n() != n()) throw DimensionError("bank kernels must share one object count");
  }
  if (weights_.size() > 0 && weights_.minCoeff() < 0.0) {
    throw std::invalid_argument("bank weights must be nonnegative");
  }
}

void AuxKernelBank::set_weights(Eigen::VectorXd weights) {
  if (weights.size() != static_cast<Eigen::Index>(kernels_.size())) {
    throw DimensionError("bank weight vector length must match kernel count");
  }
  if (weights.size() > 0 && weights.minCoeff() < 0.0) {
    throw std::invalid_argument("bank weights must be nonnegative");
  }
  weights_ = std::move(weights);
}

bool AuxKernelBank::unit_trace(double tol) const {
  for (const KernelMatrix& k : kernels_) {
    if (std::abs(k.trace() - 1.0) > tol) return false;
  }
  return true;
}

double kernel_distance(const KernelMatrix& kernel, int a, int b) {
  if (a == b) throw std::invalid_argument("kernel distance requires distinct indices");
  if (a < 0 || b < 0 || a >= kernel.n() || b >= kernel.n()) {
    throw std::invalid_argument("kernel distance index out of range");
  }
  return kernel(a, a) + kernel(b, b) - 2.0 * kernel(a, b);
}

KernelMatrix conic_combine(const AuxKernelBank& bank) {
  if (bank.empty()) return KernelMatrix();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(bank.n(), bank.n());
  for (int i = 0; i < bank.size(); ++i) {
    sum += bank.weights()[i] * bank.kernels()[i].entries();
  }
  bool certified = true;
  for (const KernelMatrix& k : bank.kernels()) certified = certified && k.psd_certified();
  return KernelMatrix(std::move(sum), certified);
}

KernelMatrix compose_ak(const KernelMatrix& k0, const AuxKernelBank& bank) {
  if (bank.empty()) return k0;
  if (k0.n() != bank.n()) {
    throw DimensionError("kernel and bank object counts differ: " +
                         std::to_string(k0.n()) + " vs " + std::to_string(bank.n()));
  }
  Eigen::MatrixXd sum = k0.entries();
  for (int i = 0; i < bank.size(); ++i) {
    sum += bank.weights()[i] * bank.kernels()[i].entries();
  }
  bool certified = k0.psd_certified();
  for (const KernelMatrix& k : bank.kernels()) certified = certified && k.psd_certified();
  return KernelMatrix(std::move(sum), certified);
}

KernelMatrix project_psd(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols()) {
    throw DimensionError("PSD projection requires a square matrix");
  }
  const auto solver = decompose(symmetric);
  Eigen::VectorXd clipped = solver.eigenvalues();
  for (Eigen::Index i = 0; i < clipped.size(); ++i) {
    if (clipped[i] < kEigenFloor) clipped[i] = 0.0;
  }
  Eigen::MatrixXd rebuilt =
      solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().transpose();
  rebuilt = 0.5 * (rebuilt + rebuilt.transpose()).eval();
  return KernelMatrix(std::move(rebuilt), true);
}

KernelMatrix linear_kernel(const Eigen::MatrixXd& features) {
  if (features.rows() < 1) throw std::invalid_argument("feature matrix is empty");
  Eigen::MatrixXd gram = features * features.transpose();
  gram = 0.5 * (gram + gram.transpose()).eval();
  return KernelMatrix(std::move(gram), true);
}

KernelMatrix gaussian_kernel(const Eigen::MatrixXd& features, double sigma) {
  if (features.rows() < 1) throw std::invalid_argument("feature matrix is empty");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian kernel requires sigma > 0");
  const Eigen::Index n = features.rows();
  Eigen::MatrixXd k(n, n);
  const double scale = -1.0 / (2.0 * sigma * sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(scale * (features.row(i) - features.row(j)).squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return KernelMatrix(std::move(k), true);
}

KernelMatrix unit_trace_normalize(const KernelMatrix& kernel) {
  const double tr = kernel.trace();
  if (tr <= 1e-14) throw std::invalid_argument("degenerate kernel: trace is not positive");
  return KernelMatrix(kernel.entries() / tr, kernel.psd_certified());
}

int numerical_rank(const KernelMatrix& kernel, double tol) {
  if (kernel.n() == 0) return 0;
  const auto solver = decompose(kernel.entries());
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double largest = values[values.size() - 1];
  if (largest <= 0.0) return 0;
  const double cutoff = tol * largest;
  int rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] > cutoff) ++rank;
  }
  return rank;
}

}  // namespace rckl
