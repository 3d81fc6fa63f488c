/// @file  solver.hpp
/// @brief Projected gradient descent over a learned kernel and bank weights,
///        with trace and l1 regularization.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rckl/kernels.hpp"
#include "rckl/losses.hpp"
#include "rckl/triplets.hpp"

namespace rckl {

/// What gets learned: a free kernel only (T), bank weights only (MKL), or
/// both (AK).
enum class Mode { T, MKL, AK };

struct SolverConfig {
  LossKind loss = LossKind::STE;
  Mode mode = Mode::AK;
  double lambda1 = 0.0;     ///< trace penalty on the learned kernel; unused in MKL mode
  double lambda2 = 0.0;     ///< l1 penalty on the weights; unused in T mode
  double eta = 1.0;         ///< initial step size
  int max_iters = 1000;
  double rel_tol = 1e-6;    ///< relative objective change declaring convergence
  std::uint64_t seed = 0;
  bool adaptive_step = true;  ///< backtrack on objective increase; off = fixed step
};

struct ModelState {
  KernelMatrix k0;
  AuxKernelBank bank;        ///< fixed kernels with the learned weights
  KernelMatrix composed;     ///< k0 + weighted bank
  std::vector<double> objective_history;  ///< accepted objective values
  int iterations_run = 0;
  bool converged = false;
};

/// Called after each accepted iteration with the projected state.
using IterationObserver =
    std::function<void(int iteration, const KernelMatrix& k0, const Eigen::VectorXd& weights)>;

/// Starting state: k0 is the identity (the zero matrix in MKL mode) and the
/// weights are uniform 1/A (empty when the bank is empty).
ModelState initialize(int n, const AuxKernelBank& bank, const SolverConfig& config);

/// Loss of the composed kernel on `set` plus lambda1 * trace(k0) plus
/// lambda2 * sum of weights.
double objective(const ModelState& state, const TripletSet& set, const SolverConfig& config);

/// Minimizes the regularized objective by projected gradient descent: step on
/// k0 (trace term folded in) and on the weights (l1 subgradient folded in),
/// project k0 onto the PSD cone, clamp the weights to >= 0, recompose.
/// T mode takes no weight steps; MKL mode keeps k0 at zero. The hinge loss
/// recomputes its active triplets every iteration.
///
/// Throws ConflictError for a conflicting set, std::invalid_argument for an
/// empty one, and DivergenceError when the objective turns non-finite under a
/// fixed step.
ModelState fit(int n, const TripletSet& set, const AuxKernelBank& bank,
               const SolverConfig& config, const IterationObserver& observer = {});

}  // namespace rckl
