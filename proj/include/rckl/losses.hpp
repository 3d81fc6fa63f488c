/// @file  losses.hpp
/// @brief Triplet error functions (STE, GNMDS), their gradients with respect
///        to the learned kernel and the bank weights, and the hinge active
///        set.

#pragma once

#include <Eigen/Dense>

#include "rckl/kernels.hpp"
#include "rckl/triplets.hpp"

namespace rckl {

enum class LossKind { STE, GNMDS };

/// Loss value with gradients; grad_k0 is symmetric, grad_mu has one entry per
/// bank kernel.
struct LossEval {
  double value = 0.0;
  Eigen::MatrixXd grad_k0;
  Eigen::VectorXd grad_mu;
};

/// Probability 1 / (1 + exp(d(a,b) - d(a,c))) that `t` is satisfied under
/// `kernel`, evaluated in the overflow-safe branch form.
double ste_probability(const KernelMatrix& kernel, const Triplet& t);

/// Negative sum of log-probabilities over `set` under k0 + weighted bank.
LossEval ste_loss(const KernelMatrix& k0, const AuxKernelBank& bank, const TripletSet& set);

/// Sum of unit-margin hinges max(0, d(a,b) - d(a,c) + 1) over `set` under
/// k0 + weighted bank; the subgradient counts active triplets only.
LossEval gnmds_loss(const KernelMatrix& k0, const AuxKernelBank& bank, const TripletSet& set);

/// Triplets violating the margin constraint d(a,c) - d(a,b) < 1 under
/// `kernel`; exactly the triplets with a positive hinge term.
TripletSet active_triplets(const KernelMatrix& kernel, const TripletSet& set);

namespace detail {

/// Per-triplet distance differences d(a,b) - d(a,c) under each bank kernel,
/// one row per triplet, one column per kernel. Fixed for a fixed bank, so
/// solvers precompute it once.
Eigen::MatrixXd aux_distance_table(const AuxKernelBank& bank, const TripletSet& set);

/// d(a,b) - d(a,c) restricted to the learned kernel's entries.
inline double k0_distance_diff(const Eigen::MatrixXd& k0, const Triplet& t) {
  return k0(t.b, t.b) - k0(t.c, t.c) - 2.0 * k0(t.a, t.b) + 2.0 * k0(t.a, t.c);
}

/// Shared evaluator behind ste_loss/gnmds_loss and the solver's iteration
/// loop. `aux_table` must come from aux_distance_table for the same set.
/// Gradient buffers in `out` are resized and zeroed as needed; when
/// `with_gradients` is false only the value is written.
void evaluate_loss(LossKind kind, const Eigen::MatrixXd& k0,
                   const Eigen::VectorXd& weights, const Eigen::MatrixXd& aux_table,
                   const std::vector<Triplet>& triplets, bool with_gradients,
                   LossEval& out);

}  // namespace detail

}  // namespace rckl
