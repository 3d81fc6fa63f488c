#include "rckl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rckl/errors.hpp"

namespace rckl {

namespace {

constexpr double kStepFloor = 1e-12;  // step sizes below eta * this make no progress

double loss_value(LossKind kind, const Eigen::MatrixXd& k0, const Eigen::VectorXd& weights,
                  const Eigen::MatrixXd& aux_table, const std::vector<Triplet>& triplets) {
  LossEval scratch;
  detail::evaluate_loss(kind, k0, weights, aux_table, triplets, /*with_gradients=*/false,
                        scratch);
  return scratch.value;
}

double regularized(double loss, const Eigen::MatrixXd& k0, const Eigen::VectorXd& weights,
                   const SolverConfig& config) {
  double value = loss + config.lambda1 * k0.trace();
  if (weights.size() > 0) value += config.lambda2 * weights.sum();
  return value;
}

}  // namespace

ModelState initialize(int n, const AuxKernelBank& bank, const SolverConfig& config) {
  if (n < 2) throw std::invalid_argument("solver requires at least 2 objects");
  if (!bank.empty() && bank.n() != n) {
    throw DimensionError("bank object count differs from n");
  }
  ModelState state;
  Eigen::MatrixXd k0 = (config.mode == Mode::MKL)
                           ? Eigen::MatrixXd::Zero(n, n).eval()
                           : Eigen::MatrixXd::Identity(n, n).eval();
  state.k0 = KernelMatrix(std::move(k0), true);
  state.bank = bank;
  if (!bank.empty()) {
    state.bank.set_weights(
        Eigen::VectorXd::Constant(bank.size(), 1.0 / static_cast<double>(bank.size())));
  }
  state.composed = compose_ak(state.k0, state.bank);
  return state;
}

double objective(const ModelState& state, const TripletSet& set, const SolverConfig& config) {
  double loss = 0.0;
  for (const Triplet& t : set) {
    const double diff = kernel_distance(state.composed, t.a, t.b) -
                        kernel_distance(state.composed, t.a, t.c);
    if (config.loss == LossKind::STE) {
      loss += diff > 0.0 ? diff + std::log1p(std::exp(-diff)) : std::log1p(std::exp(diff));
    } else {
      loss += std::max(0.0, diff + 1.0);
    }
  }
  return regularized(loss, state.k0.entries(), state.bank.weights(), config);
}

ModelState fit(int n, const TripletSet& set, const AuxKernelBank& bank,
               const SolverConfig& config, const IterationObserver& observer) {
  if (set.empty()) throw std::invalid_argument("cannot fit an empty triplet set");
  if (set.n() != n) throw DimensionError("triplet set object count differs from n");
  if (config.max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (!(config.eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(config.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  {
    ConflictReport conflicts = detect_conflicts(set);
    if (!conflicts.empty()) throw ConflictError(std::move(conflicts));
  }

  ModelState state = initialize(n, bank, config);
  const std::vector<Triplet>& triplets = set.triplets();
  const Eigen::MatrixXd aux_table = detail::aux_distance_table(state.bank, set);
  const bool step_k0 = config.mode != Mode::MKL;
  const bool step_weights = config.mode != Mode::T && !state.bank.empty();

  Eigen::MatrixXd k0 = state.k0.entries();
  Eigen::VectorXd weights = state.bank.weights();

  double current = regularized(
      loss_value(config.loss, k0, weights, aux_table, triplets), k0, weights, config);
  if (!std::isfinite(current)) {
    throw DivergenceError("initial objective is not finite");
  }
  state.objective_history.push_back(current);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  double eta = config.eta;
  LossEval grad;
  bool have_gradient = false;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    state.iterations_run = iter;

    if (!have_gradient) {
      detail::evaluate_loss(config.loss, k0, weights, aux_table, triplets,
                            /*with_gradients=*/true, grad);
      have_gradient = true;
    }

    // Candidate step, projections included. A Cholesky probe skips the
    // eigendecomposition when the stepped matrix never left the cone; the
    // projection is the identity there.
    Eigen::MatrixXd next_k0;
    KernelMatrix projected;
    bool finite_step = true;
    if (step_k0) {
      next_k0 = k0 - eta * (grad.grad_k0 + config.lambda1 * identity);
      if (next_k0.allFinite()) {
        bool inside_cone = false;
        if (next_k0.cwiseAbs().maxCoeff() < 1e6) {
          // Cholesky rounding stays below the -1e-8 certification at this
          // scale, so success makes the projection the identity.
          const Eigen::LLT<Eigen::MatrixXd> chol((next_k0 + 1e-9 * identity).eval());
          if (chol.info() == Eigen::Success) {
            projected = KernelMatrix(0.5 * (next_k0 + next_k0.transpose()), true);
            inside_cone = true;
          }
        }
        if (!inside_cone) {
          try {
            projected = project_psd(next_k0);
          } catch (const std::exception&) {
            finite_step = false;  // the step overflowed inside the projection
          }
        }
      } else {
        finite_step = false;
      }
    } else {
      projected = KernelMatrix(Eigen::MatrixXd::Zero(n, n), true);
    }
    Eigen::VectorXd next_weights = weights;
    if (step_weights) {
      next_weights =
          (weights - eta * (grad.grad_mu.array() + config.lambda2).matrix()).cwiseMax(0.0);
      if (!next_weights.allFinite()) finite_step = false;
    }

    double candidate = std::numeric_limits<double>::infinity();
    if (finite_step) {
      candidate = regularized(
          loss_value(config.loss, projected.entries(), next_weights, aux_table, triplets),
          projected.entries(), next_weights, config);
    }

    if (config.adaptive_step) {
      const bool accept = std::isfinite(candidate) && candidate <= current;
      if (!accept) {
        eta *= 0.5;
        if (eta < config.eta * kStepFloor || eta < 1e-300) {
          state.converged = true;
          break;
        }
        continue;  // state untouched; gradient stays valid
      }
      eta *= 1.01;
    } else if (!std::isfinite(candidate)) {
      throw DivergenceError("objective is not finite; try a smaller eta");
    }

    k0 = projected.entries();
    weights = next_weights;
    have_gradient = false;

    const double previous = current;
    current = candidate;
    state.objective_history.push_back(current);
    if (observer) observer(iter, projected, weights);

    if (std::abs(current - previous) / std::max(1.0, std::abs(previous)) < config.rel_tol) {
      state.converged = true;
      break;
    }
  }

  state.k0 = KernelMatrix(k0, true);
  if (!state.bank.empty()) state.bank.set_weights(weights);
  state.composed = compose_ak(state.k0, state.bank);
  return state;
}

}  // namespace rckl
