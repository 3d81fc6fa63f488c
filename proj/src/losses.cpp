#include "rckl/losses.hpp"

#include <cmath>

#include "rckl/errors.hpp"

namespace rckl {

namespace {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_shapes(const KernelMatrix& k0, const AuxKernelBank& bank, const TripletSet& set) {
  if (k0.n() != set.n()) {
    throw DimensionError("kernel and triplet set object counts differ");
  }
  if (!bank.empty() && bank.n() != set.n()) {
    throw DimensionError("bank and triplet set object counts differ");
  }
}

LossEval full_eval(LossKind kind, const KernelMatrix& k0, const AuxKernelBank& bank,
                   const TripletSet& set) {
  check_shapes(k0, bank, set);
  const Eigen::MatrixXd table = detail::aux_distance_table(bank, set);
  LossEval out;
  detail::evaluate_loss(kind, k0.entries(), bank.weights(), table, set.triplets(),
                        /*with_gradients=*/true, out);
  return out;
}

}  // namespace

double ste_probability(const KernelMatrix& kernel, const Triplet& t) {
  const double diff =
      kernel_distance(kernel, t.a, t.b) - kernel_distance(kernel, t.a, t.c);
  if (diff >= 0.0) {
    const double e = std::exp(-diff);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(diff));
}

LossEval ste_loss(const KernelMatrix& k0, const AuxKernelBank& bank, const TripletSet& set) {
  return full_eval(LossKind::STE, k0, bank, set);
}

LossEval gnmds_loss(const KernelMatrix& k0, const AuxKernelBank& bank, const TripletSet& set) {
  return full_eval(LossKind::GNMDS, k0, bank, set);
}

TripletSet active_triplets(const KernelMatrix& kernel, const TripletSet& set) {
  TripletSet active(set.n());
  for (const Triplet& t : set) {
    const double slack =
        kernel_distance(kernel, t.a, t.c) - kernel_distance(kernel, t.a, t.b);
    if (slack < 1.0) active.add(t);
  }
  return active;
}

namespace detail {

Eigen::MatrixXd aux_distance_table(const AuxKernelBank& bank, const TripletSet& set) {
  Eigen::MatrixXd table(static_cast<Eigen::Index>(set.size()), bank.size());
  for (int i = 0; i < bank.size(); ++i) {
    const KernelMatrix& k = bank.kernels()[i];
    Eigen::Index row = 0;
    for (const Triplet& t : set) {
      table(row++, i) = kernel_distance(k, t.a, t.b) - kernel_distance(k, t.a, t.c);
    }
  }
  return table;
}

void evaluate_loss(LossKind kind, const Eigen::MatrixXd& k0,
                   const Eigen::VectorXd& weights, const Eigen::MatrixXd& aux_table,
                   const std::vector<Triplet>& triplets, bool with_gradients,
                   LossEval& out) {
  const Eigen::Index n = k0.rows();
  const Eigen::Index arms = weights.size();
  out.value = 0.0;
  if (with_gradients) {
    out.grad_k0.setZero(n, n);
    out.grad_mu.setZero(arms);
  }

  for (std::size_t ti = 0; ti < triplets.size(); ++ti) {
    const Triplet& t = triplets[ti];
    double diff = k0_distance_diff(k0, t);
    if (arms > 0) {
      diff += aux_table.row(static_cast<Eigen::Index>(ti)).dot(weights);
    }

    double weight;  // d(loss term)/d(diff)
    if (kind == LossKind::STE) {
      out.value += softplus(diff);
      weight = sigmoid(diff);
    } else {
      const double hinge = diff + 1.0;
      if (hinge > 0.0) {
        out.value += hinge;
        weight = 1.0;
      } else {
        weight = 0.0;
      }
    }

    if (!with_gradients || weight == 0.0) continue;
    out.grad_k0(t.b, t.b) += weight;
    out.grad_k0(t.c, t.c) -= weight;
    out.grad_k0(t.a, t.b) -= weight;
    out.grad_k0(t.b, t.a) -= weight;
    out.grad_k0(t.a, t.c) += weight;
    out.grad_k0(t.c, t.a) += weight;
    if (arms > 0) {
      out.grad_mu += weight * aux_table.row(static_cast<Eigen::Index>(ti)).transpose();
    }
  }
}

}  // namespace detail

}  // namespace rckl
