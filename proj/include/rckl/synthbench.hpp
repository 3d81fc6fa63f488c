/// @file  synthbench.hpp
/// @brief Synthetic study: ground-truth kernel over independent feature
///        spaces, oracle-answered triplet rounds, trial splits, and the
///        learning-curve harness with validation-set hyperparameter search.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rckl/kernels.hpp"
#include "rckl/solver.hpp"
#include "rckl/triplets.hpp"

namespace rckl {

struct SyntheticSpec {
  int n = 100;                 ///< object count
  double noise_sigma = 0.1;    ///< per-coordinate Gaussian perturbation of the features
  std::array<double, 4> truth_weights{1.0 / 2.0, 1.0 / 4.0, 1.0 / 6.0, 1.0 / 12.0};
  std::uint64_t seed = 0;

  static constexpr int kSpaces = 7;    ///< independent 2-D feature spaces
  static constexpr int kSpaceDim = 2;
  static constexpr int kBankSize = 6;  ///< perturbed spaces 1..6 become the bank
};

/// Answers relative-comparison questions from a fixed ground-truth kernel.
class TruthOracle {
 public:
  explicit TruthOracle(const KernelMatrix& truth);

  /// The triplet ((a,b,c) or (a,c,b)) asserted by the ground truth, or
  /// nullopt on an exact distance tie.
  std::optional<Triplet> answer(int a, int b, int c) const;

  int n() const { return static_cast<int>(distances_.rows()); }

 private:
  Eigen::MatrixXd distances_;
};

struct SyntheticData {
  KernelMatrix truth;                       ///< weighted sum of clean kernels 0..3
  std::vector<KernelMatrix> clean_kernels;  ///< raw linear kernels of the 7 clean spaces
  AuxKernelBank bank;                       ///< perturbed, unit-trace kernels of spaces 1..6
  TruthOracle oracle;
};

/// Samples the feature spaces, builds the ground-truth kernel from the clean
/// features and the bank from noise-perturbed ones, and wraps the truth
/// kernel in an oracle.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// A batch of n triplets in which every object appears exactly once as the
/// head.
struct Round {
  std::vector<Triplet> triplets;
};

/// `count` rounds of oracle-answered triplets, duplicate-free across rounds;
/// tails (b,c) are drawn uniformly without replacement and redrawn on ties or
/// repeats. Requires count * n <= total_triplet_count(n).
std::vector<Round> make_rounds(const TruthOracle& oracle, int n, int count,
                               std::uint64_t seed);

/// A shuffled partition of the round pool.
struct TrialSplit {
  std::vector<Round> train;
  std::vector<Round> validation;
  TripletSet test;  ///< all triplets of the remaining rounds
};

TrialSplit split_rounds(const std::vector<Round>& rounds, int n, int train_rounds,
                        int validation_rounds, std::uint64_t seed);

/// One learning-curve cell: a method trained on the first `subset` subsets,
/// hyperparameters chosen on the accumulated validation rounds.
struct ExperimentRecord {
  int trial = 0;   ///< 1-based
  int subset = 0;  ///< accumulated subset count, 1-based
  Mode mode = Mode::T;
  LossKind loss = LossKind::STE;
  std::string status;      ///< "ok" or an error code; failures keep the run going
  double test_error = 0.0; ///< meaningful when status == "ok"
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Eigen::VectorXd weights; ///< learned bank weights; empty in T mode
  int rank_k0 = 0;         ///< numerical rank of the learned kernel at tol 1e-6
};

struct ExperimentConfig {
  SyntheticSpec spec;
  std::vector<std::pair<Mode, LossKind>> methods{
      {Mode::T, LossKind::STE},  {Mode::T, LossKind::GNMDS},
      {Mode::MKL, LossKind::STE}, {Mode::MKL, LossKind::GNMDS},
      {Mode::AK, LossKind::STE},  {Mode::AK, LossKind::GNMDS}};
  std::vector<double> lambda1_grid{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> lambda2_grid{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  int trials = 10;
  int rounds = 100;
  int train_rounds = 20;
  int validation_rounds = 10;
  int subsets = 10;            ///< must divide train_rounds and validation_rounds
  double eta = 1.0;
  int max_iters = 250;
  double rel_tol = 1e-4;
  bool adaptive_step = true;
  int threads = 0;             ///< worker threads; 0 = hardware concurrency
};

/// Runs every (trial, subset, method) cell: trains over the lambda grids,
/// selects the first grid point minimizing validation error, and records the
/// test error of the selected model. Cells run concurrently; output order is
/// fixed as trial-major, subset, then method.
std::vector<ExperimentRecord> run_learning_curve(const ExperimentConfig& config);

/// Mean learned weights by subset count over the given records (failed cells
/// and weightless T-mode records are skipped).
struct MuReport {
  std::vector<int> subsets;
  Eigen::MatrixXd mean_weights;  ///< one row per subset entry
};

MuReport mu_recovery_report(const std::vector<ExperimentRecord>& records);

}  // namespace rckl
