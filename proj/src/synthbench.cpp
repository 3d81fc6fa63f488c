#include "rckl/synthbench.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "rckl/errors.hpp"
#include "rckl/rng.hpp"

namespace rckl {

namespace {

constexpr double kRankTol = 1e-6;

// Seed streams carved out of the spec seed.
constexpr std::uint64_t kStreamRounds = 0x726f756e647300ULL;
constexpr std::uint64_t kStreamSplit = 0x73706c697400ULL;

std::string code_of(const std::exception& e) {
  if (dynamic_cast<const ConflictError*>(&e)) return "E_CONFLICT";
  if (dynamic_cast<const DivergenceError*>(&e)) return "E_DIVERGE";
  if (dynamic_cast<const DimensionError*>(&e)) return "E_DIM";
  return "E_INTERNAL";
}

}  // namespace

TruthOracle::TruthOracle(const KernelMatrix& truth) {
  const int n = truth.n();
  distances_.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = kernel_distance(truth, i, j);
      distances_(i, j) = d;
      distances_(j, i) = d;
    }
  }
}

std::optional<Triplet> TruthOracle::answer(int a, int b, int c) const {
  const double dab = distances_(a, b);
  const double dac = distances_(a, c);
  if (dab < dac) return Triplet{a, b, c};
  if (dac < dab) return Triplet{a, c, b};
  return std::nullopt;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 3) throw std::invalid_argument("synthetic spec requires n >= 3");
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  for (double w : spec.truth_weights) {
    if (!(w > 0.0)) throw std::invalid_argument("truth weights must be positive");
  }

  std::mt19937_64 rng(spec.seed);

  std::vector<Eigen::MatrixXd> features(SyntheticSpec::kSpaces);
  for (auto& f : features) {
    f.resize(spec.n, SyntheticSpec::kSpaceDim);
    for (int i = 0; i < spec.n; ++i) {
      for (int j = 0; j < SyntheticSpec::kSpaceDim; ++j) f(i, j) = uniform_unit(rng);
    }
  }

  std::vector<KernelMatrix> clean;
  clean.reserve(SyntheticSpec::kSpaces);
  for (const auto& f : features) clean.push_back(linear_kernel(f));

  Eigen::VectorXd truth_weights(4);
  for (int i = 0; i < 4; ++i) truth_weights[i] = spec.truth_weights[i];
  const KernelMatrix truth = conic_combine(
      AuxKernelBank({clean[0], clean[1], clean[2], clean[3]}, truth_weights));

  std::vector<KernelMatrix> perturbed;
  perturbed.reserve(SyntheticSpec::kBankSize);
  for (int s = 0; s < SyntheticSpec::kSpaces; ++s) {
    Eigen::MatrixXd noisy = features[s];
    for (int i = 0; i < spec.n; ++i) {
      for (int j = 0; j < SyntheticSpec::kSpaceDim; ++j) {
        noisy(i, j) += spec.noise_sigma * gaussian(rng);
      }
    }
    if (s >= 1) perturbed.push_back(unit_trace_normalize(linear_kernel(noisy)));
  }
  AuxKernelBank bank(std::move(perturbed),
                     Eigen::VectorXd::Zero(SyntheticSpec::kBankSize));

  return SyntheticData{truth, std::move(clean), std::move(bank), TruthOracle(truth)};
}

std::vector<Round> make_rounds(const TruthOracle& oracle, int n, int count,
                               std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("rounds require n >= 3");
  if (count < 0) throw std::invalid_argument("round count must be nonnegative");
  if (static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(n) >
      total_triplet_count(n)) {
    throw std::invalid_argument("round count exceeds the available triplets");
  }
  if (oracle.n() != n) throw DimensionError("oracle object count differs from n");

  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> asked;  // question keys (a, lo, hi)
  auto question_key = [n](int a, int b, int c) {
    const std::uint64_t lo = static_cast<std::uint64_t>(std::min(b, c));
    const std::uint64_t hi = static_cast<std::uint64_t>(std::max(b, c));
    return (static_cast<std::uint64_t>(a) * n + lo) * n + hi;
  };

  std::vector<Round> rounds(count);
  for (Round& round : rounds) {
    round.triplets.reserve(n);
    for (int a = 0; a < n; ++a) {
      Triplet picked;
      bool found = false;
      for (int attempt = 0; attempt < 1000000; ++attempt) {
        // b, c drawn without replacement from the objects other than a.
        int b = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n - 1)));
        if (b >= a) ++b;
        int c = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n - 2)));
        for (int skip : {std::min(a, b), std::max(a, b)}) {
          if (c >= skip) ++c;
        }
        if (asked.count(question_key(a, b, c)) > 0) continue;
        const auto answered = oracle.answer(a, b, c);
        if (!answered) continue;  // exact ties are discarded
        asked.insert(question_key(a, b, c));
        picked = *answered;
        found = true;
        break;
      }
      if (!found) throw std::runtime_error("round generation exhausted the triplet pool");
      round.triplets.push_back(picked);
    }
  }
  return rounds;
}

TrialSplit split_rounds(const std::vector<Round>& rounds, int n, int train_rounds,
                        int validation_rounds, std::uint64_t seed) {
  const int total = static_cast<int>(rounds.size());
  if (train_rounds < 0 || validation_rounds < 0 || train_rounds + validation_rounds > total) {
    throw std::invalid_argument("split sizes exceed the round pool");
  }
  std::vector<int> order(total);
  for (int i = 0; i < total; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (int i = total - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }

  TrialSplit split{{}, {}, TripletSet(n)};
  for (int i = 0; i < train_rounds; ++i) split.train.push_back(rounds[order[i]]);
  for (int i = 0; i < validation_rounds; ++i) {
    split.validation.push_back(rounds[order[train_rounds + i]]);
  }
  for (int i = train_rounds + validation_rounds; i < total; ++i) {
    for (const Triplet& t : rounds[order[i]].triplets) split.test.add(t);
  }
  return split;
}

namespace {

struct Stage {
  TripletSet train;
  TripletSet validation;
  Stage(int n) : train(n), validation(n) {}
};

struct TrialData {
  TrialSplit split;
  std::vector<Stage> stages;  // accumulated, one per subset count
};

ExperimentRecord run_cell(const TrialData& trial, int trial_id, int subset, Mode mode,
                          LossKind loss, const AuxKernelBank& bank,
                          const ExperimentConfig& cfg) {
  ExperimentRecord rec;
  rec.trial = trial_id;
  rec.subset = subset;
  rec.mode = mode;
  rec.loss = loss;

  const Stage& stage = trial.stages[static_cast<std::size_t>(subset - 1)];
  const AuxKernelBank empty_bank;
  const AuxKernelBank& used_bank = (mode == Mode::T) ? empty_bank : bank;

  const std::vector<double> ones{0.0};
  const std::vector<double>& l1_grid = (mode == Mode::MKL) ? ones : cfg.lambda1_grid;
  const std::vector<double>& l2_grid = (mode == Mode::T) ? ones : cfg.lambda2_grid;

  bool have_best = false;
  double best_validation = 0.0;
  ModelState best_state;
  std::string first_error;

  for (double l1 : l1_grid) {
    for (double l2 : l2_grid) {
      SolverConfig sc;
      sc.loss = loss;
      sc.mode = mode;
      sc.lambda1 = l1;
      sc.lambda2 = l2;
      sc.eta = cfg.eta;
      sc.max_iters = cfg.max_iters;
      sc.rel_tol = cfg.rel_tol;
      sc.adaptive_step = cfg.adaptive_step;
      sc.seed = derive_seed(cfg.spec.seed, static_cast<std::uint64_t>(trial_id) << 32 |
                                               static_cast<std::uint64_t>(subset));
      try {
        ModelState state = fit(cfg.spec.n, stage.train, used_bank, sc);
        const double verr = error_rate(stage.validation, state.composed);
        if (!have_best || verr < best_validation) {
          have_best = true;
          best_validation = verr;
          best_state = std::move(state);
          rec.lambda1 = l1;
          rec.lambda2 = l2;
        }
      } catch (const std::exception& e) {
        if (first_error.empty()) first_error = code_of(e);
      }
    }
  }

  if (!have_best) {
    rec.status = first_error.empty() ? "E_INTERNAL" : first_error;
    return rec;
  }
  rec.status = "ok";
  rec.test_error = error_rate(trial.split.test, best_state.composed);
  rec.weights = best_state.bank.weights();
  rec.rank_k0 = numerical_rank(best_state.k0, kRankTol);
  return rec;
}

}  // namespace

std::vector<ExperimentRecord> run_learning_curve(const ExperimentConfig& cfg) {
  if (cfg.trials < 0) throw std::invalid_argument("trial count must be nonnegative");
  if (cfg.subsets < 1) throw std::invalid_argument("subset count must be positive");
  if (cfg.train_rounds % cfg.subsets != 0 || cfg.validation_rounds % cfg.subsets != 0) {
    throw std::invalid_argument("subset count must divide the train and validation rounds");
  }
  if (cfg.train_rounds + cfg.validation_rounds >= cfg.rounds) {
    throw std::invalid_argument("no rounds left for the test set");
  }
  if (cfg.methods.empty()) throw std::invalid_argument("no methods configured");
  if (cfg.lambda1_grid.empty() || cfg.lambda2_grid.empty()) {
    throw std::invalid_argument("lambda grids must be non-empty");
  }

  const SyntheticData data = generate_synthetic(cfg.spec);
  const std::vector<Round> rounds =
      make_rounds(data.oracle, cfg.spec.n, cfg.rounds, derive_seed(cfg.spec.seed, kStreamRounds));

  const int per_train = cfg.train_rounds / cfg.subsets;
  const int per_val = cfg.validation_rounds / cfg.subsets;

  std::vector<TrialData> trials;
  trials.reserve(static_cast<std::size_t>(cfg.trials));
  for (int trial = 0; trial < cfg.trials; ++trial) {
    TrialData td{split_rounds(rounds, cfg.spec.n, cfg.train_rounds, cfg.validation_rounds,
                              derive_seed(cfg.spec.seed,
                                          kStreamSplit + static_cast<std::uint64_t>(trial))),
                 {}};
    td.stages.reserve(static_cast<std::size_t>(cfg.subsets));
    Stage acc(cfg.spec.n);
    for (int s = 1; s <= cfg.subsets; ++s) {
      for (int r = (s - 1) * per_train; r < s * per_train; ++r) {
        for (const Triplet& t : td.split.train[static_cast<std::size_t>(r)].triplets) {
          acc.train.add(t);
        }
      }
      for (int r = (s - 1) * per_val; r < s * per_val; ++r) {
        for (const Triplet& t : td.split.validation[static_cast<std::size_t>(r)].triplets) {
          acc.validation.add(t);
        }
      }
      td.stages.push_back(acc);
    }
    trials.push_back(std::move(td));
  }

  struct Job {
    int trial;
    int subset;
    int method;
  };
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(cfg.trials) * cfg.subsets * cfg.methods.size());
  for (int trial = 0; trial < cfg.trials; ++trial) {
    for (int subset = 1; subset <= cfg.subsets; ++subset) {
      for (int m = 0; m < static_cast<int>(cfg.methods.size()); ++m) {
        jobs.push_back({trial, subset, m});
      }
    }
  }

  std::vector<ExperimentRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= jobs.size()) return;
      const Job& job = jobs[index];
      const auto [mode, loss] = cfg.methods[static_cast<std::size_t>(job.method)];
      records[index] = run_cell(trials[static_cast<std::size_t>(job.trial)], job.trial + 1,
                                job.subset, mode, loss, data.bank, cfg);
    }
  };

  unsigned thread_count = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                          : std::thread::hardware_concurrency();
  if (thread_count < 1) thread_count = 1;
  thread_count = std::min<unsigned>(thread_count, static_cast<unsigned>(jobs.size()));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

MuReport mu_recovery_report(const std::vector<ExperimentRecord>& records) {
  MuReport report;
  int arms = 0;
  for (const ExperimentRecord& rec : records) {
    if (rec.status == "ok" && rec.weights.size() > 0) {
      arms = std::max(arms, static_cast<int>(rec.weights.size()));
    }
  }
  if (arms == 0) return report;

  std::vector<int> subsets;
  for (const ExperimentRecord& rec : records) {
    if (rec.status == "ok" && rec.weights.size() > 0) subsets.push_back(rec.subset);
  }
  std::sort(subsets.begin(), subsets.end());
  subsets.erase(std::unique(subsets.begin(), subsets.end()), subsets.end());

  report.subsets = subsets;
  report.mean_weights.setZero(static_cast<Eigen::Index>(subsets.size()), arms);
  for (std::size_t row = 0; row < subsets.size(); ++row) {
    int count = 0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(arms);
    for (const ExperimentRecord& rec : records) {
      if (rec.status == "ok" && rec.weights.size() == arms && rec.subset == subsets[row]) {
        sum += rec.weights;
        ++count;
      }
    }
    if (count > 0) report.mean_weights.row(static_cast<Eigen::Index>(row)) = sum / count;
  }
  return report;
}

}  // namespace rckl
