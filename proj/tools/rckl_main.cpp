// rckl: kernel learning from relative-comparison triplets.
//
// Subcommands: train, evaluate, triplets (count|closure|conflicts|adversarial),
// experiment. Errors print to stderr with stable prefixes (E_PARSE,
// E_CONFLICT, E_DIVERGE, E_DIM) and a nonzero exit code.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rckl/errors.hpp"
#include "rckl/io.hpp"
#include "rckl/kernels.hpp"
#include "rckl/solver.hpp"
#include "rckl/synthbench.hpp"
#include "rckl/triplets.hpp"

namespace {

using namespace rckl;

struct TrainArgs {
  std::string triplets_path;
  std::vector<std::string> kernel_paths;
  std::string config_path;
  std::string out_path;
  std::string mode;
  std::string loss;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double eta = 0.0;
  int max_iters = 0;
  std::uint64_t seed = 0;
};

void print_conflicts(std::ostream& out, const ConflictReport& report) {
  for (const auto& [t, r] : report) {
    out << "  (" << t.a << ',' << t.b << ',' << t.c << ") vs (" << r.a << ',' << r.b << ','
        << r.c << ")\n";
  }
}

int run_train(const TrainArgs& args, const CLI::App& cmd) {
  SolverConfig config;
  std::vector<std::string> kernel_paths = args.kernel_paths;
  if (!args.config_path.empty()) {
    const RunConfig run = read_config(args.config_path);
    config = run.solver;
    if (kernel_paths.empty()) kernel_paths = run.kernel_paths;
  }
  if (cmd.count("--mode")) config.mode = parse_mode(args.mode);
  if (cmd.count("--loss")) config.loss = parse_loss(args.loss);
  if (cmd.count("--lambda1")) config.lambda1 = args.lambda1;
  if (cmd.count("--lambda2")) config.lambda2 = args.lambda2;
  if (cmd.count("--eta")) config.eta = args.eta;
  if (cmd.count("--max-iters")) config.max_iters = args.max_iters;
  if (cmd.count("--seed")) config.seed = args.seed;

  std::vector<KernelMatrix> kernels;
  for (const std::string& path : kernel_paths) {
    kernels.push_back(unit_trace_normalize(read_kernel_csv(path)));
  }
  if (config.mode != Mode::T && kernels.empty()) {
    throw DimensionError("mode '" + std::string(mode_name(config.mode)) +
                         "' requires at least one kernel file");
  }
  if (config.mode == Mode::T) kernels.clear();

  TripletSet set = read_triplets(args.triplets_path);
  int n = set.n();
  for (const KernelMatrix& k : kernels) n = std::max(n, k.n());
  if (set.n() != n) set = TripletSet(n, set.triplets());
  for (const KernelMatrix& k : kernels) {
    if (k.n() != n) {
      throw DimensionError("kernel size " + std::to_string(k.n()) +
                           " differs from object count " + std::to_string(n));
    }
  }

  const AuxKernelBank bank(kernels, Eigen::VectorXd::Zero(static_cast<int>(kernels.size())));
  const ModelState state = fit(n, set, bank, config);
  const double train_error = error_rate(set, state.composed);

  if (!args.out_path.empty()) write_model(args.out_path, to_model_file(n, state, config));

  std::cout << "objects: " << n << "\n";
  std::cout << "triplets: " << set.size() << "\n";
  std::cout << "iterations: " << state.iterations_run
            << (state.converged ? " (converged)" : " (max iterations)") << "\n";
  std::cout << "objective: " << format_sig6(state.objective_history.back()) << "\n";
  std::cout << "train error: " << format_sig6(train_error) << "\n";
  if (!args.out_path.empty()) std::cout << "model written to " << args.out_path << "\n";
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& triplets_path) {
  const ModelFile model = read_model(model_path);
  TripletSet set(1);
  try {
    set = read_triplets(triplets_path, model.n);
  } catch (const ParseError& e) {
    // Out-of-range indices against a known object count are a shape mismatch.
    if (std::string(e.what()).find("out of range") != std::string::npos) {
      throw DimensionError(e.what());
    }
    throw;
  }
  const KernelMatrix composed(model.composed);
  std::cout << format_sig6(error_rate(set, composed)) << "\n";
  return 0;
}

int run_experiment(const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::string& out_path, int threads) {
  RunConfig run;
  if (!config_path.empty()) run = read_config(config_path);
  ExperimentConfig config = run.experiment;
  if (seed) config.spec.seed = *seed;
  if (threads > 0) config.threads = threads;
  const std::string output = !out_path.empty() ? out_path : run.output_path;
  if (output.empty()) throw ParseError("experiment needs an output path (--out)");

  const auto records = run_learning_curve(config);
  write_records_csv(output, records, SyntheticSpec::kBankSize);
  std::cout << "records written to " << output << " (" << records.size() << " rows)\n";

  // Mean test error by method and subset count.
  std::cout << "\nmean test error by subset\n";
  std::cout << "method      ";
  for (int s = 1; s <= config.subsets; ++s) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%11d", s);
    std::cout << buf;
  }
  std::cout << "\n";
  for (const auto& [mode, loss] : config.methods) {
    char label[32];
    std::snprintf(label, sizeof(label), "%-12s",
                  (std::string(mode_name(mode)) + "/" + loss_name(loss)).c_str());
    std::cout << label;
    for (int s = 1; s <= config.subsets; ++s) {
      double sum = 0.0;
      int count = 0;
      for (const auto& rec : records) {
        if (rec.mode == mode && rec.loss == loss && rec.subset == s && rec.status == "ok") {
          sum += rec.test_error;
          ++count;
        }
      }
      char buf[16];
      if (count > 0) std::snprintf(buf, sizeof(buf), "%11.6g", sum / count);
      else std::snprintf(buf, sizeof(buf), "%11s", "-");
      std::cout << buf;
    }
    std::cout << "\n";
  }

  // Mean learned weights for the methods that carry them.
  for (const auto& [mode, loss] : config.methods) {
    if (mode == Mode::T) continue;
    std::vector<ExperimentRecord> filtered;
    for (const auto& rec : records) {
      if (rec.mode == mode && rec.loss == loss) filtered.push_back(rec);
    }
    const MuReport report = mu_recovery_report(filtered);
    if (report.subsets.empty()) continue;
    std::cout << "\nmean mu (" << mode_name(mode) << "/" << loss_name(loss) << ")\n";
    std::cout << "subset";
    for (Eigen::Index i = 1; i <= report.mean_weights.cols(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%10s%lld", "mu_", static_cast<long long>(i));
      std::cout << buf;
    }
    std::cout << "\n";
    for (std::size_t row = 0; row < report.subsets.size(); ++row) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%-6d", report.subsets[row]);
      std::cout << buf;
      for (int i = 0; i < report.mean_weights.cols(); ++i) {
        std::snprintf(buf, sizeof(buf), " %10.6g",
                      report.mean_weights(static_cast<Eigen::Index>(row), i));
        std::cout << buf;
      }
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel learning from relative-comparison triplets"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "fit a kernel to a triplet file");
  train->add_option("triplets", train_args.triplets_path, "triplet file")->required();
  train->add_option("-k,--kernel", train_args.kernel_paths,
                    "auxiliary kernel CSV (repeatable; unit-trace normalized at load)");
  train->add_option("--config", train_args.config_path, "config JSON");
  train->add_option("--mode", train_args.mode, "t, mkl, or ak")
      ->check(CLI::IsMember({"t", "mkl", "ak"}));
  train->add_option("--loss", train_args.loss, "ste or gnmds")
      ->check(CLI::IsMember({"ste", "gnmds"}));
  train->add_option("--lambda1", train_args.lambda1, "trace penalty");
  train->add_option("--lambda2", train_args.lambda2, "l1 penalty on the weights");
  train->add_option("--eta", train_args.eta, "initial step size");
  train->add_option("--max-iters", train_args.max_iters, "iteration cap");
  train->add_option("--seed", train_args.seed, "rng seed");
  train->add_option("--out", train_args.out_path, "model JSON output path");

  std::string eval_model, eval_triplets;
  CLI::App* evaluate = app.add_subcommand("evaluate", "error rate of a model on triplets");
  evaluate->add_option("model", eval_model, "model JSON")->required();
  evaluate->add_option("triplets", eval_triplets, "triplet file")->required();

  CLI::App* triplet_tools = app.add_subcommand("triplets", "triplet-set utilities");
  triplet_tools->require_subcommand(1);

  int count_n = 0;
  CLI::App* count = triplet_tools->add_subcommand("count", "total triplets over n objects");
  count->add_option("n", count_n, "object count")->required();

  std::string closure_path, closure_out;
  CLI::App* closure = triplet_tools->add_subcommand("closure", "transitive closure of a file");
  closure->add_option("triplets", closure_path, "triplet file")->required();
  closure->add_option("--out", closure_out, "write closure here instead of stdout");

  std::string conflicts_path;
  CLI::App* conflicts = triplet_tools->add_subcommand("conflicts", "conflict report for a file");
  conflicts->add_option("triplets", conflicts_path, "triplet file")->required();

  int adversarial_n = 0;
  std::uint64_t adversarial_seed = 0;
  bool adversarial_verify = false;
  std::string adversarial_out;
  CLI::App* adversarial =
      triplet_tools->add_subcommand("adversarial", "inference-free triplet ordering");
  adversarial->add_option("n", adversarial_n, "object count")->required();
  adversarial->add_option("--seed", adversarial_seed, "rng seed");
  adversarial->add_flag("--verify", adversarial_verify,
                        "recheck that every prefix infers nothing");
  adversarial->add_option("--out", adversarial_out, "write ordering here instead of stdout");

  std::string experiment_config, experiment_out;
  std::uint64_t experiment_seed = 0;
  int experiment_threads = 0;
  CLI::App* experiment = app.add_subcommand("experiment", "synthetic learning-curve study");
  experiment->add_option("--config", experiment_config, "config JSON");
  experiment->add_option("--seed", experiment_seed, "override the synthetic seed");
  experiment->add_option("--out", experiment_out, "records CSV output path");
  experiment->add_option("--threads", experiment_threads, "worker threads (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(train_args, *train);
    if (*evaluate) return run_evaluate(eval_model, eval_triplets);
    if (*count) {
      std::cout << total_triplet_count(count_n) << "\n";
      return 0;
    }
    if (*closure) {
      const TripletSet result = transitive_closure(read_triplets(closure_path));
      if (closure_out.empty()) {
        for (const Triplet& t : result) std::cout << t.a << ',' << t.b << ',' << t.c << "\n";
      } else {
        write_triplets(closure_out, result);
      }
      return 0;
    }
    if (*conflicts) {
      const ConflictReport report = detect_conflicts(read_triplets(conflicts_path));
      if (report.empty()) {
        std::cout << "no conflicts\n";
      } else {
        std::cout << report.size() << " conflicting pairs\n";
        print_conflicts(std::cout, report);
      }
      return 0;
    }
    if (*adversarial) {
      const auto order = adversarial_order(adversarial_n, adversarial_seed);
      if (adversarial_out.empty()) {
        for (const Triplet& t : order) std::cout << t.a << ',' << t.b << ',' << t.c << "\n";
      } else {
        TripletSet as_set(adversarial_n);
        for (const Triplet& t : order) as_set.add(t);
        write_triplets(adversarial_out, as_set);
      }
      if (adversarial_verify) {
        TripletSet prefix(adversarial_n);
        bool clean = true;
        for (const Triplet& t : order) {
          prefix.add(t);
          if (!inferred_triplets(prefix).empty()) {
            clean = false;
            break;
          }
        }
        std::cout << "all prefixes closure-empty: " << (clean ? "true" : "false") << "\n";
        if (!clean) return 1;
      }
      return 0;
    }
    if (*experiment) {
      return run_experiment(experiment_config,
                            experiment->count("--seed")
                                ? std::optional<std::uint64_t>(experiment_seed)
                                : std::nullopt,
                            experiment_out, experiment_threads);
    }
  } catch (const ParseError& e) {
    std::cerr << "E_PARSE: " << e.what() << "\n";
    return 1;
  } catch (const ConflictError& e) {
    std::cerr << "E_CONFLICT: " << e.what() << "\n";
    print_conflicts(std::cerr, e.conflicts());
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "E_DIVERGE: " << e.what() << "\n";
    return 1;
  } catch (const DimensionError& e) {
    std::cerr << "E_DIM: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_PARSE: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
