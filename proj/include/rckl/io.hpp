/// @file  io.hpp
/// @brief File formats: triplet lists, kernel CSV, model and config JSON,
///        experiment-record CSV. All formats round-trip byte-identically.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rckl/kernels.hpp"
#include "rckl/solver.hpp"
#include "rckl/synthbench.hpp"
#include "rckl/triplets.hpp"

namespace rckl {

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Six significant digits, the precision of all printed numeric output.
std::string format_sig6(double value);

/// Triplet files: one `a,b,c` line per triplet, 0-based indices, `#` starts a
/// comment. When `n` is given indices are validated against it; otherwise the
/// object count is inferred as max index + 1. Duplicate lines are parse
/// errors.
TripletSet read_triplets(const std::string& path, std::optional<int> n = std::nullopt);
TripletSet parse_triplets(std::istream& in, const std::string& name,
                          std::optional<int> n = std::nullopt);
void write_triplets(const std::string& path, const TripletSet& set);

/// Kernel CSV: first line the object count, then n rows of n comma-separated
/// values. Symmetry within 1e-9 is enforced at load; the stored matrix is
/// exactly symmetrized.
KernelMatrix read_kernel_csv(const std::string& path);
void write_kernel_csv(const std::string& path, const KernelMatrix& kernel);

/// A fitted model together with the configuration that produced it.
struct ModelFile {
  int n = 0;
  SolverConfig config;
  Eigen::MatrixXd k0;
  Eigen::VectorXd weights;
  Eigen::MatrixXd composed;
  std::vector<double> objective_history;
  int iterations_run = 0;
  bool converged = false;
};

ModelFile to_model_file(int n, const ModelState& state, const SolverConfig& config);
void write_model(const std::string& path, const ModelFile& model);
ModelFile read_model(const std::string& path);

/// Experiment records as RFC-4180 CSV (CRLF line ends, header row). `arms`
/// fixes the number of mu_i columns; T-mode rows print zeros there.
void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records,
                       int arms);
void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records,
                       int arms);

const char* mode_name(Mode mode);
const char* loss_name(LossKind loss);
Mode parse_mode(const std::string& name);
LossKind parse_loss(const std::string& name);

/// Configuration document: a JSON object with optional "solver",
/// "synthetic", "experiment" and "files" sections. Unknown keys are
/// rejected; numeric ranges are validated at load.
struct RunConfig {
  SolverConfig solver;
  ExperimentConfig experiment;
  std::string triplets_path;
  std::vector<std::string> kernel_paths;
  std::string output_path;
};

RunConfig read_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& name);

}  // namespace rckl
