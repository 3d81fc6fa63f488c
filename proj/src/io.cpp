#include "rckl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rckl/errors.hpp"

namespace rckl {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

int parse_int(std::string_view token, const std::string& name, int line) {
  token = trim(token);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.begin(), token.end(), value);
  if (ec != std::errc() || ptr != token.end() || token.empty()) {
    throw ParseError(name + ":" + std::to_string(line) + ": expected an integer, got '" +
                         std::string(token) + "'",
                     line);
  }
  return value;
}

double parse_number(std::string_view token, const std::string& name, int line) {
  token = trim(token);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.begin(), token.end(), value);
  if (ec != std::errc() || ptr != token.end() || token.empty()) {
    throw ParseError(name + ":" + std::to_string(line) + ": expected a number, got '" +
                         std::string(token) + "'",
                     line);
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string format_sig6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return std::string(buffer);
}

TripletSet parse_triplets(std::istream& in, const std::string& name, std::optional<int> n) {
  std::vector<Triplet> triplets;
  std::vector<int> lines;
  std::string raw;
  int line = 0;
  int max_index = -1;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 3) {
      throw ParseError(name + ":" + std::to_string(line) +
                           ": expected three comma-separated indices",
                       line);
    }
    Triplet t{parse_int(fields[0], name, line), parse_int(fields[1], name, line),
              parse_int(fields[2], name, line)};
    triplets.push_back(t);
    lines.push_back(line);
    max_index = std::max({max_index, t.a, t.b, t.c});
  }

  const int objects = n.value_or(max_index + 1);
  TripletSet set(std::max(objects, 1));
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    try {
      if (!set.add(triplets[i])) {
        throw ParseError(name + ":" + std::to_string(lines[i]) + ": duplicate triplet",
                         lines[i]);
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(name + ":" + std::to_string(lines[i]) + ": " + e.what(), lines[i]);
    }
  }
  return set;
}

TripletSet read_triplets(const std::string& path, std::optional<int> n) {
  auto in = open_input(path);
  return parse_triplets(in, path, n);
}

void write_triplets(const std::string& path, const TripletSet& set) {
  auto out = open_output(path);
  for (const Triplet& t : set) {
    out << t.a << ',' << t.b << ',' << t.c << '\n';
  }
}

KernelMatrix read_kernel_csv(const std::string& path) {
  auto in = open_input(path);
  std::string raw;
  if (!std::getline(in, raw)) throw ParseError(path + ":1: missing object count", 1);
  const int n = parse_int(raw, path, 1);
  if (n < 1) throw ParseError(path + ":1: object count must be positive", 1);

  Eigen::MatrixXd entries(n, n);
  for (int i = 0; i < n; ++i) {
    const int line = i + 2;
    if (!std::getline(in, raw)) {
      throw ParseError(path + ":" + std::to_string(line) + ": missing matrix row", line);
    }
    const auto fields = split(trim(raw), ',');
    if (static_cast<int>(fields.size()) != n) {
      throw ParseError(path + ":" + std::to_string(line) + ": expected " +
                           std::to_string(n) + " values",
                       line);
    }
    for (int j = 0; j < n; ++j) entries(i, j) = parse_number(fields[j], path, line);
  }

  if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ParseError(path + ": kernel matrix is not symmetric within 1e-9");
  }
  entries = 0.5 * (entries + entries.transpose()).eval();
  return KernelMatrix(std::move(entries));
}

void write_kernel_csv(const std::string& path, const KernelMatrix& kernel) {
  auto out = open_output(path);
  const int n = kernel.n();
  out << n << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << format_double(kernel(i, j));
    }
    out << '\n';
  }
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::T: return "t";
    case Mode::MKL: return "mkl";
    case Mode::AK: return "ak";
  }
  return "?";
}

const char* loss_name(LossKind loss) {
  return loss == LossKind::STE ? "ste" : "gnmds";
}

Mode parse_mode(const std::string& name) {
  if (name == "t") return Mode::T;
  if (name == "mkl") return Mode::MKL;
  if (name == "ak") return Mode::AK;
  throw ParseError("unknown mode '" + name + "' (expected t, mkl, or ak)");
}

LossKind parse_loss(const std::string& name) {
  if (name == "ste") return LossKind::STE;
  if (name == "gnmds") return LossKind::GNMDS;
  throw ParseError("unknown loss '" + name + "' (expected ste or gnmds)");
}

namespace {

ordered_json config_to_json(const SolverConfig& config) {
  return ordered_json{{"loss", loss_name(config.loss)},
                      {"mode", mode_name(config.mode)},
                      {"lambda1", config.lambda1},
                      {"lambda2", config.lambda2},
                      {"eta", config.eta},
                      {"max_iters", config.max_iters},
                      {"rel_tol", config.rel_tol},
                      {"seed", config.seed},
                      {"adaptive_step", config.adaptive_step}};
}

std::vector<double> matrix_to_rows(const Eigen::MatrixXd& m) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
  }
  return values;
}

Eigen::MatrixXd rows_to_matrix(const std::vector<double>& values, int n,
                               const std::string& what) {
  if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != values.size()) {
    throw ParseError(what + " has " + std::to_string(values.size()) +
                     " entries, expected n*n");
  }
  Eigen::MatrixXd m(n, n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = values[k++];
  }
  return m;
}

void reject_unknown_keys(const ordered_json& object, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      throw ParseError("unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

ModelFile to_model_file(int n, const ModelState& state, const SolverConfig& config) {
  ModelFile model;
  model.n = n;
  model.config = config;
  model.k0 = state.k0.entries();
  model.weights = state.bank.weights();
  model.composed = state.composed.entries();
  model.objective_history = state.objective_history;
  model.iterations_run = state.iterations_run;
  model.converged = state.converged;
  return model;
}

void write_model(const std::string& path, const ModelFile& model) {
  ordered_json doc;
  doc["format"] = "rckl-model-v1";
  doc["n"] = model.n;
  doc["config"] = config_to_json(model.config);
  doc["k0"] = matrix_to_rows(model.k0);
  doc["mu"] = std::vector<double>(model.weights.begin(), model.weights.end());
  doc["composed"] = matrix_to_rows(model.composed);
  doc["objective_history"] = model.objective_history;
  doc["iterations_run"] = model.iterations_run;
  doc["converged"] = model.converged;
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

namespace {

SolverConfig solver_config_from_json(const ordered_json& section, const std::string& where) {
  if (!section.is_object()) throw ParseError(where + ": expected a JSON object");
  reject_unknown_keys(section,
                      {"loss", "mode", "lambda1", "lambda2", "eta", "max_iters", "rel_tol",
                       "seed", "adaptive_step"},
                      where);
  SolverConfig config;
  try {
    if (section.contains("loss")) config.loss = parse_loss(section.at("loss").get<std::string>());
    if (section.contains("mode")) config.mode = parse_mode(section.at("mode").get<std::string>());
    if (section.contains("lambda1")) config.lambda1 = section.at("lambda1").get<double>();
    if (section.contains("lambda2")) config.lambda2 = section.at("lambda2").get<double>();
    if (section.contains("eta")) config.eta = section.at("eta").get<double>();
    if (section.contains("max_iters")) config.max_iters = section.at("max_iters").get<int>();
    if (section.contains("rel_tol")) config.rel_tol = section.at("rel_tol").get<double>();
    if (section.contains("seed")) config.seed = section.at("seed").get<std::uint64_t>();
    if (section.contains("adaptive_step")) {
      config.adaptive_step = section.at("adaptive_step").get<bool>();
    }
  } catch (const ordered_json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  if (config.lambda1 < 0 || config.lambda2 < 0) {
    throw ParseError(where + ": lambda values must be nonnegative");
  }
  if (!(config.eta > 0)) throw ParseError(where + ": eta must be positive");
  if (config.max_iters < 0) throw ParseError(where + ": max_iters must be nonnegative");
  if (!(config.rel_tol > 0)) throw ParseError(where + ": rel_tol must be positive");
  return config;
}

}  // namespace

ModelFile read_model(const std::string& path) {
  auto in = open_input(path);
  ordered_json doc;
  try {
    in >> doc;
  } catch (const ordered_json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(path + ": model file must be a JSON object");
  reject_unknown_keys(doc,
                      {"format", "n", "config", "k0", "mu", "composed", "objective_history",
                       "iterations_run", "converged"},
                      path);
  ModelFile model;
  try {
    if (doc.value("format", std::string()) != "rckl-model-v1") {
      throw ParseError(path + ": not a model file (bad format tag)");
    }
    model.n = doc.at("n").get<int>();
    if (model.n < 1) throw ParseError(path + ": object count must be positive");
    model.config = solver_config_from_json(doc.at("config"), path + ": config");
    model.k0 = rows_to_matrix(doc.at("k0").get<std::vector<double>>(), model.n, "k0");
    const auto mu = doc.at("mu").get<std::vector<double>>();
    model.weights = Eigen::Map<const Eigen::VectorXd>(mu.data(),
                                                      static_cast<Eigen::Index>(mu.size()));
    model.composed =
        rows_to_matrix(doc.at("composed").get<std::vector<double>>(), model.n, "composed");
    model.objective_history = doc.at("objective_history").get<std::vector<double>>();
    model.iterations_run = doc.at("iterations_run").get<int>();
    model.converged = doc.at("converged").get<bool>();
  } catch (const ordered_json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return model;
}

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records,
                       int arms) {
  out << "trial,subset,method,loss,test_error,lambda1,lambda2";
  for (int i = 1; i <= arms; ++i) out << ",mu_" << i;
  out << ",rank_k0,status\r\n";
  for (const ExperimentRecord& rec : records) {
    out << rec.trial << ',' << rec.subset << ',' << mode_name(rec.mode) << ','
        << loss_name(rec.loss) << ',';
    if (rec.status == "ok") out << format_sig6(rec.test_error);
    out << ',' << format_sig6(rec.lambda1) << ',' << format_sig6(rec.lambda2);
    for (int i = 0; i < arms; ++i) {
      const double w =
          i < static_cast<int>(rec.weights.size()) ? rec.weights[i] : 0.0;
      out << ',' << format_sig6(w);
    }
    out << ',' << rec.rank_k0 << ',' << rec.status << "\r\n";
  }
}

void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records,
                       int arms) {
  auto out = open_output(path);
  write_records_csv(out, records, arms);
}

namespace {

ExperimentConfig experiment_from_json(const ordered_json& section, const std::string& where,
                                      const ExperimentConfig& base) {
  if (!section.is_object()) throw ParseError(where + ": expected a JSON object");
  reject_unknown_keys(section,
                      {"trials", "rounds", "train_rounds", "validation_rounds", "subsets",
                       "methods", "lambda1_grid", "lambda2_grid", "eta", "max_iters",
                       "rel_tol", "adaptive_step", "threads"},
                      where);
  ExperimentConfig config = base;
  try {
    if (section.contains("trials")) config.trials = section.at("trials").get<int>();
    if (section.contains("rounds")) config.rounds = section.at("rounds").get<int>();
    if (section.contains("train_rounds")) {
      config.train_rounds = section.at("train_rounds").get<int>();
    }
    if (section.contains("validation_rounds")) {
      config.validation_rounds = section.at("validation_rounds").get<int>();
    }
    if (section.contains("subsets")) config.subsets = section.at("subsets").get<int>();
    if (section.contains("methods")) {
      config.methods.clear();
      for (const auto& entry : section.at("methods")) {
        if (!entry.is_array() || entry.size() != 2) {
          throw ParseError(where + ": each method must be a [mode, loss] pair");
        }
        config.methods.emplace_back(parse_mode(entry.at(0).get<std::string>()),
                                    parse_loss(entry.at(1).get<std::string>()));
      }
    }
    if (section.contains("lambda1_grid")) {
      config.lambda1_grid = section.at("lambda1_grid").get<std::vector<double>>();
    }
    if (section.contains("lambda2_grid")) {
      config.lambda2_grid = section.at("lambda2_grid").get<std::vector<double>>();
    }
    if (section.contains("eta")) config.eta = section.at("eta").get<double>();
    if (section.contains("max_iters")) config.max_iters = section.at("max_iters").get<int>();
    if (section.contains("rel_tol")) config.rel_tol = section.at("rel_tol").get<double>();
    if (section.contains("adaptive_step")) {
      config.adaptive_step = section.at("adaptive_step").get<bool>();
    }
    if (section.contains("threads")) config.threads = section.at("threads").get<int>();
  } catch (const ordered_json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  if (config.trials < 0) throw ParseError(where + ": trials must be nonnegative");
  if (config.rounds < 1) throw ParseError(where + ": rounds must be positive");
  if (config.train_rounds < 1 || config.validation_rounds < 1) {
    throw ParseError(where + ": train and validation rounds must be positive");
  }
  if (config.subsets < 1) throw ParseError(where + ": subsets must be positive");
  for (double v : config.lambda1_grid) {
    if (v < 0) throw ParseError(where + ": lambda1_grid values must be nonnegative");
  }
  for (double v : config.lambda2_grid) {
    if (v < 0) throw ParseError(where + ": lambda2_grid values must be nonnegative");
  }
  if (!(config.eta > 0)) throw ParseError(where + ": eta must be positive");
  if (config.max_iters < 0) throw ParseError(where + ": max_iters must be nonnegative");
  if (!(config.rel_tol > 0)) throw ParseError(where + ": rel_tol must be positive");
  if (config.threads < 0) throw ParseError(where + ": threads must be nonnegative");
  return config;
}

SyntheticSpec synthetic_from_json(const ordered_json& section, const std::string& where,
                                  const SyntheticSpec& base) {
  if (!section.is_object()) throw ParseError(where + ": expected a JSON object");
  reject_unknown_keys(section, {"n", "noise_sigma", "truth_weights", "seed"}, where);
  SyntheticSpec spec = base;
  try {
    if (section.contains("n")) spec.n = section.at("n").get<int>();
    if (section.contains("noise_sigma")) {
      spec.noise_sigma = section.at("noise_sigma").get<double>();
    }
    if (section.contains("truth_weights")) {
      const auto weights = section.at("truth_weights").get<std::vector<double>>();
      if (weights.size() != spec.truth_weights.size()) {
        throw ParseError(where + ": truth_weights must have " +
                         std::to_string(spec.truth_weights.size()) + " entries");
      }
      std::copy(weights.begin(), weights.end(), spec.truth_weights.begin());
    }
    if (section.contains("seed")) spec.seed = section.at("seed").get<std::uint64_t>();
  } catch (const ordered_json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  if (spec.n < 3) throw ParseError(where + ": n must be at least 3");
  if (spec.noise_sigma < 0) throw ParseError(where + ": noise_sigma must be nonnegative");
  for (double w : spec.truth_weights) {
    if (!(w > 0)) throw ParseError(where + ": truth_weights must be positive");
  }
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& name) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(name + ": config must be a JSON object");
  reject_unknown_keys(doc, {"solver", "synthetic", "experiment", "files"}, name);

  RunConfig config;
  if (doc.contains("solver")) {
    config.solver = solver_config_from_json(doc.at("solver"), name + ": solver");
  }
  if (doc.contains("synthetic")) {
    config.experiment.spec =
        synthetic_from_json(doc.at("synthetic"), name + ": synthetic", config.experiment.spec);
  }
  if (doc.contains("experiment")) {
    config.experiment =
        experiment_from_json(doc.at("experiment"), name + ": experiment", config.experiment);
  }
  if (doc.contains("files")) {
    const auto& files = doc.at("files");
    if (!files.is_object()) throw ParseError(name + ": files: expected a JSON object");
    reject_unknown_keys(files, {"triplets", "kernels", "output"}, name + ": files");
    try {
      if (files.contains("triplets")) {
        config.triplets_path = files.at("triplets").get<std::string>();
      }
      if (files.contains("kernels")) {
        config.kernel_paths = files.at("kernels").get<std::vector<std::string>>();
      }
      if (files.contains("output")) config.output_path = files.at("output").get<std::string>();
    } catch (const ordered_json::exception& e) {
      throw ParseError(name + ": files: " + e.what());
    }
  }
  return config;
}

RunConfig read_config(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace rckl
