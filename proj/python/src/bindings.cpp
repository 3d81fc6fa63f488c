#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rckl/errors.hpp"
#include "rckl/kernels.hpp"
#include "rckl/losses.hpp"
#include "rckl/solver.hpp"
#include "rckl/synthbench.hpp"
#include "rckl/triplets.hpp"

namespace py = pybind11;
using namespace rckl;

namespace {

using PyTriplet = std::tuple<int, int, int>;

TripletSet to_set(int n, const std::vector<PyTriplet>& triplets) {
  TripletSet set(n);
  for (const auto& [a, b, c] : triplets) set.add(Triplet{a, b, c});
  return set;
}

std::vector<PyTriplet> from_set(const TripletSet& set) {
  std::vector<PyTriplet> out;
  out.reserve(set.size());
  for (const Triplet& t : set) out.emplace_back(t.a, t.b, t.c);
  return out;
}

AuxKernelBank to_bank(const std::vector<Eigen::MatrixXd>& kernels,
                      std::optional<Eigen::VectorXd> weights) {
  std::vector<KernelMatrix> members;
  members.reserve(kernels.size());
  for (const auto& k : kernels) members.emplace_back(k);
  Eigen::VectorXd w = weights.value_or(
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kernels.size())));
  return AuxKernelBank(std::move(members), std::move(w));
}

}  // namespace

PYBIND11_MODULE(_rckl, m) {
  m.doc() = "Kernel learning from relative-comparison triplets";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConflictError>(m, "ConflictError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::enum_<LossKind>(m, "LossKind")
      .value("STE", LossKind::STE)
      .value("GNMDS", LossKind::GNMDS);

  py::enum_<Mode>(m, "Mode")
      .value("T", Mode::T)
      .value("MKL", Mode::MKL)
      .value("AK", Mode::AK);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init([](LossKind loss, Mode mode, double lambda1, double lambda2, double eta,
                       int max_iters, double rel_tol, std::uint64_t seed,
                       bool adaptive_step) {
             SolverConfig config;
             config.loss = loss;
             config.mode = mode;
             config.lambda1 = lambda1;
             config.lambda2 = lambda2;
             config.eta = eta;
             config.max_iters = max_iters;
             config.rel_tol = rel_tol;
             config.seed = seed;
             config.adaptive_step = adaptive_step;
             return config;
           }),
           py::arg("loss") = LossKind::STE, py::arg("mode") = Mode::AK,
           py::arg("lambda1") = 0.0, py::arg("lambda2") = 0.0, py::arg("eta") = 1.0,
           py::arg("max_iters") = 1000, py::arg("rel_tol") = 1e-6, py::arg("seed") = 0,
           py::arg("adaptive_step") = true)
      .def_readwrite("loss", &SolverConfig::loss)
      .def_readwrite("mode", &SolverConfig::mode)
      .def_readwrite("lambda1", &SolverConfig::lambda1)
      .def_readwrite("lambda2", &SolverConfig::lambda2)
      .def_readwrite("eta", &SolverConfig::eta)
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("rel_tol", &SolverConfig::rel_tol)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("adaptive_step", &SolverConfig::adaptive_step);

  py::class_<ModelState>(m, "ModelState")
      .def_property_readonly("k0",
                             [](const ModelState& s) { return s.k0.entries(); })
      .def_property_readonly("mu",
                             [](const ModelState& s) { return s.bank.weights(); })
      .def_property_readonly("composed",
                             [](const ModelState& s) { return s.composed.entries(); })
      .def_readonly("objective_history", &ModelState::objective_history)
      .def_readonly("iterations_run", &ModelState::iterations_run)
      .def_readonly("converged", &ModelState::converged);

  // Triplet operations take and return plain (a, b, c) tuples.
  m.def("total_triplet_count", &total_triplet_count, py::arg("n"),
        "Number of distinct comparisons over n objects.");
  m.def(
      "transitive_closure",
      [](int n, const std::vector<PyTriplet>& triplets) {
        return from_set(transitive_closure(to_set(n, triplets)));
      },
      py::arg("n"), py::arg("triplets"));
  m.def(
      "inferred_triplets",
      [](int n, const std::vector<PyTriplet>& triplets) {
        return from_set(inferred_triplets(to_set(n, triplets)));
      },
      py::arg("n"), py::arg("triplets"));
  m.def(
      "detect_conflicts",
      [](int n, const std::vector<PyTriplet>& triplets) {
        std::vector<std::pair<PyTriplet, PyTriplet>> out;
        for (const auto& [t, r] : detect_conflicts(to_set(n, triplets))) {
          out.emplace_back(PyTriplet{t.a, t.b, t.c}, PyTriplet{r.a, r.b, r.c});
        }
        return out;
      },
      py::arg("n"), py::arg("triplets"));
  m.def(
      "adversarial_order",
      [](int n, std::uint64_t seed) {
        std::vector<PyTriplet> out;
        for (const Triplet& t : adversarial_order(n, seed)) out.emplace_back(t.a, t.b, t.c);
        return out;
      },
      py::arg("n"), py::arg("seed") = 0,
      "All triplets over n objects, ordered so every prefix infers nothing.");
  m.def(
      "satisfied",
      [](const PyTriplet& t, const Eigen::MatrixXd& kernel) {
        const auto& [a, b, c] = t;
        return satisfied(Triplet{a, b, c}, KernelMatrix(kernel));
      },
      py::arg("triplet"), py::arg("kernel"));
  m.def(
      "error_rate",
      [](const std::vector<PyTriplet>& triplets, const Eigen::MatrixXd& kernel) {
        const KernelMatrix k(kernel);
        return error_rate(to_set(k.n(), triplets), k);
      },
      py::arg("triplets"), py::arg("kernel"),
      "Fraction of triplets unsatisfied by the kernel.");

  // Kernel operations work on numpy arrays.
  m.def(
      "kernel_distance",
      [](const Eigen::MatrixXd& kernel, int a, int b) {
        return kernel_distance(KernelMatrix(kernel), a, b);
      },
      py::arg("kernel"), py::arg("a"), py::arg("b"));
  m.def(
      "project_psd",
      [](const Eigen::MatrixXd& m) { return project_psd(m).entries(); }, py::arg("matrix"),
      "Frobenius-nearest positive semidefinite matrix.");
  m.def(
      "linear_kernel",
      [](const Eigen::MatrixXd& features) { return linear_kernel(features).entries(); },
      py::arg("features"));
  m.def(
      "gaussian_kernel",
      [](const Eigen::MatrixXd& features, double sigma) {
        return gaussian_kernel(features, sigma).entries();
      },
      py::arg("features"), py::arg("sigma"));
  m.def(
      "unit_trace_normalize",
      [](const Eigen::MatrixXd& kernel) {
        return unit_trace_normalize(KernelMatrix(kernel)).entries();
      },
      py::arg("kernel"));
  m.def(
      "numerical_rank",
      [](const Eigen::MatrixXd& kernel, double tol) {
        return numerical_rank(KernelMatrix(kernel), tol);
      },
      py::arg("kernel"), py::arg("tol") = 1e-6);
  m.def(
      "conic_combine",
      [](const std::vector<Eigen::MatrixXd>& kernels, const Eigen::VectorXd& weights) {
        return conic_combine(to_bank(kernels, weights)).entries();
      },
      py::arg("kernels"), py::arg("weights"));
  m.def(
      "compose_ak",
      [](const Eigen::MatrixXd& k0, const std::vector<Eigen::MatrixXd>& kernels,
         const Eigen::VectorXd& weights) {
        return compose_ak(KernelMatrix(k0), to_bank(kernels, weights)).entries();
      },
      py::arg("k0"), py::arg("kernels"), py::arg("weights"));

  // Losses.
  m.def(
      "ste_probability",
      [](const Eigen::MatrixXd& kernel, const PyTriplet& t) {
        const auto& [a, b, c] = t;
        return ste_probability(KernelMatrix(kernel), Triplet{a, b, c});
      },
      py::arg("kernel"), py::arg("triplet"));
  auto loss_binding = [](LossKind kind) {
    return [kind](const Eigen::MatrixXd& k0, const std::vector<Eigen::MatrixXd>& kernels,
                  const Eigen::VectorXd& weights, const std::vector<PyTriplet>& triplets) {
      const KernelMatrix learned(k0);
      const AuxKernelBank bank = to_bank(kernels, weights);
      const TripletSet set = to_set(learned.n(), triplets);
      const LossEval eval = kind == LossKind::STE ? ste_loss(learned, bank, set)
                                                  : gnmds_loss(learned, bank, set);
      return py::make_tuple(eval.value, eval.grad_k0, eval.grad_mu);
    };
  };
  m.def("ste_loss", loss_binding(LossKind::STE), py::arg("k0"), py::arg("kernels"),
        py::arg("weights"), py::arg("triplets"),
        "Returns (value, grad_k0, grad_mu).");
  m.def("gnmds_loss", loss_binding(LossKind::GNMDS), py::arg("k0"), py::arg("kernels"),
        py::arg("weights"), py::arg("triplets"),
        "Returns (value, grad_k0, grad_mu).");
  m.def(
      "active_triplets",
      [](const Eigen::MatrixXd& kernel, const std::vector<PyTriplet>& triplets) {
        const KernelMatrix k(kernel);
        return from_set(active_triplets(k, to_set(k.n(), triplets)));
      },
      py::arg("kernel"), py::arg("triplets"));

  // Solver.
  m.def(
      "fit",
      [](int n, const std::vector<PyTriplet>& triplets,
         const std::vector<Eigen::MatrixXd>& kernels, const SolverConfig& config) {
        return fit(n, to_set(n, triplets), to_bank(kernels, std::nullopt), config);
      },
      py::arg("n"), py::arg("triplets"), py::arg("kernels") = std::vector<Eigen::MatrixXd>{},
      py::arg("config") = SolverConfig{},
      "Projected gradient descent; returns a ModelState.");

  // Synthetic study pieces.
  py::class_<TruthOracle>(m, "TruthOracle")
      .def(py::init([](const Eigen::MatrixXd& truth) {
             return TruthOracle(KernelMatrix(truth));
           }),
           py::arg("truth"))
      .def(
          "answer",
          [](const TruthOracle& oracle, int a, int b, int c) -> py::object {
            const auto t = oracle.answer(a, b, c);
            if (!t) return py::none();
            return py::make_tuple(t->a, t->b, t->c);
          },
          py::arg("a"), py::arg("b"), py::arg("c"));

  m.def(
      "generate_synthetic",
      [](int n, double noise_sigma, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.n = n;
        spec.noise_sigma = noise_sigma;
        spec.seed = seed;
        SyntheticData data = generate_synthetic(spec);
        std::vector<Eigen::MatrixXd> bank;
        for (const KernelMatrix& k : data.bank.kernels()) bank.push_back(k.entries());
        return py::make_tuple(data.truth.entries(), bank, TruthOracle(data.truth));
      },
      py::arg("n") = 100, py::arg("noise_sigma") = 0.1, py::arg("seed") = 0,
      "Returns (truth kernel, auxiliary kernels, oracle).");
  m.def(
      "make_rounds",
      [](const TruthOracle& oracle, int n, int count, std::uint64_t seed) {
        std::vector<std::vector<PyTriplet>> out;
        for (const Round& round : make_rounds(oracle, n, count, seed)) {
          std::vector<PyTriplet> batch;
          for (const Triplet& t : round.triplets) batch.emplace_back(t.a, t.b, t.c);
          out.push_back(std::move(batch));
        }
        return out;
      },
      py::arg("oracle"), py::arg("n"), py::arg("count"), py::arg("seed") = 0);
}
