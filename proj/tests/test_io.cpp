#include "rckl/io.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rckl/errors.hpp"
#include "rckl/rng.hpp"

using namespace rckl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rckl_io_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("triplet files") {
  const std::string path = temp_path("triplets.txt");

  SUBCASE("round trip is byte-identical") {
    const TripletSet set(5, {{0, 1, 2}, {4, 3, 0}, {2, 0, 4}});
    write_triplets(path, set);
    const TripletSet back = read_triplets(path);
    CHECK(back.triplets() == set.triplets());
    const std::string once = slurp(path);
    write_triplets(path, back);
    CHECK(slurp(path) == once);
  }

  SUBCASE("comments and blank lines are skipped") {
    spit(path, "# header\n0,1,2\n\n 2 , 3 , 1  # trailing\n");
    const TripletSet set = read_triplets(path);
    REQUIRE(set.size() == 2);
    CHECK(set.triplets()[1] == Triplet{2, 3, 1});
    CHECK(set.n() == 4);
  }

  SUBCASE("parse errors carry line numbers") {
    spit(path, "0,1,2\n0,1\n");
    CHECK_THROWS_WITH_AS(read_triplets(path), doctest::Contains(":2:"), ParseError);

    spit(path, "0,1,2\n0,x,2\n");
    try {
      read_triplets(path);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }

    spit(path, "0,1,2\n0,1,2\n");
    CHECK_THROWS_WITH_AS(read_triplets(path), doctest::Contains("duplicate"), ParseError);

    spit(path, "0,1,1\n");
    CHECK_THROWS_AS(read_triplets(path), ParseError);

    CHECK_THROWS_AS(read_triplets(temp_path("missing.txt")), ParseError);
  }

  SUBCASE("an explicit object count bounds the indices") {
    spit(path, "0,1,5\n");
    CHECK_THROWS_AS(read_triplets(path, 4), ParseError);
    CHECK(read_triplets(path, 6).n() == 6);
  }
}

TEST_CASE("kernel csv") {
  const std::string path = temp_path("kernel.csv");
  std::mt19937_64 rng(3u);

  SUBCASE("round trip is byte-identical and exact") {
    Eigen::MatrixXd m(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        m(i, j) = gaussian(rng);
        m(j, i) = m(i, j);
      }
    }
    write_kernel_csv(path, KernelMatrix(m));
    const KernelMatrix back = read_kernel_csv(path);
    CHECK(back.entries() == m);
    const std::string once = slurp(path);
    write_kernel_csv(path, back);
    CHECK(slurp(path) == once);
  }

  SUBCASE("asymmetry beyond 1e-9 is rejected") {
    spit(path, "2\n1.0,0.5\n0.5000001,1.0\n");
    CHECK_THROWS_WITH_AS(read_kernel_csv(path), doctest::Contains("symmetric"), ParseError);
  }

  SUBCASE("mild asymmetry is symmetrized exactly") {
    spit(path, "2\n1.0,0.5\n0.50000000000001,1.0\n");
    const KernelMatrix k = read_kernel_csv(path);
    CHECK(k(0, 1) == k(1, 0));
  }

  SUBCASE("shape errors carry line numbers") {
    spit(path, "2\n1.0,0.0\n");
    CHECK_THROWS_WITH_AS(read_kernel_csv(path), doctest::Contains(":3:"), ParseError);
    spit(path, "2\n1.0,0.0,3.0\n0.0,1.0\n");
    CHECK_THROWS_WITH_AS(read_kernel_csv(path), doctest::Contains(":2:"), ParseError);
  }
}

TEST_CASE("model files") {
  const std::string path = temp_path("model.json");

  const TripletSet set(4, {{0, 1, 2}, {1, 2, 3}, {3, 1, 0}});
  std::mt19937_64 rng(5u);
  Eigen::MatrixXd f(4, 2);
  for (int i = 0; i < 8; ++i) f(i / 2, i % 2) = uniform_unit(rng);
  const AuxKernelBank bank({unit_trace_normalize(linear_kernel(f))},
                           Eigen::VectorXd::Zero(1));
  SolverConfig config;
  config.mode = Mode::AK;
  config.lambda1 = 1e-3;
  config.lambda2 = 1e-4;
  config.max_iters = 60;
  const ModelState state = fit(4, set, bank, config);

  SUBCASE("round trip preserves evaluation exactly") {
    write_model(path, to_model_file(4, state, config));
    const ModelFile back = read_model(path);
    CHECK(back.n == 4);
    CHECK(back.k0 == state.k0.entries());
    CHECK(back.composed == state.composed.entries());
    CHECK(back.weights == state.bank.weights());
    CHECK(back.objective_history == state.objective_history);
    CHECK(back.config.lambda1 == config.lambda1);

    const double direct = error_rate(set, state.composed);
    const double loaded = error_rate(set, KernelMatrix(back.composed));
    CHECK(std::abs(direct - loaded) <= 1e-12);

    const std::string once = slurp(path);
    write_model(path, back);
    CHECK(slurp(path) == once);
  }

  SUBCASE("unknown keys are rejected") {
    write_model(path, to_model_file(4, state, config));
    std::string text = slurp(path);
    text.insert(text.find("\"n\""), "\"surprise\": 1,\n  ");
    spit(path, text);
    CHECK_THROWS_WITH_AS(read_model(path), doctest::Contains("surprise"), ParseError);
  }

  SUBCASE("wrong entry counts are rejected") {
    ModelFile broken = to_model_file(4, state, config);
    broken.n = 5;
    write_model(path, broken);
    CHECK_THROWS_AS(read_model(path), ParseError);
  }
}

TEST_CASE("config documents") {
  SUBCASE("defaults for an empty document") {
    const RunConfig config = parse_config("{}", "inline");
    CHECK(config.solver.eta == 1.0);
    CHECK(config.solver.max_iters == 1000);
    CHECK(config.solver.rel_tol == 1e-6);
    CHECK(config.solver.adaptive_step);
    CHECK(config.experiment.spec.n == 100);
    CHECK(config.experiment.spec.noise_sigma == 0.1);
    CHECK(config.experiment.trials == 10);
    CHECK(config.experiment.rounds == 100);
    CHECK(config.experiment.train_rounds == 20);
    CHECK(config.experiment.validation_rounds == 10);
    CHECK(config.experiment.subsets == 10);
    CHECK(config.experiment.lambda1_grid ==
          std::vector<double>{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0});
    CHECK(config.experiment.methods.size() == 6);
  }

  SUBCASE("sections override the defaults") {
    const char* text = R"({
      "solver": {"loss": "gnmds", "mode": "t", "lambda1": 0.5, "eta": 2.0},
      "synthetic": {"n": 40, "noise_sigma": 0.05, "seed": 9},
      "experiment": {"trials": 3, "methods": [["ak", "ste"]], "threads": 1},
      "files": {"triplets": "t.txt", "kernels": ["a.csv"], "output": "out.csv"}
    })";
    const RunConfig config = parse_config(text, "inline");
    CHECK(config.solver.loss == LossKind::GNMDS);
    CHECK(config.solver.mode == Mode::T);
    CHECK(config.solver.lambda1 == 0.5);
    CHECK(config.solver.eta == 2.0);
    CHECK(config.experiment.spec.n == 40);
    CHECK(config.experiment.spec.seed == 9);
    CHECK(config.experiment.trials == 3);
    REQUIRE(config.experiment.methods.size() == 1);
    CHECK(config.experiment.methods[0].first == Mode::AK);
    CHECK(config.triplets_path == "t.txt");
    CHECK(config.kernel_paths == std::vector<std::string>{"a.csv"});
    CHECK(config.output_path == "out.csv");
  }

  SUBCASE("unknown keys anywhere are rejected") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"solvers": {}})", "x"),
                         doctest::Contains("solvers"), ParseError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"solver": {"step": 1}})", "x"),
                         doctest::Contains("step"), ParseError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": {"trial": 1}})", "x"),
                         doctest::Contains("trial"), ParseError);
  }

  SUBCASE("numeric ranges are validated") {
    CHECK_THROWS_AS(parse_config(R"({"solver": {"eta": 0.0}})", "x"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({"solver": {"lambda1": -1}})", "x"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({"solver": {"rel_tol": 0}})", "x"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({"synthetic": {"n": 2}})", "x"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({"synthetic": {"noise_sigma": -0.1}})", "x"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"subsets": 0}})", "x"), ParseError);
    CHECK_THROWS_AS(parse_config("[]", "x"), ParseError);
    CHECK_THROWS_AS(parse_config("{", "x"), ParseError);
  }
}

TEST_CASE("records csv") {
  std::vector<ExperimentRecord> records(2);
  records[0].trial = 1;
  records[0].subset = 1;
  records[0].mode = Mode::AK;
  records[0].loss = LossKind::STE;
  records[0].status = "ok";
  records[0].test_error = 0.123456789;
  records[0].lambda1 = 0.01;
  records[0].lambda2 = 100.0;
  records[0].weights = Eigen::Vector3d(0.5, 0.25, 0.0);
  records[0].rank_k0 = 12;
  records[1].trial = 1;
  records[1].subset = 2;
  records[1].mode = Mode::T;
  records[1].loss = LossKind::GNMDS;
  records[1].status = "E_DIVERGE";

  std::ostringstream out;
  write_records_csv(out, records, 3);
  const std::string text = out.str();

  CHECK(text == "trial,subset,method,loss,test_error,lambda1,lambda2,mu_1,mu_2,mu_3,"
                "rank_k0,status\r\n"
                "1,1,ak,ste,0.123457,0.01,100,0.5,0.25,0,12,ok\r\n"
                "1,2,t,gnmds,,0,0,0,0,0,0,E_DIVERGE\r\n");

  // Strict CSV shape: CRLF records, constant field count, no bare quotes.
  std::istringstream lines(text);
  std::string line;
  int fields = -1;
  while (std::getline(lines, line)) {
    REQUIRE(!line.empty());
    REQUIRE(line.back() == '\r');
    CHECK(line.find('"') == std::string::npos);
    const int count = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    if (fields < 0) fields = count;
    CHECK(count == fields);
  }
}
