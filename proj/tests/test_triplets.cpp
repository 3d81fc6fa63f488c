#include "rckl/triplets.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "rckl/kernels.hpp"
#include "rckl/rng.hpp"

using namespace rckl;

namespace {

// Counts triplets the way the counting argument does: ordered pairs of
// distinct object pairs sharing an object, halved for the (a,b,c)/(a,c,b)
// pairing. Independent of total_triplet_count.
std::uint64_t count_by_enumeration(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::uint64_t ordered = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      if (p == q) continue;
      const auto [a, b] = pairs[p];
      const auto [c, d] = pairs[q];
      const int shared = (a == c || a == d) ? a : ((b == c || b == d) ? b : -1);
      if (shared >= 0) ++ordered;
    }
  }
  return ordered / 2;
}

// Closure oracle: Floyd-Warshall transitive closure on the pair-vertex
// adjacency matrix, then a triplet per connected vertex pair sharing a head.
std::set<Triplet> closure_by_floyd_warshall(const TripletSet& set) {
  std::vector<std::pair<int, int>> pairs;
  std::map<std::pair<int, int>, int> ids;
  auto intern = [&](int x, int y) {
    const auto key = std::minmax(x, y);
    auto [it, inserted] = ids.try_emplace(key, static_cast<int>(pairs.size()));
    if (inserted) pairs.push_back(key);
    return it->second;
  };
  std::vector<std::vector<char>> reach;
  for (const Triplet& t : set) {
    intern(t.a, t.b);
    intern(t.a, t.c);
  }
  reach.assign(pairs.size(), std::vector<char>(pairs.size(), 0));
  for (const Triplet& t : set) reach[intern(t.a, t.b)][intern(t.a, t.c)] = 1;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (reach[k][j]) reach[i][j] = 1;
      }
    }
  }
  std::set<Triplet> closure;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      if (!reach[i][j] || i == j) continue;
      const auto [p, q] = pairs[i];
      const auto [r, s] = pairs[j];
      int head = -1;
      if (p == r || p == s) head = p;
      else if (q == r || q == s) head = q;
      if (head < 0) continue;
      closure.insert(Triplet{head, p == head ? q : p, r == head ? s : r});
    }
  }
  return closure;
}

std::set<Triplet> as_set(const TripletSet& set) {
  return std::set<Triplet>(set.begin(), set.end());
}

TripletSet random_set(int n, int count, std::mt19937_64& rng) {
  TripletSet set(n);
  for (int i = 0; i < count; ++i) {
    const int a = static_cast<int>(uniform_below(rng, n));
    int b = static_cast<int>(uniform_below(rng, n - 1));
    if (b >= a) ++b;
    int c = static_cast<int>(uniform_below(rng, n - 2));
    for (int skip : {std::min(a, b), std::max(a, b)}) {
      if (c >= skip) ++c;
    }
    set.add(Triplet{a, b, c});
  }
  return set;
}

KernelMatrix random_psd_kernel(int n, std::mt19937_64& rng) {
  Eigen::MatrixXd f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) f(i, j) = gaussian(rng);
  }
  return linear_kernel(f);
}

}  // namespace

TEST_CASE("triplet set validates members") {
  TripletSet set(4);
  CHECK(set.add({0, 1, 2}));
  CHECK_FALSE(set.add({0, 1, 2}));  // duplicate
  CHECK(set.add({0, 2, 1}));        // reverse is a different triplet
  CHECK_THROWS_AS(set.add({0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(set.add({0, 1, 4}), std::invalid_argument);
  CHECK_THROWS_AS(set.add({-1, 1, 2}), std::invalid_argument);
  CHECK(set.size() == 2);
  CHECK(set.contains({0, 2, 1}));
  CHECK_FALSE(set.contains({1, 0, 2}));
}

TEST_CASE("total triplet count") {
  CHECK(total_triplet_count(3) == 3);
  CHECK(total_triplet_count(4) == 12);
  CHECK(total_triplet_count(100) == 485100);
  CHECK_THROWS_AS(total_triplet_count(2), std::invalid_argument);

  for (int n = 3; n <= 7; ++n) {
    CAPTURE(n);
    CHECK(total_triplet_count(n) == count_by_enumeration(n));
  }
}

TEST_CASE("transitive closure follows chained comparisons") {
  SUBCASE("two-edge chain through a shared pair") {
    // (a,b,c)=(0,1,2) and (c,a,b)=(2,0,1) infer (b,a,c)=(1,0,2)
    TripletSet set(3, {{0, 1, 2}, {2, 0, 1}});
    const TripletSet closure = transitive_closure(set);
    CHECK(closure.size() == 3);
    CHECK(closure.contains({1, 0, 2}));
    const TripletSet extra = inferred_triplets(set);
    CHECK(extra.size() == 1);
    CHECK(extra.contains({1, 0, 2}));
  }

  SUBCASE("single triplet infers nothing") {
    TripletSet set(4, {{1, 2, 3}});
    CHECK(transitive_closure(set).size() == 1);
    CHECK(inferred_triplets(set).empty());
  }

  SUBCASE("shared head chain") {
    // d(1,2)<d(1,3)<d(1,4) chains to d(1,2)<d(1,4)
    TripletSet set(5, {{1, 2, 3}, {1, 3, 4}});
    const TripletSet closure = transitive_closure(set);
    CHECK(closure.contains({1, 2, 4}));
    CHECK(closure.size() == 3);
  }

  SUBCASE("empty set") {
    TripletSet set(3);
    CHECK(inferred_triplets(set).empty());
  }
}

TEST_CASE("closure matches an independent Floyd-Warshall oracle") {
  std::mt19937_64 rng(0x5eedu);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + static_cast<int>(uniform_below(rng, 5));  // 3..7
    const int count = 1 + static_cast<int>(uniform_below(rng, 12));
    const TripletSet set = random_set(n, count, rng);
    CAPTURE(trial);
    CHECK(as_set(transitive_closure(set)) == closure_by_floyd_warshall(set));
  }
}

TEST_CASE("closure is idempotent and monotone") {
  std::mt19937_64 rng(0xabcdu);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(uniform_below(rng, 5));
    const TripletSet set = random_set(n, 1 + static_cast<int>(uniform_below(rng, 10)), rng);
    const TripletSet once = transitive_closure(set);
    const TripletSet twice = transitive_closure(once);
    CHECK(as_set(once) == as_set(twice));
    for (const Triplet& t : set) CHECK(once.contains(t));
  }
}

TEST_CASE("conflict detection") {
  SUBCASE("direct contradiction") {
    TripletSet set(3, {{0, 1, 2}, {0, 2, 1}});
    const ConflictReport report = detect_conflicts(set);
    REQUIRE(report.size() == 1);
    CHECK(report[0].first == Triplet{0, 1, 2});
    CHECK(report[0].second == Triplet{0, 2, 1});
  }

  SUBCASE("agreeing triplets do not conflict") {
    TripletSet set(4, {{1, 2, 3}, {2, 1, 3}});
    CHECK(detect_conflicts(set).empty());
  }

  SUBCASE("three-cycle among pair vertices") {
    TripletSet set(5, {{1, 2, 3}, {1, 3, 4}, {1, 4, 2}});
    CHECK_FALSE(detect_conflicts(set).empty());
    CHECK_FALSE(ComparisonGraph(set).acyclic());
  }

  SUBCASE("a reversed pair conflicts regardless of company") {
    std::mt19937_64 rng(7u);
    for (int trial = 0; trial < 20; ++trial) {
      TripletSet set = random_set(6, 8, rng);
      const Triplet t{0, 1, 2};
      set.add(t);
      set.add(t.reversed());
      CHECK_FALSE(detect_conflicts(set).empty());
    }
  }
}

TEST_CASE("adversarial order base case") {
  // The fixed n=3 schedule: (v{0,2}->v{0,1}), (v{1,2}->v{0,1}), (v{1,2}->v{0,2})
  const auto order = adversarial_order(3, 0);
  REQUIRE(order.size() == 3);
  CHECK(order[0] == Triplet{0, 2, 1});
  CHECK(order[1] == Triplet{1, 2, 0});
  CHECK(order[2] == Triplet{2, 1, 0});
  CHECK_THROWS_AS(adversarial_order(2, 0), std::invalid_argument);
}

TEST_CASE("adversarial order leaves every prefix inference-free") {
  for (int n = 3; n <= 5; ++n) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      CAPTURE(n);
      CAPTURE(seed);
      const auto order = adversarial_order(n, seed);
      REQUIRE(order.size() == total_triplet_count(n));

      TripletSet prefix(n);
      for (const Triplet& t : order) {
        REQUIRE(prefix.add(t));  // duplicate-free
        CHECK(inferred_triplets(prefix).empty());
      }
      CHECK(ComparisonGraph(prefix).acyclic());

      // Completeness: exactly one of (a,b,c)/(a,c,b) for every question.
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          for (int c = b + 1; c < n; ++c) {
            if (a == b || a == c) continue;
            CHECK(prefix.contains({a, b, c}) != prefix.contains({a, c, b}));
          }
        }
      }
    }
  }
}

TEST_CASE("satisfied compares strict kernel distances") {
  SUBCASE("identity kernel ties are unsatisfied") {
    const KernelMatrix identity(Eigen::MatrixXd::Identity(3, 3), true);
    CHECK_FALSE(satisfied({1, 2, 0}, identity));  // both distances equal 2
    CHECK_FALSE(satisfied({0, 1, 2}, identity));
  }

  SUBCASE("explicit distances") {
    // Diagonal kernel: d(a,b) = K_aa + K_bb, so d(0,1)=1+0.. choose values for
    // d(0,1)=1? use K = diag(0.5, 0.5, 3.5): d(0,1)=1, d(0,2)=4
    Eigen::MatrixXd k = Eigen::Vector3d(0.5, 0.5, 3.5).asDiagonal();
    const KernelMatrix kernel(k, true);
    CHECK(satisfied({0, 1, 2}, kernel));
    CHECK_FALSE(satisfied({0, 2, 1}, kernel));
  }

  SUBCASE("a triplet and its reverse are never both satisfied") {
    std::mt19937_64 rng(11u);
    for (int trial = 0; trial < 30; ++trial) {
      const KernelMatrix kernel = random_psd_kernel(5, rng);
      const TripletSet set = random_set(5, 6, rng);
      for (const Triplet& t : set) {
        const bool both = satisfied(t, kernel) && satisfied(t.reversed(), kernel);
        CHECK_FALSE(both);
      }
    }
  }
}

TEST_CASE("error rate") {
  const KernelMatrix identity(Eigen::MatrixXd::Identity(4, 4), true);
  TripletSet some(4, {{0, 1, 2}, {1, 2, 3}});
  CHECK(error_rate(some, identity) == 1.0);  // all ties count as unsatisfied
  CHECK_THROWS_AS(error_rate(TripletSet(4), identity), std::invalid_argument);

  std::mt19937_64 rng(23u);
  for (int trial = 0; trial < 10; ++trial) {
    const KernelMatrix kernel = random_psd_kernel(6, rng);
    TripletSet set = random_set(6, 8, rng);

    // Replace each triplet by its satisfied orientation: error becomes 0.
    TripletSet oriented(6);
    bool any_tie = false;
    for (const Triplet& t : set) {
      if (satisfied(t, kernel)) oriented.add(t);
      else if (satisfied(t.reversed(), kernel)) oriented.add(t.reversed());
      else any_tie = true;
    }
    if (any_tie || oriented.empty()) continue;
    CHECK(error_rate(oriented, kernel) == 0.0);

    // Adding every reversal makes exactly half the set unsatisfied.
    TripletSet mirrored(6);
    for (const Triplet& t : oriented) {
      mirrored.add(t);
      mirrored.add(t.reversed());
    }
    CHECK(error_rate(mirrored, kernel) == doctest::Approx(0.5));
  }
}
