/// @file  triplets.hpp
/// @brief Relative-comparison triplets: validation, transitive closure,
///        conflict detection, counting, and the adversarial ordering.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace rckl {

class KernelMatrix;

/// An ordered comparison (a,b,c): object a is more similar to b than to c,
/// i.e. d(a,b) < d(a,c).
struct Triplet {
  int a = 0;
  int b = 0;
  int c = 0;

  /// The opposite assertion, d(a,c) < d(a,b).
  Triplet reversed() const { return Triplet{a, c, b}; }

  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

/// A duplicate-free collection of triplets over objects 0..n-1.
/// Insertion order is preserved.
class TripletSet {
 public:
  explicit TripletSet(int n);
  TripletSet(int n, const std::vector<Triplet>& triplets);

  int n() const { return n_; }
  std::size_t size() const { return triplets_.size(); }
  bool empty() const { return triplets_.empty(); }

  /// Appends a triplet. Returns false when it is already present.
  /// Throws std::invalid_argument for out-of-range or non-distinct indices.
  bool add(const Triplet& t);

  bool contains(const Triplet& t) const;

  const std::vector<Triplet>& triplets() const { return triplets_; }
  auto begin() const { return triplets_.begin(); }
  auto end() const { return triplets_.end(); }

 private:
  std::uint64_t key(const Triplet& t) const;

  int n_;
  std::vector<Triplet> triplets_;
  std::unordered_set<std::uint64_t> index_;
};

/// Directed graph over unordered object pairs. A triplet (a,b,c) contributes
/// the edge v{a,b} -> v{a,c}, pointing from its closer pair to its farther
/// pair; the graph is acyclic exactly when the generating set is
/// non-conflicting.
class ComparisonGraph {
 public:
  explicit ComparisonGraph(const TripletSet& set);

  int vertex_count() const { return static_cast<int>(vertices_.size()); }

  /// Vertices as {lo, hi} object pairs, in order of first appearance.
  const std::vector<std::pair<int, int>>& vertices() const { return vertices_; }

  /// Out-adjacency lists indexed by vertex id.
  const std::vector<std::vector<int>>& out_edges() const { return adjacency_; }

  bool acyclic() const;

  /// Vertex ids reachable from `source` by a directed path of length >= 1.
  std::vector<int> reachable_from(int source) const;

 private:
  std::vector<std::pair<int, int>> vertices_;
  std::vector<std::vector<int>> adjacency_;
};

/// A pair of mutually contradictory triplets found in the closure.
using ConflictReport = std::vector<std::pair<Triplet, Triplet>>;

/// Raised when an operation requires a non-conflicting triplet set.
class ConflictError : public std::runtime_error {
 public:
  explicit ConflictError(ConflictReport conflicts);
  const ConflictReport& conflicts() const { return conflicts_; }

 private:
  ConflictReport conflicts_;
};

/// Number of distinct relative-comparison answers over n objects:
/// (n^3 - 3n^2 + 2n) / 2. Requires n >= 3.
std::uint64_t total_triplet_count(int n);

/// All triplets reachable through directed paths in the comparison graph,
/// including the input. A path v{x,y} -> ... -> v{x,z} between pairs sharing
/// object x reads out as (x,y,z); paths between pairs sharing no object
/// yield nothing. Idempotent.
TripletSet transitive_closure(const TripletSet& set);

/// Closure minus input: the triplets inferable but not given.
TripletSet inferred_triplets(const TripletSet& set);

/// All (t, t.reversed()) pairs present together in the closure. Non-empty
/// exactly when the comparison graph has a cycle.
ConflictReport detect_conflicts(const TripletSet& set);

/// Emits every triplet over n objects exactly once, ordered so that each
/// prefix has an empty inferred set. The base case n=3 and the recursive
/// construction follow a fixed schedule; ties among sink candidates are
/// broken by the seeded generator. Requires n >= 3.
std::vector<Triplet> adversarial_order(int n, std::uint64_t seed);

/// True when d_K(a,b) < d_K(a,c) strictly; ties count as unsatisfied.
bool satisfied(const Triplet& t, const KernelMatrix& kernel);

/// Fraction of triplets in `set` unsatisfied by `kernel`, in [0,1].
/// Requires a non-empty set.
double error_rate(const TripletSet& set, const KernelMatrix& kernel);

}  // namespace rckl
