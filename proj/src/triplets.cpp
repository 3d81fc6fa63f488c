#include "rckl/triplets.hpp"

#include <algorithm>
#include <deque>

#include "rckl/kernels.hpp"
#include "rckl/rng.hpp"

namespace rckl {

namespace {

constexpr int kMaxObjects = 1 << 20;

std::uint64_t pair_key(int lo, int hi) {
  return (static_cast<std::uint64_t>(lo) << 21) | static_cast<std::uint64_t>(hi);
}

void validate_triplet(const Triplet& t, int n) {
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.a >= n || t.b >= n || t.c >= n) {
    throw std::invalid_argument("triplet index out of range for n=" + std::to_string(n));
  }
  if (t.a == t.b || t.a == t.c || t.b == t.c) {
    throw std::invalid_argument("triplet indices must be pairwise distinct");
  }
}

}  // namespace

TripletSet::TripletSet(int n) : n_(n) {
  if (n < 1 || n > kMaxObjects) {
    throw std::invalid_argument("object count out of range");
  }
}

TripletSet::TripletSet(int n, const std::vector<Triplet>& triplets) : TripletSet(n) {
  triplets_.reserve(triplets.size());
  for (const Triplet& t : triplets) add(t);
}

std::uint64_t TripletSet::key(const Triplet& t) const {
  return (static_cast<std::uint64_t>(t.a) << 42) |
         (static_cast<std::uint64_t>(t.b) << 21) | static_cast<std::uint64_t>(t.c);
}

bool TripletSet::add(const Triplet& t) {
  validate_triplet(t, n_);
  if (!index_.insert(key(t)).second) return false;
  triplets_.push_back(t);
  return true;
}

bool TripletSet::contains(const Triplet& t) const {
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.a >= n_ || t.b >= n_ || t.c >= n_) return false;
  return index_.count(key(t)) > 0;
}

ComparisonGraph::ComparisonGraph(const TripletSet& set) {
  std::unordered_map<std::uint64_t, int> ids;
  auto intern = [&](int x, int y) {
    const int lo = std::min(x, y);
    const int hi = std::max(x, y);
    auto [it, inserted] = ids.try_emplace(pair_key(lo, hi), vertex_count());
    if (inserted) {
      vertices_.emplace_back(lo, hi);
      adjacency_.emplace_back();
    }
    return it->second;
  };
  for (const Triplet& t : set) {
    const int closer = intern(t.a, t.b);
    const int farther = intern(t.a, t.c);
    adjacency_[closer].push_back(farther);
  }
}

bool ComparisonGraph::acyclic() const {
  const int v = vertex_count();
  std::vector<int> indegree(v, 0);
  for (const auto& outs : adjacency_) {
    for (int w : outs) ++indegree[w];
  }
  std::deque<int> ready;
  for (int i = 0; i < v; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  int removed = 0;
  while (!ready.empty()) {
    const int u = ready.front();
    ready.pop_front();
    ++removed;
    for (int w : adjacency_[u]) {
      if (--indegree[w] == 0) ready.push_back(w);
    }
  }
  return removed == v;
}

std::vector<int> ComparisonGraph::reachable_from(int source) const {
  std::vector<int> reached;
  std::vector<char> seen(vertex_count(), 0);
  std::deque<int> frontier(adjacency_[source].begin(), adjacency_[source].end());
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    if (seen[u]) continue;
    seen[u] = 1;
    reached.push_back(u);
    for (int w : adjacency_[u]) {
      if (!seen[w]) frontier.push_back(w);
    }
  }
  return reached;
}

ConflictError::ConflictError(ConflictReport conflicts)
    : std::runtime_error("triplet set is conflicting (" +
                         std::to_string(conflicts.size()) + " conflicting pairs)"),
      conflicts_(std::move(conflicts)) {}

std::uint64_t total_triplet_count(int n) {
  if (n < 3) throw std::invalid_argument("triplets require at least 3 objects");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  return un * (un - 1) * (un - 2) / 2;
}

namespace {

/// Triplets read out from every directed path of length >= 1 whose endpoint
/// pairs share an object. Inferred triplets are appended in sorted order
/// after the input.
TripletSet closure_impl(const TripletSet& set) {
  const ComparisonGraph graph(set);
  TripletSet closure(set.n(), set.triplets());
  std::vector<Triplet> inferred;
  const auto& vertices = graph.vertices();
  for (int u = 0; u < graph.vertex_count(); ++u) {
    const auto [p, q] = vertices[u];
    for (int w : graph.reachable_from(u)) {
      if (w == u) continue;  // a cycle back to the source names no triplet
      const auto [r, s] = vertices[w];
      int head = -1;
      if (p == r || p == s) head = p;
      else if (q == r || q == s) head = q;
      if (head < 0) continue;
      const int closer = (p == head) ? q : p;
      const int farther = (r == head) ? s : r;
      const Triplet t{head, closer, farther};
      if (!closure.contains(t)) inferred.push_back(t);
    }
  }
  std::sort(inferred.begin(), inferred.end());
  inferred.erase(std::unique(inferred.begin(), inferred.end()), inferred.end());
  for (const Triplet& t : inferred) closure.add(t);
  return closure;
}

}  // namespace

TripletSet transitive_closure(const TripletSet& set) { return closure_impl(set); }

TripletSet inferred_triplets(const TripletSet& set) {
  const TripletSet closure = closure_impl(set);
  TripletSet extra(set.n());
  for (const Triplet& t : closure) {
    if (!set.contains(t)) extra.add(t);
  }
  return extra;
}

ConflictReport detect_conflicts(const TripletSet& set) {
  ConflictReport report;
  const ComparisonGraph graph(set);
  if (graph.acyclic()) return report;
  const TripletSet closure = closure_impl(set);
  for (const Triplet& t : closure) {
    if (t.b < t.c && closure.contains(t.reversed())) {
      report.emplace_back(t, t.reversed());
    }
  }
  std::sort(report.begin(), report.end());
  return report;
}

namespace {

struct PairVertex {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const PairVertex&, const PairVertex&) = default;
  friend auto operator<=>(const PairVertex&, const PairVertex&) = default;
};

struct PairEdge {
  PairVertex src;
  PairVertex dst;
};

/// Old vertices ordered by first appearance as an edge target; vertices with
/// no incoming edge follow in ascending pair order.
std::vector<PairVertex> old_vertex_order(const std::vector<PairEdge>& edges, int objects) {
  std::vector<PairVertex> order;
  std::unordered_set<std::uint64_t> seen;
  auto mark = [&](const PairVertex& v) {
    if (seen.insert(pair_key(v.lo, v.hi)).second) order.push_back(v);
  };
  for (const PairEdge& e : edges) mark(e.dst);
  for (int lo = 0; lo < objects; ++lo) {
    for (int hi = lo + 1; hi < objects; ++hi) mark(PairVertex{lo, hi});
  }
  return order;
}

}  // namespace

std::vector<Triplet> adversarial_order(int n, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("adversarial order requires at least 3 objects");
  std::mt19937_64 rng(seed);

  std::vector<PairEdge> edges;
  edges.reserve(total_triplet_count(n));
  edges.push_back({{0, 2}, {0, 1}});
  edges.push_back({{1, 2}, {0, 1}});
  edges.push_back({{1, 2}, {0, 2}});

  for (int objects = 4; objects <= n; ++objects) {
    const int fresh = objects - 1;  // the object introduced at this level

    // Point both adjacent new pairs at each old vertex, in its turn.
    for (const PairVertex& v : old_vertex_order(edges, objects - 1)) {
      edges.push_back({{v.lo, fresh}, v});
      edges.push_back({{v.hi, fresh}, v});
    }

    // Saturate randomly chosen new vertices; edges only run among new pairs,
    // all of which share the fresh object.
    std::vector<PairVertex> remaining;
    remaining.reserve(fresh);
    for (int lo = 0; lo < fresh; ++lo) remaining.push_back(PairVertex{lo, fresh});
    while (!remaining.empty()) {
      const std::size_t pick = uniform_below(rng, remaining.size());
      const PairVertex sink = remaining[pick];
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
      for (const PairVertex& src : remaining) edges.push_back({src, sink});
    }
  }

  std::vector<Triplet> result;
  result.reserve(edges.size());
  for (const PairEdge& e : edges) {
    int head;
    if (e.src.lo == e.dst.lo || e.src.lo == e.dst.hi) head = e.src.lo;
    else head = e.src.hi;
    const int closer = (e.src.lo == head) ? e.src.hi : e.src.lo;
    const int farther = (e.dst.lo == head) ? e.dst.hi : e.dst.lo;
    result.push_back(Triplet{head, closer, farther});
  }
  return result;
}

bool satisfied(const Triplet& t, const KernelMatrix& kernel) {
  validate_triplet(t, kernel.n());
  return kernel_distance(kernel, t.a, t.b) < kernel_distance(kernel, t.a, t.c);
}

double error_rate(const TripletSet& set, const KernelMatrix& kernel) {
  if (set.empty()) throw std::invalid_argument("error rate of an empty triplet set");
  std::size_t unsatisfied = 0;
  for (const Triplet& t : set) {
    if (!satisfied(t, kernel)) ++unsatisfied;
  }
  return static_cast<double>(unsatisfied) / static_cast<double>(set.size());
}

}  // namespace rckl
