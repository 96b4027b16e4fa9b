#include "chordalcov/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace chordalcov {

Graph Graph::make(int vertex_count, std::vector<std::pair<int, int>> edges) {
  if (vertex_count <= 0) throw DomainError("vertex_count must be positive");
  for (auto& [i, j] : edges) {
    if (i == j) throw DomainError("self loop at vertex " + std::to_string(i));
    if (i < 0 || j < 0 || i >= vertex_count || j >= vertex_count)
      throw IndexOutOfRange("edge endpoint outside 0.." +
                            std::to_string(vertex_count - 1));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g;
  g.vertex_count = vertex_count;
  g.edges = std::move(edges);
  return g;
}

std::vector<unsigned char> Graph::adjacency() const {
  std::vector<unsigned char> adj(
      static_cast<size_t>(vertex_count) * vertex_count, 0);
  for (auto [i, j] : edges) {
    adj[static_cast<size_t>(i) * vertex_count + j] = 1;
    adj[static_cast<size_t>(j) * vertex_count + i] = 1;
  }
  return adj;
}

namespace {

std::vector<int> sorted_intersection(const std::vector<int>& a,
                                     const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

std::vector<int> sorted_difference(const std::vector<int>& a,
                                   const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

const std::vector<int>& JunctionTree::clique(int j) const {
  if (j < 0 || j >= clique_count())
    throw IndexOutOfRange("clique index " + std::to_string(j));
  return cliques_[j];
}

const std::vector<int>& JunctionTree::separator(int j) const {
  if (j < 1 || j >= clique_count())
    throw IndexOutOfRange("separator index " + std::to_string(j));
  return separators_[j - 1];
}

const std::vector<int>& JunctionTree::residual(int j) const {
  if (j < 0 || j >= clique_count())
    throw IndexOutOfRange("residual index " + std::to_string(j));
  return residuals_[j];
}

const std::vector<int>& JunctionTree::history(int j) const {
  if (j < 0 || j >= clique_count())
    throw IndexOutOfRange("history index " + std::to_string(j));
  return histories_[j];
}

int JunctionTree::clique_size(int j) const {
  return static_cast<int>(clique(j).size());
}

int JunctionTree::separator_size(int j) const {
  return static_cast<int>(separator(j).size());
}

int JunctionTree::s2() const {
  return clique_count() > 1 ? separator_size(1) : 0;
}

int JunctionTree::distinct_id(int j) const {
  if (j < 1 || j >= clique_count())
    throw IndexOutOfRange("separator index " + std::to_string(j));
  return distinct_id_[j - 1];
}

bool JunctionTree::has_edge(int i, int j) const {
  if (i < 0 || j < 0 || i >= vertex_count_ || j >= vertex_count_)
    throw IndexOutOfRange("vertex index");
  if (i == j) return false;
  return adj_[static_cast<size_t>(i) * vertex_count_ + j] != 0;
}

int JunctionTree::max_clique_size() const {
  int m = 0;
  for (const auto& c : cliques_) m = std::max<int>(m, c.size());
  return m;
}

long JunctionTree::edge_count() const {
  long n = 0;
  for (int i = 0; i < vertex_count_; ++i)
    for (int j = i + 1; j < vertex_count_; ++j)
      if (adj_[static_cast<size_t>(i) * vertex_count_ + j]) ++n;
  return n;
}

Graph JunctionTree::to_graph() const {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < vertex_count_; ++i)
    for (int j = i + 1; j < vertex_count_; ++j)
      if (adj_[static_cast<size_t>(i) * vertex_count_ + j])
        edges.emplace_back(i, j);
  return Graph::make(vertex_count_, std::move(edges));
}

bool JunctionTree::same_structure(const JunctionTree& other) const {
  return vertex_count_ == other.vertex_count_ && cliques_ == other.cliques_;
}

JunctionTree JunctionTree::from_cliques(int vertex_count,
                                        std::vector<std::vector<int>> cliques) {
  if (vertex_count <= 0) throw DomainError("vertex_count must be positive");
  if (cliques.empty()) throw DomainError("no cliques");
  for (auto& c : cliques) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.empty()) throw DomainError("empty clique");
    if (c.front() < 0 || c.back() >= vertex_count)
      throw IndexOutOfRange("clique vertex outside 0.." +
                            std::to_string(vertex_count - 1));
  }
  JunctionTree t;
  t.vertex_count_ = vertex_count;
  t.cliques_ = std::move(cliques);
  t.finalize();
  return t;
}

void JunctionTree::finalize() {
  const int k = clique_count();

  // Maximality: no clique contained in another.
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j && is_subset(cliques_[i], cliques_[j]))
        throw NotDecomposable("clique " + std::to_string(i) +
                              " is contained in clique " + std::to_string(j));

  // Histories, residuals, separators.
  histories_.resize(k);
  residuals_.resize(k);
  separators_.resize(k > 0 ? k - 1 : 0);
  std::vector<int> hist = cliques_[0];
  histories_[0] = hist;
  residuals_[0] = cliques_[0];
  for (int j = 1; j < k; ++j) {
    separators_[j - 1] = sorted_intersection(hist, cliques_[j]);
    residuals_[j] = sorted_difference(cliques_[j], hist);
    if (residuals_[j].empty())
      throw NotDecomposable("clique " + std::to_string(j) +
                            " adds no new vertex");
    std::vector<int> merged;
    std::set_union(hist.begin(), hist.end(), cliques_[j].begin(),
                   cliques_[j].end(), std::back_inserter(merged));
    hist = std::move(merged);
    histories_[j] = hist;
  }
  if (static_cast<int>(hist.size()) != vertex_count_)
    throw NotDecomposable("cliques do not cover every vertex");

  // Running intersection: each S_j inside some earlier clique.
  for (int j = 1; j < k; ++j) {
    bool ok = false;
    for (int i = 0; i < j && !ok; ++i)
      ok = is_subset(separators_[j - 1], cliques_[i]);
    if (!ok)
      throw NotDecomposable("running intersection fails at clique " +
                            std::to_string(j));
  }

  // Distinct separators with multiplicities, nu(S).
  distinct_id_.assign(k > 0 ? k - 1 : 0, -1);
  for (int j = 1; j < k; ++j) {
    int id = -1;
    for (size_t d = 0; d < distinct_.size(); ++d)
      if (distinct_[d].vertices == separators_[j - 1]) {
        id = static_cast<int>(d);
        break;
      }
    if (id < 0) {
      distinct_.push_back({separators_[j - 1], 0});
      id = static_cast<int>(distinct_.size()) - 1;
    }
    distinct_[id].multiplicity += 1;
    distinct_id_[j - 1] = id;
  }

  // Edge pattern: union of clique edge sets.
  adj_.assign(static_cast<size_t>(vertex_count_) * vertex_count_, 0);
  for (const auto& c : cliques_)
    for (size_t a = 0; a < c.size(); ++a)
      for (size_t b = a + 1; b < c.size(); ++b) {
        adj_[static_cast<size_t>(c[a]) * vertex_count_ + c[b]] = 1;
        adj_[static_cast<size_t>(c[b]) * vertex_count_ + c[a]] = 1;
      }
}

JunctionTree build_junction_tree(const Graph& g) {
  const int r = g.vertex_count;
  const auto adj = g.adjacency();
  auto adjacent = [&](int a, int b) {
    return adj[static_cast<size_t>(a) * r + b] != 0;
  };

  // Maximum cardinality search, lowest index wins ties.
  std::vector<int> order;
  order.reserve(r);
  std::vector<int> weight(r, 0);
  std::vector<char> visited(r, 0);
  std::vector<int> position(r, -1);
  for (int step = 0; step < r; ++step) {
    int best = -1;
    for (int v = 0; v < r; ++v)
      if (!visited[v] && (best < 0 || weight[v] > weight[best])) best = v;
    visited[best] = 1;
    position[best] = step;
    order.push_back(best);
    for (int u = 0; u < r; ++u)
      if (!visited[u] && adjacent(best, u)) ++weight[u];
  }

  // Chordality: the earlier neighbours of each vertex must form a clique.
  // Candidate cliques K_v = {v} u madj(v) along the way.
  std::vector<std::vector<int>> candidates(r);
  for (int step = 0; step < r; ++step) {
    const int v = order[step];
    std::vector<int> earlier;
    for (int u = 0; u < r; ++u)
      if (u != v && position[u] < step && adjacent(u, v)) earlier.push_back(u);
    for (size_t a = 0; a < earlier.size(); ++a)
      for (size_t b = a + 1; b < earlier.size(); ++b)
        if (!adjacent(earlier[a], earlier[b]))
          throw NotDecomposable(
              "fill-in detected at vertex " + std::to_string(v + 1) +
              " (missing edge " + std::to_string(earlier[a] + 1) + "-" +
              std::to_string(earlier[b] + 1) + ")");
    earlier.push_back(v);
    std::sort(earlier.begin(), earlier.end());
    candidates[step] = std::move(earlier);
  }

  // Keep maximal candidates (every maximal clique of a chordal graph shows
  // up as some K_v); order them by the MCS position at which they are
  // completed, which yields a perfect order.
  std::vector<std::vector<int>> cliques;
  for (int a = 0; a < r; ++a) {
    bool keep = true;
    for (int b = 0; b < r && keep; ++b) {
      if (a == b) continue;
      if (is_subset(candidates[a], candidates[b])) {
        if (candidates[a] != candidates[b] || b < a) keep = false;
      }
    }
    if (keep) cliques.push_back(candidates[a]);
  }
  std::stable_sort(cliques.begin(), cliques.end(),
                   [&](const std::vector<int>& a, const std::vector<int>& b) {
                     int pa = 0, pb = 0;
                     for (int v : a) pa = std::max(pa, position[v]);
                     for (int v : b) pb = std::max(pb, position[v]);
                     return pa < pb;
                   });
  return JunctionTree::from_cliques(r, std::move(cliques));
}

JunctionTree banded_graph(int r, int k) {
  if (r <= 0) throw DomainError("r must be positive");
  if (k < 0 || k >= r)
    throw InvalidBand("need 0 <= k < r, got k=" + std::to_string(k) +
                      ", r=" + std::to_string(r));
  std::vector<std::vector<int>> cliques;
  for (int j = 0; j + k < r; ++j) {
    std::vector<int> c(k + 1);
    std::iota(c.begin(), c.end(), j);
    cliques.push_back(std::move(c));
  }
  return JunctionTree::from_cliques(r, std::move(cliques));
}

JunctionTree diff_banded_graph(int r, int k1, int k2, int changepoint) {
  if (r <= 0) throw DomainError("r must be positive");
  if (k1 < 0 || k1 >= r || k2 < 0 || k2 >= r)
    throw InvalidBand("band widths must satisfy 0 <= k < r");
  if (k2 > k1)
    throw InvalidBand("second band wider than the first (k2=" +
                      std::to_string(k2) + " > k1=" + std::to_string(k1) +
                      "); the transition clique cannot introduce exactly one "
                      "new vertex");
  // The size-(k1+1) cascade starts at vertex 0, so the last clique ends at
  // changepoint only if changepoint >= k1; the second cascade needs room.
  if (changepoint < k1 || changepoint >= r - 1)
    throw InvalidBand("changepoint " + std::to_string(changepoint) +
                      " not reachable by a cascade of size-" +
                      std::to_string(k1 + 1) + " cliques within r=" +
                      std::to_string(r));
  std::vector<std::vector<int>> cliques;
  for (int j = 0; j + k1 <= changepoint; ++j) {
    std::vector<int> c(k1 + 1);
    std::iota(c.begin(), c.end(), j);
    cliques.push_back(std::move(c));
  }
  for (int j = changepoint + 1 - k2; j + k2 < r; ++j) {
    std::vector<int> c(k2 + 1);
    std::iota(c.begin(), c.end(), j);
    cliques.push_back(std::move(c));
  }
  return JunctionTree::from_cliques(r, std::move(cliques));
}

}  // namespace chordalcov
