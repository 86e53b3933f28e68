#pragma once

#include <utility>
#include <vector>

namespace ising {

// Undirected edge, stored canonically with i < j.
struct Edge {
  int i;
  int j;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Immutable vertex/edge structure. Edges are canonicalized (i < j, sorted
// lexicographically, unique) on construction; self-loops and duplicates are
// rejected.
class Graph {
 public:
  Graph(int vertex_count, std::vector<Edge> edges);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  // (neighbor vertex, edge index) pairs for vertex v.
  const std::vector<std::pair<int, int>>& neighbors(int v) const { return adjacency_[v]; }

  // Index into edges() of {min(i,j), max(i,j)}, or -1 if absent.
  int edge_index(int i, int j) const;

  bool connected() const;
  bool is_tree() const { return connected() && edge_count() == vertex_count_ - 1; }

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
};

// Nearest-neighbor lattices with open boundaries, and the complete graph.
Graph build_grid2d(int width, int height);
Graph build_grid3d(int nx, int ny, int nz);
Graph build_complete(int n);

}  // namespace ising
