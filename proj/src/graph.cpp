#include "ising/graph.hpp"

#include <algorithm>
#include <string>

#include "ising/errors.hpp"

namespace ising {

Graph::Graph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count_ < 1) throw ConfigError("graph needs at least one vertex");
  for (auto& e : edges_) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i == e.j) throw ConfigError("self-loop at vertex " + std::to_string(e.i));
    if (e.i < 0 || e.j >= vertex_count_)
      throw ConfigError("edge endpoint out of range: " + std::to_string(e.i) + "," +
                        std::to_string(e.j));
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw ConfigError("duplicate edge in edge list");

  adjacency_.resize(vertex_count_);
  for (int k = 0; k < edge_count(); ++k) {
    adjacency_[edges_[k].i].emplace_back(edges_[k].j, k);
    adjacency_[edges_[k].j].emplace_back(edges_[k].i, k);
  }
}

int Graph::edge_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{i, j},
                             [](const Edge& a, const Edge& b) {
                               return a.i != b.i ? a.i < b.i : a.j < b.j;
                             });
  if (it == edges_.end() || !(*it == Edge{i, j})) return -1;
  return static_cast<int>(it - edges_.begin());
}

bool Graph::connected() const {
  std::vector<char> seen(vertex_count_, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [w, k] : adjacency_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == vertex_count_;
}

Graph build_grid2d(int width, int height) {
  if (width < 1 || height < 1) throw ConfigError("grid dimensions must be positive");
  auto idx = [width](int x, int y) { return y * width + x; };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(width) * (height - 1) +
                static_cast<std::size_t>(height) * (width - 1));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (x + 1 < width) edges.push_back({idx(x, y), idx(x + 1, y)});
      if (y + 1 < height) edges.push_back({idx(x, y), idx(x, y + 1)});
    }
  return Graph(width * height, std::move(edges));
}

Graph build_grid3d(int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("grid dimensions must be positive");
  auto idx = [nx, ny](int x, int y, int z) { return (z * ny + y) * nx + x; };
  std::vector<Edge> edges;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        if (x + 1 < nx) edges.push_back({idx(x, y, z), idx(x + 1, y, z)});
        if (y + 1 < ny) edges.push_back({idx(x, y, z), idx(x, y + 1, z)});
        if (z + 1 < nz) edges.push_back({idx(x, y, z), idx(x, y, z + 1)});
      }
  return Graph(nx * ny * nz, std::move(edges));
}

Graph build_complete(int n) {
  if (n < 1) throw ConfigError("vertex count must be positive");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

}  // namespace ising
