#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskvi {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Structured triangulation of the unit square.
///
/// Every grid cell is split along its lower-left to upper-right diagonal.
/// Nodes live on a lattice of (order*nx+1) x (order*ny+1) points numbered
/// row-major (x1 fastest), so for order 2 the edge midpoints are lattice
/// points as well. Element connectivity lists the three vertices
/// counter-clockwise, followed (order 2) by the midpoints of edges
/// v0v1, v1v2, v2v0.
struct Mesh {
  int nx = 0;
  int ny = 0;
  int order = 1;
  std::vector<Point> nodes;
  std::vector<std::size_t> connectivity;
  std::vector<std::size_t> boundary_nodes;
  std::vector<char> on_boundary;
  double h = 0.0;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t nodes_per_element() const { return order == 1 ? 3 : 6; }
  std::size_t element_count() const {
    return connectivity.size() / nodes_per_element();
  }
  std::span<const std::size_t> element(std::size_t e) const {
    const auto k = nodes_per_element();
    return {connectivity.data() + e * k, k};
  }
  /// Signed area of element e (positive for counter-clockwise vertices).
  double signed_area(std::size_t e) const;
};

/// Throws std::invalid_argument unless nx, ny >= 2 and order is 1 or 2.
Mesh build_mesh(int nx, int ny, int order = 1);

}  // namespace riskvi
