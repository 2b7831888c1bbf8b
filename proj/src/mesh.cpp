#include "riskvi/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace riskvi {

double Mesh::signed_area(std::size_t e) const {
  const auto v = element(e);
  const Point& a = nodes[v[0]];
  const Point& b = nodes[v[1]];
  const Point& c = nodes[v[2]];
  return 0.5 * ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2));
}

Mesh build_mesh(int nx, int ny, int order) {
  if (nx < 2 || ny < 2) {
    throw std::invalid_argument("build_mesh: nx and ny must be >= 2 (got " +
                                std::to_string(nx) + ", " + std::to_string(ny) + ")");
  }
  if (order != 1 && order != 2) {
    throw std::invalid_argument("build_mesh: order must be 1 or 2");
  }

  Mesh mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.order = order;

  const int lx = order * nx;  // lattice intervals per axis
  const int ly = order * ny;
  const auto lattice = [lx](int i, int j) {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(lx + 1) +
           static_cast<std::size_t>(i);
  };

  mesh.nodes.reserve(static_cast<std::size_t>(lx + 1) * (ly + 1));
  mesh.on_boundary.reserve(mesh.nodes.capacity());
  for (int j = 0; j <= ly; ++j) {
    for (int i = 0; i <= lx; ++i) {
      // exact endpoints so boundary detection by coordinate is exact
      const double x1 = (i == lx) ? 1.0 : static_cast<double>(i) / lx;
      const double x2 = (j == ly) ? 1.0 : static_cast<double>(j) / ly;
      mesh.nodes.push_back({x1, x2});
      const bool bnd = (i == 0 || i == lx || j == 0 || j == ly);
      mesh.on_boundary.push_back(bnd ? 1 : 0);
      if (bnd) mesh.boundary_nodes.push_back(lattice(i, j));
    }
  }

  const std::size_t per = mesh.nodes_per_element();
  mesh.connectivity.reserve(static_cast<std::size_t>(2 * nx * ny) * per);
  for (int cj = 0; cj < ny; ++cj) {
    for (int ci = 0; ci < nx; ++ci) {
      const int i0 = order * ci;
      const int j0 = order * cj;
      const int i1 = i0 + order;
      const int j1 = j0 + order;
      // lower-right triangle (a, b, c), upper-left triangle (a, c, d)
      if (order == 1) {
        mesh.connectivity.insert(mesh.connectivity.end(),
                                 {lattice(i0, j0), lattice(i1, j0), lattice(i1, j1)});
        mesh.connectivity.insert(mesh.connectivity.end(),
                                 {lattice(i0, j0), lattice(i1, j1), lattice(i0, j1)});
      } else {
        const int im = i0 + 1;
        const int jm = j0 + 1;
        mesh.connectivity.insert(mesh.connectivity.end(),
                                 {lattice(i0, j0), lattice(i1, j0), lattice(i1, j1),
                                  lattice(im, j0), lattice(i1, jm), lattice(im, jm)});
        mesh.connectivity.insert(mesh.connectivity.end(),
                                 {lattice(i0, j0), lattice(i1, j1), lattice(i0, j1),
                                  lattice(im, jm), lattice(im, j1), lattice(i0, jm)});
      }
    }
  }

  const double dx = 1.0 / nx;
  const double dy = 1.0 / ny;
  mesh.h = std::sqrt(dx * dx + dy * dy);
  return mesh;
}

}  // namespace riskvi
