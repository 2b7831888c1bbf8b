#include "riskvi/fem.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "riskvi/io.hpp"

namespace riskvi {

FemFunction::FemFunction(std::shared_ptr<const Mesh> mesh, double fill)
    : mesh_(std::move(mesh)), values_(mesh_->node_count(), fill) {}

FemFunction::FemFunction(std::shared_ptr<const Mesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.size() != mesh_->node_count()) {
    throw std::invalid_argument("FemFunction: coefficient count does not match mesh");
  }
}

namespace {

struct Affine {
  double area;
  // gradients of barycentric coordinates L0, L1, L2
  std::array<std::array<double, 2>, 3> grad;
};

Affine affine_map(const Mesh& mesh, std::size_t e) {
  const auto v = mesh.element(e);
  const Point& a = mesh.nodes[v[0]];
  const Point& b = mesh.nodes[v[1]];
  const Point& c = mesh.nodes[v[2]];
  const double j11 = b.x1 - a.x1, j12 = c.x1 - a.x1;
  const double j21 = b.x2 - a.x2, j22 = c.x2 - a.x2;
  const double det = j11 * j22 - j12 * j21;
  Affine m;
  m.area = 0.5 * det;
  // rows of J^{-1} are grad L1 and grad L2
  m.grad[1] = {j22 / det, -j12 / det};
  m.grad[2] = {-j21 / det, j11 / det};
  m.grad[0] = {-m.grad[1][0] - m.grad[2][0], -m.grad[1][1] - m.grad[2][1]};
  return m;
}

// Degree-4 rule on the reference triangle, weights sum to 1.
struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

const std::array<QuadPoint, 6>& degree4_rule() {
  static const std::array<QuadPoint, 6> rule = [] {
    const double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322;
    return std::array<QuadPoint, 6>{{{{a1, b1, b1}, w1},
                                     {{b1, a1, b1}, w1},
                                     {{b1, b1, a1}, w1},
                                     {{a2, b2, b2}, w2},
                                     {{b2, a2, b2}, w2},
                                     {{b2, b2, a2}, w2}}};
  }();
  return rule;
}

// P2 shape functions: vertices, then midpoints of edges 01, 12, 20
std::array<double, 6> p2_values(const std::array<double, 3>& L) {
  return {L[0] * (2 * L[0] - 1), L[1] * (2 * L[1] - 1), L[2] * (2 * L[2] - 1),
          4 * L[0] * L[1],       4 * L[1] * L[2],       4 * L[2] * L[0]};
}

std::array<std::array<double, 2>, 6> p2_gradients(const std::array<double, 3>& L,
                                                  const Affine& m) {
  std::array<std::array<double, 2>, 6> g{};
  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < 3; ++i) g[i][d] = (4 * L[i] - 1) * m.grad[i][d];
    g[3][d] = 4 * (L[0] * m.grad[1][d] + L[1] * m.grad[0][d]);
    g[4][d] = 4 * (L[1] * m.grad[2][d] + L[2] * m.grad[1][d]);
    g[5][d] = 4 * (L[2] * m.grad[0][d] + L[0] * m.grad[2][d]);
  }
  return g;
}

template <class ElementMatrix>
SparseMatrix assemble(const Mesh& mesh, ElementMatrix&& element_matrix) {
  const std::size_t k = mesh.nodes_per_element();
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.element_count() * k * k);
  std::array<double, 36> local{};
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    element_matrix(e, local);
    const auto v = mesh.element(e);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) triplets.push_back({v[a], v[b], local[a * k + b]});
    }
  }
  return SparseMatrix::from_triplets(mesh.node_count(), triplets, true);
}

void p2_element_matrices(const Mesh& mesh, std::size_t e, std::array<double, 36>* stiff,
                         std::array<double, 36>* mass) {
  const Affine m = affine_map(mesh, e);
  if (stiff) stiff->fill(0.0);
  if (mass) mass->fill(0.0);
  for (const auto& q : degree4_rule()) {
    const double w = q.weight * m.area;
    if (stiff) {
      const auto g = p2_gradients(q.bary, m);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          (*stiff)[a * 6 + b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
    }
    if (mass) {
      const auto phi = p2_values(q.bary);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) (*mass)[a * 6 + b] += w * phi[a] * phi[b];
    }
  }
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh) {
  if (mesh.order == 1) {
    return assemble(mesh, [&](std::size_t e, std::array<double, 36>& local) {
      const Affine m = affine_map(mesh, e);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          local[a * 3 + b] =
              m.area * (m.grad[a][0] * m.grad[b][0] + m.grad[a][1] * m.grad[b][1]);
    });
  }
  return assemble(mesh, [&](std::size_t e, std::array<double, 36>& local) {
    p2_element_matrices(mesh, e, &local, nullptr);
  });
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  if (mesh.order == 1) {
    return assemble(mesh, [&](std::size_t e, std::array<double, 36>& local) {
      const double area = mesh.signed_area(e);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) local[a * 3 + b] = area / 12.0 * (a == b ? 2.0 : 1.0);
    });
  }
  return assemble(mesh, [&](std::size_t e, std::array<double, 36>& local) {
    p2_element_matrices(mesh, e, nullptr, &local);
  });
}

std::vector<double> assemble_lumped_mass(const Mesh& mesh) {
  std::vector<double> lumped(mesh.node_count(), 0.0);
  std::array<double, 36> local{};
  const std::size_t k = mesh.nodes_per_element();
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double area = mesh.signed_area(e);
    const auto v = mesh.element(e);
    if (mesh.order == 1) {
      for (std::size_t a = 0; a < 3; ++a) lumped[v[a]] += area / 3.0;
      continue;
    }
    p2_element_matrices(mesh, e, nullptr, &local);
    double trace = 0.0;
    for (std::size_t a = 0; a < k; ++a) trace += local[a * k + a];
    for (std::size_t a = 0; a < k; ++a) lumped[v[a]] += local[a * k + a] * area / trace;
  }
  return lumped;
}

std::pair<SparseMatrix, std::vector<double>> apply_dirichlet(const SparseMatrix& matrix,
                                                             std::span<const double> rhs,
                                                             const Mesh& mesh) {
  if (matrix.size() != mesh.node_count() || rhs.size() != mesh.node_count()) {
    throw std::invalid_argument("apply_dirichlet: dimension mismatch with mesh");
  }
  std::vector<double> b(rhs.begin(), rhs.end());
  for (auto i : mesh.boundary_nodes) b[i] = 0.0;
  return {matrix.eliminate(mesh.on_boundary), std::move(b)};
}

double l2_inner(const SparseMatrix& mass, std::span<const double> v,
                std::span<const double> w) {
  if (v.size() != mass.size() || w.size() != mass.size()) {
    throw std::invalid_argument("l2_inner: dimension mismatch");
  }
  return mass.bilinear_form(v, w);
}

double l2_norm(const SparseMatrix& mass, std::span<const double> v) {
  return std::sqrt(std::max(0.0, l2_inner(mass, v, v)));
}

double l2_inner(const SparseMatrix& mass, const FemFunction& v, const FemFunction& w) {
  return l2_inner(mass, v.values(), w.values());
}

double l2_norm(const SparseMatrix& mass, const FemFunction& v) {
  return l2_norm(mass, v.values());
}

FemFunction interpolate(const std::shared_ptr<const Mesh>& mesh,
                        const std::function<double(Point)>& fn) {
  std::vector<double> values(mesh->node_count());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(mesh->nodes[i]);
  return FemFunction(mesh, std::move(values));
}

FemSystem FemSystem::build(std::shared_ptr<const Mesh> mesh) {
  FemSystem s;
  s.mesh = std::move(mesh);
  s.stiffness = assemble_stiffness(*s.mesh);
  s.mass = assemble_mass(*s.mesh);
  s.lumped_mass = assemble_lumped_mass(*s.mesh);
  s.dirichlet_stiffness = s.stiffness.eliminate(s.mesh->on_boundary);
  return s;
}

double FemSystem::h1_seminorm(std::span<const double> v) const {
  return std::sqrt(std::max(0.0, stiffness.quadratic_form(v)));
}

double FemSystem::h1_norm(std::span<const double> v) const {
  return std::sqrt(std::max(0.0, stiffness.quadratic_form(v) + mass.quadratic_form(v)));
}

std::string field_csv(const Mesh& mesh, std::span<const double> values) {
  if (values.size() != mesh.node_count()) {
    throw std::invalid_argument("field_csv: value count does not match mesh");
  }
  std::string out = "x1,x2,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += format_double(mesh.nodes[i].x1);
    out += ',';
    out += format_double(mesh.nodes[i].x2);
    out += ',';
    out += format_double(values[i]);
    out += '\n';
  }
  return out;
}

void write_field_csv(const std::string& path, const FemFunction& f) {
  write_file_atomic(path, field_csv(f.mesh(), f.values()));
}

std::string fields_vtk(const Mesh& mesh, std::span<const NamedField> fields) {
  std::ostringstream out;
  out.precision(17);
  out << "# vtk DataFile Version 3.0\nriskvi fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.node_count() << " double\n";
  for (const auto& p : mesh.nodes) out << p.x1 << ' ' << p.x2 << " 0\n";
  const std::size_t k = mesh.nodes_per_element();
  const std::size_t ne = mesh.element_count();
  out << "CELLS " << ne << ' ' << ne * (k + 1) << '\n';
  for (std::size_t e = 0; e < ne; ++e) {
    out << k;
    for (auto v : mesh.element(e)) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << ne << '\n';
  // 5 = VTK_TRIANGLE, 22 = VTK_QUADRATIC_TRIANGLE (same node ordering as ours)
  for (std::size_t e = 0; e < ne; ++e) out << (k == 3 ? 5 : 22) << '\n';
  if (!fields.empty()) out << "POINT_DATA " << mesh.node_count() << '\n';
  for (const auto& f : fields) {
    if (f.values.size() != mesh.node_count()) {
      throw std::invalid_argument("fields_vtk: field '" + f.name + "' has wrong length");
    }
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values) out << v << '\n';
  }
  return out.str();
}

void write_fields_vtk(const std::string& path, const Mesh& mesh,
                      std::span<const NamedField> fields) {
  write_file_atomic(path, fields_vtk(mesh, fields));
}

}  // namespace riskvi
