#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskvi/mesh.hpp"
#include "riskvi/sparse.hpp"

namespace riskvi {

/// Nodal coefficient vector of a Lagrange function on a mesh.
class FemFunction {
 public:
  FemFunction() = default;
  explicit FemFunction(std::shared_ptr<const Mesh> mesh, double fill = 0.0);
  FemFunction(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> values_;
};

SparseMatrix assemble_stiffness(const Mesh& mesh);
SparseMatrix assemble_mass(const Mesh& mesh);
/// Row-sum-free diagonal lumping (HRZ): element mass diagonals rescaled to
/// the element area. Coincides with row-sum lumping for P1.
std::vector<double> assemble_lumped_mass(const Mesh& mesh);

/// Homogeneous Dirichlet conditions by symmetric elimination: boundary rows
/// and columns become identity rows/columns and boundary rhs entries are 0.
std::pair<SparseMatrix, std::vector<double>> apply_dirichlet(const SparseMatrix& matrix,
                                                             std::span<const double> rhs,
                                                             const Mesh& mesh);

double l2_inner(const SparseMatrix& mass, const FemFunction& v, const FemFunction& w);
double l2_norm(const SparseMatrix& mass, const FemFunction& v);
double l2_inner(const SparseMatrix& mass, std::span<const double> v, std::span<const double> w);
double l2_norm(const SparseMatrix& mass, std::span<const double> v);

FemFunction interpolate(const std::shared_ptr<const Mesh>& mesh,
                        const std::function<double(Point)>& fn);

/// Matrices shared by every solve on one mesh. Immutable after build().
struct FemSystem {
  std::shared_ptr<const Mesh> mesh;
  SparseMatrix stiffness;
  SparseMatrix mass;
  std::vector<double> lumped_mass;
  SparseMatrix dirichlet_stiffness;

  static FemSystem build(std::shared_ptr<const Mesh> mesh);

  std::size_t size() const { return mesh->node_count(); }
  double h1_norm(std::span<const double> v) const;
  double h1_seminorm(std::span<const double> v) const;
  double l2_norm(std::span<const double> v) const { return riskvi::l2_norm(mass, v); }
  double l2_inner(std::span<const double> v, std::span<const double> w) const {
    return riskvi::l2_inner(mass, v, w);
  }
};

struct NamedField {
  std::string name;
  std::span<const double> values;
};

/// CSV with header `x1,x2,value`, one row per node in node order.
std::string field_csv(const Mesh& mesh, std::span<const double> values);
void write_field_csv(const std::string& path, const FemFunction& f);
/// Legacy VTK unstructured grid (ASCII) with point data.
std::string fields_vtk(const Mesh& mesh, std::span<const NamedField> fields);
void write_fields_vtk(const std::string& path, const Mesh& mesh,
                      std::span<const NamedField> fields);

}  // namespace riskvi
