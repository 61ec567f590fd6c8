#pragma once

// Piecewise-linear finite elements for the two-phase torsion problem
//   -div(sigma grad u) = 1 in Omega, u = 0 on dOmega,
// with sigma = sigma_c on D and 1 elsewhere, and the companion problems:
// one-phase torsion, harmonic Dirichlet, and the linearization in sigma_c.

#include <cstdint>
#include <functional>
#include <vector>

#include "serrin/mesh.hpp"
#include "serrin/sparse.hpp"

namespace serrin {

struct SolverConfig {
  double cg_rel_tolerance = 1e-10;
  /// 0 selects 20 * sqrt(unknowns) + 1000.
  int cg_max_iterations = 0;
  bool diagonal_preconditioning = true;

  void validate() const;
  int iteration_budget(std::size_t unknowns) const;

  bool operator==(const SolverConfig &) const = default;
};

enum class FieldLabel { u, v, w, h, u_prime, custom };

const char *to_string(FieldLabel label);

struct Field {
  std::uint64_t mesh_id = 0;
  std::vector<double> values;
  FieldLabel label = FieldLabel::custom;
  int cg_iterations = 0;
  double cg_relative_residual = 0.0;
  /// Assembled load vector (all vertices) of the solve that produced the
  /// field; used by flux recovery. Empty for derived fields.
  std::vector<double> load;
};

/// Per-boundary-vertex values along the boundary loop.
struct BoundaryTrace {
  std::uint64_t mesh_id = 0;
  std::vector<int> vertex_ids;
  std::vector<Vec2> points;
  std::vector<double> params;
  /// Outward normal of the analytic curve at each vertex.
  std::vector<Vec2> normals;
  std::vector<double> values;
  /// Arc-length quadrature weights; they sum to the polygon perimeter.
  std::vector<double> weights;

  double perimeter() const;
  /// Sum of value * weight.
  double integral() const;
};

struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double frobenius2() const { return xx * xx + 2.0 * xy * xy + yy * yy; }
};

/// Elementwise conductivity: sigma_c on inside_D triangles, 1 elsewhere.
std::vector<double> element_sigma(const Mesh &mesh, double sigma_c);

/// Full stiffness matrix over all vertices (no boundary elimination).
CsrMatrix assemble_stiffness(const Mesh &mesh, std::span<const double> sigma);
/// Lumped unit load: area/3 per vertex per element.
std::vector<double> assemble_unit_load(const Mesh &mesh);

Field solve_two_phase(const Mesh &mesh, double sigma_c, const SolverConfig &cfg = {});
Field solve_one_phase(const Mesh &mesh, const SolverConfig &cfg = {});
/// Discrete harmonic field with nodal boundary values g(x).
Field solve_harmonic_dirichlet(const Mesh &mesh, const std::function<double(Vec2)> &g,
                               const SolverConfig &cfg = {});
/// Derivative of the two-phase solution with respect to sigma_c:
///   int sigma grad u' . grad phi = - int_D grad u . grad phi.
Field solve_linearized(const Mesh &mesh, double sigma_c, const Field &u_base,
                       const SolverConfig &cfg = {});

/// Variational flux recovery: solves the boundary mass-matrix system
///   int_dOmega (dn f) phi_i = int sigma grad f . grad phi_i - load_i
/// for every boundary vertex i. Uses the load stored on the field.
BoundaryTrace normal_derivative(const Mesh &mesh, const Field &f, double sigma_c);

/// Area-weighted average of elementwise gradients at each vertex.
std::vector<Vec2> recovered_gradients(const Mesh &mesh, const Field &f);
/// Least-squares linear fit of recovered gradients over each vertex patch.
std::vector<Sym2> hessian_recovery(const Mesh &mesh, const Field &f);

/// Piecewise-linear interpolation of f at p; throws if p is outside the mesh.
double evaluate(const Mesh &mesh, const Field &f, Vec2 p);
/// ||f - exact||_{L2(mesh)} with a degree-5 triangle rule.
double l2_error(const Mesh &mesh, const Field &f, const std::function<double(Vec2)> &exact);
double l2_norm(const Mesh &mesh, std::span<const double> values);

/// ||b - A x|| / ||b|| of the reduced (interior) system for a solved field.
double reduced_residual(const Mesh &mesh, double sigma_c, const Field &f);

/// Throws ValidationError if f does not belong to mesh.
void require_same_mesh(const Mesh &mesh, const Field &f, const char *what);

} // namespace serrin
