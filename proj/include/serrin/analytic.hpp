#pragma once

// Closed-form reference solutions. Nothing here touches the finite-element
// code, so agreement between the two is a meaningful check.

#include <array>

#include "serrin/vec2.hpp"

namespace serrin::analytic {

/// Radial solution of -div(sigma grad u) = 1 on the disk of radius R with a
/// concentric inclusion of radius r0 and conductivity sigma_c.
struct RadialTwoPhaseSolution {
  double R = 1.0;
  double r0 = 0.5;
  double sigma_c = 1.0;

  RadialTwoPhaseSolution(double R, double r0, double sigma_c);

  double value(double r) const;
  /// du/dr, one-sided from the side selected by `inside` at r = r0.
  double derivative(double r, bool inside) const;
  /// d/d(sigma_c) of value(r).
  double sigma_derivative(double r) const;
};

double concentric_two_phase(double R, double r0, double sigma_c, double r);

/// Torsion function of the ellipse x^2/a^2 + y^2/b^2 < 1.
double ellipse_torsion(double a, double b, double x, double y);
/// Its (constant) Hessian: {v_xx, v_yy}.
std::array<double, 2> ellipse_torsion_hessian(double a, double b);
/// Closed form of int v |D^2 v + I/2|^2 over the ellipse.
double ellipse_identity_value(double a, double b);

/// Fundamental solution -(1/2pi) ln|x|.
double fundamental(Vec2 x);

/// Dirichlet Green's function of the unit disk with pole y.
double disk_green(Vec2 y, Vec2 x);
/// Harmonic corrector with boundary values fundamental(x - y) on the unit circle.
double disk_corrector(Vec2 y, Vec2 x);

/// Matrix m[i][j] = d^2 G / dx_i dy_j.
using Mat2 = std::array<std::array<double, 2>, 2>;
Mat2 mixed_derivative(Vec2 x, Vec2 y);
double frobenius(const Mat2 &m);

/// Sampled sup of |grad_x grad_y G| over y in the disk of radius 1 - 1.5/M
/// and x in the unit disk at distance >= 1/(2M) from it.
double mixed_derivative_sup(double M, int samples = 48);

/// Bessel J0 by its power series.
double bessel_j0(double x);
/// First positive zero of J0, by bisection.
double bessel_j0_first_zero();
/// First Dirichlet eigenvalue of the Laplacian on a disk of radius R.
double disk_lambda1(double R);

} // namespace serrin::analytic
