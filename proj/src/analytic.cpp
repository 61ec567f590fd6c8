#include "serrin/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "serrin/error.hpp"

namespace serrin::analytic {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

RadialTwoPhaseSolution::RadialTwoPhaseSolution(double R_, double r0_, double sigma_c_)
    : R(R_), r0(r0_), sigma_c(sigma_c_) {
  if (!(r0 > 0) || !(r0 < R))
    throw ValidationError("radial solution: need 0 < r0 < R");
  if (!(sigma_c > 0))
    throw ValidationError("sigma_c: must be positive");
}

double RadialTwoPhaseSolution::value(double r) const {
  if (!(r >= 0) || r > R)
    throw ValidationError("radial solution: r outside [0, R]");
  if (r >= r0)
    return (R * R - r * r) / 4.0;
  return (R * R - r0 * r0) / 4.0 + (r0 * r0 - r * r) / (4.0 * sigma_c);
}

double RadialTwoPhaseSolution::derivative(double r, bool inside) const {
  if (inside && r <= r0)
    return -r / (2.0 * sigma_c);
  return -r / 2.0;
}

double RadialTwoPhaseSolution::sigma_derivative(double r) const {
  if (r >= r0)
    return 0.0;
  return -(r0 * r0 - r * r) / (4.0 * sigma_c * sigma_c);
}

double concentric_two_phase(double R, double r0, double sigma_c, double r) {
  return RadialTwoPhaseSolution(R, r0, sigma_c).value(r);
}

double ellipse_torsion(double a, double b, double x, double y) {
  if (!(a > 0) || !(b > 0))
    throw ValidationError("ellipse: semi-axes must be positive");
  const double s = x * x / (a * a) + y * y / (b * b);
  if (s > 1.0 + 1e-12)
    throw ValidationError("ellipse_torsion: point outside the ellipse");
  return std::max(0.0, 1.0 - s) * a * a * b * b / (2.0 * (a * a + b * b));
}

std::array<double, 2> ellipse_torsion_hessian(double a, double b) {
  const double s = a * a + b * b;
  return {-b * b / s, -a * a / s};
}

double ellipse_identity_value(double a, double b) {
  const double a2 = a * a, b2 = b * b;
  return std::numbers::pi * a2 * a * b2 * b * (a2 - b2) * (a2 - b2) / (8.0 * std::pow(a2 + b2, 3));
}

double fundamental(Vec2 x) {
  const double r = norm(x);
  if (r == 0.0)
    throw ValidationError("fundamental solution: singular at the origin");
  return -std::log(r) / two_pi;
}

double disk_corrector(Vec2 y, Vec2 x) {
  // |y| |x - y*| = sqrt(1 - 2 x.y + |x|^2 |y|^2), also valid at y = 0.
  const double q = 1.0 - 2.0 * dot(x, y) + norm2(x) * norm2(y);
  return -std::log(q) / (2.0 * two_pi);
}

double disk_green(Vec2 y, Vec2 x) {
  if (!(norm(y) < 1.0))
    throw ValidationError("disk_green: pole must lie inside the unit disk");
  if (norm(x) > 1.0 + 1e-12)
    throw ValidationError("disk_green: point outside the unit disk");
  if (x == y)
    throw ValidationError("disk_green: x = y is singular");
  return fundamental(x - y) - disk_corrector(y, x);
}

Mat2 mixed_derivative(Vec2 x, Vec2 y) {
  if (x == y)
    throw ValidationError("mixed_derivative: x = y is singular");
  const double xx = norm2(x), yy = norm2(y);
  const double q = 1.0 - 2.0 * dot(x, y) + xx * yy;
  const Vec2 d = x - y;
  const double d2 = norm2(d);
  const std::array<double, 2> xv{x.x, x.y}, yv{y.x, y.y}, dv{d.x, d.y};
  Mat2 m{};
  for (std::size_t i = 0; i < 2; ++i) {
    const double ni = xv[i] * yy - yv[i];
    for (std::size_t j = 0; j < 2; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      const double image = (2.0 * xv[i] * yv[j] - delta) / q - 2.0 * ni * (xx * yv[j] - xv[j]) / (q * q);
      const double direct = delta / d2 - 2.0 * dv[i] * dv[j] / (d2 * d2);
      m[i][j] = (image + direct) / two_pi;
    }
  }
  return m;
}

double frobenius(const Mat2 &m) {
  return std::sqrt(m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]);
}

double mixed_derivative_sup(double M, int samples) {
  if (!(M >= 2.0))
    throw ValidationError("mixed_derivative_sup: M must be at least 2");
  const double rho = 1.0 - 1.5 / M;
  const double x_min = rho + 0.5 / M;
  double sup = 0.0;
  // Rotation invariance: x may be taken on the positive x-axis.
  for (int i = 0; i <= samples; ++i) {
    const Vec2 x{x_min + (1.0 - x_min) * i / samples, 0.0};
    for (int j = 0; j <= samples; ++j) {
      const double r = rho * j / samples;
      for (int k = 0; k < 4 * samples; ++k) {
        const double phi = two_pi * k / (4 * samples);
        const Vec2 y{r * std::cos(phi), r * std::sin(phi)};
        sup = std::max(sup, frobenius(mixed_derivative(x, y)));
      }
    }
  }
  return sup;
}

double bessel_j0(double x) {
  const double q = -0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum))
      break;
  }
  return sum;
}

double bessel_j0_first_zero() {
  double lo = 2.0, hi = 3.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j0(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double disk_lambda1(double R) {
  if (!(R > 0))
    throw ValidationError("disk_lambda1: radius must be positive");
  const double j = bessel_j0_first_zero();
  return (j / R) * (j / R);
}

} // namespace serrin::analytic
