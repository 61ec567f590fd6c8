#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "serrin/analytic.hpp"
#include "serrin/error.hpp"
#include "serrin/fem.hpp"
#include "serrin/mesh.hpp"

using namespace serrin;

namespace {
constexpr double pi = std::numbers::pi;

Mesh concentric(double h) { return generate(DomainSpec::disk(1.0), InclusionSpec::disk(0.5), h); }

double center_value(const Mesh &m, const Field &f) { return evaluate(m, f, {0, 0}); }

double trace_linf(const BoundaryTrace &tr, double c) {
  double e = 0;
  for (double v : tr.values)
    e = std::max(e, std::abs(v - c));
  return e;
}
} // namespace

TEST_CASE("one-phase torsion: closed-form centre values") {
  const SolverConfig cfg;
  {
    const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.025);
    CHECK(std::abs(center_value(m, solve_one_phase(m, cfg)) - 0.25) <= 1e-3);
  }
  {
    const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 0.025);
    CHECK(std::abs(center_value(m, solve_one_phase(m, cfg)) - 0.2951) <= 1e-3);
  }
  {
    const Mesh m = generate(DomainSpec::polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}), InclusionSpec::none(), 0.025);
    CHECK(std::abs(center_value(m, solve_one_phase(m, cfg)) - 0.2947) <= 1e-3);
  }
}

TEST_CASE("two-phase concentric oracle") {
  const Mesh m = concentric(0.025);
  const Field u = solve_two_phase(m, 2.0);
  CHECK(std::abs(center_value(m, u) - 7.0 / 32.0) <= 5e-4);
  CHECK(u.label == FieldLabel::u);
  CHECK(reduced_residual(m, 2.0, u) <= 1e-10);
}

TEST_CASE("sigma_c = 1 reproduces the one-phase solution") {
  const Mesh m = concentric(0.05);
  const Field u = solve_two_phase(m, 1.0);
  const Field v = solve_one_phase(m);
  double diff = 0;
  for (std::size_t i = 0; i < u.values.size(); ++i)
    diff = std::max(diff, std::abs(u.values[i] - v.values[i]));
  CHECK(diff <= 1e-8);
}

TEST_CASE("L2 error converges at second order under refinement") {
  const analytic::RadialTwoPhaseSolution exact(1.0, 0.5, 2.0);
  auto fn = [&](Vec2 p) { return exact.value(std::min(norm(p), 1.0)); };
  Mesh m = concentric(0.1);
  double prev = l2_error(m, solve_two_phase(m, 2.0), fn);
  for (int level = 0; level < 2; ++level) {
    m = refine(m);
    const double e = l2_error(m, solve_two_phase(m, 2.0), fn);
    CHECK(prev / e >= 3.4);
    CHECK(prev / e <= 4.6);
    prev = e;
  }
}

TEST_CASE("normal derivative trace converges to the constant flux") {
  Mesh m = concentric(0.1);
  double prev = trace_linf(normal_derivative(m, solve_two_phase(m, 2.0), 2.0), -0.5);
  for (int level = 0; level < 2; ++level) {
    m = refine(m);
    const double e = trace_linf(normal_derivative(m, solve_two_phase(m, 2.0), 2.0), -0.5);
    CHECK(prev / e >= 1.8);
    prev = e;
  }
}

TEST_CASE("flux balance: boundary integral equals minus the area") {
  const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::disk(0.3), 0.05);
  for (double s : {0.5, 2.0, 5.0}) {
    const BoundaryTrace tr = normal_derivative(m, solve_two_phase(m, s), s);
    CHECK(std::abs(tr.integral() + m.area()) <= 1e-8);
    double wsum = 0;
    for (double w : tr.weights)
      wsum += w;
    CHECK(wsum == doctest::Approx(tr.perimeter()).epsilon(1e-14));
  }
}

TEST_CASE("discrete maximum principle and compliance decreasing in sigma_c") {
  const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::disk(0.3), 0.05);
  const Field a = solve_two_phase(m, 2.0);
  const Field b = solve_two_phase(m, 4.0);
  for (double x : a.values)
    CHECK(x >= -1e-14);
  // Pointwise order fails near the interface; the load-weighted integral does not.
  double ja = 0, jb = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    ja += a.load[i] * a.values[i];
    jb += b.load[i] * b.values[i];
  }
  CHECK(jb < ja);
  for (int id : m.boundary_vertex_ids)
    CHECK(a.values[static_cast<std::size_t>(id)] == 0.0);
}

TEST_CASE("invalid inputs are rejected") {
  const Mesh m = concentric(0.2);
  CHECK_THROWS_AS(solve_two_phase(m, 0.0), ValidationError);
  CHECK_THROWS_AS(solve_two_phase(m, -1.0), ValidationError);
  CHECK_THROWS_AS(solve_two_phase(m, std::nan("")), ValidationError);
  SolverConfig bad;
  bad.cg_rel_tolerance = 0.0;
  CHECK_THROWS_AS(solve_one_phase(m, bad), ValidationError);
  const Mesh other = concentric(0.2);
  const Field u = solve_two_phase(m, 2.0);
  CHECK_THROWS_AS(normal_derivative(other, u, 2.0), ValidationError);
  CHECK_THROWS_AS(evaluate(m, u, {2.0, 0.0}), ValidationError);
  SolverConfig starved;
  starved.cg_max_iterations = 1;
  CHECK_THROWS_AS(solve_two_phase(m, 2.0, starved), ValidationError);
  starved.cg_max_iterations = 100;
  starved.cg_rel_tolerance = 1e-14;
  const Mesh fine = concentric(0.02);
  CHECK_THROWS_AS(solve_two_phase(fine, 2.0, starved), SolverError);
}

TEST_CASE("harmonic Dirichlet problems") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.05);
  const Field one = solve_harmonic_dirichlet(m, [](Vec2) { return 1.0; });
  for (double x : one.values)
    CHECK(std::abs(x - 1.0) <= 1e-10);
  // Linear data is reproduced exactly by P1.
  const Field lin = solve_harmonic_dirichlet(m, [](Vec2 p) { return p.x; });
  for (std::size_t i = 0; i < lin.values.size(); ++i)
    CHECK(std::abs(lin.values[i] - m.vertices[i].x) <= 1e-8);
  // Disk corrector with the pole at (0.5, 0).
  const Vec2 y{0.5, 0};
  const Field corr = solve_harmonic_dirichlet(m, [&](Vec2 p) { return analytic::fundamental(p - y); });
  CHECK(l2_error(m, corr, [&](Vec2 p) { return analytic::disk_corrector(y, p); }) <= 1e-3);
}

TEST_CASE("derivative in sigma_c") {
  SUBCASE("no inclusion gives zero") {
    const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.1);
    const Field u = solve_two_phase(m, 1.0);
    const Field up = solve_linearized(m, 1.0, u);
    for (double x : up.values)
      CHECK(x == 0.0);
  }
  SUBCASE("concentric centre value at sigma_c = 1") {
    const Mesh m = concentric(0.025);
    const Field up = solve_linearized(m, 1.0, solve_two_phase(m, 1.0));
    CHECK(up.label == FieldLabel::u_prime);
    CHECK(std::abs(center_value(m, up) + 0.0625) <= 5e-3);
  }
  SUBCASE("matches finite differences") {
    const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::disk(0.3), 0.05);
    const Field u = solve_two_phase(m, 1.5);
    const Field up = solve_linearized(m, 1.5, u);
    double prev = 0;
    for (double eps : {0.1, 0.05, 0.025}) {
      const Field ue = solve_two_phase(m, 1.5 + eps);
      std::vector<double> d(u.values.size());
      for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = (ue.values[i] - u.values[i]) / eps - up.values[i];
      const double e = l2_norm(m, d);
      if (prev > 0)
        CHECK(prev / e == doctest::Approx(2.0).epsilon(0.15));
      prev = e;
    }
  }
}

TEST_CASE("Hessian recovery") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.05);
  Field quad;
  quad.mesh_id = m.id;
  Field lin = quad;
  for (const auto &p : m.vertices) {
    quad.values.push_back(p.x * p.x);
    lin.values.push_back(2 * p.x - 3 * p.y);
  }
  for (const auto &H : hessian_recovery(m, lin))
    CHECK(std::sqrt(H.frobenius2()) <= 1e-10);
  const auto Hq = hessian_recovery(m, quad);
  // Exact away from the boundary ring.
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    if (norm(m.vertices[i]) < 0.8) {
      CHECK(Hq[i].xx == doctest::Approx(2.0).epsilon(1e-8));
      CHECK(std::abs(Hq[i].xy) <= 1e-8);
      CHECK(std::abs(Hq[i].yy) <= 1e-8);
    }
}

TEST_CASE("recovered Hessian of the ellipse torsion converges in L2") {
  const auto exact = analytic::ellipse_torsion_hessian(1.2, 1.0);
  auto err = [&](const Mesh &m) {
    const auto H = hessian_recovery(m, solve_one_phase(m));
    std::vector<double> e(H.size());
    for (std::size_t i = 0; i < H.size(); ++i)
      e[i] = std::sqrt((H[i].xx - exact[0]) * (H[i].xx - exact[0]) + 2 * H[i].xy * H[i].xy +
                       (H[i].yy - exact[1]) * (H[i].yy - exact[1]));
    return l2_norm(m, e);
  };
  const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 0.05);
  const double e0 = err(m);
  const double e1 = err(refine(m));
  CHECK(e1 < e0);
  CHECK(e1 <= 0.2);
}

TEST_CASE("l2 norm is exact for P1 fields") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.1);
  std::vector<double> one(m.vertices.size(), 1.0);
  CHECK(l2_norm(m, one) == doctest::Approx(std::sqrt(m.area())).epsilon(1e-13));
  CHECK(std::abs(m.area() - pi) < 0.02);
}
