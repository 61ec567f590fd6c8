#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "serrin/analytic.hpp"
#include "serrin/diagnostics.hpp"
#include "serrin/error.hpp"

using namespace serrin;

namespace {
constexpr double pi = std::numbers::pi;

Field sampled(const Mesh &m, double (*fn)(Vec2)) {
  Field f;
  f.mesh_id = m.id;
  for (const auto &p : m.vertices)
    f.values.push_back(fn(p));
  return f;
}
} // namespace

TEST_CASE("max point of the torsion function") {
  SUBCASE("off-centre disk") {
    const Mesh m = generate(DomainSpec::disk(1.0, {0.3, 0.1}), InclusionSpec::none(), 0.05);
    const Vec2 z = max_point(m, solve_one_phase(m));
    CHECK(distance(z, {0.3, 0.1}) <= 0.01);
  }
  SUBCASE("ellipse") {
    const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 0.05);
    CHECK(norm(max_point(m, solve_one_phase(m))) <= 0.01);
  }
  SUBCASE("quadratic bump off the lattice is located exactly") {
    const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.1);
    const Field f = sampled(m, [](Vec2 p) { return 1.0 - (p.x - 0.123) * (p.x - 0.123) - 2 * (p.y + 0.071) * (p.y + 0.071); });
    CHECK(distance(max_point(m, f), {0.123, -0.071}) <= 1e-9);
  }
  SUBCASE("boundary maximum is rejected") {
    const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.2);
    CHECK_THROWS_AS(max_point(m, sampled(m, [](Vec2 p) { return p.x; })), ValidationError);
  }
}

TEST_CASE("deviation norms") {
  BoundaryTrace tr;
  tr.values = {1.0, 2.0, 3.0};
  tr.weights = {1.0, 1.0, 2.0};
  tr.params = {0.0, 2.0, 4.0};
  const auto d = deviation_norms(tr, 2.0);
  CHECK(d.linf == 1.0);
  CHECK(d.l2 == doctest::Approx(std::sqrt(3.0)));
  const std::vector<double> eta{1.0, 1.0, -1.0};
  const auto de = deviation_norms(tr, 2.0, eta);
  CHECK(de.linf == 2.0);
  const std::vector<double> biased{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(deviation_norms(tr, 2.0, biased), ValidationError);
  const std::vector<double> wrong_size{1.0};
  CHECK_THROWS_AS(deviation_norms(tr, 2.0, wrong_size), ValidationError);
  tr.weights[1] = 0.0;
  CHECK_THROWS_AS(deviation_norms(tr, 2.0), ValidationError);
}

TEST_CASE("projected eta has zero weighted mean") {
  const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 0.1);
  const auto tr = normal_derivative(m, solve_one_phase(m), 1.0);
  const EtaSpec eta{0.02, 0, 0.0};
  const auto e = project_eta(tr, eta);
  double s = 0;
  for (std::size_t i = 0; i < e.size(); ++i)
    s += e[i] * tr.weights[i];
  CHECK(std::abs(s) <= 1e-15);
  for (double x : e)
    CHECK(std::abs(x) <= 1e-15);
}

TEST_CASE("h field is constant on the disk") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.05);
  const Field v = solve_one_phase(m);
  const Field h = h_field(m, v, max_point(m, v));
  double lo = 1e9, hi = -1e9;
  for (double x : h.values) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(hi - lo <= 2e-3);
  CHECK(h.label == FieldLabel::h);
}

TEST_CASE("fundamental identity on the ellipse") {
  const double exact = analytic::ellipse_identity_value(1.2, 1.0);
  const Mesh m = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 0.025);
  const Field v = solve_one_phase(m);
  const auto fi = fundamental_identity(m, v, max_point(m, v));
  CHECK(std::abs(fi.lhs - exact) <= 0.05 * exact);
  CHECK(std::abs(fi.rhs - exact) <= 0.05 * exact);
  CHECK(fi.relative_gap <= 0.05);
}

TEST_CASE("fundamental identity degenerates on the disk") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.05);
  const Field v = solve_one_phase(m);
  const auto fi = fundamental_identity(m, v, max_point(m, v));
  CHECK(std::abs(fi.lhs) <= 1e-3);
  CHECK(std::abs(fi.rhs) <= 1e-3);
}

TEST_CASE("oscillation of h on the boundary") {
  const Mesh disk = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.1);
  const auto o = osc_check(disk, {0, 0}, 1.0, 1.0, 2.0);
  CHECK(o.osc <= 1e-12);
  CHECK(o.residual <= 1e-12);
  const Mesh ell = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 0.05);
  const auto oe = osc_check(ell, {0, 0}, 1.0, 1.2, 2.4);
  CHECK(oe.osc == doctest::Approx(0.25 * (1.44 - 1.0)).epsilon(1e-9));
  CHECK(oe.residual <= 1e-9);
  CHECK(oe.slack >= 0.0);
}

TEST_CASE("growth of the torsion function") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.05);
  const auto g = growth_check(m, solve_one_phase(m));
  CHECK(g.ratio_min == doctest::Approx(0.25).epsilon(0.05));
  CHECK(g.quadratic_slack_min >= -1e-6);
  const Mesh big = generate(DomainSpec::disk(2.0), InclusionSpec::none(), 0.1);
  const auto gb = growth_check(big, solve_one_phase(big));
  CHECK(gb.ratio_min == doctest::Approx(2.0 * g.ratio_min).epsilon(0.05));
  const Mesh ell = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 0.05);
  CHECK(growth_check(ell, solve_one_phase(ell)).quadratic_slack_min >= -1e-6);
}

TEST_CASE("full report: disk is an exact case") {
  const auto r = full_report(DomainSpec::disk(1.0), InclusionSpec::none(), 1.0, 0.05);
  CHECK(r.c == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(r.deviation_linf <= 10 * r.h_max * r.h_max);
  CHECK(r.gap <= 0.02);
  CHECK(r.bridge_holds());
}

TEST_CASE("full report: boundary perturbation") {
  const auto r = full_report(DomainSpec::disk(1.0), InclusionSpec::none(), 1.0, 0.05, EtaSpec{0.01, 1, 0.0});
  CHECK(r.deviation_linf >= 0.009);
  CHECK(r.deviation_linf <= 0.012);
  CHECK(r.eta.has_value());
  CHECK(r.bridge_holds());
}

TEST_CASE("full report: ellipse") {
  const auto r = full_report(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::none(), 1.0, 0.05);
  CHECK(r.gap == doctest::Approx(0.2).epsilon(0.02));
  CHECK(r.deviation_linf >= 0.04);
  CHECK(r.deviation_linf <= 0.07);
  CHECK(r.bridge_holds());
  CHECK(r.osc_identity_residual <= 1e-6);
  CHECK(r.growth_quadratic_slack >= -1e-6);
}

TEST_CASE("concentric inclusion is an exact pair for every contrast") {
  for (double s : {0.5, 2.0, 5.0}) {
    const auto r = full_report(DomainSpec::disk(1.0), InclusionSpec::disk(0.5), s, 0.05);
    CHECK(r.deviation_linf <= 10 * r.h_max * r.h_max);
    CHECK(r.bridge_holds());
  }
}

TEST_CASE("bridge inequality is exact on arbitrary traces") {
  SerrinReport r;
  r.perimeter = 2 * pi;
  r.deviation_linf = 0.1;
  r.deviation_l2 = std::sqrt(2 * pi) * 0.1;
  CHECK(r.bridge_holds());
  r.deviation_l2 *= 1.001;
  CHECK_FALSE(r.bridge_holds());
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(full_report(DomainSpec::disk(1.0), InclusionSpec::disk(0.5), 0.0, 0.1), ValidationError);
  CHECK_THROWS_AS(full_report(DomainSpec::disk(1.0), InclusionSpec::disk(0.5), 2.0, 0.0), ValidationError);
}
