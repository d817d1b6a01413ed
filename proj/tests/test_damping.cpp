#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "expdamp/damping.hpp"
#include "expdamp/errors.hpp"
#include "test_support.hpp"

using namespace expdamp;

namespace {

RealVectorField constant_field(const Grid& g, std::array<double, 3> v) {
  RealVectorField f(g);
  for (int c = 0; c < 3; ++c)
    for (double& x : f.component(c)) x = v[c];
  return f;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

TEST_CASE("damping parameters") {
  DampingParams p;
  CHECK_NOTHROW(p.validate());
  p.beta = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.beta = 1.0;
  p.poly_order = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.poly_order = 1;
  p.alpha = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    CHECK(e.field() == "damping.alpha");
  }
}

TEST_CASE("P_m values") {
  for (int m : {1, 2, 7, 50}) CHECK(p_m_eval(0.0, m) == 0.0);
  CHECK(p_m_eval(1.0, 3) == doctest::Approx(1.0 + 0.5 + 1.0 / 6.0).epsilon(1e-15));
  CHECK(std::abs(p_m_eval(1.0, 50) - std::expm1(1.0)) < 1e-15);
  CHECK_THROWS_AS(p_m_eval(-0.1, 2), std::domain_error);
  CHECK_THROWS_AS(p_m_eval(1.0, 0), std::domain_error);
}

TEST_CASE("P_m is nondecreasing in m and below e^x - 1 on a dense grid") {
  for (int i = 0; i <= 5000; ++i) {
    const double x = 50.0 * i / 5000.0;
    // forty-term sums carry a few ulps of rounding
    const double cap = std::expm1(x) * (1.0 + 1e-14);
    double prev = 0.0;
    for (int m = 1; m <= 40; ++m) {
      const double p = p_m_eval(x, m);
      CHECK(p >= prev);
      CHECK(p <= cap);
      prev = p;
    }
  }
}

TEST_CASE("pointwise damping") {
  const Grid g(8);
  DampingParams params;
  CHECK(testing::max_abs(damping_pointwise(RealVectorField(g), params).values()) == 0.0);

  // |u|^2 = 1 and beta = ln 2 make the factor exactly one
  params.beta = std::numbers::ln2;
  const auto u = constant_field(g, {0.6, 0.0, -0.8});
  const auto out = damping_pointwise(u, params);
  CHECK(testing::max_abs_diff(out.values(), u.values()) < 1e-15);

  params.beta = 1.0;
  params.alpha = 2.5;
  const auto r = testing::random_real(g, 3, 0.4);
  const auto gr = damping_pointwise(r, params);
  const std::size_t p = 77;
  const double s2 = r.component(0)[p] * r.component(0)[p] + r.component(1)[p] * r.component(1)[p] +
                    r.component(2)[p] * r.component(2)[p];
  for (int c = 0; c < 3; ++c)
    CHECK(gr.component(c)[p] == doctest::Approx(2.5 * std::expm1(s2) * r.component(c)[p]).epsilon(1e-14));
}

TEST_CASE("full minus order-50 damping is below the Taylor remainder") {
  const Grid g(8);
  auto u = testing::random_real(g, 8, 1.0);
  const double scale = 1.0 / u.max_magnitude();
  for (double& v : u.values()) v *= scale;  // beta max|u|^2 = 1
  DampingParams full, trunc;
  trunc.poly_order = 50;
  CHECK(testing::max_abs_diff(damping_pointwise(u, full).values(),
                              damping_pointwise(u, trunc).values()) < 1e-12);
  // e^x - 1 - P_3(x) <= x^4 e^x / 4!
  trunc.poly_order = 3;
  const auto a = damping_pointwise(u, full);
  const auto b = damping_pointwise(u, trunc);
  for (std::size_t p = 0; p < g.points(); ++p) {
    double x = 0.0;
    for (int c = 0; c < 3; ++c) x += u.component(c)[p] * u.component(c)[p];
    const double bound = std::pow(x, 4) * std::exp(x) / 24.0 * std::sqrt(x);
    double diff = 0.0;
    for (int c = 0; c < 3; ++c) diff += std::pow(a.component(c)[p] - b.component(c)[p], 2);
    CHECK(std::sqrt(diff) <= bound * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("damping is odd and rotation equivariant") {
  const Grid g(8);
  const auto u = testing::random_real(g, 12, 0.7);
  RealVectorField neg(g), rot(g);
  for (std::size_t i = 0; i < u.values().size(); ++i) neg.values()[i] = -u.values()[i];
  // rotation about (1, 2, 2)/3 by 0.9 rad
  const double th = 0.9, c = std::cos(th), s = std::sin(th);
  const std::array<double, 3> a{1.0 / 3, 2.0 / 3, 2.0 / 3};
  double q[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q[i][j] = (i == j ? c : 0.0) + (1 - c) * a[i] * a[j];
  q[0][1] -= s * a[2]; q[1][0] += s * a[2];
  q[0][2] += s * a[1]; q[2][0] -= s * a[1];
  q[1][2] -= s * a[0]; q[2][1] += s * a[0];
  auto rotate = [&](const RealVectorField& f, RealVectorField& out) {
    for (std::size_t p = 0; p < g.points(); ++p)
      for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 3; ++j) acc += q[i][j] * f.component(j)[p];
        out.component(i)[p] = acc;
      }
  };
  rotate(u, rot);
  const DampingParams params;
  const auto gu = damping_pointwise(u, params);
  const auto gneg = damping_pointwise(neg, params);
  for (std::size_t i = 0; i < gu.values().size(); ++i) CHECK(gneg.values()[i] == -gu.values()[i]);
  RealVectorField qgu(g);
  rotate(gu, qgu);
  CHECK(testing::max_abs_diff(damping_pointwise(rot, params).values(), qgu.values()) <
        1e-12 * testing::max_abs(gu.values()));
}

TEST_CASE("dissipation equals the damping pairing") {
  const Grid g(8);
  CHECK(damping_dissipation(RealVectorField(g), 1.0) == 0.0);
  const auto one = constant_field(g, {0.0, 1.0, 0.0});
  const double vol = std::pow(2.0 * std::numbers::pi, 3);
  CHECK(damping_dissipation(one, std::numbers::ln2) == doctest::Approx(vol).epsilon(1e-14));
  CHECK(vol == doctest::Approx(248.0502));

  const auto u = testing::random_real(g, 2, 0.5);
  DampingParams params;
  params.alpha = 0.7;
  params.beta = 1.4;
  const auto gu = damping_pointwise(u, params);
  double pairing = 0.0;
  for (std::size_t i = 0; i < u.values().size(); ++i) pairing += gu.values()[i] * u.values()[i];
  pairing *= g.cell_volume();
  CHECK(pairing == doctest::Approx(0.7 * damping_dissipation(u, 1.4)).epsilon(1e-13));
  CHECK(damping_dissipation(u, 1.4) > 0.0);
  params.poly_order = 2;
  const auto g2 = damping_pointwise(u, params);
  pairing = 0.0;
  for (std::size_t i = 0; i < u.values().size(); ++i) pairing += g2.values()[i] * u.values()[i];
  CHECK(pairing * g.cell_volume() ==
        doctest::Approx(0.7 * damping_dissipation(u, 1.4, 2)).epsilon(1e-13));
}

TEST_CASE("overflowing exponents are reported with the offending speed") {
  const Grid g(4);
  auto u = constant_field(g, {0.0, 0.0, 0.0});
  u.component(1)[3] = 27.0;
  try {
    damping_pointwise(u, DampingParams{});
    FAIL("expected DampingOverflow");
  } catch (const DampingOverflow& e) {
    CHECK(e.max_speed() == doctest::Approx(27.0));
    CHECK(std::string(e.what()).find("27") != std::string::npos);
  }
}

TEST_CASE("M_{beta,R} against a grid search") {
  auto grid_sup = [](double beta, double radius) {
    double best = 0.0;
    int arg = 0;
    constexpr int n = 1000000;
    for (int i = 1; i <= n; ++i) {
      const double r = radius * i / n;
      const double h = std::expm1(beta * r * r) / r;
      if (h > best) {
        best = h;
        arg = i;
      }
    }
    CHECK(arg == n);
    return best;
  };
  CHECK(m_beta_r(1.0, 1.0) == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-15));
  CHECK(m_beta_r(1.0, 1.0) == doctest::Approx(grid_sup(1.0, 1.0)).epsilon(1e-15));
  CHECK(m_beta_r(1.0, 1e-3) == doctest::Approx(0.0010000005).epsilon(1e-9));
  CHECK(m_beta_r(1.0, 1e-3) == doctest::Approx(grid_sup(1.0, 1e-3)).epsilon(1e-14));
  const double scaled = std::sqrt(4.0) * m_beta_r(1.0, std::sqrt(4.0) * 0.5);
  CHECK(m_beta_r(4.0, 0.5) == doctest::Approx(scaled).epsilon(1e-14));
  CHECK(m_beta_r(4.0, 0.5) == doctest::Approx(grid_sup(4.0, 0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(m_beta_r(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(m_beta_r(1.0, 30.0), DampingOverflow);
}

TEST_CASE("sup of the poly-square ratio") {
  const auto m1 = poly_square_ratio_sup(1, 1.0);
  CHECK(m1.value == doctest::Approx(1.0).epsilon(1e-3));
  for (int m : {1, 2, 3, 5})
    for (double beta : {0.5, 1.0, 2.0}) {
      CAPTURE(m);
      CAPTURE(beta);
      const auto e = poly_square_ratio_sup(m, beta);
      CHECK(std::isfinite(e.value));
      CHECK(e.ratio_at_z_min <= e.value);
      CHECK(e.ratio_at_z_max < e.value);
      // independent dense scan in x = beta z^2
      double scan = beta;
      for (int i = 1; i <= 200000; ++i) {
        const double x = 80.0 * i / 200000.0;
        const double p = p_m_eval(x, m);
        scan = std::max(scan, beta * p * p / (x * std::expm1(x)));
      }
      CHECK(e.value == doctest::Approx(scan).epsilon(1e-6));
    }
}

TEST_CASE("the poly-square bound holds at random points with the estimated constant") {
  const double c = poly_square_ratio_sup(3, 1.0).value * (1.0 + 1e-9);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logz(std::log(1e-4), std::log(10.0));
  for (int i = 0; i < 100000; ++i) {
    const double z = std::exp(logz(rng));
    const double p = p_m_eval(z * z, 3);
    REQUIRE(p * p <= c * std::expm1(z * z) * z * z);
  }
}

TEST_CASE("Lipschitz ratio of the truncated damping") {
  const std::array<double, 3> x{0.3, -0.2, 0.5};
  CHECK_FALSE(poly_lipschitz_ratio(x, x, 2, 1.0).has_value());
  CHECK_FALSE(poly_lipschitz_ratio({0, 0, 0}, {0, 0, 0}, 2, 1.0).has_value());
  const auto r0 = poly_lipschitz_ratio(x, {0, 0, 0}, 3, 1.0);
  REQUIRE(r0.has_value());
  CHECK(*r0 == doctest::Approx(1.0).epsilon(1e-15));
  const auto rep = poly_lipschitz_check(2, 1.0, 100000, 7);
  CHECK(rep.evaluated + rep.skipped == 100000);
  CHECK(rep.worst_ratio <= 5.0);
  CHECK(rep.bound == 5.0);
  CHECK(rep.pass);
  CHECK(*poly_lipschitz_ratio(rep.witness_x, rep.witness_y, 2, 1.0) == rep.worst_ratio);
}

TEST_CASE("tail gap") {
  CHECK(tail_gap(0.0, 3, 1.0) == 0.0);
  CHECK(tail_gap(1.0, 2, 1.0) == doctest::Approx(std::numbers::e - 2.5).epsilon(1e-14));
  CHECK(tail_gap(1.0, 2, 1.0) == doctest::Approx(0.2182818).epsilon(1e-7));
  CHECK(tail_gap(1.0, 5, 1.0) < tail_gap(1.0, 2, 1.0));
  // direct form where no cancellation occurs
  const double x = 4.0;
  CHECK(tail_gap(2.0, 3, 1.0) ==
        doctest::Approx((std::expm1(x) - p_m_eval(x, 3)) * 2.0).epsilon(1e-13));
  double prev = tail_gap(1.3, 1, 0.8);
  for (int m = 2; m <= 60; ++m) {
    const double t = tail_gap(1.3, m, 0.8);
    CHECK(t < prev);
    prev = t;
  }
  CHECK(prev < 1e-60);
  // first dropped term dominates for small x: x^{m+1}/(m+1)! R
  CHECK(tail_gap(0.01, 4, 1.0) ==
        doctest::Approx(std::pow(1e-4, 5) / factorial(5) * 0.01).epsilon(1e-4));
}
