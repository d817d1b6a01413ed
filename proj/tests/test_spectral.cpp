#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "expdamp/fft.hpp"
#include "expdamp/spectral_ops.hpp"
#include "test_support.hpp"

using namespace expdamp;
using testing::max_abs;
using testing::max_abs_diff;

namespace {

constexpr double kPi = std::numbers::pi;

// c(k) = n^-3 sum_x f(x) e^{-i k.x}
std::vector<Complex> direct_dft(std::span<const double> f, const Grid& g) {
  const int n = g.n();
  std::vector<Complex> c(g.points());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const auto k = g.wavevector(i, j, l);
        Complex acc(0.0, 0.0);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int d = 0; d < n; ++d) {
              const double phase =
                  k[0] * g.coordinate(a) + k[1] * g.coordinate(b) + k[2] * g.coordinate(d);
              acc += f[g.flat(a, b, d)] * std::polar(1.0, -phase);
            }
        c[g.flat(i, j, l)] = acc / static_cast<double>(g.points());
      }
  return c;
}

double quadrature_l2_sq(const RealVectorField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return s * f.grid().cell_volume();
}

SpectralVectorField single_mode(const Grid& g, std::array<int, 3> k, int comp, Complex value) {
  SpectralVectorField f(g);
  f.at(comp, g.flat(g.index_of(k[0]), g.index_of(k[1]), g.index_of(k[2]))) = value;
  f.at(comp, g.flat(g.index_of(-k[0]), g.index_of(-k[1]), g.index_of(-k[2]))) = std::conj(value);
  return f;
}

}  // namespace

TEST_CASE("grid rejects bad sizes and maps wavenumbers") {
  CHECK_THROWS_AS(Grid(2), std::invalid_argument);
  CHECK_THROWS_AS(Grid(7), std::invalid_argument);
  CHECK_THROWS_AS(Grid(8, -1.0), std::invalid_argument);
  const Grid g(8);
  for (int i = 0; i < 8; ++i) CHECK(g.index_of(g.wavenumber(i)) == i);
  CHECK(g.wavenumber(4) == -4);
  CHECK(g.is_nyquist(4));
  CHECK(g.max_resolvable_radius() == doctest::Approx(std::sqrt(3.0) * 4));
  CHECK(fft_friendly_size(64) == 64);
  CHECK(fft_friendly_size(14) == 16);
  CHECK(fft_friendly_size(22) == 24);
  CHECK(Grid(8, 4 * kPi).wavevector(1, 0, 0)[0] == doctest::Approx(0.5));
}

TEST_CASE("forward transform: zero field and single cosine") {
  const Grid g(8);
  RealVectorField zero(g);
  CHECK(max_abs(forward_transform(zero).coeffs()) == 0.0);

  RealVectorField f(g);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int l = 0; l < 8; ++l) f.component(0)[g.flat(i, j, l)] = std::cos(g.coordinate(i));
  const auto c = forward_transform(f);
  for (int comp = 0; comp < 3; ++comp)
    for (std::size_t p = 0; p < g.points(); ++p) {
      const bool hit = comp == 0 && (p == g.flat(1, 0, 0) || p == g.flat(7, 0, 0));
      CHECK(std::abs(c.at(comp, p) - Complex(hit ? 0.5 : 0.0, 0.0)) < 1e-15);
    }
}

TEST_CASE("forward transform matches the direct discrete Fourier sum on 8^3") {
  const Grid g(8);
  const auto f = testing::random_real(g, 11);
  const auto c = forward_transform(f);
  for (int comp = 0; comp < 3; ++comp) {
    const auto oracle = direct_dft(f.component(comp), g);
    CHECK(max_abs_diff(c.component(comp), oracle) < 1e-12 * max_abs(oracle));
  }
  CHECK(hermitian_defect(c) < 1e-15);
}

TEST_CASE("round trip and Parseval on several grid sizes") {
  for (int n : {4, 6, 8, 10, 12, 16, 32}) {
    CAPTURE(n);
    const Grid g(n);
    const auto f = testing::random_real(g, 100 + n);
    const auto c = forward_transform(f);
    const auto back = inverse_transform(c);
    CHECK(max_abs_diff(back.values(), f.values()) <= 1e-12 * max_abs(f.values()));
    const double q = quadrature_l2_sq(f);
    CHECK(std::abs(l2_norm_sq(c) - q) <= 1e-12 * q);
  }
  const Grid g(6, 3.0);
  const auto s = testing::random_scalar_real(g, 5);
  const auto back = inverse_transform(forward_transform(s));
  CHECK(max_abs_diff(back.values(), s.values()) < 1e-12 * max_abs(s.values()));
}

TEST_CASE("non-finite samples are rejected") {
  const Grid g(4);
  RealVectorField f(g);
  f.values()[17] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(forward_transform(f), std::invalid_argument);
  f.values()[17] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(forward_transform(f), std::invalid_argument);
}

TEST_CASE("resampling to a finer grid evaluates the trigonometric polynomial") {
  // band 3 on 8 -> 16 and band 2 on 16 -> 32 take the pruned path; band 7 on 16 -> 32 does not
  struct Case { int n_src, n_dst; double radius; };
  for (const auto& cs : {Case{8, 16, 3.5}, Case{16, 32, 2.5}, Case{16, 32, 7.9}, Case{8, 8, 10.0}}) {
    CAPTURE(cs.n_src);
    CAPTURE(cs.radius);
    const Grid src(cs.n_src), dst(cs.n_dst);
    const auto f = friedrich_cutoff(testing::random_spectral(src, 7), cs.radius);
    const auto fine = to_physical(f, dst);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, cs.n_dst - 1);
    for (int trial = 0; trial < 20; ++trial) {
      const int i = pick(rng), j = pick(rng), l = pick(rng);
      for (int c = 0; c < 3; ++c) {
        const double oracle = testing::direct_eval(f.component(c), src, dst.coordinate(i),
                                                   dst.coordinate(j), dst.coordinate(l));
        CHECK(std::abs(fine.component(c)[dst.flat(i, j, l)] - oracle) < 1e-12);
      }
    }
    // a band-limited field survives the round trip through the finer grid
    const auto back = from_physical(fine, src);
    CHECK(max_abs_diff(back.coeffs(), f.coeffs()) < 1e-14);
  }
}

TEST_CASE("restriction to a coarser grid keeps exactly the non-Nyquist coarse modes") {
  for (int n_dst : {8, 16}) {
    const Grid fine(32), coarse(n_dst);
    const auto f = testing::random_real(fine, 21);
    const auto full = forward_transform(f);
    const auto r = from_physical(f, coarse);
    double worst = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < n_dst; ++i)
        for (int j = 0; j < n_dst; ++j)
          for (int l = 0; l < n_dst; ++l) {
            const Complex got = r.at(c, coarse.flat(i, j, l));
            if (coarse.is_nyquist(i) || coarse.is_nyquist(j) || coarse.is_nyquist(l)) {
              worst = std::max(worst, std::abs(got));
              continue;
            }
            const Complex want = full.at(c, fine.flat(fine.index_of(coarse.wavenumber(i)),
                                                      fine.index_of(coarse.wavenumber(j)),
                                                      fine.index_of(coarse.wavenumber(l))));
            worst = std::max(worst, std::abs(got - want));
          }
    CHECK(worst < 1e-15);
  }
  const Grid fine(16), coarse(8);
  const auto s = testing::random_scalar_real(fine, 4);
  const auto sr = from_physical(s, coarse);
  const auto sf = forward_transform(s);
  CHECK(std::abs(sr.at(coarse.flat(1, 7, 2)) - sf.at(fine.flat(1, 15, 2))) < 1e-15);
}

TEST_CASE("leray projection") {
  const Grid g(8);
  const auto phi = testing::random_spectral_scalar(g, 2);
  const auto grad = gradient(phi);
  const auto pg = leray_project(grad);
  CHECK(pg.divfree());
  CHECK(max_abs(pg.coeffs()) < 1e-14 * std::max(1.0, max_abs(grad.coeffs())));

  const auto f = testing::random_spectral(g, 3);
  const auto p = leray_project(f);
  CHECK(max_abs_diff(leray_project(p).coeffs(), p.coeffs()) < 1e-14);
  CHECK(divergence_defect(p) < 1e-12);
  for (int c = 0; c < 3; ++c) CHECK(p.at(c, 0) == f.at(c, 0));

  // orthogonal projector
  CHECK(l2_norm_sq(p) <= l2_norm_sq(f));
  const double cross = std::abs(inner_product(p, f - p));
  CHECK(cross < 1e-10 * l2_norm_sq(f));
}

TEST_CASE("friedrich cutoff uses the open ball") {
  const Grid g(8);
  const auto f = testing::random_spectral(g, 9);
  CHECK(max_abs_diff(friedrich_cutoff(f, 7.0).coeffs(), f.coeffs()) == 0.0);
  const auto r1 = friedrich_cutoff(f, 1.0);
  for (int c = 0; c < 3; ++c)
    for (std::size_t p = 1; p < g.points(); ++p) CHECK(r1.at(c, p) == Complex(0.0, 0.0));
  CHECK(r1.at(0, 0) == f.at(0, 0));
  const auto m = single_mode(g, {2, 0, 0}, 1, Complex(1.0, 0.5));
  CHECK(max_abs(friedrich_cutoff(m, 2.0).coeffs()) == 0.0);
  CHECK(max_abs(friedrich_cutoff(m, 2.0001).coeffs()) > 0.0);
  CHECK_THROWS_AS(friedrich_cutoff(f, 0.0), std::invalid_argument);
  CHECK(l2_norm_sq(friedrich_cutoff(f, 2.5)) <= l2_norm_sq(f));
}

TEST_CASE("multiplier algebra commutes with the cutoff") {
  const Grid g(8);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = testing::random_spectral(g, seed);
    const auto phi = testing::random_spectral_scalar(g, seed + 50);
    const double r = 2.7;
    const auto a = projected_cutoff(f, r);
    CHECK(max_abs_diff(projected_cutoff(a, r).coeffs(), a.coeffs()) < 1e-14);
    CHECK(max_abs_diff(friedrich_cutoff(leray_project(f), r).coeffs(), a.coeffs()) < 1e-14);
    CHECK(max_abs_diff(friedrich_cutoff(laplacian(f), r).coeffs(),
                       laplacian(friedrich_cutoff(f, r)).coeffs()) < 1e-12);
    auto phi_cut = phi;
    SpectralVectorField grad_cut = friedrich_cutoff(gradient(phi), r);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        for (int l = 0; l < 8; ++l)
          if (!(g.wavevector_sq(i, j, l) < r * r)) phi_cut.at(g.flat(i, j, l)) = 0.0;
    CHECK(max_abs_diff(grad_cut.coeffs(), gradient(phi_cut).coeffs()) < 1e-12);
    CHECK(max_abs(projected_cutoff(gradient(phi), r).coeffs()) < 1e-13);
  }
  const auto u = testing::random_divfree(g, 8, 3.5);
  CHECK(max_abs_diff(projected_cutoff(u, 3.5).coeffs(), u.coeffs()) < 1e-15);
}

TEST_CASE("differential operators") {
  const Grid g(8);
  const auto phi = testing::random_spectral_scalar(g, 1);
  CHECK(max_abs_diff(divergence(gradient(phi)).coeffs(), laplacian(phi).coeffs()) <
        1e-12 * max_abs(laplacian(phi).coeffs()));
  CHECK(max_abs(divergence(leray_project(testing::random_spectral(g, 2))).coeffs()) < 1e-12);
  const auto m = single_mode(g, {1, 2, -1}, 2, Complex(0.3, -0.2));
  const auto lap = laplacian(m);
  CHECK(max_abs_diff(lap.coeffs(), (-6.0 * m).coeffs()) < 1e-15);
  CHECK(gradient_norm_sq(m) == doctest::Approx(6.0 * l2_norm_sq(m)).epsilon(1e-14));
}

TEST_CASE("advection of a constant field vanishes") {
  const Grid g(8);
  SpectralVectorField u(g, true);
  u.at(0, 0) = 0.7;
  u.at(2, 0) = -1.1;
  CHECK(max_abs(advection_term(u).coeffs()) == 0.0);
  SpectralVectorField notflagged(g, false);
  CHECK_THROWS_AS(advection_term(notflagged), std::invalid_argument);
}

TEST_CASE("advection matches the brute-force dealiased convolution on 8^3") {
  const Grid g(8);
  const auto tg_state = [&] {
    RealVectorField f(g);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        for (int l = 0; l < 8; ++l) {
          const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(l);
          f.component(0)[g.flat(i, j, l)] = std::cos(x) * std::sin(y) * std::sin(z);
          f.component(1)[g.flat(i, j, l)] = -std::sin(x) * std::cos(y) * std::sin(z);
        }
    auto c = forward_transform(f);
    c.set_divfree(true);
    return c;
  }();
  const auto random_u = [&] {
    auto u = testing::random_divfree(g, 17, 10.0);
    dealias_two_thirds(u);
    return u;
  }();

  for (const auto* u : {&tg_state, &random_u}) {
    const auto adv = advection_term(*u);
    // div(u (x) u)_a(k) = i sum_b k_b sum_{p+q=k} u_a(p) u_b(q), all modes in the 2/3 set
    double worst = 0.0, scale = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int k0 = -2; k0 <= 2; ++k0)
        for (int k1 = -2; k1 <= 2; ++k1)
          for (int k2 = -2; k2 <= 2; ++k2) {
            Complex acc(0.0, 0.0);
            for (int p0 = -2; p0 <= 2; ++p0)
              for (int p1 = -2; p1 <= 2; ++p1)
                for (int p2 = -2; p2 <= 2; ++p2) {
                  const int q0 = k0 - p0, q1 = k1 - p1, q2 = k2 - p2;
                  if (std::abs(q0) > 2 || std::abs(q1) > 2 || std::abs(q2) > 2) continue;
                  const auto fp = g.flat(g.index_of(p0), g.index_of(p1), g.index_of(p2));
                  const auto fq = g.flat(g.index_of(q0), g.index_of(q1), g.index_of(q2));
                  const Complex kb = double(k0) * u->at(0, fq) + double(k1) * u->at(1, fq) +
                                     double(k2) * u->at(2, fq);
                  acc += u->at(a, fp) * kb;
                }
            acc *= Complex(0.0, 1.0);
            const Complex got = adv.at(a, g.flat(g.index_of(k0), g.index_of(k1), g.index_of(k2)));
            worst = std::max(worst, std::abs(got - acc));
            scale = std::max(scale, std::abs(acc));
          }
    CHECK(scale > 0.0);
    CHECK(worst < 1e-10 * std::max(1.0, scale));
    // everything outside the 2/3 set is zero
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        for (int l = 0; l < 8; ++l)
          if (!survives_two_thirds(g, i, j, l))
            for (int a = 0; a < 3; ++a) CHECK(adv.at(a, g.flat(i, j, l)) == Complex(0.0, 0.0));
  }
}

TEST_CASE("advection is energy neutral on dealiased divergence-free fields") {
  for (int n : {8, 16}) {
    const Grid g(n);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto u = testing::random_divfree(g, seed, n);
      dealias_two_thirds(u);
      const auto adv = advection_term(u);
      const double h1 = l2_norm_sq(u) + gradient_norm_sq(u);
      CHECK(std::abs(inner_product(adv, u).real()) <= 1e-10 * h1);
      CHECK(std::abs(inner_product(leray_project(adv), u).real()) <= 1e-8 * h1);
    }
  }
}

TEST_CASE("field arithmetic") {
  const Grid g(4);
  auto a = testing::random_spectral(g, 1);
  const auto b = testing::random_spectral(g, 2);
  auto c = a;
  c.add_scaled(2.0, b);
  CHECK(max_abs_diff(c.coeffs(), (a + 2.0 * b).coeffs()) < 1e-15);
  CHECK(max_abs_diff((c - a).coeffs(), (2.0 * b).coeffs()) < 1e-14);
  CHECK_THROWS_AS(a += testing::random_spectral(Grid(6), 1), std::invalid_argument);
  RealVectorField r(g);
  r.values()[0] = 3.0;
  r.values()[g.points()] = 4.0;
  CHECK(r.max_magnitude() == doctest::Approx(5.0));
  CHECK(r.all_finite());
}
