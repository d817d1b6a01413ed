#include "expdamp/spectral_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "expdamp/fft.hpp"
#include "expdamp/kernels.hpp"

namespace expdamp {

namespace {

const Complex kI(0.0, 1.0);

template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) fn(i, j, l, g.flat(i, j, l));
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("spectral operation on mismatched grids");
}

}  // namespace

SpectralVectorField leray_project(const SpectralVectorField& f) {
  SpectralVectorField out = f;
  kernels::leray(out);
  return out;
}

SpectralVectorField friedrich_cutoff(const SpectralVectorField& f, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("friedrich_cutoff: radius must be positive");
  SpectralVectorField out = f;
  kernels::cutoff(out, radius);
  return out;
}

SpectralVectorField projected_cutoff(const SpectralVectorField& f, double radius) {
  SpectralVectorField out = friedrich_cutoff(f, radius);
  kernels::leray(out);
  return out;
}

SpectralVectorField gradient(const SpectralScalarField& f) {
  const Grid& g = f.grid();
  SpectralVectorField out(g);
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    const auto k = g.wavevector(i, j, l);
    for (int c = 0; c < 3; ++c) out.at(c, p) = kI * k[c] * f.at(p);
  });
  return out;
}

SpectralScalarField divergence(const SpectralVectorField& f) {
  const Grid& g = f.grid();
  SpectralScalarField out(g);
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    const auto k = g.wavevector(i, j, l);
    out.at(p) = kI * (k[0] * f.at(0, p) + k[1] * f.at(1, p) + k[2] * f.at(2, p));
  });
  return out;
}

SpectralVectorField laplacian(const SpectralVectorField& f) {
  const Grid& g = f.grid();
  SpectralVectorField out(g, f.divfree());
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    const double k2 = g.wavevector_sq(i, j, l);
    for (int c = 0; c < 3; ++c) out.at(c, p) = -k2 * f.at(c, p);
  });
  return out;
}

SpectralScalarField laplacian(const SpectralScalarField& f) {
  const Grid& g = f.grid();
  SpectralScalarField out(g);
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    out.at(p) = -g.wavevector_sq(i, j, l) * f.at(p);
  });
  return out;
}

bool survives_two_thirds(const Grid& g, int i, int j, int l) noexcept {
  const int n = g.n();
  return 3 * std::abs(g.wavenumber(i)) < n && 3 * std::abs(g.wavenumber(j)) < n &&
         3 * std::abs(g.wavenumber(l)) < n;
}

void dealias_two_thirds(SpectralVectorField& f) {
  const Grid& g = f.grid();
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    if (survives_two_thirds(g, i, j, l)) return;
    for (int c = 0; c < 3; ++c) f.at(c, p) = Complex(0.0, 0.0);
  });
}

void dealias_two_thirds(SpectralScalarField& f) {
  const Grid& g = f.grid();
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    if (!survives_two_thirds(g, i, j, l)) f.at(p) = Complex(0.0, 0.0);
  });
}

SpectralVectorField advection_term(const SpectralVectorField& u) {
  if (!u.divfree()) {
    throw std::invalid_argument("advection_term: input must be flagged divergence-free");
  }
  const Grid& g = u.grid();
  SpectralVectorField truncated = u;
  dealias_two_thirds(truncated);
  const RealVectorField ur = inverse_transform(truncated);

  std::array<RealScalarField, 6> products{RealScalarField(g), RealScalarField(g),
                                          RealScalarField(g), RealScalarField(g),
                                          RealScalarField(g), RealScalarField(g)};
  kernels::tensor_products(kernels::components(ur),
                           {products[0].values(), products[1].values(), products[2].values(),
                            products[3].values(), products[4].values(), products[5].values()});

  // symmetric slot for (i, j)
  constexpr int slot[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  std::array<SpectralScalarField, 6> hat{
      forward_transform(products[0]), forward_transform(products[1]),
      forward_transform(products[2]), forward_transform(products[3]),
      forward_transform(products[4]), forward_transform(products[5])};

  SpectralVectorField out(g);
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    if (!survives_two_thirds(g, i, j, l)) return;
    const auto k = g.wavevector(i, j, l);
    for (int a = 0; a < 3; ++a) {
      Complex acc(0.0, 0.0);
      for (int b = 0; b < 3; ++b) acc += k[b] * hat[slot[a][b]].at(p);
      out.at(a, p) = kI * acc;
    }
  });
  return out;
}

Complex inner_product(const SpectralVectorField& a, const SpectralVectorField& b) {
  require_same_grid(a.grid(), b.grid());
  Complex acc(0.0, 0.0);
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  for (std::size_t p = 0; p < ca.size(); ++p) acc += ca[p] * std::conj(cb[p]);
  return a.grid().volume() * acc;
}

Complex inner_product(const SpectralScalarField& a, const SpectralScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  Complex acc(0.0, 0.0);
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  for (std::size_t p = 0; p < ca.size(); ++p) acc += ca[p] * std::conj(cb[p]);
  return a.grid().volume() * acc;
}

double l2_norm_sq(const SpectralVectorField& f) {
  return f.grid().volume() * kernels::sum_abs_sq(f.coeffs());
}

double l2_norm_sq(const SpectralScalarField& f) {
  return f.grid().volume() * kernels::sum_abs_sq(f.coeffs());
}

double gradient_norm_sq(const SpectralVectorField& f) {
  const Grid& g = f.grid();
  double acc = 0.0;
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    const double k2 = g.wavevector_sq(i, j, l);
    if (k2 == 0.0) return;
    acc += k2 * (std::norm(f.at(0, p)) + std::norm(f.at(1, p)) + std::norm(f.at(2, p)));
  });
  return g.volume() * acc;
}

double divergence_defect(const SpectralVectorField& f) {
  const Grid& g = f.grid();
  double worst = 0.0;
  double scale = 0.0;
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    const auto k = g.wavevector(i, j, l);
    const Complex dot = k[0] * f.at(0, p) + k[1] * f.at(1, p) + k[2] * f.at(2, p);
    const double mag = std::sqrt(std::norm(f.at(0, p)) + std::norm(f.at(1, p)) +
                                 std::norm(f.at(2, p)));
    worst = std::max(worst, std::abs(dot));
    scale = std::max(scale, std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * mag);
  });
  return worst / std::max(1.0, scale);
}

double max_outside_ball(const SpectralVectorField& f, double radius) {
  const Grid& g = f.grid();
  double worst = 0.0;
  const double r2 = radius * radius;
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    if (g.wavevector_sq(i, j, l) < r2) return;
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(f.at(c, p)));
  });
  return worst;
}

}  // namespace expdamp
