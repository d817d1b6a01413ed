#include "expdamp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "expdamp/damping.hpp"
#include "expdamp/errors.hpp"

namespace expdamp::kernels {

namespace {

std::size_t block_count(std::size_t n) { return (n + kReductionBlock - 1) / kReductionBlock; }

struct BlockResult {
  double sum = 0.0;
  double max_sq = 0.0;
};

BlockResult damping_block(ConstComponents u, Components out, std::size_t begin, std::size_t end,
                          double alpha, double beta, const std::optional<int>& poly_order) {
  BlockResult r;
  for (std::size_t p = begin; p < end; ++p) {
    const double a = u[0][p], b = u[1][p], c = u[2][p];
    const double speed_sq = a * a + b * b + c * c;
    const double factor = damping_factor(beta * speed_sq, poly_order);
    const double scale = alpha * factor;
    out[0][p] = scale * a;
    out[1][p] = scale * b;
    out[2][p] = scale * c;
    r.sum += factor * speed_sq;
    r.max_sq = std::max(r.max_sq, speed_sq);
  }
  return r;
}

DampingSums combine(const std::vector<BlockResult>& blocks, double beta) {
  DampingSums s;
  for (const auto& b : blocks) {
    s.dissipation_sum += b.sum;
    s.max_speed_sq = std::max(s.max_speed_sq, b.max_sq);
  }
  if (beta * s.max_speed_sq > kMaxDampingExponent || !std::isfinite(s.max_speed_sq)) {
    throw DampingOverflow(std::sqrt(s.max_speed_sq), beta);
  }
  return s;
}

void leray_mode(SpectralVectorField& f, std::size_t p, const std::array<double, 3>& k) {
  const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  if (k2 == 0.0) return;
  Complex& a = f.at(0, p);
  Complex& b = f.at(1, p);
  Complex& c = f.at(2, p);
  const Complex dot = (k[0] * a + k[1] * b + k[2] * c) / k2;
  a -= k[0] * dot;
  b -= k[1] * dot;
  c -= k[2] * dot;
}

void leray_slab(SpectralVectorField& f, int i) {
  const Grid& g = f.grid();
  const int n = g.n();
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) leray_mode(f, g.flat(i, j, l), g.wavevector(i, j, l));
}

void cutoff_slab(SpectralVectorField& f, int i, double radius_sq) {
  const Grid& g = f.grid();
  const int n = g.n();
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      if (g.wavevector_sq(i, j, l) < radius_sq) continue;
      const std::size_t p = g.flat(i, j, l);
      for (int c = 0; c < 3; ++c) f.at(c, p) = Complex(0.0, 0.0);
    }
}

double abs_sq_block(std::span<const Complex> c, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t p = begin; p < end; ++p) s += std::norm(c[p]);
  return s;
}

}  // namespace

ConstComponents components(const RealVectorField& f) {
  return {f.component(0), f.component(1), f.component(2)};
}

Components components(RealVectorField& f) {
  return {f.component(0), f.component(1), f.component(2)};
}

namespace serial {

DampingSums damping(ConstComponents u, Components out, double alpha, double beta,
                    const std::optional<int>& poly_order) {
  const std::size_t np = u[0].size();
  std::vector<BlockResult> blocks(block_count(np));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t begin = b * kReductionBlock;
    blocks[b] = damping_block(u, out, begin, std::min(np, begin + kReductionBlock), alpha, beta,
                              poly_order);
  }
  return combine(blocks, beta);
}

void tensor_products(ConstComponents u, std::array<std::span<double>, 6> out) {
  const std::size_t np = u[0].size();
  for (std::size_t p = 0; p < np; ++p) {
    const double a = u[0][p], b = u[1][p], c = u[2][p];
    out[0][p] = a * a;
    out[1][p] = a * b;
    out[2][p] = a * c;
    out[3][p] = b * b;
    out[4][p] = b * c;
    out[5][p] = c * c;
  }
}

void leray(SpectralVectorField& f) {
  for (int i = 0; i < f.grid().n(); ++i) leray_slab(f, i);
  f.set_divfree(true);
}

void cutoff(SpectralVectorField& f, double radius) {
  for (int i = 0; i < f.grid().n(); ++i) cutoff_slab(f, i, radius * radius);
}

double sum_abs_sq(std::span<const Complex> c) {
  double total = 0.0;
  const std::size_t nb = block_count(c.size());
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t begin = b * kReductionBlock;
    total += abs_sq_block(c, begin, std::min(c.size(), begin + kReductionBlock));
  }
  return total;
}

}  // namespace serial

namespace parallel {

DampingSums damping(ConstComponents u, Components out, double alpha, double beta,
                    const std::optional<int>& poly_order) {
  const std::size_t np = u[0].size();
  const auto nb = static_cast<std::ptrdiff_t>(block_count(np));
  std::vector<BlockResult> blocks(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    blocks[b] = damping_block(u, out, begin, std::min(np, begin + kReductionBlock), alpha, beta,
                              poly_order);
  }
  return combine(blocks, beta);
}

void tensor_products(ConstComponents u, std::array<std::span<double>, 6> out) {
  const auto np = static_cast<std::ptrdiff_t>(u[0].size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < np; ++p) {
    const double a = u[0][p], b = u[1][p], c = u[2][p];
    out[0][p] = a * a;
    out[1][p] = a * b;
    out[2][p] = a * c;
    out[3][p] = b * b;
    out[4][p] = b * c;
    out[5][p] = c * c;
  }
}

void leray(SpectralVectorField& f) {
  const int n = f.grid().n();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) leray_slab(f, i);
  f.set_divfree(true);
}

void cutoff(SpectralVectorField& f, double radius) {
  const int n = f.grid().n();
  const double r2 = radius * radius;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) cutoff_slab(f, i, r2);
}

double sum_abs_sq(std::span<const Complex> c) {
  const auto nb = static_cast<std::ptrdiff_t>(block_count(c.size()));
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    partial[b] = abs_sq_block(c, begin, std::min(c.size(), begin + kReductionBlock));
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace parallel

}  // namespace expdamp::kernels
