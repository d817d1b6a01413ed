#pragma once

// Hot loops over collocation points and Fourier modes. Each kernel has a
// serial reference and an OpenMP version; both reduce over fixed-size blocks
// combined in block order, so the two agree bit for bit at any thread count.

#include <array>
#include <optional>
#include <span>

#include "expdamp/fields.hpp"
#include "expdamp/parallel.hpp"

namespace expdamp::kernels {

inline constexpr std::size_t kReductionBlock = 4096;

using ConstComponents = std::array<std::span<const double>, 3>;
using Components = std::array<std::span<double>, 3>;

struct DampingSums {
  double dissipation_sum = 0.0;  ///< sum_x factor(beta |u|^2) |u|^2
  double max_speed_sq = 0.0;     ///< max_x |u|^2
};

namespace serial {
/// out = alpha * factor(beta |u|^2) * u; also reports the dissipation sum.
DampingSums damping(ConstComponents u, Components out, double alpha, double beta,
                    const std::optional<int>& poly_order);
/// Six products u_i u_j (i <= j) in order 00, 01, 02, 11, 12, 22.
void tensor_products(ConstComponents u, std::array<std::span<double>, 6> out);
void leray(SpectralVectorField& f);
void cutoff(SpectralVectorField& f, double radius);
double sum_abs_sq(std::span<const Complex> c);
}  // namespace serial

namespace parallel {
DampingSums damping(ConstComponents u, Components out, double alpha, double beta,
                    const std::optional<int>& poly_order);
void tensor_products(ConstComponents u, std::array<std::span<double>, 6> out);
void leray(SpectralVectorField& f);
void cutoff(SpectralVectorField& f, double radius);
double sum_abs_sq(std::span<const Complex> c);
}  // namespace parallel

inline bool use_parallel() noexcept { return num_threads() > 1; }

inline DampingSums damping(ConstComponents u, Components out, double alpha, double beta,
                           const std::optional<int>& poly_order) {
  return use_parallel() ? parallel::damping(u, out, alpha, beta, poly_order)
                        : serial::damping(u, out, alpha, beta, poly_order);
}
inline void tensor_products(ConstComponents u, std::array<std::span<double>, 6> out) {
  use_parallel() ? parallel::tensor_products(u, out) : serial::tensor_products(u, out);
}
inline void leray(SpectralVectorField& f) {
  use_parallel() ? parallel::leray(f) : serial::leray(f);
}
inline void cutoff(SpectralVectorField& f, double radius) {
  use_parallel() ? parallel::cutoff(f, radius) : serial::cutoff(f, radius);
}
inline double sum_abs_sq(std::span<const Complex> c) {
  return use_parallel() ? parallel::sum_abs_sq(c) : serial::sum_abs_sq(c);
}

ConstComponents components(const RealVectorField& f);
Components components(RealVectorField& f);

}  // namespace expdamp::kernels
