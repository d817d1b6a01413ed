#pragma once

#include "expdamp/fields.hpp"

namespace expdamp {

/// Leray projector M(k) = I - k k^T / |k|^2 applied per mode; the mean mode
/// passes through unchanged. Output is flagged divergence-free.
SpectralVectorField leray_project(const SpectralVectorField& f);

/// Friedrich cutoff: keeps modes with |k| < radius (open ball), zeroes the rest.
SpectralVectorField friedrich_cutoff(const SpectralVectorField& f, double radius);

/// Leray projection of the Friedrich cutoff; the two multipliers commute.
SpectralVectorField projected_cutoff(const SpectralVectorField& f, double radius);

SpectralVectorField gradient(const SpectralScalarField& f);
SpectralScalarField divergence(const SpectralVectorField& f);
SpectralVectorField laplacian(const SpectralVectorField& f);
SpectralScalarField laplacian(const SpectralScalarField& f);

/// Zero every mode with 3 |k_i| >= n for some axis (the 2/3 rule).
void dealias_two_thirds(SpectralVectorField& f);
void dealias_two_thirds(SpectralScalarField& f);
bool survives_two_thirds(const Grid& g, int i, int j, int l) noexcept;

/// F(div(u (x) u)), i.e. component i is sum_j d_j(u_i u_j), with products
/// formed on the collocation grid after 2/3-rule truncation of u and the
/// result truncated again. Requires a divergence-free input.
SpectralVectorField advection_term(const SpectralVectorField& u);

/// L^3 * sum_k a(k) . conj(b(k)), the L^2 inner product.
Complex inner_product(const SpectralVectorField& a, const SpectralVectorField& b);
Complex inner_product(const SpectralScalarField& a, const SpectralScalarField& b);

/// ||f||^2_{L^2} and ||grad f||^2_{L^2} (sum over components).
double l2_norm_sq(const SpectralVectorField& f);
double l2_norm_sq(const SpectralScalarField& f);
double gradient_norm_sq(const SpectralVectorField& f);

/// max_k |k . f(k)| / max(1, max_k |k| |f(k)|): relative divergence defect.
double divergence_defect(const SpectralVectorField& f);

/// Largest |f(k)| over modes with |k| >= radius.
double max_outside_ball(const SpectralVectorField& f, double radius);

}  // namespace expdamp
