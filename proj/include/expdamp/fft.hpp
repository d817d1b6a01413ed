#pragma once

#include "expdamp/fields.hpp"

namespace expdamp {

/// Coefficients with f(x) = sum_k c(k) e^{i k.x}; Parseval reads
/// ||f||^2_{L^2} = L^3 sum_k |c(k)|^2. Rejects non-finite samples.
SpectralVectorField forward_transform(const RealVectorField& f);
SpectralScalarField forward_transform(const RealScalarField& f);

RealVectorField inverse_transform(const SpectralVectorField& f);
RealScalarField inverse_transform(const SpectralScalarField& f);

/// Evaluate a spectral field on another collocation grid of the same box.
/// Modes outside the target mode set are dropped; when the grids differ the
/// source Nyquist planes are ignored.
RealVectorField to_physical(const SpectralVectorField& f, const Grid& target);
RealScalarField to_physical(const SpectralScalarField& f, const Grid& target);

/// Transform samples on a (typically finer) grid and keep only the modes of
/// `target`. Nyquist planes of the target are zeroed when the grids differ.
SpectralVectorField from_physical(const RealVectorField& f, const Grid& target);
SpectralScalarField from_physical(const RealScalarField& f, const Grid& target);

}  // namespace expdamp
