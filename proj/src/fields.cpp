#include "expdamp/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace expdamp {

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("field arithmetic on mismatched grids");
}

template <class Field>
double hermitian_defect_of(const Grid& g, int components, const Field& at) {
  const int n = g.n();
  double worst = 0.0;
  for (int c = 0; c < components; ++c) {
    for (int i = 0; i < n; ++i) {
      if (g.is_nyquist(i)) continue;
      const int mi = (n - i) % n;
      for (int j = 0; j < n; ++j) {
        if (g.is_nyquist(j)) continue;
        const int mj = (n - j) % n;
        for (int l = 0; l < n; ++l) {
          if (g.is_nyquist(l)) continue;
          const int ml = (n - l) % n;
          const Complex a = at(c, g.flat(i, j, l));
          const Complex b = at(c, g.flat(mi, mj, ml));
          worst = std::max(worst, std::abs(a - std::conj(b)));
        }
      }
    }
  }
  return worst;
}

}  // namespace

RealVectorField::RealVectorField(Grid grid) : grid_(grid), values_(3 * grid.points(), 0.0) {}

bool RealVectorField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double RealVectorField::max_magnitude() const noexcept {
  const std::size_t np = grid_.points();
  double best = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    const double a = values_[p], b = values_[np + p], c = values_[2 * np + p];
    best = std::max(best, a * a + b * b + c * c);
  }
  return std::sqrt(best);
}

RealScalarField::RealScalarField(Grid grid) : grid_(grid), values_(grid.points(), 0.0) {}

bool RealScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SpectralVectorField::SpectralVectorField(Grid grid, bool divfree)
    : grid_(grid), coeffs_(3 * grid.points()), divfree_(divfree) {}

SpectralVectorField& SpectralVectorField::operator+=(const SpectralVectorField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t p = 0; p < coeffs_.size(); ++p) coeffs_[p] += other.coeffs_[p];
  divfree_ = divfree_ && other.divfree_;
  return *this;
}

SpectralVectorField& SpectralVectorField::operator-=(const SpectralVectorField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t p = 0; p < coeffs_.size(); ++p) coeffs_[p] -= other.coeffs_[p];
  divfree_ = divfree_ && other.divfree_;
  return *this;
}

SpectralVectorField& SpectralVectorField::operator*=(double scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

SpectralVectorField& SpectralVectorField::add_scaled(double scale,
                                                     const SpectralVectorField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t p = 0; p < coeffs_.size(); ++p) coeffs_[p] += scale * other.coeffs_[p];
  divfree_ = divfree_ && other.divfree_;
  return *this;
}

SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) {
  a += b;
  return a;
}

SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) {
  a -= b;
  return a;
}

SpectralVectorField operator*(double scale, SpectralVectorField a) {
  a *= scale;
  return a;
}

SpectralScalarField::SpectralScalarField(Grid grid) : grid_(grid), coeffs_(grid.points()) {}

double hermitian_defect(const SpectralVectorField& f) {
  return hermitian_defect_of(f.grid(), 3,
                             [&](int c, std::size_t p) { return f.at(c, p); });
}

double hermitian_defect(const SpectralScalarField& f) {
  return hermitian_defect_of(f.grid(), 1, [&](int, std::size_t p) { return f.at(p); });
}

}  // namespace expdamp
