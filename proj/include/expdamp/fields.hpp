#pragma once

#include <complex>
#include <span>
#include <vector>

#include "expdamp/grid.hpp"

namespace expdamp {

using Complex = std::complex<double>;

/// Real samples of a 3-component field, component-major: values[c * n^3 + flat(i,j,l)].
class RealVectorField {
 public:
  explicit RealVectorField(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> component(int c) noexcept {
    return std::span<double>(values_).subspan(c * grid_.points(), grid_.points());
  }
  std::span<const double> component(int c) const noexcept {
    return std::span<const double>(values_).subspan(c * grid_.points(), grid_.points());
  }

  bool all_finite() const noexcept;
  /// max over collocation points of |u(x)|.
  double max_magnitude() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

class RealScalarField {
 public:
  explicit RealScalarField(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Fourier coefficients f(x) = sum_k c(k) e^{i k.x}, full (not half) mode set
/// per component, same layout as RealVectorField.
class SpectralVectorField {
 public:
  explicit SpectralVectorField(Grid grid, bool divfree = false);

  const Grid& grid() const noexcept { return grid_; }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  std::span<Complex> component(int c) noexcept {
    return std::span<Complex>(coeffs_).subspan(c * grid_.points(), grid_.points());
  }
  std::span<const Complex> component(int c) const noexcept {
    return std::span<const Complex>(coeffs_).subspan(c * grid_.points(), grid_.points());
  }
  Complex& at(int c, std::size_t flat) noexcept { return coeffs_[c * grid_.points() + flat]; }
  const Complex& at(int c, std::size_t flat) const noexcept {
    return coeffs_[c * grid_.points() + flat];
  }

  bool divfree() const noexcept { return divfree_; }
  void set_divfree(bool flag) noexcept { divfree_ = flag; }

  SpectralVectorField& operator+=(const SpectralVectorField& other);
  SpectralVectorField& operator-=(const SpectralVectorField& other);
  SpectralVectorField& operator*=(double scale);
  /// this += scale * other
  SpectralVectorField& add_scaled(double scale, const SpectralVectorField& other);

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
  bool divfree_;
};

SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b);
SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b);
SpectralVectorField operator*(double scale, SpectralVectorField a);

class SpectralScalarField {
 public:
  explicit SpectralScalarField(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex& at(std::size_t flat) noexcept { return coeffs_[flat]; }
  const Complex& at(std::size_t flat) const noexcept { return coeffs_[flat]; }

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

/// max over modes of |c(k) - conj(c(-k))|, skipping Nyquist planes.
double hermitian_defect(const SpectralVectorField& f);
double hermitian_defect(const SpectralScalarField& f);

}  // namespace expdamp
