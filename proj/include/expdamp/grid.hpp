#pragma once

#include <array>
#include <cstddef>

namespace expdamp {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Periodic cube [0, L)^3 sampled on n^3 collocation points.
///
/// Modes are the integer triples k with -n/2 <= k_i < n/2, stored in FFT
/// order along each axis (index i holds k = i for i < n/2, k = i - n
/// otherwise). With the default L = 2*pi the physical wavevector equals k.
class Grid {
 public:
  explicit Grid(int n, double box_length = kTwoPi);

  int n() const noexcept { return n_; }
  double box_length() const noexcept { return box_length_; }
  std::size_t points() const noexcept { return points_; }
  double spacing() const noexcept { return box_length_ / n_; }
  double volume() const noexcept { return box_length_ * box_length_ * box_length_; }
  double cell_volume() const noexcept { return volume() / static_cast<double>(points_); }
  /// Physical wavenumber of the unit lattice step, 2*pi / L.
  double wave_scale() const noexcept { return kTwoPi / box_length_; }

  int wavenumber(int index) const noexcept { return index < n_ / 2 ? index : index - n_; }
  /// Storage index of integer wavenumber k; k must lie in [-n/2, n/2).
  int index_of(int k) const noexcept { return k >= 0 ? k : k + n_; }
  bool is_nyquist(int index) const noexcept { return index == n_ / 2; }

  std::size_t flat(int i, int j, int l) const noexcept {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + l;
  }

  std::array<double, 3> wavevector(int i, int j, int l) const noexcept {
    const double s = wave_scale();
    return {s * wavenumber(i), s * wavenumber(j), s * wavenumber(l)};
  }
  double wavevector_sq(int i, int j, int l) const noexcept {
    const auto k = wavevector(i, j, l);
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  }

  /// Largest |k| present in the mode set, sqrt(3) * n/2 in physical units.
  double max_resolvable_radius() const noexcept;

  /// Collocation coordinate x_i = i * L / n.
  double coordinate(int index) const noexcept { return index * spacing(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
  double box_length_;
  std::size_t points_;
};

/// Smallest size >= n whose only prime factors are 2, 3 and 5.
int fft_friendly_size(int n);

}  // namespace expdamp
