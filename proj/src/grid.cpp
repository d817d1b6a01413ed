#include "expdamp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace expdamp {

Grid::Grid(int n, double box_length) : n_(n), box_length_(box_length) {
  if (n < 4) {
    throw std::invalid_argument("grid: n_per_dim must be >= 4, got " + std::to_string(n));
  }
  if (n % 2 != 0) {
    throw std::invalid_argument("grid: n_per_dim must be even, got " + std::to_string(n));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    throw std::invalid_argument("grid: box_length must be positive and finite");
  }
  points_ = static_cast<std::size_t>(n) * n * n;
}

double Grid::max_resolvable_radius() const noexcept {
  return std::sqrt(3.0) * (n_ / 2) * wave_scale();
}

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1 && m % 2 == 0) return m;
  }
}

}  // namespace expdamp
