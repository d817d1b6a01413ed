#include "expdamp/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "expdamp/parallel.hpp"

namespace expdamp {

namespace {

// FFTW's planner is not re-entrant; execution with distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void init_fftw_threads() {
  static std::once_flag once;
  std::call_once(once, [] { fftw_init_threads(); });
}

/// Aligned scratch buffers plus r2c/c2r plans for one grid size.
/// Plans use FFTW_ESTIMATE so the same arithmetic runs on every invocation.
class Workspace {
 public:
  Workspace(int n, int threads) : n_(n), threads_(threads) {
    const std::size_t real_size = static_cast<std::size_t>(n) * n * n;
    half_size_ = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    real_ = fftw_alloc_real(real_size);
    half_ = fftw_alloc_complex(half_size_);
    if (real_ == nullptr || half_ == nullptr) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    init_fftw_threads();
    fftw_plan_with_nthreads(threads);
    r2c_ = fftw_plan_dft_r2c_3d(n, n, n, real_, half_, FFTW_ESTIMATE);
    c2r_ = fftw_plan_dft_c2r_3d(n, n, n, half_, real_, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
    if (r2c_ == nullptr || c2r_ == nullptr) throw std::runtime_error("fftw planning failed");
  }
  ~Workspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (auto& [key, plan] : line_plans_) fftw_destroy_plan(plan);
    for (auto& plan : z_plans_)
      if (plan) fftw_destroy_plan(plan);
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
    fftw_free(real_);
    fftw_free(half_);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  int n() const { return n_; }
  double* real() { return real_; }
  Complex* half() { return reinterpret_cast<Complex*>(half_); }
  std::size_t half_size() const { return half_size_; }
  std::size_t half_index(int i, int j, int l) const {
    return (static_cast<std::size_t>(i) * n_ + j) * (n_ / 2 + 1) + l;
  }
  void forward() { fftw_execute(r2c_); }
  void backward() { fftw_execute(c2r_); }

  /// In-place complex transforms of length n along axis 0 or 1 of the half
  /// spectrum, `count` adjacent lines per call starting at `first`.
  void lines(int axis, int count, int sign, Complex* first) {
    fftw_complex* p = reinterpret_cast<fftw_complex*>(first);
    fftw_execute_dft(line_plan(axis, count, sign), p, p);
  }
  /// c2r of all n^2 z-lines of the half spectrum into `out` (n^3 reals).
  void z_backward(double* out) { fftw_execute_dft_c2r(z_plan(false), half_, out); }
  /// r2c of all n^2 z-lines of `in` into the half spectrum.
  void z_forward(const double* in) {
    fftw_execute_dft_r2c(z_plan(true), const_cast<double*>(in), half_);
  }

 private:
  fftw_plan line_plan(int axis, int count, int sign) {
    const auto key = std::make_tuple(axis, count, sign);
    if (auto it = line_plans_.find(key); it != line_plans_.end()) return it->second;
    const int h = n_ / 2 + 1;
    const int stride = axis == 0 ? n_ * h : h;
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan_with_nthreads(threads_);
    fftw_plan plan = fftw_plan_many_dft(1, &n_, count, half_, nullptr, stride, 1, half_, nullptr,
                                        stride, 1, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw line planning failed");
    line_plans_.emplace(key, plan);
    return plan;
  }

  fftw_plan z_plan(bool forward) {
    fftw_plan& plan = z_plans_[forward ? 1 : 0];
    if (plan) return plan;
    const int h = n_ / 2 + 1;
    const int count = n_ * n_;
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan_with_nthreads(threads_);
    plan = forward ? fftw_plan_many_dft_r2c(1, &n_, count, real_, nullptr, 1, n_, half_, nullptr,
                                            1, h, FFTW_ESTIMATE | FFTW_UNALIGNED)
                   : fftw_plan_many_dft_c2r(1, &n_, count, half_, nullptr, 1, h, real_, nullptr,
                                            1, n_, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw z-line planning failed");
    return plan;
  }

  int n_;
  int threads_;
  std::map<std::tuple<int, int, int>, fftw_plan> line_plans_;
  std::array<fftw_plan, 2> z_plans_{nullptr, nullptr};
  std::size_t half_size_ = 0;
  double* real_ = nullptr;
  fftw_complex* half_ = nullptr;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

Workspace& workspace(int n) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Workspace>> cache;
  const int threads = num_threads();
  auto& slot = cache[{n, threads}];
  if (!slot) slot = std::make_unique<Workspace>(n, threads);
  return *slot;
}

void require_same_box(const Grid& a, const Grid& b) {
  if (a.box_length() != b.box_length()) {
    throw std::invalid_argument("resampling between grids with different box lengths");
  }
}

// Source index for target wavenumber k, or -1 when the mode is dropped.
int source_index(const Grid& src, const Grid& dst, int dst_index, bool same) {
  if (same) return dst_index;
  if (dst.is_nyquist(dst_index)) return -1;
  const int k = dst.wavenumber(dst_index);
  const int half = src.n() / 2;
  if (k >= half || k <= -half) return -1;
  return src.index_of(k);
}

// Largest |k_i| over nonzero coefficients, or -1 for a zero field. Sets
// `nyquist` when a nonzero coefficient sits on a Nyquist plane.
int spectral_band(std::span<const Complex> coeffs, const Grid& g, bool& nyquist) {
  const int n = g.n();
  int band = -1;
  nyquist = false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const Complex& c = coeffs[g.flat(i, j, l)];
        if (c.real() == 0.0 && c.imag() == 0.0) continue;
        if (g.is_nyquist(i) || g.is_nyquist(j) || g.is_nyquist(l)) nyquist = true;
        const int m = std::max({std::abs(g.wavenumber(i)), std::abs(g.wavenumber(j)),
                                std::abs(g.wavenumber(l))});
        band = std::max(band, m);
      }
  return band;
}

// Fill the workspace half spectrum of `dst` from full coefficients on `src`,
// then synthesize samples into `out`. Band-limited input takes the separable
// path that skips the all-zero lines.
void synthesize(std::span<const Complex> coeffs, const Grid& src, const Grid& dst,
                std::span<double> out) {
  Workspace& ws = workspace(dst.n());
  const bool same = src.n() == dst.n();
  const int nt = dst.n();
  Complex* half = ws.half();
  std::fill(half, half + ws.half_size(), Complex(0.0, 0.0));

  bool nyquist = false;
  int band = spectral_band(coeffs, src, nyquist);
  if (same && nyquist) band = nt;
  band = std::min(band, std::min(src.n(), nt) / 2 - 1);
  if (band < 0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  if (3 * (band + 1) <= nt) {
    for (int kx = -band; kx <= band; ++kx)
      for (int ky = -band; ky <= band; ++ky)
        for (int kz = 0; kz <= band; ++kz) {
          half[ws.half_index(dst.index_of(kx), dst.index_of(ky), kz)] =
              coeffs[src.flat(src.index_of(kx), src.index_of(ky), kz)];
        }
    for (int ky = -band; ky <= band; ++ky) {
      ws.lines(0, band + 1, FFTW_BACKWARD, half + ws.half_index(0, dst.index_of(ky), 0));
    }
    for (int i = 0; i < nt; ++i) ws.lines(1, band + 1, FFTW_BACKWARD, half + ws.half_index(i, 0, 0));
    ws.z_backward(out.data());
    return;
  }

  for (int it = 0; it < nt; ++it) {
    const int is = source_index(src, dst, it, same);
    if (is < 0) continue;
    for (int jt = 0; jt < nt; ++jt) {
      const int js = source_index(src, dst, jt, same);
      if (js < 0) continue;
      for (int l = 0; l <= nt / 2; ++l) {
        if (!same && (l == nt / 2 || l >= src.n() / 2)) continue;
        half[ws.half_index(it, jt, l)] = coeffs[src.flat(is, js, l)];
      }
    }
  }
  ws.backward();
  std::copy(ws.real(), ws.real() + dst.points(), out.begin());
}

// Analyze samples on `src` and write the coefficients of the modes of `dst`.
// Resampling to a coarser grid only transforms the lines that reach the
// retained band.
void analyze(std::span<const double> samples, const Grid& src, const Grid& dst,
             std::span<Complex> coeffs) {
  Workspace& ws = workspace(src.n());
  const bool same = src.n() == dst.n();
  const int ns = src.n();
  const int band = std::min(src.n(), dst.n()) / 2 - 1;
  Complex* half = ws.half();
  if (!same && 3 * (band + 1) <= ns) {
    ws.z_forward(samples.data());
    for (int i = 0; i < ns; ++i) ws.lines(1, band + 1, FFTW_FORWARD, half + ws.half_index(i, 0, 0));
    for (int ky = -band; ky <= band; ++ky) {
      ws.lines(0, band + 1, FFTW_FORWARD, half + ws.half_index(0, src.index_of(ky), 0));
    }
  } else {
    std::copy(samples.begin(), samples.end(), ws.real());
    ws.forward();
  }
  const int nt = dst.n();
  const double norm = 1.0 / static_cast<double>(src.points());
  for (int it = 0; it < nt; ++it) {
    const int is = source_index(src, dst, it, same);
    for (int jt = 0; jt < nt; ++jt) {
      const int js = source_index(src, dst, jt, same);
      for (int lt = 0; lt < nt; ++lt) {
        const int ls = source_index(src, dst, lt, same);
        Complex& c = coeffs[dst.flat(it, jt, lt)];
        if (is < 0 || js < 0 || ls < 0) {
          c = Complex(0.0, 0.0);
          continue;
        }
        const int k3 = src.wavenumber(ls);
        if (k3 >= 0 || (same && src.is_nyquist(ls))) {
          c = norm * half[ws.half_index(is, js, ls)];
        } else {
          c = norm * std::conj(half[ws.half_index((ns - is) % ns, (ns - js) % ns, -k3)]);
        }
      }
    }
  }
}

void require_finite(bool finite) {
  if (!finite) throw std::invalid_argument("forward_transform: non-finite sample values");
}

}  // namespace

SpectralVectorField forward_transform(const RealVectorField& f) {
  require_finite(f.all_finite());
  SpectralVectorField out(f.grid());
  for (int c = 0; c < 3; ++c) analyze(f.component(c), f.grid(), f.grid(), out.component(c));
  return out;
}

SpectralScalarField forward_transform(const RealScalarField& f) {
  require_finite(f.all_finite());
  SpectralScalarField out(f.grid());
  analyze(f.values(), f.grid(), f.grid(), out.coeffs());
  return out;
}

RealVectorField inverse_transform(const SpectralVectorField& f) { return to_physical(f, f.grid()); }

RealScalarField inverse_transform(const SpectralScalarField& f) { return to_physical(f, f.grid()); }

RealVectorField to_physical(const SpectralVectorField& f, const Grid& target) {
  require_same_box(f.grid(), target);
  RealVectorField out(target);
  for (int c = 0; c < 3; ++c) synthesize(f.component(c), f.grid(), target, out.component(c));
  return out;
}

RealScalarField to_physical(const SpectralScalarField& f, const Grid& target) {
  require_same_box(f.grid(), target);
  RealScalarField out(target);
  synthesize(f.coeffs(), f.grid(), target, out.values());
  return out;
}

SpectralVectorField from_physical(const RealVectorField& f, const Grid& target) {
  require_same_box(f.grid(), target);
  require_finite(f.all_finite());
  SpectralVectorField out(target);
  for (int c = 0; c < 3; ++c) analyze(f.component(c), f.grid(), target, out.component(c));
  return out;
}

SpectralScalarField from_physical(const RealScalarField& f, const Grid& target) {
  require_same_box(f.grid(), target);
  require_finite(f.all_finite());
  SpectralScalarField out(target);
  analyze(f.values(), f.grid(), target, out.coeffs());
  return out;
}

}  // namespace expdamp
