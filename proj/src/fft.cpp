#include "wavefield/fft.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include "wavefield/error.hpp"

namespace wavefield::fft {

namespace {

constexpr std::size_t kDirectBelow = 64;

// Plain complex product. operator* also handles inf/nan operands per Annex G,
// which costs a branch and a library call on the hot path.
inline std::complex<double> mul(std::complex<double> x, std::complex<double> y) noexcept {
  return {x.real() * y.real() - x.imag() * y.imag(), x.real() * y.imag() + x.imag() * y.real()};
}

void radix2(cvec& a, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Roots of unity for the full length, each evaluated directly so error
  // does not accumulate; stage `len` uses every (n / len)-th entry.
  const double sign = invert ? 1.0 : -1.0;
  cvec roots(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    roots[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = mul(a[i + k + half], roots[k * stride]);
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

cvec direct(std::span<const std::complex<double>> x, bool invert) {
  const std::size_t n = x.size();
  const double sign = invert ? 1.0 : -1.0;
  cvec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = (k * j) % n;
      acc += x[j] * std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(idx) /
                                        static_cast<double>(n));
    }
    out[k] = acc;
  }
  return out;
}

cvec bluestein(std::span<const std::complex<double>> x, bool invert) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  const double sign = invert ? 1.0 : -1.0;

  // chirp[k] = exp(sign·iπk²/n); k² is reduced mod 2n to keep the angle small.
  cvec chirp(n);
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % two_n;
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(k2) /
                                   static_cast<double>(n));
  }

  cvec a(m, 0.0);
  cvec b(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) a[k] = mul(x[k], chirp[k]);
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = std::conj(chirp[k]);
    b[m - k] = std::conj(chirp[k]);
  }
  radix2(a, false);
  radix2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] = mul(a[i], b[i]);
  radix2(a, true);
  const double inv_m = 1.0 / static_cast<double>(m);

  cvec out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = mul(a[k] * inv_m, chirp[k]);
  return out;
}

cvec transform(std::span<const std::complex<double>> x, bool invert) {
  if (x.empty()) return {};
  cvec out;
  if (is_power_of_two(x.size())) {
    out.assign(x.begin(), x.end());
    radix2(out, invert);
  } else if (x.size() < kDirectBelow) {
    out = direct(x, invert);
  } else {
    out = bluestein(x, invert);
  }
  if (invert) {
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (auto& z : out) z *= inv_n;
  }
  return out;
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

cvec forward(std::span<const std::complex<double>> x) { return transform(x, false); }

cvec inverse(std::span<const std::complex<double>> x) { return transform(x, true); }

cvec circular_convolve(std::span<const std::complex<double>> a,
                       std::span<const std::complex<double>> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch, "circular_convolve: " + std::to_string(a.size()) +
                                            " vs " + std::to_string(b.size()));
  }
  cvec fa = forward(a);
  const cvec fb = forward(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = mul(fa[i], fb[i]);
  return inverse(fa);
}

}  // namespace wavefield::fft
