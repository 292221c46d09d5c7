#pragma once

#include <complex>
#include <span>
#include <vector>

namespace wavefield::fft {

using cvec = std::vector<std::complex<double>>;

// Discrete Fourier transform of any length. Powers of two use iterative
// radix-2; other lengths use Bluestein's chirp-z reduction (or a direct
// O(n²) sum for short inputs). The inverse includes the 1/n factor.
cvec forward(std::span<const std::complex<double>> x);
cvec inverse(std::span<const std::complex<double>> x);

// (a ⊛ b)[k] = Σ_j a[j]·b[(k − j) mod n], via the convolution theorem.
cvec circular_convolve(std::span<const std::complex<double>> a,
                       std::span<const std::complex<double>> b);

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace wavefield::fft
