#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace wavefield {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reduces an angle into [0, 2π).
double wrap_phase(double radians);

// A static wave pattern ψ(x) = A(x)·e^{iφ(x)} over `dim` semantic dimensions.
//
// Always canonical: amplitudes are finite and non-negative, phases lie in
// [0, 2π), and a zero-amplitude component carries phase 0. Equality is
// element-wise on both arrays, which is meaningful because of this form.
class WavePattern {
 public:
  WavePattern() = default;  // dim 0; only useful as a placeholder

  // Throws InvalidVector on negative/non-finite amplitudes, non-finite
  // phases, or an empty array; DimMismatch when the lengths differ.
  WavePattern(std::vector<double> amplitude, std::vector<double> phase);

  static WavePattern zero(std::size_t dim);
  static WavePattern from_complex(std::span<const std::complex<double>> values);

  std::size_t dim() const noexcept { return amplitude_.size(); }
  std::span<const double> amplitude() const noexcept { return amplitude_; }
  std::span<const double> phase() const noexcept { return phase_; }

  std::vector<std::complex<double>> to_complex() const;

  friend bool operator==(const WavePattern&, const WavePattern&) = default;

 private:
  std::vector<double> amplitude_;
  std::vector<double> phase_;
};

enum class Kernel : unsigned char {
  coherence = 0,
  energy = 1,
  // Cosine over amplitude arrays only. Not a resonance kernel: it is the
  // magnitude-only baseline used by the negation evaluation.
  amplitude_cosine = 2,
};

std::string_view to_string(Kernel kernel) noexcept;
// Throws InvalidArgument on an unknown name.
Kernel kernel_from_string(std::string_view name);

struct ResonanceScore {
  double value = 0.0;
  Kernel kernel = Kernel::coherence;

  friend bool operator==(const ResonanceScore&, const ResonanceScore&) = default;
};

// Σ A(i)².
double energy(const WavePattern& p) noexcept;

// Element-wise complex addition.
WavePattern superpose(const WavePattern& a, const WavePattern& b);

WavePattern phase_shift(const WavePattern& p, double delta);
WavePattern phase_shift(const WavePattern& p, std::span<const double> mask);

// Multiplies every amplitude by `factor` (≥ 0).
WavePattern scale(const WavePattern& p, double factor);

WavePattern normalize(const WavePattern& p);

// Re⟨a, b⟩ = Σ A_a A_b cos(φ_a − φ_b); equals (E(a⊕b) − E(a) − E(b)) / 2.
double interference(const WavePattern& a, const WavePattern& b);

// (E(a⊕b) − E(a) − E(b)) / (2·√(E(a)·E(b))), in [−1, 1]. The cross term is
// evaluated directly rather than by differencing energies, which would
// cancel catastrophically for near-identical patterns.
ResonanceScore resonance_coherence(const WavePattern& a, const WavePattern& b);

// Half the normalized energy of a⊕b, times the mismatch penalty
// 2√(E(a)E(b)) / (E(a)+E(b)). In [0, 1].
ResonanceScore resonance_energy(const WavePattern& a, const WavePattern& b);

ResonanceScore amplitude_cosine(const WavePattern& a, const WavePattern& b);

ResonanceScore resonance(Kernel kernel, const WavePattern& a, const WavePattern& b);

// Kernel formulas on precomputed terms, shared with the store's scan loop.
namespace kernel_math {

inline double coherence(double cross, double energy_a, double energy_b) noexcept {
  double v = cross / std::sqrt(energy_a * energy_b);
  return v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
}

inline double energy(double cross, double energy_a, double energy_b) noexcept {
  const double total = energy_a + energy_b;
  double summed = total + 2.0 * cross;
  if (summed < 0.0) summed = 0.0;
  const double half_normalized = summed / (2.0 * total);
  const double penalty = 2.0 * std::sqrt(energy_a * energy_b) / total;
  double v = half_normalized * penalty;
  return v > 1.0 ? 1.0 : v;
}

}  // namespace kernel_math

}  // namespace wavefield
