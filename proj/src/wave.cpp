#include "wavefield/wave.hpp"

#include <string>

#include "wavefield/error.hpp"

namespace wavefield {

namespace {

void require_same_dim(const WavePattern& a, const WavePattern& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch, std::string(op) + ": " + std::to_string(a.dim()) +
                                            " vs " + std::to_string(b.dim()));
  }
}

void require_energy(double e, const char* op) {
  if (!(e > 0.0)) throw Error(ErrorCode::ZeroEnergy, op);
}

}  // namespace

double wrap_phase(double radians) {
  if (radians >= 0.0 && radians < kTwoPi) return radians;
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value plus 2π can round up to exactly 2π.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

WavePattern::WavePattern(std::vector<double> amplitude, std::vector<double> phase)
    : amplitude_(std::move(amplitude)), phase_(std::move(phase)) {
  if (amplitude_.size() != phase_.size()) {
    throw Error(ErrorCode::DimMismatch, "amplitude/phase length " +
                                            std::to_string(amplitude_.size()) + " vs " +
                                            std::to_string(phase_.size()));
  }
  if (amplitude_.empty()) throw Error(ErrorCode::InvalidVector, "pattern dim must be positive");
  for (std::size_t i = 0; i < amplitude_.size(); ++i) {
    const double a = amplitude_[i];
    if (!std::isfinite(a) || a < 0.0) {
      throw Error(ErrorCode::InvalidVector, "amplitude[" + std::to_string(i) + "] invalid");
    }
    if (!std::isfinite(phase_[i])) {
      throw Error(ErrorCode::InvalidVector, "phase[" + std::to_string(i) + "] not finite");
    }
    phase_[i] = a == 0.0 ? 0.0 : wrap_phase(phase_[i]);
  }
}

WavePattern WavePattern::zero(std::size_t dim) {
  return WavePattern(std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0));
}

WavePattern WavePattern::from_complex(std::span<const std::complex<double>> values) {
  std::vector<double> amp(values.size());
  std::vector<double> ph(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double re = values[i].real();
    const double im = values[i].imag();
    amp[i] = std::sqrt(re * re + im * im);
    ph[i] = std::atan2(im, re);
  }
  return WavePattern(std::move(amp), std::move(ph));
}

std::vector<std::complex<double>> WavePattern::to_complex() const {
  std::vector<std::complex<double>> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = std::polar(amplitude_[i], phase_[i]);
  return out;
}

std::string_view to_string(Kernel kernel) noexcept {
  switch (kernel) {
    case Kernel::coherence: return "coherence";
    case Kernel::energy: return "energy";
    case Kernel::amplitude_cosine: return "amplitude_cosine";
  }
  return "unknown";
}

Kernel kernel_from_string(std::string_view name) {
  if (name == "coherence") return Kernel::coherence;
  if (name == "energy") return Kernel::energy;
  if (name == "amplitude_cosine") return Kernel::amplitude_cosine;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

double energy(const WavePattern& p) noexcept {
  double e = 0.0;
  for (double a : p.amplitude()) e += a * a;
  return e;
}

WavePattern superpose(const WavePattern& a, const WavePattern& b) {
  require_same_dim(a, b, "superpose");
  auto ca = a.to_complex();
  const auto cb = b.to_complex();
  for (std::size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
  return WavePattern::from_complex(ca);
}

WavePattern phase_shift(const WavePattern& p, double delta) {
  std::vector<double> ph(p.phase().begin(), p.phase().end());
  for (double& x : ph) x += delta;
  return WavePattern({p.amplitude().begin(), p.amplitude().end()}, std::move(ph));
}

WavePattern phase_shift(const WavePattern& p, std::span<const double> mask) {
  if (mask.size() != p.dim()) {
    throw Error(ErrorCode::DimMismatch, "phase mask length " + std::to_string(mask.size()) +
                                            " vs dim " + std::to_string(p.dim()));
  }
  std::vector<double> ph(p.phase().begin(), p.phase().end());
  for (std::size_t i = 0; i < ph.size(); ++i) ph[i] += mask[i];
  return WavePattern({p.amplitude().begin(), p.amplitude().end()}, std::move(ph));
}

WavePattern scale(const WavePattern& p, double factor) {
  if (!std::isfinite(factor) || factor < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "scale factor must be finite and non-negative");
  }
  std::vector<double> amp(p.amplitude().begin(), p.amplitude().end());
  for (double& a : amp) a *= factor;
  return WavePattern(std::move(amp), {p.phase().begin(), p.phase().end()});
}

WavePattern normalize(const WavePattern& p) {
  const double e = energy(p);
  require_energy(e, "normalize of zero-energy pattern");
  return scale(p, 1.0 / std::sqrt(e));
}

double interference(const WavePattern& a, const WavePattern& b) {
  require_same_dim(a, b, "interference");
  const auto amp_a = a.amplitude();
  const auto amp_b = b.amplitude();
  const auto ph_a = a.phase();
  const auto ph_b = b.phase();
  double cross = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double re = std::cos(ph_a[i]) * std::cos(ph_b[i]) + std::sin(ph_a[i]) * std::sin(ph_b[i]);
    cross += amp_a[i] * amp_b[i] * re;
  }
  return cross;
}

ResonanceScore resonance_coherence(const WavePattern& a, const WavePattern& b) {
  const double cross = interference(a, b);
  const double ea = energy(a);
  const double eb = energy(b);
  require_energy(ea, "resonance of zero-energy pattern");
  require_energy(eb, "resonance of zero-energy pattern");
  return {kernel_math::coherence(cross, ea, eb), Kernel::coherence};
}

ResonanceScore resonance_energy(const WavePattern& a, const WavePattern& b) {
  const double cross = interference(a, b);
  const double ea = energy(a);
  const double eb = energy(b);
  require_energy(ea, "resonance of zero-energy pattern");
  require_energy(eb, "resonance of zero-energy pattern");
  return {kernel_math::energy(cross, ea, eb), Kernel::energy};
}

ResonanceScore amplitude_cosine(const WavePattern& a, const WavePattern& b) {
  require_same_dim(a, b, "amplitude_cosine");
  const auto amp_a = a.amplitude();
  const auto amp_b = b.amplitude();
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += amp_a[i] * amp_b[i];
  const double ea = energy(a);
  const double eb = energy(b);
  require_energy(ea, "cosine of zero-energy pattern");
  require_energy(eb, "cosine of zero-energy pattern");
  return {kernel_math::coherence(dot, ea, eb), Kernel::amplitude_cosine};
}

ResonanceScore resonance(Kernel kernel, const WavePattern& a, const WavePattern& b) {
  switch (kernel) {
    case Kernel::coherence: return resonance_coherence(a, b);
    case Kernel::energy: return resonance_energy(a, b);
    case Kernel::amplitude_cosine: return amplitude_cosine(a, b);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown kernel");
}

}  // namespace wavefield
