#pragma once

#include <cstdint>
#include <optional>

#include "twinbeam/rng.hpp"
#include "twinbeam/types.hpp"

namespace twinbeam {

/// One draw from the Bose-Einstein (geometric) photon-number distribution
/// with the given mean: P(n) = n_mean^n / (1 + n_mean)^(n+1).
/// n_mean = 0 returns 0 without consuming randomness.
std::int64_t sample_thermal_mode(double n_mean, RngStream& rng);

struct TruePulse {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  bool gain_clamped = false;
};

/// Per-pulse true photon numbers of both arms.
///
/// The matched-mode total is drawn once and contributes identically to both
/// arms (a sum of M iid Bose-Einstein modes is negative binomial with M
/// successes, so it is drawn in aggregate); each arm additionally receives
/// an independent unmatched-mode total. The per-pulse gain
/// g = max(0, 1 + gain_jitter_rel_std * z) rescales all mode means.
TruePulse sample_pulse(const SourceParams& source, RngStream& rng);

/// Binomial thinning of n_true with the detector efficiency plus additive
/// Gaussian electronic noise; photon-equivalent units.
double detect(std::int64_t n_true, const DetectorParams& det, RngStream& rng);

/// Full description of one measurement run.
struct RunSpec {
  DatasetKind kind = DatasetKind::twin_beam;
  std::optional<SourceParams> source;      // required for twin_beam
  std::optional<CoherentParams> coherent;  // required for coherent
  DetectorParams detector1;
  DetectorParams detector2;
  std::int64_t n_pulses = 300000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Simulates a measurement run of n_pulses records.
///
/// Bit-reproducible for a given spec: every pulse consumes its own random
/// stream keyed by (seed, pulse_id), so the output is independent of the
/// worker decomposition. max_workers = 0 picks the hardware concurrency,
/// capped by the TWINBEAM_MAX_WORKERS environment variable.
Dataset simulate_run(const RunSpec& spec, int max_workers = 0);

/// Mean photons per mode for a given pump power: sinh^2(gain_coeff * sqrt(P)).
double pump_power_to_n_mode(double power_mw, double gain_coeff);

/// Effective worker count after the TWINBEAM_MAX_WORKERS cap.
int resolve_worker_count(int requested) noexcept;

}  // namespace twinbeam
