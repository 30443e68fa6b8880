#include "twinbeam/types.hpp"

#include <cmath>

namespace twinbeam {

void SourceParams::validate() const {
  if (!std::isfinite(n_mean_per_mode) || n_mean_per_mode < 0.0)
    throw ValidationError("source.n_mean_per_mode", "must be finite and >= 0");
  if (matched_modes < 0)
    throw ValidationError("source.matched_modes", "must be >= 0");
  if (unmatched_modes_1 < 0)
    throw ValidationError("source.unmatched_modes_1", "must be >= 0");
  if (unmatched_modes_2 < 0)
    throw ValidationError("source.unmatched_modes_2", "must be >= 0");
  if (matched_modes + unmatched_modes_1 < 1)
    throw ValidationError("source.matched_modes", "M + K1 must be >= 1");
  if (matched_modes + unmatched_modes_2 < 1)
    throw ValidationError("source.matched_modes", "M + K2 must be >= 1");
  if (!std::isfinite(gain_jitter_rel_std) || gain_jitter_rel_std < 0.0)
    throw ValidationError("source.gain_jitter_rel_std", "must be finite and >= 0");
  if (gain_jitter_rel_std >= 0.5)
    throw ValidationError("source.gain_jitter_rel_std",
                          "must be < 0.5 (keeps the per-pulse gain clamp inactive)");
}

void DetectorParams::validate(const std::string& field_prefix) const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0))
    throw ValidationError(field_prefix + "efficiency", "must be in [0, 1]");
  if (!std::isfinite(noise_mean))
    throw ValidationError(field_prefix + "noise_mean", "must be finite");
  if (!std::isfinite(noise_var) || noise_var < 0.0)
    throw ValidationError(field_prefix + "noise_var", "must be finite and >= 0");
}

void CoherentParams::validate() const {
  if (!std::isfinite(mean1) || mean1 < 0.0)
    throw ValidationError("coherent.mean1", "must be finite and >= 0");
  if (!std::isfinite(mean2) || mean2 < 0.0)
    throw ValidationError("coherent.mean2", "must be finite and >= 0");
}

const char* to_string(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::twin_beam: return "twin_beam";
    case DatasetKind::coherent: return "coherent";
    case DatasetKind::dark: return "dark";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "twin_beam") return DatasetKind::twin_beam;
  if (s == "coherent") return DatasetKind::coherent;
  if (s == "dark") return DatasetKind::dark;
  throw ValidationError("kind", "unknown dataset kind '" + s + "'");
}

}  // namespace twinbeam
