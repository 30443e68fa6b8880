#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twinbeam {

inline constexpr const char* kToolVersion = "0.1.0";

/// A parameter or configuration value violates its contract. `field` names
/// the offending entry (e.g. "detectors[0].efficiency").
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Malformed input text (config JSON, dataset files, CSV tables).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File-system level failure: missing file, unwritable path, truncation,
/// checksum or format-version mismatch.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An analysis precondition does not hold for the supplied data (e.g. the
/// electronic noise exceeds the shot-noise level, or a conditioning window
/// selects no pulses).
class AnalysisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Twin-beam source: M matched thermal modes feed both arms identically,
/// K1 (K2) unmatched modes feed arm 1 (2) only, all with the same mean
/// photon number per mode. A per-pulse common gain with relative std
/// `gain_jitter_rel_std` rescales every mode mean of that pulse.
struct SourceParams {
  double n_mean_per_mode = 0.0;
  std::int64_t matched_modes = 0;
  std::int64_t unmatched_modes_1 = 0;
  std::int64_t unmatched_modes_2 = 0;
  double gain_jitter_rel_std = 0.0;

  void validate() const;
};

/// Detection channel: quantum efficiency (propagation losses folded in)
/// plus additive Gaussian electronic noise in photon-equivalent units.
struct DetectorParams {
  double efficiency = 1.0;
  double noise_mean = 0.0;
  double noise_var = 0.0;

  void validate(const std::string& field_prefix = "") const;
};

/// Calibration light: independent Poisson photon numbers per arm.
struct CoherentParams {
  double mean1 = 0.0;
  double mean2 = 0.0;

  void validate() const;
};

/// One laser shot: detected values of both channels, photon-equivalent.
/// Values can dip below zero in dark frames (electronic noise around 0).
struct PulseRecord {
  std::int64_t pulse_id = 0;
  double s1 = 0.0;
  double s2 = 0.0;

  friend bool operator==(const PulseRecord&, const PulseRecord&) = default;
};

enum class DatasetKind { twin_beam, coherent, dark };

const char* to_string(DatasetKind kind) noexcept;
DatasetKind dataset_kind_from_string(const std::string& s);

/// A tagged collection of pulse records plus the generation parameters and
/// seed that produced it.
struct Dataset {
  DatasetKind kind = DatasetKind::dark;
  std::optional<SourceParams> source;      // twin_beam only
  std::optional<CoherentParams> coherent;  // coherent only
  DetectorParams detector1;
  DetectorParams detector2;
  std::uint64_t seed = 0;
  std::uint64_t clamped_pulses = 0;  // pulses whose jittered gain hit the zero clamp
  std::vector<PulseRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  double channel(std::size_t i, int ch) const {
    return ch == 1 ? records[i].s1 : records[i].s2;
  }
};

/// A statistic with its uncertainty; the universal return type of the
/// estimators.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
};

}  // namespace twinbeam
