#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twinbeam/statistics.hpp"
#include "twinbeam/types.hpp"

namespace twinbeam {

/// Where the selection window sits on the control channel.
struct WindowCenter {
  enum class Kind { control_mean, absolute, offset_in_sd };
  Kind kind = Kind::control_mean;
  double value = 0.0;  // level (absolute) or offset in SD units (offset_in_sd)

  static WindowCenter mean() { return {}; }
  static WindowCenter at(double level) { return {Kind::absolute, level}; }
  static WindowCenter offset(double delta_sd) { return {Kind::offset_in_sd, delta_sd}; }
};

const char* to_string(WindowCenter::Kind kind) noexcept;

/// Post-selection rule: keep pulses whose control-channel value falls within
/// +-SD/q of the center, where SD is the control-channel standard deviation
/// of the dataset being conditioned. Larger q = narrower window = stronger
/// condition.
struct ConditioningSpec {
  double q = 20.0;
  WindowCenter center;
  int control_channel = 2;  // the other channel is the target

  int target_channel() const noexcept { return control_channel == 2 ? 1 : 2; }
  void validate() const;
};

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

/// Result of applying a selection window; `subset` keeps the parent dataset's
/// metadata with only the selected records.
struct Selection {
  Dataset subset;
  Window window;
  double control_sd = 0.0;
  double control_center = 0.0;
  double success_rate = 0.0;
};

/// Applies the window (boundaries inclusive). Throws AnalysisError when the
/// selection is empty (q too large or the center too far in the tail).
Selection select(const Dataset& ds, const ConditioningSpec& spec);

struct ConditionalResult {
  Estimate fano_target;
  Estimate mean_target;  // heralded mean, dark-subtracted when a dark is given
  double success_rate = 0.0;
  std::int64_t n_selected = 0;
  Window window;
};

/// Minimum selected pulses for a meaningful conditional variance.
inline constexpr std::int64_t kMinSelectedPulses = 100;

/// Fano factor of the target channel over the heralded subset, with the
/// target detector's dark noise subtracted. The control detector's noise is
/// deliberately not subtracted: it is baked into the heralding itself.
/// Bootstrap replicates resample the full dataset and reapply the selection,
/// so the success-rate variability propagates into the standard errors.
ConditionalResult conditional_fano(const Dataset& ds, const ConditioningSpec& spec,
                                   const Dataset* dark_target = nullptr,
                                   const BootstrapSpec& bspec = {});

/// Conditional Fano factor predicted from the unconditional Fano factors and
/// the NRF: F1' = F1 - (F1 + F2 - 2 NRF)^2 / (4 F2).
double theoretical_conditional_fano(double f1, double f2, double nrf);

/// One grid point of a sweep; `error` is set (and `result` empty) when the
/// point failed instead of aborting the whole sweep.
struct SweepPoint {
  double x = 0.0;  // q, or center offset in SD units
  std::optional<ConditionalResult> result;
  std::string error;
};

/// Conditional Fano versus condition strength, window centered on the control
/// mean. Per-point bootstrap seeds are derived deterministically.
std::vector<SweepPoint> sweep_q(const Dataset& ds, std::span<const double> q_values,
                                const Dataset* dark_target = nullptr,
                                const BootstrapSpec& bspec = {});

/// Conditional Fano and heralded mean versus window-center offset (in SD
/// units) at fixed strength q.
std::vector<SweepPoint> sweep_center(const Dataset& ds, std::span<const double> deltas_in_sd,
                                     double q, const Dataset* dark_target = nullptr,
                                     const BootstrapSpec& bspec = {});

}  // namespace twinbeam
