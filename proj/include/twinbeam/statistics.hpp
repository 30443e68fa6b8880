#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "twinbeam/types.hpp"

namespace twinbeam {

/// One-pass central moments up to order four (Welford/Pebay updates).
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sums of centered powers
  double m3 = 0.0;
  double m4 = 0.0;

  void add(double x) noexcept;
  /// Unbiased (n-1) sample variance; requires count >= 2.
  double variance() const;
  /// Fourth central moment (biased plug-in estimate), for variance-of-variance.
  double fourth_central() const;
};

/// Single-pass moments of a value sequence; requires at least 2 values.
Moments stream_moments(std::span<const double> values);

/// One-pass bivariate moments over the two channels of a dataset (or a
/// resampled view of one).
struct ChannelMoments {
  std::int64_t count = 0;
  double mean1 = 0.0, mean2 = 0.0;
  double m2_1 = 0.0, m2_2 = 0.0, c12 = 0.0;

  void add(double x, double y) noexcept;
  double var1() const;
  double var2() const;
  double cov() const;
  double mean(int channel) const { return channel == 1 ? mean1 : mean2; }
  double var(int channel) const { return channel == 1 ? var1() : var2(); }
  /// Var(s1 - k*s2), exact on sample moments: var1 + k^2 var2 - 2k cov.
  double diff_variance(double k) const;
};

/// A dataset resampled by index; an empty index span means the identity view.
struct ResampleView {
  const Dataset* ds = nullptr;
  std::span<const std::uint32_t> idx;

  std::size_t size() const noexcept { return idx.empty() ? ds->size() : idx.size(); }
  const PulseRecord& record(std::size_t i) const {
    return ds->records[idx.empty() ? i : idx[i]];
  }
};

ChannelMoments channel_moments(const ResampleView& view);
inline ChannelMoments channel_moments(const Dataset& ds) {
  return channel_moments(ResampleView{&ds, {}});
}

using ViewStatistic = std::function<double(std::span<const ResampleView>)>;
using MultiStatistic = std::function<void(std::span<const ResampleView>, std::span<double>)>;

/// Controls of the bootstrap resampling used for standard errors.
struct BootstrapSpec {
  int resamples = 1000;
  std::uint64_t seed = 0x7B1D5EEDULL;
  int max_workers = 0;  // 0 = hardware concurrency (TWINBEAM_MAX_WORKERS caps it)
};

/// Standard deviation of `stat` over `resamples` pulse-level resamples with
/// replacement. Channel pairing is preserved (whole records are resampled)
/// and all datasets are resampled jointly within a replicate. Replicates use
/// derived per-(dataset, replicate) streams, so the result is independent of
/// the worker decomposition. Requires resamples >= 100.
double bootstrap_error(const ViewStatistic& stat, std::span<const Dataset* const> data,
                       int resamples, std::uint64_t seed, int max_workers = 0);

/// Same machinery for a statistic with several outputs; returns one standard
/// error per output.
std::vector<double> bootstrap_errors(const MultiStatistic& stat,
                                     std::span<const Dataset* const> data,
                                     std::size_t n_outputs, int resamples, std::uint64_t seed,
                                     int max_workers = 0);

/// Gain-balancing coefficient k = <s1>/<s2>.
double balancing_k(const Dataset& ds);

/// Shot-noise variance of the balanced difference for independent Poisson
/// channels with the given photon means: mean1 + k^2 * mean2.
double shot_noise_variance(double mean1, double mean2, double k);

/// Empirical shot noise Var(s1 - k*s2) from a coherent dataset, with the
/// electronic-noise variances subtracted when dark datasets are supplied.
Estimate shot_noise_from_coherent(const Dataset& coherent, double k,
                                  const Dataset* dark1 = nullptr,
                                  const Dataset* dark2 = nullptr,
                                  const BootstrapSpec& bspec = {});

/// Raw noise reduction factor Var(s1 - k*s2) / shot_noise, no electronic-noise
/// correction.
Estimate nrf_raw(const Dataset& twin, double k, double shot_noise,
                 const BootstrapSpec& bspec = {});

struct NrfCorrected {
  Estimate estimate;
  double k = 0.0;                       // balancing coefficient actually used
  double raw_difference_variance = 0.0; // Var(s1 - k*s2) before correction
  double shot_noise_raw = 0.0;          // coherent Var(c1 - k*c2) before correction
  double dark_var_1 = 0.0;
  double dark_var_2 = 0.0;
  bool near_validity_limit = false;     // a dark term exceeds 50% of the shot noise
};

/// Electronic-noise-corrected NRF:
///
///   [Var(s1 - k s2) - Var(V_D1) - k^2 Var(V_D2)] /
///   [Var(c1 - k c2) - Var(V_D1) - k^2 Var(V_D2)]
///
/// Valid only while the electronic noise sits below the shot-noise level;
/// a dark term at or above the raw shot noise is a hard error, above 50%
/// of it sets near_validity_limit. k defaults to <s1>/<s2> of the twin
/// dataset (re-estimated inside every bootstrap replicate) unless overridden.
NrfCorrected nrf_corrected(const Dataset& twin, const Dataset& coherent,
                           const Dataset& dark1, const Dataset& dark2,
                           std::optional<double> k_override = {},
                           const BootstrapSpec& bspec = {});

/// Fano factor of one channel, Var(N)/<N>, with electronic-noise subtraction
/// when a dark dataset is supplied:
/// (Var(s) - Var(V_D)) / (<s> - <V_D>).
Estimate fano(const Dataset& ds, int channel, const Dataset* dark = nullptr,
              const BootstrapSpec& bspec = {});

}  // namespace twinbeam
