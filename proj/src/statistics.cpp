#include "twinbeam/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "twinbeam/model.hpp"
#include "twinbeam/rng.hpp"

namespace twinbeam {

void Moments::add(double x) noexcept {
  const std::int64_t n1 = count;
  ++count;
  const double delta = x - mean;
  const double delta_n = delta / static_cast<double>(count);
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * static_cast<double>(n1);
  mean += delta_n;
  m4 += term1 * delta_n2 * static_cast<double>(count * count - 3 * count + 3) +
        6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
  m3 += term1 * delta_n * static_cast<double>(count - 2) - 3.0 * delta_n * m2;
  m2 += term1;
}

double Moments::variance() const {
  if (count < 2) throw ValidationError("values", "need at least 2 values for a variance");
  return m2 / static_cast<double>(count - 1);
}

double Moments::fourth_central() const {
  if (count < 2) throw ValidationError("values", "need at least 2 values");
  return m4 / static_cast<double>(count);
}

Moments stream_moments(std::span<const double> values) {
  if (values.size() < 2)
    throw ValidationError("values", "need at least 2 values");
  Moments m;
  for (double v : values) m.add(v);
  return m;
}

void ChannelMoments::add(double x, double y) noexcept {
  ++count;
  const double n = static_cast<double>(count);
  const double d1 = x - mean1;
  const double d2 = y - mean2;
  mean1 += d1 / n;
  mean2 += d2 / n;
  m2_1 += d1 * (x - mean1);
  m2_2 += d2 * (y - mean2);
  c12 += d1 * (y - mean2);
}

double ChannelMoments::var1() const {
  if (count < 2) throw ValidationError("dataset", "need at least 2 records for a variance");
  return m2_1 / static_cast<double>(count - 1);
}

double ChannelMoments::var2() const {
  if (count < 2) throw ValidationError("dataset", "need at least 2 records for a variance");
  return m2_2 / static_cast<double>(count - 1);
}

double ChannelMoments::cov() const {
  if (count < 2) throw ValidationError("dataset", "need at least 2 records for a covariance");
  return c12 / static_cast<double>(count - 1);
}

double ChannelMoments::diff_variance(double k) const {
  return var1() + k * k * var2() - 2.0 * k * cov();
}

ChannelMoments channel_moments(const ResampleView& view) {
  ChannelMoments m;
  const std::size_t n = view.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PulseRecord& r = view.record(i);
    m.add(r.s1, r.s2);
  }
  return m;
}

std::vector<double> bootstrap_errors(const MultiStatistic& stat,
                                     std::span<const Dataset* const> data,
                                     std::size_t n_outputs, int resamples, std::uint64_t seed,
                                     int max_workers) {
  if (resamples < 100)
    throw ValidationError("resamples", "bootstrap needs at least 100 resamples");
  if (data.empty()) throw ValidationError("datasets", "bootstrap needs at least one dataset");
  for (const Dataset* d : data)
    if (d == nullptr || d->records.empty())
      throw ValidationError("datasets", "bootstrap datasets must be nonempty");

  const std::size_t n_ds = data.size();
  const std::size_t B = static_cast<std::size_t>(resamples);
  std::vector<double> samples(B * n_outputs);

  auto run_range = [&](std::size_t b_begin, std::size_t b_end) {
    std::vector<std::vector<std::uint32_t>> idx(n_ds);
    std::vector<ResampleView> views(n_ds);
    for (std::size_t d = 0; d < n_ds; ++d) idx[d].resize(data[d]->size());
    for (std::size_t b = b_begin; b < b_end; ++b) {
      for (std::size_t d = 0; d < n_ds; ++d) {
        const std::uint64_t n = data[d]->size();
        RngStream rng(derive_seed(seed, d), b);
        for (auto& v : idx[d]) v = static_cast<std::uint32_t>(rng() % n);
        views[d] = ResampleView{data[d], idx[d]};
      }
      stat(views, std::span<double>(samples.data() + b * n_outputs, n_outputs));
    }
  };

  const int workers = std::min<int>(resolve_worker_count(max_workers), resamples);
  if (workers <= 1) {
    run_range(0, B);
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (B + workers - 1) / static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = static_cast<std::size_t>(w) * chunk;
      const std::size_t end = std::min(B, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(run_range, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  std::vector<double> errors(n_outputs);
  for (std::size_t j = 0; j < n_outputs; ++j) {
    Moments m;
    for (std::size_t b = 0; b < B; ++b) m.add(samples[b * n_outputs + j]);
    errors[j] = std::sqrt(m.variance());
  }
  return errors;
}

double bootstrap_error(const ViewStatistic& stat, std::span<const Dataset* const> data,
                       int resamples, std::uint64_t seed, int max_workers) {
  auto multi = [&stat](std::span<const ResampleView> views, std::span<double> out) {
    out[0] = stat(views);
  };
  return bootstrap_errors(multi, data, 1, resamples, seed, max_workers)[0];
}

double balancing_k(const Dataset& ds) {
  const ChannelMoments m = channel_moments(ds);
  if (m.count < 1) throw ValidationError("dataset", "empty dataset");
  if (!(m.mean2 > 0.0))
    throw AnalysisError("balancing coefficient undefined: <s2> is not positive");
  return m.mean1 / m.mean2;
}

double shot_noise_variance(double mean1, double mean2, double k) {
  if (!(mean1 >= 0.0)) throw ValidationError("mean1", "must be >= 0");
  if (!(mean2 >= 0.0)) throw ValidationError("mean2", "must be >= 0");
  return mean1 + k * k * mean2;
}

Estimate shot_noise_from_coherent(const Dataset& coherent, double k, const Dataset* dark1,
                                  const Dataset* dark2, const BootstrapSpec& bspec) {
  auto compute = [k](std::span<const ResampleView> views) {
    double value = channel_moments(views[0]).diff_variance(k);
    if (views.size() > 1) value -= channel_moments(views[1]).var1();
    if (views.size() > 2) value -= k * k * channel_moments(views[2]).var2();
    return value;
  };

  std::vector<const Dataset*> data{&coherent};
  if (dark1 != nullptr) data.push_back(dark1);
  if (dark2 != nullptr) {
    if (dark1 == nullptr)
      throw ValidationError("dark1", "dark2 requires dark1 as well");
    data.push_back(dark2);
  }

  std::vector<ResampleView> identity;
  for (const Dataset* d : data) identity.push_back(ResampleView{d, {}});

  Estimate est;
  est.value = compute(identity);
  est.std_error = bootstrap_error(compute, data, bspec.resamples, bspec.seed, bspec.max_workers);
  est.n_samples = static_cast<std::int64_t>(coherent.size());
  return est;
}

Estimate nrf_raw(const Dataset& twin, double k, double shot_noise, const BootstrapSpec& bspec) {
  if (!(shot_noise > 0.0))
    throw ValidationError("shot_noise", "must be > 0");

  auto compute = [k, shot_noise](std::span<const ResampleView> views) {
    return channel_moments(views[0]).diff_variance(k) / shot_noise;
  };

  const Dataset* data[] = {&twin};
  const ResampleView identity[] = {{&twin, {}}};
  Estimate est;
  est.value = compute(identity);
  est.std_error = bootstrap_error(compute, data, bspec.resamples, bspec.seed, bspec.max_workers);
  est.n_samples = static_cast<std::int64_t>(twin.size());
  return est;
}

NrfCorrected nrf_corrected(const Dataset& twin, const Dataset& coherent, const Dataset& dark1,
                           const Dataset& dark2, std::optional<double> k_override,
                           const BootstrapSpec& bspec) {
  // Evaluates Eq-style corrected NRF on one replicate; diagnostics are only
  // collected for the point estimate (diag != nullptr).
  auto compute = [&k_override](std::span<const ResampleView> views,
                               NrfCorrected* diag) -> double {
    const ChannelMoments twin_m = channel_moments(views[0]);
    if (!(twin_m.mean2 > 0.0))
      throw AnalysisError("balancing coefficient undefined: <s2> is not positive");
    const double k = k_override ? *k_override : twin_m.mean1 / twin_m.mean2;
    const double vd1 = channel_moments(views[2]).var1();
    const double vd2 = channel_moments(views[3]).var2();
    const double snl_raw = channel_moments(views[1]).diff_variance(k);
    const double dark_term_1 = vd1;
    const double dark_term_2 = k * k * vd2;
    if (diag != nullptr) {
      if (dark_term_1 >= snl_raw || dark_term_2 >= snl_raw)
        throw AnalysisError(
            "electronic noise is not below the shot-noise level; the corrected NRF "
            "is not applicable (dark variances " +
            std::to_string(dark_term_1) + ", " + std::to_string(dark_term_2) +
            " vs shot noise " + std::to_string(snl_raw) + ")");
      diag->k = k;
      diag->raw_difference_variance = twin_m.diff_variance(k);
      diag->shot_noise_raw = snl_raw;
      diag->dark_var_1 = vd1;
      diag->dark_var_2 = vd2;
      diag->near_validity_limit =
          dark_term_1 > 0.5 * snl_raw || dark_term_2 > 0.5 * snl_raw;
    }
    const double den = snl_raw - dark_term_1 - dark_term_2;
    if (diag != nullptr && !(den > 0.0))
      throw AnalysisError("corrected shot-noise denominator is not positive");
    const double num = twin_m.diff_variance(k) - dark_term_1 - dark_term_2;
    return num / den;
  };

  NrfCorrected out;
  const ResampleView identity[] = {
      {&twin, {}}, {&coherent, {}}, {&dark1, {}}, {&dark2, {}}};
  out.estimate.value = compute(identity, &out);
  const Dataset* data[] = {&twin, &coherent, &dark1, &dark2};
  out.estimate.std_error = bootstrap_error(
      [&compute](std::span<const ResampleView> views) { return compute(views, nullptr); },
      data, bspec.resamples, bspec.seed, bspec.max_workers);
  out.estimate.n_samples = static_cast<std::int64_t>(twin.size());
  return out;
}

Estimate fano(const Dataset& ds, int channel, const Dataset* dark, const BootstrapSpec& bspec) {
  if (channel != 1 && channel != 2) throw ValidationError("channel", "must be 1 or 2");

  auto compute = [channel](std::span<const ResampleView> views, bool check) {
    const ChannelMoments m = channel_moments(views[0]);
    double var = m.var(channel);
    double mean = m.mean(channel);
    if (views.size() > 1) {
      const ChannelMoments d = channel_moments(views[1]);
      var -= d.var(channel);
      mean -= d.mean(channel);
    }
    if (check && !(mean > 0.0))
      throw AnalysisError("Fano factor undefined: corrected mean is not positive");
    return var / mean;
  };

  std::vector<const Dataset*> data{&ds};
  if (dark != nullptr) data.push_back(dark);
  std::vector<ResampleView> identity;
  for (const Dataset* d : data) identity.push_back(ResampleView{d, {}});

  Estimate est;
  est.value = compute(identity, true);
  est.std_error = bootstrap_error(
      [&compute](std::span<const ResampleView> views) { return compute(views, false); }, data,
      bspec.resamples, bspec.seed, bspec.max_workers);
  est.n_samples = static_cast<std::int64_t>(ds.size());
  return est;
}

}  // namespace twinbeam
