#include "twinbeam/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/negative_binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace twinbeam {

namespace {

std::int64_t sample_negative_binomial(std::int64_t modes, double n_mean, RngStream& rng) {
  if (modes <= 0 || n_mean <= 0.0) return 0;
  const double p = 1.0 / (1.0 + n_mean);
  boost::random::negative_binomial_distribution<std::int64_t, double> dist(modes, p);
  return dist(rng);
}

std::int64_t sample_poisson(double mean, RngStream& rng) {
  if (mean <= 0.0) return 0;
  boost::random::poisson_distribution<std::int64_t, double> dist(mean);
  return dist(rng);
}

double sample_gaussian(double mean, double variance, RngStream& rng) {
  if (variance <= 0.0) return mean;
  boost::random::normal_distribution<double> dist(mean, std::sqrt(variance));
  return dist(rng);
}

PulseRecord make_record(const RunSpec& spec, std::int64_t pulse_id, RngStream& rng,
                        std::uint64_t& clamped) {
  PulseRecord rec;
  rec.pulse_id = pulse_id;
  switch (spec.kind) {
    case DatasetKind::twin_beam: {
      const TruePulse tp = sample_pulse(*spec.source, rng);
      if (tp.gain_clamped) ++clamped;
      rec.s1 = detect(tp.n1, spec.detector1, rng);
      rec.s2 = detect(tp.n2, spec.detector2, rng);
      break;
    }
    case DatasetKind::coherent: {
      const std::int64_t n1 = sample_poisson(spec.coherent->mean1, rng);
      const std::int64_t n2 = sample_poisson(spec.coherent->mean2, rng);
      rec.s1 = detect(n1, spec.detector1, rng);
      rec.s2 = detect(n2, spec.detector2, rng);
      break;
    }
    case DatasetKind::dark: {
      rec.s1 = sample_gaussian(spec.detector1.noise_mean, spec.detector1.noise_var, rng);
      rec.s2 = sample_gaussian(spec.detector2.noise_mean, spec.detector2.noise_var, rng);
      break;
    }
  }
  return rec;
}

}  // namespace

std::int64_t sample_thermal_mode(double n_mean, RngStream& rng) {
  if (n_mean < 0.0 || !std::isfinite(n_mean))
    throw ValidationError("n_mean", "must be finite and >= 0");
  if (n_mean == 0.0) return 0;
  // Geometric (Bose-Einstein) by inversion: one uniform per draw.
  const double u = rng.uniform01();
  const double ratio = n_mean / (1.0 + n_mean);
  const double k = std::floor(std::log1p(-u) / std::log(ratio));
  return static_cast<std::int64_t>(k);
}

TruePulse sample_pulse(const SourceParams& source, RngStream& rng) {
  source.validate();
  TruePulse out;
  double gain = 1.0;
  if (source.gain_jitter_rel_std > 0.0) {
    boost::random::normal_distribution<double> jitter(1.0, source.gain_jitter_rel_std);
    gain = jitter(rng);
    if (gain < 0.0) {
      gain = 0.0;
      out.gain_clamped = true;
    }
  }
  const double mean = gain * source.n_mean_per_mode;
  const std::int64_t matched = sample_negative_binomial(source.matched_modes, mean, rng);
  out.n1 = matched + sample_negative_binomial(source.unmatched_modes_1, mean, rng);
  out.n2 = matched + sample_negative_binomial(source.unmatched_modes_2, mean, rng);
  return out;
}

double detect(std::int64_t n_true, const DetectorParams& det, RngStream& rng) {
  if (n_true < 0) throw ValidationError("n_true", "must be >= 0");
  std::int64_t survived = n_true;
  if (det.efficiency <= 0.0) {
    survived = 0;
  } else if (det.efficiency < 1.0 && n_true > 0) {
    boost::random::binomial_distribution<std::int64_t, double> thin(n_true, det.efficiency);
    survived = thin(rng);
  }
  double value = static_cast<double>(survived) + det.noise_mean;
  if (det.noise_var > 0.0) {
    boost::random::normal_distribution<double> noise(0.0, std::sqrt(det.noise_var));
    value += noise(rng);
  }
  return value;
}

void RunSpec::validate() const {
  if (n_pulses < 1) throw ValidationError("n_pulses", "must be >= 1");
  detector1.validate("detectors[0].");
  detector2.validate("detectors[1].");
  switch (kind) {
    case DatasetKind::twin_beam:
      if (!source) throw ValidationError("source", "required for twin_beam runs");
      source->validate();
      break;
    case DatasetKind::coherent:
      if (!coherent) throw ValidationError("coherent", "required for coherent runs");
      coherent->validate();
      break;
    case DatasetKind::dark:
      break;
  }
}

int resolve_worker_count(int requested) noexcept {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
  }
  if (const char* cap = std::getenv("TWINBEAM_MAX_WORKERS")) {
    const int c = std::atoi(cap);
    if (c >= 1) n = std::min(n, c);
  }
  return std::max(1, n);
}

Dataset simulate_run(const RunSpec& spec, int max_workers) {
  spec.validate();

  Dataset ds;
  ds.kind = spec.kind;
  if (spec.kind == DatasetKind::twin_beam) ds.source = spec.source;
  if (spec.kind == DatasetKind::coherent) ds.coherent = spec.coherent;
  ds.detector1 = spec.detector1;
  ds.detector2 = spec.detector2;
  ds.seed = spec.seed;
  ds.records.resize(static_cast<std::size_t>(spec.n_pulses));

  const int workers = resolve_worker_count(max_workers);
  const std::int64_t n = spec.n_pulses;

  auto worker = [&](std::int64_t begin, std::int64_t end, std::uint64_t& clamped) {
    for (std::int64_t i = begin; i < end; ++i) {
      RngStream rng(spec.seed, static_cast<std::uint64_t>(i));
      ds.records[static_cast<std::size_t>(i)] = make_record(spec, i, rng, clamped);
    }
  };

  if (workers == 1 || n < 2 * workers) {
    std::uint64_t clamped = 0;
    worker(0, n, clamped);
    ds.clamped_pulses = clamped;
  } else {
    std::vector<std::thread> threads;
    std::vector<std::uint64_t> clamped(static_cast<std::size_t>(workers), 0);
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t begin = w * chunk;
      const std::int64_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(worker, begin, end, std::ref(clamped[static_cast<std::size_t>(w)]));
    }
    for (auto& t : threads) t.join();
    for (std::uint64_t c : clamped) ds.clamped_pulses += c;
  }
  return ds;
}

double pump_power_to_n_mode(double power_mw, double gain_coeff) {
  if (!(power_mw >= 0.0)) throw ValidationError("power_mW", "must be >= 0");
  if (!(gain_coeff > 0.0)) throw ValidationError("gain_coeff", "must be > 0");
  const double s = std::sinh(gain_coeff * std::sqrt(power_mw));
  return s * s;
}

}  // namespace twinbeam
