#include "twinbeam/calibration.hpp"

#include <cmath>

namespace twinbeam {

FitResult fit_nrf_linear(std::span<const NrfPoint> points) {
  if (points.size() < 2)
    throw ValidationError("points", "need at least 2 points for a linear fit");

  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (const NrfPoint& p : points) {
    if (!(p.nrf.std_error > 0.0))
      throw ValidationError("points", "every point needs a positive standard error");
    const double w = 1.0 / (p.nrf.std_error * p.nrf.std_error);
    sw += w;
    swx += w * p.n_m;
    swy += w * p.nrf.value;
    swxx += w * p.n_m * p.n_m;
    swxy += w * p.n_m * p.nrf.value;
  }
  const double delta = sw * swxx - swx * swx;
  // Rank-deficient when all n_m coincide.
  if (!(delta > 1e-12 * sw * swxx))
    throw ValidationError("points", "n_m values must not all coincide");

  const double intercept = (swxx * swy - swx * swxy) / delta;
  const double slope = (sw * swxy - swx * swy) / delta;

  double chi2 = 0.0;
  for (const NrfPoint& p : points) {
    const double r = (p.nrf.value - intercept - slope * p.n_m) / p.nrf.std_error;
    chi2 += r * r;
  }
  const auto n = static_cast<std::int64_t>(points.size());
  const double dof = static_cast<double>(n - 2);

  FitResult fit;
  fit.alpha = {1.0 - intercept, std::sqrt(swxx / delta), n};
  fit.beta = {slope, std::sqrt(sw / delta), n};
  // Cov(alpha, beta) = Cov(1 - intercept, slope) = -Cov(intercept, slope).
  fit.covariance_alpha_beta = swx / delta;
  fit.chi2_per_dof = dof > 0.0 ? chi2 / dof : 0.0;
  return fit;
}

std::pair<double, double> alpha_beta_theory(std::int64_t m, std::int64_t k_modes, double eta1,
                                            double k_ratio) {
  if (m < 0) throw ValidationError("m", "must be >= 0");
  if (k_modes < 0) throw ValidationError("k_modes", "must be >= 0");
  if (m + k_modes < 1) throw ValidationError("m", "M + K must be >= 1");
  if (!(eta1 > 0.0 && eta1 <= 1.0)) throw ValidationError("eta1", "must be in (0, 1]");
  if (!(k_ratio > 0.0)) throw ValidationError("k_ratio", "must be > 0");
  const double total = static_cast<double>(m + k_modes);
  const double common = eta1 / (1.0 + k_ratio);
  return {2.0 * static_cast<double>(m) / total * common,
          2.0 * static_cast<double>(k_modes) / total * common};
}

EfficiencyEstimate estimate_eta1(const Estimate& alpha, double k_ratio) {
  if (!(alpha.value > 0.0)) throw ValidationError("alpha", "must be > 0");
  if (!(k_ratio > 0.0)) throw ValidationError("k_ratio", "must be > 0");
  const double scale = (1.0 + k_ratio) / 2.0;
  EfficiencyEstimate out;
  out.eta1 = {alpha.value * scale, alpha.std_error * scale, alpha.n_samples};
  out.assumes_m_much_greater_than_k = true;
  out.k_ratio_used = k_ratio;
  return out;
}

double squeezing_db(double nrf) {
  if (!(nrf > 0.0)) throw ValidationError("nrf", "must be > 0");
  return -10.0 * std::log10(nrf);
}

double photons_to_energy(double n_photons, double wavelength_nm) {
  if (!(n_photons > 0.0)) throw ValidationError("n_photons", "must be > 0");
  if (!(wavelength_nm > 0.0)) throw ValidationError("wavelength_nm", "must be > 0");
  return n_photons * kPlanckTimesC / (wavelength_nm * 1e-9);
}

}  // namespace twinbeam
