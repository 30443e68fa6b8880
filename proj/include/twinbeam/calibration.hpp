#pragma once

#include <span>
#include <utility>

#include "twinbeam/types.hpp"

namespace twinbeam {

/// CODATA Planck constant times speed of light, J*m.
inline constexpr double kPlanckTimesC = 1.98645e-25;

struct NrfPoint {
  double n_m = 0.0;  // mean photons per mode
  Estimate nrf;
};

struct FitResult {
  Estimate alpha;
  Estimate beta;
  double covariance_alpha_beta = 0.0;
  double chi2_per_dof = 0.0;
};

/// Weighted least squares of NRF = 1 - alpha + beta * N_m with weights
/// 1/SE^2. Parameter standard errors come from the weighted normal
/// equations. Two points interpolate exactly (chi2_per_dof = 0).
FitResult fit_nrf_linear(std::span<const NrfPoint> points);

/// Closed-form fit parameters of the mode/efficiency model:
/// alpha = 2M/(M+K) * eta1/(1+k), beta = 2K/(M+K) * eta1/(1+k).
std::pair<double, double> alpha_beta_theory(std::int64_t m, std::int64_t k_modes, double eta1,
                                            double k_ratio);

struct EfficiencyEstimate {
  Estimate eta1;
  bool assumes_m_much_greater_than_k = true;
  double k_ratio_used = 1.0;
};

/// Detector-1 efficiency from the fitted alpha under M >> K:
/// eta1 = alpha * (1 + k) / 2, first-order error propagation.
EfficiencyEstimate estimate_eta1(const Estimate& alpha, double k_ratio);

/// Twin-beam squeezing in dB: -10 log10(NRF).
double squeezing_db(double nrf);

/// Pulse energy in joules of n photons at the given wavelength.
double photons_to_energy(double n_photons, double wavelength_nm);

}  // namespace twinbeam
