#pragma once

#include <vector>

#include "cfsg/channel.hpp"
#include "cfsg/config.hpp"
#include "cfsg/geometry.hpp"

namespace cfsg {

// Boltzmann constant as fixed by the noise-budget convention used here.
inline constexpr double kBoltzmann = 1.381e-23;

double noise_power(double bandwidth_hz, double noise_figure_db,
                   double noise_temp_k);
double normalize_power(double p_watts, double noise_watts);

// Deterministic equivalent of the per-user downlink SINR on a fixed topology:
//
//   gamma_bar_k = M*N / ( (1/M) sum_i sum_m d_mi l_mi^-2 (l_mk + M*N/rho_d) - 1 )
//
// where d_mi is the projected-training variance of interferer i's estimator
// (its own Gram row), matching the per-user MMSE coefficients the simulation
// uses. A non-positive denominator, possible only in non-physical corner
// configs, is reported as +infinity and flagged.
struct DeSinr {
  std::vector<double> gamma_bar;
  bool any_infinite = false;
};
DeSinr de_sinr(const NetworkRealization& net, const PilotBook& book,
               double rho_tr, double rho_d, int n_antennas);

// eta(W) = W * (W!)^(-1/W), through log-gamma so non-integer W works.
// Monotone increasing from 1 toward e.
double eta(double w_tilde);

enum class CoverageForm { kProduct, kBinomialSum };

struct CoveragePoint {
  double threshold = 0.0;  // linear SINR threshold T
  double p_cov = 0.0;
  CoverageForm form = CoverageForm::kProduct;
  bool clamped = false;  // X < 0 degenerated the bound; clamped to 1
};

// Interference/noise aggregate of the coverage bound. gram_row_sum is
// sum_j |<psi_j, psi_k>|^2 for the typical user; w_tilde is the mean antenna
// count lambda_ap * S * N (or N itself for the mean-field rate bound).
double coverage_x(double k_users, double alpha, double rho_d, double rho_tr,
                  double tau_tr, double w_tilde, double gram_row_sum);

// Coverage lower bound. Product form:
//     P_c = 1 - (1 - exp(-eta * T * X))^W
// evaluated stably through log1p/expm1. The equivalent alternating binomial
// sum is kept as an integer-W cross-check; it is summed in quad precision
// because the cancellation near small T exceeds double range already at
// W around 60.
CoveragePoint coverage_lower_bound(double t_linear, const SystemConfig& cfg,
                                   const PilotBook& book,
                                   CoverageForm form = CoverageForm::kProduct);

// Mean-field SINR bound gamma_check = lambda_ap * N / X_N, where X_N reuses
// the coverage aggregate with W replaced by N. Linear in lambda_ap by
// construction. Non-positive X_N is reported as +infinity and flagged.
struct MeanFieldSinr {
  double gamma_check = 0.0;
  bool infinite = false;
};
MeanFieldSinr mean_field_sinr(const SystemConfig& cfg, const PilotBook& book);

struct RateReport {
  double gamma_check = 0.0;
  double se = 0.0;             // spectral efficiency, bit/s/Hz
  double throughput_bps = 0.0; // se * bandwidth
};
// se = (1 - tau_tr/tau_c) log2(1 + gamma_check); a vanishing pre-log factor
// yields exactly zero even when gamma_check is infinite.
RateReport rate_lower_bound(const SystemConfig& cfg, const PilotBook& book);

}  // namespace cfsg
