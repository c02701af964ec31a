#pragma once

#include <complex>
#include <random>
#include <vector>

#include "cfsg/channel.hpp"
#include "cfsg/closed_form.hpp"
#include "cfsg/config.hpp"
#include "cfsg/geometry.hpp"

namespace cfsg {

// Conjugate beamforming with statistical channel inversion:
// f_mk = c_mk h_hat_mk. The common power normalization mu is applied by the
// SINR assembly, not baked into the weights.
std::vector<cd> precoder(const ChannelDraw& draw, const EstimatorStats& stats);

enum class MuMode {
  kStatistical,  // mu = W / sum_i tr C_i, from the per-link statistics
  kEmpirical,    // mu = W / E[tr F F^H], Monte Carlo over the same draws
};

// Statistical normalization mu = W / sum_i tr C_i with W = M*N.
double normalization_mu(const EstimatorStats& stats, int n_antennas);

// Standard errors of the Monte Carlo moment estimates for one user. The
// variance-moment error uses the Gaussian-sample approximation
// se(s^2) ~ s^2 sqrt(2/(n-1)).
struct MomentErrors {
  double mean_se = 0.0;
  double var_se = 0.0;
  std::vector<double> cross_se;  // per interferer, index i (own entry 0)
};

struct SinrReport {
  std::vector<double> gamma;      // statistical SINR per user
  std::vector<double> gamma_bar;  // deterministic equivalent per user
  int n_channel_draws = 0;
  bool low_sample_warning = false;  // fewer than 100 draws requested
  double mu_bar = 0.0;
  // Raw moments feeding gamma: mean and variance of the effective gain
  // z_k = h_k^H C_k h_hat_k, and the interference powers E|h_k^H C_i h_hat_i|^2.
  std::vector<cd> signal_mean;       // per user
  std::vector<double> signal_var;    // per user
  std::vector<double> cross_power;   // K x K, [k * K + i], i != k meaningful
  std::vector<MomentErrors> mc_se;   // per user
};

// Estimates the moments of the use-and-forget SINR by Monte Carlo on a fixed
// topology (two-pass mean/variance for the effective gain), then assembles
//   gamma_k = |E z_k|^2 / ( var z_k + sum_{i != k} E|z_ki|^2 + 1/(mu rho_d) ).
// Per-draw engines are derived from the caller's rng, so the draw sequence
// is reproducible and draw-parallel safe.
SinrReport statistical_sinr(const NetworkRealization& net,
                            const PilotBook& book, const EstimatorStats& stats,
                            const SystemConfig& cfg, int n_draws,
                            std::mt19937_64& rng,
                            MuMode mu_mode = MuMode::kStatistical);

enum class SinrSource { kDeterministicEquivalent, kStatistical };

struct CoverageCurve {
  std::vector<double> threshold_db;
  std::vector<double> p_hat;
  std::vector<double> std_err;  // binomial
  int n_topologies = 0;
  SinrSource source = SinrSource::kDeterministicEquivalent;
};

// Empirical coverage of the typical user over random topologies: the
// fraction with SINR above each threshold. With the deterministic-equivalent
// source each topology contributes its gamma_bar_0; the statistical source
// runs cfg.mc.n_channel_draws fading draws per topology instead.
CoverageCurve coverage_mc(const SystemConfig& cfg,
                          const std::vector<double>& thresholds_db,
                          SinrSource source, int n_topologies,
                          unsigned n_threads);

// Small-cells baseline: nearest-AP association on the torus with
// deterministic conflict resolution (nearer user keeps the AP, loser moves to
// its next-nearest free AP, ties break toward the lower user index). Each
// serving AP beamforms toward its own user from its own estimate with power
// rho_sc = (M/K) rho_d; everything else is interference. The SINR uses the
// same use-and-forget moment structure as the cell-free path, restricted to
// single serving links, with per-AP normalization mu_i = 1/(N c_i).
struct ScReport {
  std::vector<int> serving;   // AP index per user
  std::vector<double> gamma;  // per user
  std::vector<double> rate;   // (1 - (tau_tr+tau_d_sc)/tau_c) log2(1+gamma)
  bool shared_serving = false;  // fewer APs than users forced sharing
  int n_channel_draws = 0;
  std::vector<MomentErrors> mc_se;
};

std::vector<int> sc_associate(const NetworkRealization& net);

ScReport sc_baseline_sinr(const NetworkRealization& net, const PilotBook& book,
                          const EstimatorStats& stats, const SystemConfig& cfg,
                          int n_draws, std::mt19937_64& rng);

}  // namespace cfsg
