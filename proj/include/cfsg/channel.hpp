#pragma once

#include <complex>
#include <random>
#include <vector>

#include "cfsg/geometry.hpp"

namespace cfsg {

using cd = std::complex<double>;

enum class PilotPolicy {
  kAuto,        // orthogonal when K <= tau_tr, else round-robin reuse
  kRoundRobin,  // user k gets pilot k mod tau_tr
  kExplicit,    // caller-supplied unit-norm columns
};

// Uplink training codebook. Columns are unit-norm length-tau_tr sequences,
// one per user. For the canonical policies the columns are standard basis
// vectors and pilot_id[k] names the basis column; explicit books set
// pilot_id to -1 and work through the cross-correlation table.
struct PilotBook {
  int tau_tr = 0;
  int n_users = 0;
  std::vector<cd> seq;        // tau_tr x K, column-major [k * tau_tr + t]
  std::vector<cd> cross;      // K x K, cross[j * K + k] = <psi_j, psi_k>
  std::vector<double> gram;   // K x K, |cross|^2
  std::vector<int> pilot_id;  // basis column per user, or -1
  bool orthogonal = false;    // gram == identity

  double gram_entry(int j, int k) const { return gram[j * n_users + k]; }
  // Total pilot weight seen by user k's estimator, sum_j |<psi_j, psi_k>|^2.
  double gram_row_sum(int k) const;
};

PilotBook make_pilot_book(int n_users, int tau_tr,
                          PilotPolicy policy = PilotPolicy::kAuto);
PilotBook make_pilot_book_explicit(int n_users, int tau_tr,
                                   std::vector<cd> seq);

// Per-link estimator statistics, fixed once topology and pilots are fixed.
// d is the variance of each projected training observation component,
//   d_mk = sum_j |<psi_j, psi_k>|^2 l_mj + 1/(tau_tr rho_tr),
// sigma2 = l^2/d is the per-component variance of the MMSE estimate, and
// sigma2_err = l - sigma2 the estimation error variance. The identity
// sigma2 + sigma2_err = l holds exactly by construction. c = 1/sigma2 is the
// statistical channel-inversion gain used by the precoder.
struct EstimatorStats {
  int n_aps = 0;
  int n_users = 0;
  std::vector<double> d;           // M x K
  std::vector<double> sigma2;      // M x K
  std::vector<double> sigma2_err;  // M x K
  std::vector<double> c;           // M x K

  double at_d(int m, int k) const { return d[m * n_users + k]; }
  double at_sigma2(int m, int k) const { return sigma2[m * n_users + k]; }
  double at_c(int m, int k) const { return c[m * n_users + k]; }
};

EstimatorStats estimator_stats(const NetworkRealization& net,
                               const PilotBook& book, double rho_tr);

// One coherence-block fading draw on a fixed topology. Tensors are
// M x K x N row-major [(m * K + k) * N + n].
struct ChannelDraw {
  int n_aps = 0;
  int n_users = 0;
  int n_antennas = 0;
  std::vector<cd> g;      // small-scale, i.i.d. CN(0,1)
  std::vector<cd> h;      // effective channel sqrt(l) g
  std::vector<cd> h_hat;  // per-AP MMSE estimate
  // Copies of the per-link statistics the estimate was built with.
  std::vector<double> d;
  std::vector<double> sigma2;
  std::vector<double> sigma2_err;
};

std::vector<cd> draw_small_scale(int n_aps, int n_users, int n_antennas,
                                 std::mt19937_64& rng);

// Projected training observations y_mk (M x K x N): each AP correlates its
// received pilot block with user k's sequence. Covariance per component is
// d_mk; users sharing a pilot share the projected noise.
std::vector<cd> training_observation(const NetworkRealization& net,
                                     const PilotBook& book,
                                     const std::vector<cd>& g, double rho_tr,
                                     int n_antennas, std::mt19937_64& rng);

// Linear MMSE estimate from the projected observations:
// h_hat_mk = (l_mk / d_mk) y_mk.
std::vector<cd> mmse_estimate(const NetworkRealization& net,
                              const EstimatorStats& stats,
                              const std::vector<cd>& y_tilde, int n_antennas);

ChannelDraw draw_channel(const NetworkRealization& net, const PilotBook& book,
                         const EstimatorStats& stats, double rho_tr,
                         int n_antennas, std::mt19937_64& rng);

}  // namespace cfsg
