#include "cfsg/closed_form.hpp"

#include <quadmath.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfsg {

double noise_power(double bandwidth_hz, double noise_figure_db,
                   double noise_temp_k) {
  if (bandwidth_hz <= 0.0 || noise_temp_k <= 0.0) {
    throw std::invalid_argument("noise_power: bandwidth and temperature must be positive");
  }
  return bandwidth_hz * kBoltzmann * noise_temp_k *
         std::pow(10.0, noise_figure_db / 10.0);
}

double normalize_power(double p_watts, double noise_watts) {
  if (noise_watts <= 0.0) {
    throw std::invalid_argument("normalize_power: noise power must be positive");
  }
  return p_watts / noise_watts;
}

DeSinr de_sinr(const NetworkRealization& net, const PilotBook& book,
               double rho_tr, double rho_d, int n_antennas) {
  if (net.n_aps < 1) throw std::invalid_argument("de_sinr: need at least one AP");
  const int m_count = net.n_aps;
  const int k_count = net.n_users;
  const double w = static_cast<double>(m_count) * n_antennas;
  const double tr_noise = 1.0 / (book.tau_tr * rho_tr);

  // Each interferer term carries the d_m of its own estimator (the Gram row of
  // the user being summed over), so precompute s_m = sum_i d_mi / l_mi^2. The
  // remaining per-user factor (l_mk + W/rho_d) does not depend on i.
  std::vector<double> weighted_inv2(m_count, 0.0);
  for (int m = 0; m < m_count; ++m) {
    double acc = 0.0;
    for (int i = 0; i < k_count; ++i) {
      double d_mi = tr_noise;
      for (int j = 0; j < k_count; ++j) {
        d_mi += book.gram_entry(j, i) * net.gain(m, j);
      }
      const double l = net.gain(m, i);
      acc += d_mi / (l * l);
    }
    weighted_inv2[m] = acc;
  }

  DeSinr out;
  out.gamma_bar.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    double den = 0.0;
    for (int m = 0; m < m_count; ++m) {
      den += (net.gain(m, k) + w / rho_d) * weighted_inv2[m];
    }
    den = den / m_count - 1.0;
    if (den <= 0.0) {
      out.gamma_bar[k] = std::numeric_limits<double>::infinity();
      out.any_infinite = true;
    } else {
      out.gamma_bar[k] = w / den;
    }
  }
  return out;
}

double eta(double w_tilde) {
  if (w_tilde <= 0.0) throw std::invalid_argument("eta: W must be positive");
  return w_tilde * std::exp(-std::lgamma(w_tilde + 1.0) / w_tilde);
}

double coverage_x(double k_users, double alpha, double rho_d, double rho_tr,
                  double tau_tr, double w_tilde, double gram_row_sum) {
  if (alpha <= 2.0) {
    throw std::invalid_argument("coverage_x: alpha must exceed 2 (spatial moments diverge)");
  }
  const double inner =
      gram_row_sum * (alpha * rho_d + w_tilde * (alpha - 2.0)) +
      ((alpha - 2.0) * rho_d + w_tilde * (alpha - 1.0)) / (tau_tr * rho_tr);
  return k_users / (alpha * M_PI * rho_d) * inner - 1.0;
}

namespace {

double product_form(double a, double w_tilde) {
  // 1 - (1 - e^-a)^W without cancellation at either end.
  return -std::expm1(w_tilde * std::log1p(-std::exp(-a)));
}

double binomial_sum_form(double a, int w_tilde) {
  // sum_{n=1..W} C(W,n) (-1)^{n+1} e^{-a n}. The partial sums cancel down
  // from O(C(W, W/2)) ~ 1e17 at W = 60, so accumulate in quad precision and
  // round once at the end.
  __float128 sum = 0.0Q;
  __float128 binom = 1.0Q;  // C(W, n), updated incrementally
  for (int n = 1; n <= w_tilde; ++n) {
    binom *= static_cast<__float128>(w_tilde - n + 1) / n;
    const __float128 term = binom * expq(-static_cast<__float128>(a) * n);
    sum += (n % 2 == 1) ? term : -term;
  }
  return static_cast<double>(sum);
}

}  // namespace

CoveragePoint coverage_lower_bound(double t_linear, const SystemConfig& cfg,
                                   const PilotBook& book, CoverageForm form) {
  if (t_linear <= 0.0) {
    throw std::invalid_argument("coverage_lower_bound: threshold must be positive");
  }
  const double s = cfg.area.side_km * cfg.area.side_km;
  const double w_tilde = cfg.lambda_ap * s * cfg.n_antennas;
  const double x = coverage_x(cfg.n_users, cfg.alpha, cfg.rho_d, cfg.rho_tr,
                              cfg.tau_tr, w_tilde, book.gram_row_sum(0));

  CoveragePoint pt;
  pt.threshold = t_linear;
  pt.form = form;
  if (x < 0.0) {
    // The aggregate went negative (bound degenerate); report certainty.
    pt.p_cov = 1.0;
    pt.clamped = true;
    return pt;
  }

  const double a = eta(w_tilde) * t_linear * x;
  if (form == CoverageForm::kBinomialSum) {
    const double w_round = std::round(w_tilde);
    if (std::fabs(w_tilde - w_round) > 1e-9 || w_round < 1.0 || w_round > 60.0) {
      throw std::invalid_argument(
          "coverage_lower_bound: binomial-sum form needs integer W <= 60");
    }
    pt.p_cov = binomial_sum_form(a, static_cast<int>(w_round));
  } else {
    pt.p_cov = product_form(a, w_tilde);
  }
  if (pt.p_cov < 0.0) pt.p_cov = 0.0;
  if (pt.p_cov > 1.0) pt.p_cov = 1.0;
  return pt;
}

MeanFieldSinr mean_field_sinr(const SystemConfig& cfg, const PilotBook& book) {
  const double x_n = coverage_x(cfg.n_users, cfg.alpha, cfg.rho_d, cfg.rho_tr,
                                cfg.tau_tr, cfg.n_antennas,
                                book.gram_row_sum(0));
  MeanFieldSinr out;
  if (x_n <= 0.0) {
    out.gamma_check = std::numeric_limits<double>::infinity();
    out.infinite = true;
  } else {
    out.gamma_check = cfg.lambda_ap * cfg.n_antennas / x_n;
  }
  return out;
}

RateReport rate_lower_bound(const SystemConfig& cfg, const PilotBook& book) {
  if (cfg.tau_tr > cfg.tau_c) {
    throw ConfigError("rate_lower_bound: tau_tr exceeds tau_c", 0, "tau_tr");
  }
  const MeanFieldSinr mf = mean_field_sinr(cfg, book);
  RateReport rep;
  rep.gamma_check = mf.gamma_check;
  const double prelog = 1.0 - static_cast<double>(cfg.tau_tr) / cfg.tau_c;
  rep.se = (prelog == 0.0) ? 0.0 : prelog * std::log2(1.0 + rep.gamma_check);
  rep.throughput_bps = rep.se * cfg.bandwidth_hz;
  return rep;
}

}  // namespace cfsg
