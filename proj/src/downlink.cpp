#include "cfsg/downlink.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cfsg/parallel.hpp"
#include "cfsg/rng.hpp"

namespace cfsg {

std::vector<cd> precoder(const ChannelDraw& draw, const EstimatorStats& stats) {
  std::vector<cd> f(draw.h_hat.size());
  const int k_count = draw.n_users;
  const int n = draw.n_antennas;
  for (int m = 0; m < draw.n_aps; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const double c = stats.at_c(m, k);
      const std::size_t base = (static_cast<std::size_t>(m) * k_count + k) * n;
      for (int t = 0; t < n; ++t) f[base + t] = c * draw.h_hat[base + t];
    }
  }
  return f;
}

double normalization_mu(const EstimatorStats& stats, int n_antennas) {
  // tr C_i = N sum_m c_mi; mu = W / sum_i tr C_i with W = M*N.
  double trace_sum = 0.0;
  for (double c : stats.c) trace_sum += c;
  trace_sum *= n_antennas;
  const double w = static_cast<double>(stats.n_aps) * n_antennas;
  return w / trace_sum;
}

namespace {

// Accumulates the Monte Carlo moments of the effective gains z_ki for one
// fixed topology. Signal samples (i == k) are kept for a literal two-pass
// variance; interference entries accumulate power and its square for the
// standard error.
struct MomentAccumulator {
  int k_count = 0;
  int n_draws = 0;
  std::vector<cd> signal_samples;   // n_draws x K
  std::vector<double> cross_abs2;   // K x K sums of |z|^2
  std::vector<double> cross_abs4;   // K x K sums of |z|^4

  MomentAccumulator(int k, int n)
      : k_count(k),
        n_draws(n),
        signal_samples(static_cast<std::size_t>(n) * k),
        cross_abs2(static_cast<std::size_t>(k) * k, 0.0),
        cross_abs4(static_cast<std::size_t>(k) * k, 0.0) {}

  // z is a K x K row-major table for one draw.
  void add(int draw_idx, const std::vector<cd>& z) {
    for (int k = 0; k < k_count; ++k) {
      signal_samples[static_cast<std::size_t>(draw_idx) * k_count + k] =
          z[k * k_count + k];
      for (int i = 0; i < k_count; ++i) {
        if (i == k) continue;
        const double p = std::norm(z[k * k_count + i]);
        cross_abs2[k * k_count + i] += p;
        cross_abs4[k * k_count + i] += p * p;
      }
    }
  }

  cd mean(int k) const {
    cd acc(0.0);
    for (int t = 0; t < n_draws; ++t) {
      acc += signal_samples[static_cast<std::size_t>(t) * k_count + k];
    }
    return acc / static_cast<double>(n_draws);
  }

  double variance(int k, cd m1) const {
    if (n_draws < 2) return 0.0;
    double acc = 0.0;
    for (int t = 0; t < n_draws; ++t) {
      acc += std::norm(signal_samples[static_cast<std::size_t>(t) * k_count + k] - m1);
    }
    return acc / (n_draws - 1);
  }

  double cross_mean(int k, int i) const {
    return cross_abs2[k * k_count + i] / n_draws;
  }

  MomentErrors errors(int k, double s2) const {
    MomentErrors e;
    e.mean_se = std::sqrt(s2 / n_draws);
    e.var_se = (n_draws > 1) ? s2 * std::sqrt(2.0 / (n_draws - 1)) : 0.0;
    e.cross_se.assign(k_count, 0.0);
    for (int i = 0; i < k_count; ++i) {
      if (i == k) continue;
      const double m = cross_mean(k, i);
      const double var =
          std::max(0.0, cross_abs4[k * k_count + i] / n_draws - m * m);
      e.cross_se[i] = std::sqrt(var / n_draws);
    }
    return e;
  }
};

// Effective-gain table z_ki = h_k^H C_i h_hat_i for one draw, canonical
// (basis-vector) pilot books. Exploits two structural facts: users sharing a
// pilot share one projected observation per AP, and c_mi (l_mi/d_mi) = 1/l_mi,
// so the estimate enters the inner product with a plain 1/l weight.
class CanonicalDrawKernel {
 public:
  CanonicalDrawKernel(const NetworkRealization& net, const PilotBook& book,
                      int n_antennas, double rho_tr)
      : net_(net),
        book_(book),
        n_(n_antennas),
        noise_sd_(std::sqrt(0.5 / (book.tau_tr * rho_tr))) {
    pilots_.assign(book_.pilot_id.begin(), book_.pilot_id.end());
    n_pilots_ = 1 + *std::max_element(pilots_.begin(), pilots_.end());
    sqrt_l_.resize(net_.path_loss.size());
    for (std::size_t i = 0; i < sqrt_l_.size(); ++i) {
      sqrt_l_[i] = std::sqrt(net_.path_loss[i]);
    }
    g_.resize(static_cast<std::size_t>(net_.n_users) * n_);
    s_.resize(static_cast<std::size_t>(n_pilots_) * n_);
    ip_.resize(static_cast<std::size_t>(net_.n_users) * n_pilots_);
  }

  // Fills z (K x K) and returns tr F F^H for this draw.
  double run(std::mt19937_64& rng, std::vector<cd>& z) {
    const int k_count = net_.n_users;
    std::fill(z.begin(), z.end(), cd(0.0));
    std::normal_distribution<double> unit(0.0, M_SQRT1_2);
    std::normal_distribution<double> noise(0.0, noise_sd_);
    double tr_ffh = 0.0;

    for (int m = 0; m < net_.n_aps; ++m) {
      const double* sl = &sqrt_l_[static_cast<std::size_t>(m) * k_count];
      const double* l = &net_.path_loss[static_cast<std::size_t>(m) * k_count];
      for (auto& v : g_) v = cd(unit(rng), unit(rng));
      for (auto& v : s_) v = cd(noise(rng), noise(rng));
      // Pilot-group sums: s_p = sum_{j: pilot j = p} sqrt(l_j) g_j + noise.
      for (int j = 0; j < k_count; ++j) {
        const cd* gj = &g_[static_cast<std::size_t>(j) * n_];
        cd* sp = &s_[static_cast<std::size_t>(pilots_[j]) * n_];
        const double a = sl[j];
        for (int t = 0; t < n_; ++t) sp[t] += a * gj[t];
      }
      for (int k = 0; k < k_count; ++k) {
        const cd* gk = &g_[static_cast<std::size_t>(k) * n_];
        for (int p = 0; p < n_pilots_; ++p) {
          const cd* sp = &s_[static_cast<std::size_t>(p) * n_];
          cd acc(0.0);
          for (int t = 0; t < n_; ++t) acc += std::conj(gk[t]) * sp[t];
          ip_[static_cast<std::size_t>(k) * n_pilots_ + p] = acc;
        }
      }
      for (int i = 0; i < k_count; ++i) {
        const double inv_l = 1.0 / l[i];
        const int p = pilots_[i];
        for (int k = 0; k < k_count; ++k) {
          z[k * k_count + i] +=
              sl[k] * inv_l * ip_[static_cast<std::size_t>(k) * n_pilots_ + p];
        }
        // ||f_mi||^2 = ||s_p||^2 / l_mi^2 for the empirical normalization.
        const cd* sp = &s_[static_cast<std::size_t>(p) * n_];
        double pw = 0.0;
        for (int t = 0; t < n_; ++t) pw += std::norm(sp[t]);
        tr_ffh += pw * inv_l * inv_l;
      }
    }
    return tr_ffh;
  }

 private:
  const NetworkRealization& net_;
  const PilotBook& book_;
  int n_;
  int n_pilots_ = 0;
  double noise_sd_;
  std::vector<int> pilots_;
  std::vector<double> sqrt_l_;
  std::vector<cd> g_, s_, ip_;
};

// General-book fallback: builds full tensors through the public channel ops.
double general_draw(const NetworkRealization& net, const PilotBook& book,
                    const EstimatorStats& stats, double rho_tr, int n_antennas,
                    std::mt19937_64& rng, std::vector<cd>& z) {
  const int k_count = net.n_users;
  const ChannelDraw draw =
      draw_channel(net, book, stats, rho_tr, n_antennas, rng);
  const auto f = precoder(draw, stats);
  std::fill(z.begin(), z.end(), cd(0.0));
  double tr_ffh = 0.0;
  for (int m = 0; m < net.n_aps; ++m) {
    for (int i = 0; i < k_count; ++i) {
      const std::size_t fi = (static_cast<std::size_t>(m) * k_count + i) *
                             static_cast<std::size_t>(n_antennas);
      for (int t = 0; t < n_antennas; ++t) tr_ffh += std::norm(f[fi + t]);
      for (int k = 0; k < k_count; ++k) {
        const std::size_t hk = (static_cast<std::size_t>(m) * k_count + k) *
                               static_cast<std::size_t>(n_antennas);
        cd acc(0.0);
        for (int t = 0; t < n_antennas; ++t) {
          acc += std::conj(draw.h[hk + t]) * f[fi + t];
        }
        z[k * k_count + i] += acc;
      }
    }
  }
  return tr_ffh;
}

}  // namespace

SinrReport statistical_sinr(const NetworkRealization& net,
                            const PilotBook& book, const EstimatorStats& stats,
                            const SystemConfig& cfg, int n_draws,
                            std::mt19937_64& rng, MuMode mu_mode) {
  if (n_draws < 1) throw std::invalid_argument("statistical_sinr: n_draws >= 1");
  const int k_count = net.n_users;
  const int n = cfg.n_antennas;
  const double w = static_cast<double>(net.n_aps) * n;

  SinrReport rep;
  rep.n_channel_draws = n_draws;
  rep.low_sample_warning = n_draws < 100;

  MomentAccumulator acc(k_count, n_draws);
  std::vector<cd> z(static_cast<std::size_t>(k_count) * k_count);
  double tr_ffh_sum = 0.0;

  const bool canonical = book.pilot_id[0] >= 0;
  const std::uint64_t draw_base = rng();
  if (canonical) {
    CanonicalDrawKernel kernel(net, book, n, cfg.rho_tr);
    for (int t = 0; t < n_draws; ++t) {
      auto draw_rng = make_engine(derive_seed(draw_base, t));
      tr_ffh_sum += kernel.run(draw_rng, z);
      acc.add(t, z);
    }
  } else {
    for (int t = 0; t < n_draws; ++t) {
      auto draw_rng = make_engine(derive_seed(draw_base, t));
      tr_ffh_sum += general_draw(net, book, stats, cfg.rho_tr, n, draw_rng, z);
      acc.add(t, z);
    }
  }

  rep.mu_bar = (mu_mode == MuMode::kEmpirical)
                   ? w / (tr_ffh_sum / n_draws)
                   : normalization_mu(stats, n);

  const double noise_term = 1.0 / (rep.mu_bar * cfg.rho_d);
  rep.gamma.resize(k_count);
  rep.signal_mean.resize(k_count);
  rep.signal_var.resize(k_count);
  rep.cross_power.assign(static_cast<std::size_t>(k_count) * k_count, 0.0);
  rep.mc_se.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    const cd m1 = acc.mean(k);
    const double s2 = acc.variance(k, m1);
    double interference = 0.0;
    for (int i = 0; i < k_count; ++i) {
      if (i == k) continue;
      const double p = acc.cross_mean(k, i);
      rep.cross_power[k * k_count + i] = p;
      interference += p;
    }
    rep.signal_mean[k] = m1;
    rep.signal_var[k] = s2;
    rep.gamma[k] = std::norm(m1) / (s2 + interference + noise_term);
    rep.mc_se[k] = acc.errors(k, s2);
  }

  rep.gamma_bar =
      de_sinr(net, book, cfg.rho_tr, cfg.rho_d, n).gamma_bar;
  return rep;
}

CoverageCurve coverage_mc(const SystemConfig& cfg,
                          const std::vector<double>& thresholds_db,
                          SinrSource source, int n_topologies,
                          unsigned n_threads) {
  if (!std::is_sorted(thresholds_db.begin(), thresholds_db.end())) {
    throw std::invalid_argument("coverage_mc: thresholds must be sorted");
  }
  const PilotBook book = pilot_book_for(cfg);
  std::vector<double> sinr0(n_topologies);

  const std::uint64_t topo_stream = derive_seed(cfg.seed, kStreamTopology);
  parallel_for(n_topologies, n_threads, [&](std::size_t t) {
    auto topo_rng = make_engine(derive_seed(topo_stream, t));
    const auto net = sample_ppp(cfg.lambda_ap, cfg.area, cfg.n_users,
                                cfg.alpha, topo_rng);
    if (source == SinrSource::kDeterministicEquivalent) {
      sinr0[t] =
          de_sinr(net, book, cfg.rho_tr, cfg.rho_d, cfg.n_antennas).gamma_bar[0];
    } else {
      const auto stats = estimator_stats(net, book, cfg.rho_tr);
      sinr0[t] = statistical_sinr(net, book, stats, cfg,
                                  cfg.mc.n_channel_draws, topo_rng)
                     .gamma[0];
    }
  });

  CoverageCurve curve;
  curve.threshold_db = thresholds_db;
  curve.n_topologies = n_topologies;
  curve.source = source;
  curve.p_hat.resize(thresholds_db.size());
  curve.std_err.resize(thresholds_db.size());
  for (std::size_t j = 0; j < thresholds_db.size(); ++j) {
    const double t_lin = std::pow(10.0, thresholds_db[j] / 10.0);
    int hits = 0;
    for (double g : sinr0) hits += (g > t_lin) ? 1 : 0;
    const double p = static_cast<double>(hits) / n_topologies;
    curve.p_hat[j] = p;
    curve.std_err[j] = std::sqrt(p * (1.0 - p) / n_topologies);
  }
  return curve;
}

std::vector<int> sc_associate(const NetworkRealization& net) {
  const int m_count = net.n_aps;
  const int k_count = net.n_users;
  // Candidate APs per user, nearest first.
  std::vector<std::vector<int>> order(k_count, std::vector<int>(m_count));
  for (int k = 0; k < k_count; ++k) {
    std::iota(order[k].begin(), order[k].end(), 0);
    std::stable_sort(order[k].begin(), order[k].end(), [&](int a, int b) {
      return net.dist(a, k) < net.dist(b, k);
    });
  }

  std::vector<int> serving(k_count, -1);
  std::vector<char> taken(m_count, 0);
  std::vector<int> cursor(k_count, 0);
  std::vector<int> pending(k_count);
  std::iota(pending.begin(), pending.end(), 0);

  while (!pending.empty()) {
    // Each pending user proposes its nearest still-free AP; the nearest
    // proposer (ties to the lower index) wins, losers retry next round.
    std::vector<int> winner(m_count, -1);
    bool any_free = false;
    for (int u : pending) {
      while (cursor[u] < m_count && taken[order[u][cursor[u]]]) ++cursor[u];
      if (cursor[u] >= m_count) continue;  // no free AP left for this user
      any_free = true;
      const int a = order[u][cursor[u]];
      if (winner[a] < 0 || net.dist(a, u) < net.dist(a, winner[a])) {
        winner[a] = u;
      }
    }
    if (!any_free) break;
    std::vector<int> next;
    for (int u : pending) {
      const int a = (cursor[u] < m_count) ? order[u][cursor[u]] : -1;
      if (a >= 0 && winner[a] == u) {
        serving[u] = a;
        taken[a] = 1;
      } else if (a >= 0) {
        next.push_back(u);
      }
    }
    pending = std::move(next);
  }
  // More users than APs: the leftovers attach to their nearest AP even
  // though it already serves someone (flagged by the caller).
  for (int u = 0; u < k_count; ++u) {
    if (serving[u] < 0) serving[u] = order[u][0];
  }
  return serving;
}

ScReport sc_baseline_sinr(const NetworkRealization& net, const PilotBook& book,
                          const EstimatorStats& stats, const SystemConfig& cfg,
                          int n_draws, std::mt19937_64& rng) {
  if (n_draws < 1) throw std::invalid_argument("sc_baseline_sinr: n_draws >= 1");
  const int k_count = net.n_users;
  const int n = cfg.n_antennas;
  const double rho_sc = (static_cast<double>(net.n_aps) / k_count) * cfg.rho_d;

  ScReport rep;
  rep.serving = sc_associate(net);
  rep.n_channel_draws = n_draws;
  {
    std::vector<int> sorted = rep.serving;
    std::sort(sorted.begin(), sorted.end());
    rep.shared_serving =
        std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
  }

  // Restrict the network to the distinct serving APs; all training and
  // beamforming happens there, other APs never transmit in this baseline.
  std::vector<int> ap_of_user(k_count);  // row in the sub-network per user
  NetworkRealization sub;
  sub.area = net.area;
  sub.n_users = k_count;
  {
    std::vector<int> uniq = rep.serving;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    sub.n_aps = static_cast<int>(uniq.size());
    for (int m : uniq) {
      sub.ap_positions.push_back(net.ap_positions[m]);
      for (int k = 0; k < k_count; ++k) {
        sub.distance_km.push_back(net.dist(m, k));
        sub.path_loss.push_back(net.gain(m, k));
      }
    }
    sub.user_positions = net.user_positions;
    for (int u = 0; u < k_count; ++u) {
      ap_of_user[u] = static_cast<int>(
          std::lower_bound(uniq.begin(), uniq.end(), rep.serving[u]) -
          uniq.begin());
    }
  }
  const EstimatorStats sub_stats = estimator_stats(sub, book, cfg.rho_tr);

  // Per-AP normalization mu_i = 1/(N c_i) so each serving beam has unit
  // average power; scale once into the per-user weight below. An AP's
  // statistics only involve its own links, so the caller's table applies
  // unchanged to the restricted network.
  std::vector<double> beam_scale(k_count);
  for (int u = 0; u < k_count; ++u) {
    const double c = stats.at_c(rep.serving[u], u);
    beam_scale[u] = std::sqrt(1.0 / (n * c));
  }

  MomentAccumulator acc(k_count, n_draws);
  std::vector<cd> z(static_cast<std::size_t>(k_count) * k_count);
  const std::uint64_t draw_base = rng();
  for (int t = 0; t < n_draws; ++t) {
    auto draw_rng = make_engine(derive_seed(draw_base, t));
    const ChannelDraw draw =
        draw_channel(sub, book, sub_stats, cfg.rho_tr, n, draw_rng);
    for (int i = 0; i < k_count; ++i) {
      const int m = ap_of_user[i];
      const double wgt = beam_scale[i] * sub_stats.at_c(m, i);
      const std::size_t fi =
          (static_cast<std::size_t>(m) * k_count + i) * static_cast<std::size_t>(n);
      for (int k = 0; k < k_count; ++k) {
        const std::size_t hk = (static_cast<std::size_t>(m) * k_count + k) *
                               static_cast<std::size_t>(n);
        cd acc_z(0.0);
        for (int q = 0; q < n; ++q) {
          acc_z += std::conj(draw.h[hk + q]) * draw.h_hat[fi + q];
        }
        z[k * k_count + i] = wgt * acc_z;
      }
    }
    acc.add(t, z);
  }

  const double prelog =
      1.0 - static_cast<double>(cfg.tau_tr + cfg.tau_d_sc) / cfg.tau_c;
  rep.gamma.resize(k_count);
  rep.rate.resize(k_count);
  rep.mc_se.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    const cd m1 = acc.mean(k);
    const double s2 = acc.variance(k, m1);
    double interference = 0.0;
    for (int i = 0; i < k_count; ++i) {
      if (i != k) interference += acc.cross_mean(k, i);
    }
    rep.gamma[k] =
        rho_sc * std::norm(m1) / (rho_sc * (s2 + interference) + 1.0);
    rep.rate[k] = prelog * std::log2(1.0 + rep.gamma[k]);
    rep.mc_se[k] = acc.errors(k, s2);
  }
  return rep;
}

}  // namespace cfsg
