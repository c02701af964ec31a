#include "cfsg/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cfsg {

double PilotBook::gram_row_sum(int k) const {
  double s = 0.0;
  for (int j = 0; j < n_users; ++j) s += gram[j * n_users + k];
  return s;
}

namespace {

void fill_correlations(PilotBook& book) {
  const int k_count = book.n_users;
  const int tau = book.tau_tr;
  book.cross.assign(static_cast<std::size_t>(k_count) * k_count, cd(0.0));
  book.gram.assign(book.cross.size(), 0.0);
  for (int j = 0; j < k_count; ++j) {
    for (int k = 0; k < k_count; ++k) {
      cd acc(0.0);
      for (int t = 0; t < tau; ++t) {
        acc += std::conj(book.seq[j * tau + t]) * book.seq[k * tau + t];
      }
      book.cross[j * k_count + k] = acc;
      book.gram[j * k_count + k] = std::norm(acc);
    }
  }
  book.orthogonal = true;
  for (int j = 0; j < k_count && book.orthogonal; ++j) {
    for (int k = 0; k < k_count; ++k) {
      const double want = (j == k) ? 1.0 : 0.0;
      if (std::fabs(book.gram[j * k_count + k] - want) > 1e-12) {
        book.orthogonal = false;
        break;
      }
    }
  }
}

}  // namespace

PilotBook make_pilot_book(int n_users, int tau_tr, PilotPolicy policy) {
  if (n_users < 1 || tau_tr < 1) {
    throw std::invalid_argument("make_pilot_book: need n_users, tau_tr >= 1");
  }
  if (policy == PilotPolicy::kExplicit) {
    throw std::invalid_argument(
        "make_pilot_book: explicit policy requires make_pilot_book_explicit");
  }

  PilotBook book;
  book.tau_tr = tau_tr;
  book.n_users = n_users;
  book.pilot_id.resize(n_users);
  book.seq.assign(static_cast<std::size_t>(tau_tr) * n_users, cd(0.0));

  const bool fits = n_users <= tau_tr;
  for (int k = 0; k < n_users; ++k) {
    // Auto assignment is orthogonal whenever the book is long enough;
    // otherwise (and under kRoundRobin) pilots repeat cyclically.
    const int p = (policy == PilotPolicy::kAuto && fits) ? k : k % tau_tr;
    book.pilot_id[k] = p;
    book.seq[k * tau_tr + p] = cd(1.0);
  }
  fill_correlations(book);
  return book;
}

PilotBook make_pilot_book_explicit(int n_users, int tau_tr,
                                   std::vector<cd> seq) {
  if (n_users < 1 || tau_tr < 1) {
    throw std::invalid_argument(
        "make_pilot_book_explicit: need n_users, tau_tr >= 1");
  }
  if (seq.size() != static_cast<std::size_t>(tau_tr) * n_users) {
    throw std::invalid_argument(
        "make_pilot_book_explicit: sequence matrix must be tau_tr x n_users");
  }
  PilotBook book;
  book.tau_tr = tau_tr;
  book.n_users = n_users;
  book.seq = std::move(seq);
  book.pilot_id.assign(n_users, -1);
  for (int k = 0; k < n_users; ++k) {
    double norm2 = 0.0;
    for (int t = 0; t < tau_tr; ++t) norm2 += std::norm(book.seq[k * tau_tr + t]);
    if (std::fabs(norm2 - 1.0) > 1e-9) {
      throw std::invalid_argument(
          "make_pilot_book_explicit: columns must be unit-norm");
    }
  }
  fill_correlations(book);
  return book;
}

EstimatorStats estimator_stats(const NetworkRealization& net,
                               const PilotBook& book, double rho_tr) {
  if (book.n_users != net.n_users) {
    throw std::invalid_argument("estimator_stats: book/realization user count");
  }
  if (rho_tr <= 0.0) {
    throw std::invalid_argument("estimator_stats: rho_tr must be positive");
  }
  const int m_count = net.n_aps;
  const int k_count = net.n_users;
  const double noise = 1.0 / (book.tau_tr * rho_tr);

  EstimatorStats st;
  st.n_aps = m_count;
  st.n_users = k_count;
  st.d.resize(static_cast<std::size_t>(m_count) * k_count);
  st.sigma2.resize(st.d.size());
  st.sigma2_err.resize(st.d.size());
  st.c.resize(st.d.size());

  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      double d = noise;
      for (int j = 0; j < k_count; ++j) {
        d += book.gram_entry(j, k) * net.gain(m, j);
      }
      const double l = net.gain(m, k);
      const double s2 = l * l / d;
      const std::size_t idx = static_cast<std::size_t>(m) * k_count + k;
      st.d[idx] = d;
      st.sigma2[idx] = s2;
      st.sigma2_err[idx] = l - s2;  // exact complement of the estimate variance
      st.c[idx] = 1.0 / s2;
    }
  }
  return st;
}

std::vector<cd> draw_small_scale(int n_aps, int n_users, int n_antennas,
                                 std::mt19937_64& rng) {
  // CN(0,1) entries: independent real/imag parts with variance 1/2.
  std::normal_distribution<double> gauss(0.0, M_SQRT1_2);
  std::vector<cd> g(static_cast<std::size_t>(n_aps) * n_users * n_antennas);
  for (auto& v : g) v = cd(gauss(rng), gauss(rng));
  return g;
}

std::vector<cd> training_observation(const NetworkRealization& net,
                                     const PilotBook& book,
                                     const std::vector<cd>& g, double rho_tr,
                                     int n_antennas, std::mt19937_64& rng) {
  const int m_count = net.n_aps;
  const int k_count = net.n_users;
  const int n = n_antennas;
  const int tau = book.tau_tr;
  const double noise_scale = 1.0 / std::sqrt(book.tau_tr * rho_tr);
  std::normal_distribution<double> gauss(0.0, M_SQRT1_2);

  std::vector<cd> y(static_cast<std::size_t>(m_count) * k_count * n, cd(0.0));
  std::vector<cd> noise_block(static_cast<std::size_t>(tau) * n);
  for (int m = 0; m < m_count; ++m) {
    // Raw training noise at this AP, one CN(0,1) vector per pilot dimension.
    for (auto& v : noise_block) v = cd(gauss(rng), gauss(rng));
    for (int k = 0; k < k_count; ++k) {
      cd* yk = &y[(static_cast<std::size_t>(m) * k_count + k) * n];
      for (int j = 0; j < k_count; ++j) {
        // <psi_k, psi_j> weights user j's channel in user k's projection.
        const cd w = book.cross[k * k_count + j];
        if (w == cd(0.0)) continue;
        const double a = std::sqrt(net.gain(m, j));
        const cd* gj = &g[(static_cast<std::size_t>(m) * k_count + j) * n];
        for (int t = 0; t < n; ++t) yk[t] += w * a * gj[t];
      }
      for (int t = 0; t < tau; ++t) {
        const cd w = std::conj(book.seq[k * tau + t]);
        if (w == cd(0.0)) continue;
        for (int u = 0; u < n; ++u) {
          yk[u] += noise_scale * w * noise_block[t * n + u];
        }
      }
    }
  }
  return y;
}

std::vector<cd> mmse_estimate(const NetworkRealization& net,
                              const EstimatorStats& stats,
                              const std::vector<cd>& y_tilde, int n_antennas) {
  const int m_count = net.n_aps;
  const int k_count = net.n_users;
  std::vector<cd> h_hat(y_tilde.size());
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const double w = net.gain(m, k) / stats.at_d(m, k);
      const std::size_t base =
          (static_cast<std::size_t>(m) * k_count + k) * n_antennas;
      for (int t = 0; t < n_antennas; ++t) h_hat[base + t] = w * y_tilde[base + t];
    }
  }
  return h_hat;
}

ChannelDraw draw_channel(const NetworkRealization& net, const PilotBook& book,
                         const EstimatorStats& stats, double rho_tr,
                         int n_antennas, std::mt19937_64& rng) {
  ChannelDraw draw;
  draw.n_aps = net.n_aps;
  draw.n_users = net.n_users;
  draw.n_antennas = n_antennas;
  draw.g = draw_small_scale(net.n_aps, net.n_users, n_antennas, rng);

  draw.h.resize(draw.g.size());
  for (int m = 0; m < net.n_aps; ++m) {
    for (int k = 0; k < net.n_users; ++k) {
      const double a = std::sqrt(net.gain(m, k));
      const std::size_t base =
          (static_cast<std::size_t>(m) * net.n_users + k) * n_antennas;
      for (int t = 0; t < n_antennas; ++t) draw.h[base + t] = a * draw.g[base + t];
    }
  }

  const auto y = training_observation(net, book, draw.g, rho_tr, n_antennas, rng);
  draw.h_hat = mmse_estimate(net, stats, y, n_antennas);
  draw.d = stats.d;
  draw.sigma2 = stats.sigma2;
  draw.sigma2_err = stats.sigma2_err;
  return draw;
}

}  // namespace cfsg
