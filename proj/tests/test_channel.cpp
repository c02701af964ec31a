#include <catch2/catch_amalgamated.hpp>

#include "cfsg/channel.hpp"
#include "cfsg/geometry.hpp"
#include "cfsg/rng.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

using Catch::Approx;
using cfsg::cd;
using cfsg::ChannelDraw;
using cfsg::EstimatorStats;
using cfsg::NetworkRealization;
using cfsg::PilotBook;
using cfsg::PilotPolicy;

namespace {

// Two stations, two users, all links past the breakpoint so every gain is a
// genuine power law. Used by the estimator and draw statistics tests.
NetworkRealization two_by_two_net(double alpha = 3.5) {
  NetworkRealization net;
  net.area.side_km = 10.0;
  net.area.wrap = false;
  net.n_aps = 2;
  net.n_users = 2;
  net.ap_positions = {{0.0, 0.0}, {4.0, 0.0}};
  net.user_positions = {{1.5, 0.0}, {4.0, 2.0}};
  cfsg::fill_link_tables(net, alpha);
  return net;
}

}  // namespace

TEST_CASE("a full-length book is orthogonal", "[channel]") {
  PilotBook book = cfsg::make_pilot_book(10, 10);
  REQUIRE(book.orthogonal);
  for (int j = 0; j < 10; ++j) {
    REQUIRE(book.pilot_id[j] == j);
    for (int k = 0; k < 10; ++k) {
      REQUIRE(book.gram_entry(j, k) == Approx(j == k ? 1.0 : 0.0).margin(1e-15));
    }
  }
  for (int k = 0; k < 10; ++k) {
    REQUIRE(book.gram_row_sum(k) == Approx(1.0).margin(1e-14));
  }
}

TEST_CASE("a short book reuses pilots cyclically", "[channel]") {
  PilotBook book = cfsg::make_pilot_book(20, 10);
  REQUIRE_FALSE(book.orthogonal);
  REQUIRE(book.pilot_id[10] == 0);
  REQUIRE(book.gram_entry(0, 10) == Approx(1.0).margin(1e-15));
  REQUIRE(book.gram_entry(0, 1) == Approx(0.0).margin(1e-15));
  // User 0 shares with user 10 and nobody else.
  REQUIRE(book.gram_row_sum(0) == Approx(2.0).margin(1e-14));

  PilotBook rr = cfsg::make_pilot_book(6, 3, PilotPolicy::kRoundRobin);
  REQUIRE(rr.pilot_id[4] == 1);
  REQUIRE(rr.gram_entry(1, 4) == Approx(1.0).margin(1e-15));
}

TEST_CASE("explicit books validate their columns", "[channel]") {
  // Non-unit column.
  std::vector<cd> bad = {cd(0.5), cd(0.5)};
  REQUIRE_THROWS_AS(cfsg::make_pilot_book_explicit(1, 2, bad),
                    std::invalid_argument);
  // Wrong matrix shape.
  std::vector<cd> short_seq = {cd(1.0)};
  REQUIRE_THROWS_AS(cfsg::make_pilot_book_explicit(1, 2, short_seq),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(cfsg::make_pilot_book(0, 5), std::invalid_argument);
  REQUIRE_THROWS_AS(cfsg::make_pilot_book(5, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(cfsg::make_pilot_book(5, 5, PilotPolicy::kExplicit),
                    std::invalid_argument);
}

TEST_CASE("explicit basis columns reproduce the canonical book", "[channel]") {
  PilotBook canonical = cfsg::make_pilot_book(10, 10);
  PilotBook replayed = cfsg::make_pilot_book_explicit(10, 10, canonical.seq);
  REQUIRE(replayed.orthogonal);
  for (size_t i = 0; i < canonical.gram.size(); ++i) {
    REQUIRE(replayed.gram[i] == Approx(canonical.gram[i]).margin(1e-14));
  }
}

TEST_CASE("explicit books handle non-basis sequences", "[channel]") {
  const double r = M_SQRT1_2;
  // Hadamard pair: orthogonal without being basis vectors.
  std::vector<cd> had = {cd(r), cd(r), cd(r), cd(-r)};
  PilotBook h2 = cfsg::make_pilot_book_explicit(2, 2, had);
  REQUIRE(h2.orthogonal);
  REQUIRE(h2.pilot_id[0] == -1);

  // Half-overlapping pair.
  std::vector<cd> tilted = {cd(1.0), cd(0.0), cd(r), cd(r)};
  PilotBook t2 = cfsg::make_pilot_book_explicit(2, 2, tilted);
  REQUIRE_FALSE(t2.orthogonal);
  REQUIRE(t2.gram_entry(0, 1) == Approx(0.5).epsilon(1e-12));
  REQUIRE(t2.gram_entry(0, 0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("small-scale draws have circular unit-variance statistics",
          "[channel]") {
  std::mt19937_64 rng(cfsg::derive_seed(88001, 0));
  const auto g = cfsg::draw_small_scale(100, 100, 100, rng);
  const double n = static_cast<double>(g.size());
  REQUIRE(g.size() == 1000000u);

  double sum_re = 0.0, sum_im = 0.0;
  double sum_re2 = 0.0, sum_im2 = 0.0, sum_cross = 0.0;
  for (const cd& v : g) {
    sum_re += v.real();
    sum_im += v.imag();
    sum_re2 += v.real() * v.real();
    sum_im2 += v.imag() * v.imag();
    sum_cross += v.real() * v.imag();
  }

  // Component means: each part is N(0, 1/2), so se = sqrt(0.5 / n).
  const double se_mean = std::sqrt(0.5 / n);
  REQUIRE(std::abs(sum_re / n) <= 3.0 * se_mean);
  REQUIRE(std::abs(sum_im / n) <= 3.0 * se_mean);

  // Total power E|g|^2 = 1 and an even split across parts.
  REQUIRE((sum_re2 + sum_im2) / n == Approx(1.0).epsilon(0.01));
  const double se_part = std::sqrt(0.5 / n);  // var of re^2 is 2 (1/2)^2 = 1/2
  REQUIRE(std::abs(sum_re2 / n - 0.5) <= 3.0 * se_part);
  REQUIRE(std::abs(sum_im2 / n - 0.5) <= 3.0 * se_part);

  // Independent parts: E[re im] = 0, var(re im) = 1/4.
  const double se_cross = std::sqrt(0.25 / n);
  REQUIRE(std::abs(sum_cross / n) <= 3.0 * se_cross);
}

TEST_CASE("noise-free projections recover the faded channel", "[channel]") {
  NetworkRealization net = two_by_two_net();
  PilotBook book = cfsg::make_pilot_book(2, 2);
  const int n_ant = 3;
  std::mt19937_64 rng(cfsg::derive_seed(88002, 0));

  const auto g = cfsg::draw_small_scale(net.n_aps, net.n_users, n_ant, rng);
  const auto y = cfsg::training_observation(net, book, g, 1e15, n_ant, rng);

  for (int m = 0; m < net.n_aps; ++m) {
    for (int k = 0; k < net.n_users; ++k) {
      const double a = std::sqrt(net.gain(m, k));
      for (int t = 0; t < n_ant; ++t) {
        const size_t idx = (static_cast<size_t>(m) * net.n_users + k) * n_ant + t;
        REQUIRE(std::abs(y[idx] - a * g[idx]) < 1e-5);
      }
    }
  }
}

TEST_CASE("a shared pilot mixes both channels into one observation",
          "[channel]") {
  NetworkRealization net = two_by_two_net();
  // tau_tr = 1 forces both users onto the same sequence.
  PilotBook book = cfsg::make_pilot_book(2, 1);
  REQUIRE_FALSE(book.orthogonal);

  const int n_ant = 2;
  std::mt19937_64 rng(cfsg::derive_seed(88002, 1));
  const auto g = cfsg::draw_small_scale(net.n_aps, net.n_users, n_ant, rng);
  const auto y = cfsg::training_observation(net, book, g, 1e15, n_ant, rng);

  for (int m = 0; m < net.n_aps; ++m) {
    const double a0 = std::sqrt(net.gain(m, 0));
    const double a1 = std::sqrt(net.gain(m, 1));
    for (int t = 0; t < n_ant; ++t) {
      const size_t i0 = (static_cast<size_t>(m) * 2 + 0) * n_ant + t;
      const size_t i1 = (static_cast<size_t>(m) * 2 + 1) * n_ant + t;
      const cd want = a0 * g[i0 - 0] + a1 * g[i1];
      // Both users see the identical superposition.
      REQUIRE(std::abs(y[i0] - want) < 1e-5);
      REQUIRE(std::abs(y[i0] - y[i1]) < 1e-12);
    }
  }
}

TEST_CASE("projected observations have the advertised variance", "[channel]") {
  NetworkRealization net = two_by_two_net();
  PilotBook book = cfsg::make_pilot_book(2, 2);
  const double rho_tr = 5.0;
  const int n_ant = 5;
  EstimatorStats st = cfsg::estimator_stats(net, book, rho_tr);

  std::mt19937_64 rng(cfsg::derive_seed(88002, 2));
  const int n_draws = 20000;
  std::vector<double> power(static_cast<size_t>(net.n_aps) * net.n_users, 0.0);
  for (int it = 0; it < n_draws; ++it) {
    const auto g = cfsg::draw_small_scale(net.n_aps, net.n_users, n_ant, rng);
    const auto y = cfsg::training_observation(net, book, g, rho_tr, n_ant, rng);
    for (int m = 0; m < net.n_aps; ++m) {
      for (int k = 0; k < net.n_users; ++k) {
        double acc = 0.0;
        for (int t = 0; t < n_ant; ++t) {
          acc += std::norm(y[(static_cast<size_t>(m) * net.n_users + k) * n_ant + t]);
        }
        power[m * net.n_users + k] += acc;
      }
    }
  }

  const double samples = static_cast<double>(n_draws) * n_ant;
  for (int m = 0; m < net.n_aps; ++m) {
    for (int k = 0; k < net.n_users; ++k) {
      const double mean_power = power[m * net.n_users + k] / samples;
      REQUIRE(mean_power == Approx(st.at_d(m, k)).epsilon(0.02));
    }
  }
}

TEST_CASE("estimator statistics satisfy their defining identities",
          "[channel]") {
  NetworkRealization net = two_by_two_net();
  PilotBook book = cfsg::make_pilot_book(2, 2);
  const double rho_tr = 7.0;
  EstimatorStats st = cfsg::estimator_stats(net, book, rho_tr);

  for (int m = 0; m < net.n_aps; ++m) {
    for (int k = 0; k < net.n_users; ++k) {
      // Recompute d from the book and the gain table.
      double d = 1.0 / (book.tau_tr * rho_tr);
      for (int j = 0; j < net.n_users; ++j) {
        d += book.gram_entry(j, k) * net.gain(m, j);
      }
      const double l = net.gain(m, k);
      REQUIRE(st.at_d(m, k) == Approx(d).epsilon(1e-14));
      REQUIRE(st.at_sigma2(m, k) == Approx(l * l / d).epsilon(1e-14));
      // Estimate variance and error variance split l exactly.
      REQUIRE(st.at_sigma2(m, k) + st.sigma2_err[m * net.n_users + k] == l);
      REQUIRE(st.at_c(m, k) == 1.0 / st.at_sigma2(m, k));
      REQUIRE(st.at_sigma2(m, k) > 0.0);
      REQUIRE(st.at_sigma2(m, k) < l);
    }
  }
}

TEST_CASE("estimate quality improves with training power and clean pilots",
          "[channel]") {
  NetworkRealization net = two_by_two_net();
  PilotBook orth = cfsg::make_pilot_book(2, 2);
  PilotBook shared = cfsg::make_pilot_book(2, 1);

  EstimatorStats low = cfsg::estimator_stats(net, orth, 1.0);
  EstimatorStats high = cfsg::estimator_stats(net, orth, 10.0);
  EstimatorStats contaminated = cfsg::estimator_stats(net, shared, 10.0);

  for (int m = 0; m < net.n_aps; ++m) {
    for (int k = 0; k < net.n_users; ++k) {
      REQUIRE(high.at_sigma2(m, k) > low.at_sigma2(m, k));
      REQUIRE(contaminated.at_sigma2(m, k) < high.at_sigma2(m, k));
    }
  }

  REQUIRE_THROWS_AS(cfsg::estimator_stats(net, orth, 0.0),
                    std::invalid_argument);
  PilotBook mismatched = cfsg::make_pilot_book(3, 3);
  REQUIRE_THROWS_AS(cfsg::estimator_stats(net, mismatched, 1.0),
                    std::invalid_argument);
}

TEST_CASE("channel draws expose consistent tensors", "[channel]") {
  NetworkRealization net = two_by_two_net();
  PilotBook book = cfsg::make_pilot_book(2, 2);
  EstimatorStats st = cfsg::estimator_stats(net, book, 3.0);
  const int n_ant = 4;

  std::mt19937_64 rng(cfsg::derive_seed(88003, 0));
  ChannelDraw draw = cfsg::draw_channel(net, book, st, 3.0, n_ant, rng);

  REQUIRE(draw.n_aps == net.n_aps);
  REQUIRE(draw.n_users == net.n_users);
  REQUIRE(draw.n_antennas == n_ant);
  const size_t want = static_cast<size_t>(net.n_aps) * net.n_users * n_ant;
  REQUIRE(draw.g.size() == want);
  REQUIRE(draw.h.size() == want);
  REQUIRE(draw.h_hat.size() == want);
  REQUIRE(draw.d == st.d);
  REQUIRE(draw.sigma2 == st.sigma2);

  for (int m = 0; m < net.n_aps; ++m) {
    for (int k = 0; k < net.n_users; ++k) {
      const double a = std::sqrt(net.gain(m, k));
      for (int t = 0; t < n_ant; ++t) {
        const size_t idx = (static_cast<size_t>(m) * net.n_users + k) * n_ant + t;
        REQUIRE(draw.h[idx] == a * draw.g[idx]);
      }
    }
  }
}

TEST_CASE("the estimate carries its advertised second and fourth moments",
          "[channel]") {
  NetworkRealization net = two_by_two_net();
  PilotBook book = cfsg::make_pilot_book(2, 2);
  const double rho_tr = 3.0;
  EstimatorStats st = cfsg::estimator_stats(net, book, rho_tr);
  const int n_ant = 5;
  const int n_draws = 10000;

  std::mt19937_64 rng(cfsg::derive_seed(88003, 1));

  const size_t links = static_cast<size_t>(net.n_aps) * net.n_users;
  std::vector<double> p2(links, 0.0);  // sum |h_hat|^2
  std::vector<double> p4(links, 0.0);  // sum |h_hat|^4
  // Cross term between estimate and error, accumulated per sample so its
  // spread can be estimated from the data itself.
  double cross_sum = 0.0, cross_sq = 0.0;
  long long cross_n = 0;

  for (int it = 0; it < n_draws; ++it) {
    ChannelDraw draw = cfsg::draw_channel(net, book, st, rho_tr, n_ant, rng);
    for (size_t link = 0; link < links; ++link) {
      for (int t = 0; t < n_ant; ++t) {
        const cd est = draw.h_hat[link * n_ant + t];
        const cd err = draw.h[link * n_ant + t] - est;
        const double a2 = std::norm(est);
        p2[link] += a2;
        p4[link] += a2 * a2;
        const double c = (std::conj(est) * err).real();
        cross_sum += c;
        cross_sq += c * c;
        ++cross_n;
      }
    }
  }

  const double samples = static_cast<double>(n_draws) * n_ant;
  for (size_t link = 0; link < links; ++link) {
    const double s2 = st.sigma2[link];
    REQUIRE(p2[link] / samples == Approx(s2).epsilon(0.03));
    // Complex Gaussian estimate: E|h_hat|^4 = 2 sigma^4.
    REQUIRE(p4[link] / samples == Approx(2.0 * s2 * s2).epsilon(0.05));
  }

  // MMSE orthogonality: the estimate is uncorrelated with its error.
  const double cross_mean = cross_sum / cross_n;
  const double cross_var =
      cross_sq / cross_n - cross_mean * cross_mean;
  const double cross_se = std::sqrt(cross_var / cross_n);
  REQUIRE(std::abs(cross_mean) <= 3.0 * cross_se + 1e-12);
}
