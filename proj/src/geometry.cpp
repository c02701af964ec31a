#include "cfsg/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace cfsg {

double torus_distance(const Point& a, const Point& b, const AreaSpec& area) {
  double dx = std::fabs(a.x - b.x);
  double dy = std::fabs(a.y - b.y);
  if (area.wrap) {
    // The squared norm separates per axis, so the minimum over the nine
    // translated images reduces to the per-axis minimum image.
    dx = std::min(dx, area.side_km - dx);
    dy = std::min(dy, area.side_km - dy);
  }
  return std::hypot(dx, dy);
}

double path_loss(double r_km, double alpha) {
  if (alpha <= 2.0) {
    throw std::invalid_argument(
        "path_loss: alpha must exceed 2 (spatial moments diverge otherwise)");
  }
  if (r_km <= 1.0) return 1.0;
  return std::pow(r_km, -alpha);
}

double path_loss_spatial_moment(double v, double alpha) {
  const double va = v * alpha;
  if (va <= 2.0) {
    throw std::invalid_argument(
        "path_loss_spatial_moment: v*alpha must exceed 2, integral diverges");
  }
  return va * M_PI / (va - 2.0);
}

std::vector<Point> sample_uniform_points(int n, double side_km,
                                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, side_km);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    p.x = u(rng);
    p.y = u(rng);
  }
  return pts;
}

NetworkRealization sample_ppp(double lambda_ap, const AreaSpec& area,
                              int n_users, double alpha, std::mt19937_64& rng,
                              int fixed_m) {
  if (lambda_ap <= 0.0) {
    throw std::invalid_argument("sample_ppp: lambda_ap must be positive");
  }
  if (area.side_km <= 0.0) {
    throw std::invalid_argument("sample_ppp: area side must be positive");
  }
  if (n_users < 1) {
    throw std::invalid_argument("sample_ppp: need at least one user");
  }

  NetworkRealization net;
  net.area = area;
  net.n_users = n_users;

  if (fixed_m >= 1) {
    net.n_aps = fixed_m;
  } else {
    std::poisson_distribution<int> pois(lambda_ap * area.side_km *
                                        area.side_km);
    int m = pois(rng);
    while (m == 0) {
      // An empty deployment has no defined downlink; reject and redraw.
      ++net.resample_count;
      m = pois(rng);
    }
    net.n_aps = m;
  }

  net.ap_positions = sample_uniform_points(net.n_aps, area.side_km, rng);
  net.user_positions = sample_uniform_points(n_users, area.side_km, rng);
  fill_link_tables(net, alpha);
  return net;
}

void fill_link_tables(NetworkRealization& net, double alpha) {
  const int m_count = net.n_aps;
  const int k_count = net.n_users;
  net.distance_km.resize(static_cast<std::size_t>(m_count) * k_count);
  net.path_loss.resize(net.distance_km.size());
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const double r =
          torus_distance(net.ap_positions[m], net.user_positions[k], net.area);
      net.distance_km[m * k_count + k] = r;
      net.path_loss[m * k_count + k] = path_loss(r, alpha);
    }
  }
}

}  // namespace cfsg
