#pragma once

#include <random>
#include <vector>

namespace cfsg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Deployment region: a square of the given side, optionally wrapped into a
// torus so the typical user sees no boundary effects.
struct AreaSpec {
  double side_km = 4.0;
  bool wrap = true;
};

// One sampled deployment: AP positions from the Poisson process, the K user
// drops, and the derived distance / large-scale gain tables. User 0 plays the
// role of the typical user; on the (translation-invariant) torus its
// statistics represent the whole network, so no origin pinning is needed.
struct NetworkRealization {
  AreaSpec area;
  int n_aps = 0;    // M, realized AP count
  int n_users = 0;  // K
  std::vector<Point> ap_positions;
  std::vector<Point> user_positions;
  std::vector<double> distance_km;  // M x K, row-major [m * K + k]
  std::vector<double> path_loss;    // M x K, values in (0, 1]
  int resample_count = 0;  // empty Poisson draws rejected before this one

  double dist(int m, int k) const { return distance_km[m * n_users + k]; }
  double gain(int m, int k) const { return path_loss[m * n_users + k]; }
};

// Shortest distance between a and b; on the torus this is the minimum over
// the nine periodic images, computed per axis.
double torus_distance(const Point& a, const Point& b, const AreaSpec& area);

// Bounded power-law gain l(r) = min(1, r^-alpha), breakpoint at r = 1 km.
double path_loss(double r_km, double alpha);

// Closed form of the plane integral of l(|x|)^v:
//   integral = v*alpha*pi / (v*alpha - 2),  requires v*alpha > 2.
double path_loss_spatial_moment(double v, double alpha);

std::vector<Point> sample_uniform_points(int n, double side_km,
                                         std::mt19937_64& rng);

// Draws M ~ Poisson(lambda_ap * side^2) APs (resampling M = 0 and counting
// the rejections) plus n_users uniform user drops, then fills the distance
// and path-loss tables. Pass fixed_m >= 1 for a realization conditioned on
// the AP count; conditioned on M, PPP points are i.i.d. uniform.
NetworkRealization sample_ppp(double lambda_ap, const AreaSpec& area,
                              int n_users, double alpha, std::mt19937_64& rng,
                              int fixed_m = 0);

// Rebuilds the distance/path-loss tables for given positions (used by sweeps
// that vary alpha on common topologies, and by tests with synthetic layouts).
void fill_link_tables(NetworkRealization& net, double alpha);

}  // namespace cfsg
