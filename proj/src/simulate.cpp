#include "simulate.hpp"

#include <random>
#include <stdexcept>

namespace kdmhe {

namespace {
Eigen::VectorXd truncated_gaussian(std::mt19937_64& rng,
                                   const Eigen::VectorXd& sigma, double mult) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(sigma.size());
  for (int i = 0; i < v.size(); ++i) {
    double g = gauss(rng) * sigma[i];
    const double b = mult * sigma[i];
    v[i] = std::clamp(g, -b, b);
  }
  return v;
}
}  // namespace

Eigen::MatrixXd generate_inputs(const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, int horizon,
                                int hold_samples, std::uint64_t seed) {
  if (!lo.allFinite() || !hi.allFinite())
    throw std::invalid_argument("generate_inputs: bounds must be finite");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd U(horizon, lo.size());
  Eigen::VectorXd level(lo.size());
  for (int k = 0; k < horizon; ++k) {
    if (k % hold_samples == 0)
      for (int c = 0; c < lo.size(); ++c)
        level[c] = lo[c] + unif(rng) * (hi[c] - lo[c]);
    U.row(k) = level;
  }
  return U;
}

Eigen::VectorXd measure(const SubsystemTopology& topo, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(topo.ny_total());
  for (int i = 0; i < topo.m; ++i)
    for (int s = 0; s < topo.ny[i]; ++s)
      y[topo.y_off[i] + s] = x[topo.x_off[i] + topo.sensor_map[i][s]];
  return y;
}

Trajectory simulate_cstr(const CstrConfig& config, const SubsystemTopology& topo,
                         const Eigen::VectorXd& x0, int nsteps,
                         const NoiseSpec& noise) {
  const int n = nsteps + 1;
  const int hold = (int)std::lround(config.input_hold_h / config.dt_h);
  // one RNG per noise source so input, disturbance, and measurement
  // sequences are individually reproducible
  std::mt19937_64 rng_w(noise.seed * 3 + 1), rng_v(noise.seed * 3 + 2);
  Eigen::MatrixXd U = generate_inputs(config.Q_min, config.Q_max, n, hold,
                                      noise.seed * 3);
  Trajectory tr;
  tr.seed = noise.seed;
  tr.t.resize(n);
  tr.X.resize(n, 8);
  tr.U = U;
  tr.Y.resize(n, topo.ny_total());
  Eigen::VectorXd x = x0;
  for (int k = 0; k < n; ++k) {
    tr.t[k] = k * config.dt_h;
    tr.X.row(k) = x;
    tr.Y.row(k) = measure(topo, x) +
                  truncated_gaussian(rng_v, noise.sigma_v, noise.truncation);
    x = step_cstr(config, x, U.row(k));
    x += truncated_gaussian(rng_w, noise.sigma_w, noise.truncation);
  }
  return tr;
}

Trajectory simulate_agro(const SoilConfig& config, const SubsystemTopology& topo,
                         const Eigen::VectorXd& h0, int settle_steps, int nsteps,
                         const NoiseSpec& noise, double lo_clip, double hi_clip) {
  std::mt19937_64 rng_w(noise.seed * 3 + 1), rng_v(noise.seed * 3 + 2);
  Eigen::VectorXd h = h0;
  for (long k = 0; k < settle_steps; ++k)
    h = step_richards(config, h, irrigation_flux(config, k));

  const int n = nsteps + 1;
  Trajectory tr;
  tr.seed = noise.seed;
  tr.t.resize(n);
  tr.X.resize(n, config.compartments);
  tr.U.resize(n, 1);
  tr.Y.resize(n, topo.ny_total());
  for (int k = 0; k < n; ++k) {
    tr.t[k] = k;
    tr.X.row(k) = h;
    tr.Y.row(k) = measure(topo, h) +
                  truncated_gaussian(rng_v, noise.sigma_v, noise.truncation);
    const double q = irrigation_flux(config, k);
    tr.U(k, 0) = q;
    h = step_richards(config, h, q);
    h += truncated_gaussian(rng_w, noise.sigma_w, noise.truncation);
    h = h.cwiseMax(lo_clip).cwiseMin(hi_clip);
  }
  return tr;
}

}  // namespace kdmhe
