#include "richards.hpp"

#include <cmath>
#include <stdexcept>

namespace kdmhe {

double vg_saturation(const SoilConfig& c, double h) {
  if (h >= 0.0) return 1.0;
  return std::pow(1.0 + std::pow(std::abs(c.alpha * h), c.n_vg), -c.m_vg());
}

double vg_theta(const SoilConfig& c, double h) {
  return c.theta_r + (c.theta_s - c.theta_r) * vg_saturation(c, h);
}

double vg_conductivity(const SoilConfig& c, double h) {
  const double se = vg_saturation(c, h);
  const double m = c.m_vg();
  const double t = 1.0 - std::pow(1.0 - std::pow(se, 1.0 / m), m);
  return c.K_sat * std::pow(se, c.lambda) * t * t;
}

double vg_capacity(const SoilConfig& c, double h) {
  if (h >= 0.0) return 0.0;
  const double m = c.m_vg();
  const double ah = std::abs(c.alpha * h);
  return (c.theta_s - c.theta_r) * c.alpha * c.n_vg * m *
         std::pow(ah, c.n_vg - 1.0) *
         std::pow(1.0 + std::pow(ah, c.n_vg), -m - 1.0);
}

// inverse of theta(h) for theta in (theta_r, theta_s)
static double vg_head_from_theta(const SoilConfig& c, double theta) {
  const double se = (theta - c.theta_r) / (c.theta_s - c.theta_r);
  if (se >= 1.0 || se <= 0.0)
    throw std::runtime_error("step_richards: compartment left the unsaturated range");
  const double m = c.m_vg();
  return -std::pow(std::pow(se, -1.0 / m) - 1.0, 1.0 / c.n_vg) / c.alpha;
}

double irrigation_flux(const SoilConfig& c, long k) {
  const double minutes_per_day = 1440.0;
  const double on_minutes = c.irrigation_hours_per_day * 60.0;
  const double phase = std::fmod((double)k, minutes_per_day);
  return phase < on_minutes ? c.irrigation_m_per_h / 3600.0 : 0.0;
}

Eigen::VectorXd step_richards_tracked(const SoilConfig& c,
                                      const Eigen::VectorXd& h, double qtop,
                                      RichardsFluxes& fluxes) {
  const int nc = c.compartments;
  if (h.size() != nc)
    throw std::invalid_argument("step_richards: head profile has wrong size");
  const double dz = c.dz();
  const double dt = c.sample_period_s / c.substeps;
  Eigen::VectorXd hh = h;
  Eigen::VectorXd theta(nc), K(nc), q(nc + 1);
  double acc_in = 0.0, acc_out = 0.0;
  for (int s = 0; s < c.substeps; ++s) {
    for (int i = 0; i < nc; ++i) {
      if (!(hh[i] < 0.0) || !std::isfinite(hh[i]))
        throw std::runtime_error("step_richards: head became non-negative or non-finite");
      theta[i] = vg_theta(c, hh[i]);
      K[i] = vg_conductivity(c, hh[i]);
    }
    // fluxes positive downward; interior: q = -K (dh/dz - 1), arithmetic-mean
    // inter-node conductivity; bottom: unit-gradient free drainage
    q[0] = qtop;
    for (int i = 1; i < nc; ++i) {
      const double Kf = 0.5 * (K[i - 1] + K[i]);
      q[i] = -Kf * ((hh[i] - hh[i - 1]) / dz - 1.0);
    }
    q[nc] = K[nc - 1];
    // mixed-form update: advance water content, invert back to head
    for (int i = 0; i < nc; ++i) {
      theta[i] += dt * (q[i] - q[i + 1]) / dz;
      hh[i] = vg_head_from_theta(c, theta[i]);
    }
    acc_in += q[0] * dt;
    acc_out += q[nc] * dt;
  }
  fluxes.in = acc_in / c.sample_period_s;
  fluxes.out = acc_out / c.sample_period_s;
  return hh;
}

Eigen::VectorXd step_richards(const SoilConfig& c, const Eigen::VectorXd& h,
                              double qtop) {
  RichardsFluxes fx;
  return step_richards_tracked(c, h, qtop, fx);
}

}  // namespace kdmhe
