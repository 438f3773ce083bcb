#pragma once

#include <Eigen/Dense>

namespace kdmhe {

// 1-D Richards equation on a vertical loam column, explicit finite
// differences. z is measured downward from the surface; states are the
// capillary pressure heads (m, negative = unsaturated) of the compartments.
struct SoilConfig {
  double depth_m = 1.2;
  int compartments = 96;
  double theta_r = 0.078;
  double theta_s = 0.43;
  double alpha = 3.6;        // 1/m
  double n_vg = 1.56;
  double lambda = 0.5;
  double K_sat = 2.88e-6;    // m/s
  double irrigation_m_per_h = 1.944e-3;
  double irrigation_hours_per_day = 8.0;
  double sample_period_s = 60.0;
  int substeps = 120;

  double dz() const { return depth_m / compartments; }
  double m_vg() const { return 1.0 - 1.0 / n_vg; }
};

double vg_saturation(const SoilConfig& c, double h);   // S_e(h)
double vg_theta(const SoilConfig& c, double h);        // water content
double vg_conductivity(const SoilConfig& c, double h); // K(h), Mualem
double vg_capacity(const SoilConfig& c, double h);     // C(h) = dtheta/dh

// Surface flux (m/s, downward positive) at sample index k (one per minute).
double irrigation_flux(const SoilConfig& c, long k);

// One sample period of explicit Euler substeps; qtop is the prescribed
// surface flux, bottom boundary is unit-gradient free drainage.
// Throws on saturation (h >= 0) or non-finite heads.
Eigen::VectorXd step_richards(const SoilConfig& c, const Eigen::VectorXd& h,
                              double qtop);

// Boundary fluxes of the last step, for the water-balance oracle.
struct RichardsFluxes {
  double in;   // surface flux (m/s)
  double out;  // drainage flux (m/s)
};
Eigen::VectorXd step_richards_tracked(const SoilConfig& c,
                                      const Eigen::VectorXd& h, double qtop,
                                      RichardsFluxes& fluxes);

}  // namespace kdmhe
