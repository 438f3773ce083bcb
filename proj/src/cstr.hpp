#pragma once

#include <Eigen/Dense>
#include <array>

namespace kdmhe {

// Four-reactor CSTR network with recycle (reactors 1<->2 chain 3,4, recycle
// 4->1 and 2->1); three parallel first-order reactions per reactor.
// States: (T1, CA1, ..., T4, CA4); inputs: heat duties Q1..Q4 (kJ/h).
struct CstrConfig {
  Eigen::Vector4d V{1.0, 0.5, 1.0, 1.0};                  // m^3
  double F01 = 5.0, F02 = 2.0, F03 = 3.0, F04 = 2.0;      // feed flows m^3/h
  double Fr1 = 1.0, Fr2 = 1.0;                            // recycle flows
  Eigen::Vector3d k0{9.9605829286760387e9, 2.9860008107707047e9,
                     9.9485501809535861e8};               // 1/h
  Eigen::Vector3d EoR{8000.0, 8500.0, 9000.0};            // K
  Eigen::Vector3d dH{-2.0e4, -2.08e4, -2.16e4};           // kJ/kmol
  double rhocp = 231.0;                                   // kJ/(m^3 K)
  Eigen::Vector4d T0{298.40908077903487, 263.2476411067356,
                     274.11457441832096, 272.85139473085775};  // inlet K
  Eigen::Vector4d CA0{3.1242118451409513, 2.0392437080836543,
                      3.037207385654078, 4.059322260665425};   // kmol/m^3
  Eigen::Vector4d Q_min{0.8e4, 1.8e4, 2.3e4, 0.8e4};      // kJ/h
  Eigen::Vector4d Q_max{1.2e4, 2.2e4, 2.7e4, 1.2e4};
  double input_hold_h = 1.5;                              // h
  double dt_h = 0.025;                                    // sampling period h
  int rk4_substeps = 10;

  double F1() const { return F01 + Fr1 + Fr2; }  // out of reactor 1
  double F2() const { return F1() + F02; }       // out of reactor 2
  double F3() const { return F2() - Fr1 + F03; } // out of reactor 3
};

Eigen::VectorXd cstr_rhs(const CstrConfig& c, const Eigen::VectorXd& x,
                         const Eigen::Vector4d& Q);

// One sampling period via fixed-step RK4; throws on non-finite state.
Eigen::VectorXd step_cstr(const CstrConfig& c, const Eigen::VectorXd& x,
                          const Eigen::Vector4d& Q);

}  // namespace kdmhe
