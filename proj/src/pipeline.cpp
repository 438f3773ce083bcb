#include "pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "identify.hpp"
#include "predict.hpp"

namespace kdmhe {

namespace {

std::vector<int> measured_coords(const SubsystemTopology& topo) {
  std::vector<int> idx;
  for (int i = 0; i < topo.m; ++i)
    for (int s : topo.sensor_map[i]) idx.push_back(topo.x_off[i] + s);
  return idx;
}

Eigen::MatrixXd scale_measurements(const SubsystemTopology& topo,
                                   const Scaler& state_scaler,
                                   const Eigen::MatrixXd& Y) {
  const std::vector<int> idx = measured_coords(topo);
  Scaler sy = state_scaler.subset(idx);
  return sy.apply_rows(Y);
}

void fill_scaled_views(PreparedData& d) {
  d.Xs = d.state_scaler.apply_rows(d.traj.X);
  d.Us = d.input_scaler.apply_rows(d.traj.U);
  d.Ys = scale_measurements(d.topo, d.state_scaler, d.traj.Y);
}

}  // namespace

PreparedData prepare_data(const RunConfig& cfg, std::uint64_t seed) {
  PreparedData d;
  d.topo = make_topology(cfg);
  d.traj = simulate_process(cfg, seed);
  d.train_count = cfg.splits.train;
  d.val_start = cfg.splits.train;
  d.val_count = cfg.splits.validate;
  d.est_start = cfg.splits.train + cfg.splits.validate;
  d.est_count = cfg.splits.test;
  d.state_scaler = Scaler::fit(d.traj.X.topRows(d.train_count));
  d.input_scaler = Scaler::fit(d.traj.U.topRows(d.train_count));
  fill_scaled_views(d);
  return d;
}

PreparedData wrap_training(const RunConfig& cfg, Trajectory traj) {
  PreparedData d;
  d.topo = make_topology(cfg);
  d.traj = std::move(traj);
  d.train_count = (int)d.traj.X.rows();
  d.val_start = d.est_start = 0;
  d.val_count = d.est_count = d.train_count;
  d.state_scaler = Scaler::fit(d.traj.X);
  d.input_scaler = Scaler::fit(d.traj.U);
  fill_scaled_views(d);
  return d;
}

PreparedData rescale_with(const ModelContainer& mc, Trajectory traj) {
  PreparedData d;
  d.topo = mc.topo;
  d.traj = std::move(traj);
  d.train_count = 0;
  d.val_start = d.est_start = 0;
  d.val_count = d.est_count = (int)d.traj.X.rows();
  d.state_scaler = mc.state_scaler;
  d.input_scaler = mc.input_scaler;
  fill_scaled_views(d);
  return d;
}

ModelContainer identify_model(const RunConfig& cfg, const PreparedData& d,
                              int threads, double rtol_override) {
  const double rtol = rtol_override > 0 ? rtol_override : cfg.identify_rtol;
  SnapshotSet snaps = build_snapshots(d.Xs.topRows(d.train_count),
                                      d.Us.topRows(d.train_count), d.topo);
  ModelContainer mc;
  mc.topo = d.topo;
  mc.state_scaler = d.state_scaler;
  mc.input_scaler = d.input_scaler;
  mc.state_bases = state_basis_names(cfg);
  mc.input_bases = input_basis_names(cfg);
  mc.models = identify_all(snaps, d.topo, mc.state_dicts(), mc.input_dicts(),
                           rtol, threads, &mc.diagnostics);
  return mc;
}

Eigen::MatrixXd lift_input_rows(const SubsystemTopology& topo,
                                const std::vector<LiftingDictionary>& input_dicts,
                                const Eigen::MatrixXd& Us) {
  Eigen::MatrixXd Ul(Us.rows(), topo.nu_total());
  for (Eigen::Index k = 0; k < Us.rows(); ++k)
    Ul.row(k) =
        lift_global_input(topo, input_dicts, Us.row(k).transpose()).transpose();
  return Ul;
}

Eigen::VectorXd validation_rmse(const PreparedData& d,
                                const ModelContainer& mc,
                                Eigen::MatrixXd* prediction) {
  if (d.val_count < 2)
    throw std::invalid_argument("validation_rmse: empty validation window");
  GlobalModel gm = assemble_global(mc.models, mc.topo);
  const int steps = d.val_count - 1;
  Eigen::MatrixXd Ul = lift_input_rows(
      mc.topo, mc.input_dicts(), d.Us.middleRows(d.val_start, d.val_count));
  Eigen::MatrixXd Xp =
      open_loop_predict(gm, mc.topo, mc.state_dicts(),
                        d.Xs.row(d.val_start).transpose(), Ul, steps);
  if (prediction) *prediction = Xp;
  Eigen::MatrixXd err = Xp - d.Xs.middleRows(d.val_start, d.val_count);
  return (err.array().square().colwise().mean()).sqrt().matrix().transpose();
}

EstimatorConfig build_estimator_config(const RunConfig& cfg,
                                       const SubsystemTopology& model_topo,
                                       const Scaler& state_scaler) {
  EstimatorConfig ec;
  ec.N = cfg.N;
  for (int i = 0; i < model_topo.m; ++i) {
    ec.P0.push_back(cfg.p0 *
                    Eigen::MatrixXd::Identity(model_topo.nz[i], model_topo.nz[i]));
    ec.Q.push_back(cfg.q *
                   Eigen::MatrixXd::Identity(model_topo.nz[i], model_topo.nz[i]));
  }
  ec.r_channel = cfg.r;
  const int nx = model_topo.nx_total();
  ec.lb.resize(nx);
  ec.ub.resize(nx);
  for (int c = 0; c < nx; ++c) {
    const double rg = state_scaler.hi(c) - state_scaler.lo(c);
    ec.lb(c) = (cfg.lb(c) - state_scaler.lo(c)) / rg;  // +/-inf pass through
    ec.ub(c) = (cfg.ub(c) - state_scaler.lo(c)) / rg;
  }
  return ec;
}

namespace {

EstimateMetrics finish_metrics(const PreparedData& d, const Scaler& sX,
                               int N, EstimateResult res) {
  EstimateMetrics m;
  m.Xhat_scaled = res.X;
  m.Xhat.resize(res.X.rows(), res.X.cols());
  for (Eigen::Index k = 0; k < res.X.rows(); ++k)
    m.Xhat.row(k) = sX.unscale(res.X.row(k).transpose()).transpose();
  const Eigen::MatrixXd truth = d.Xs.middleRows(d.est_start, d.est_count);
  Eigen::MatrixXd err = m.Xhat_scaled - truth;
  m.error_norm = err.rowwise().norm();
  const int skip = N + 1;
  if (err.rows() > skip) {
    m.scaled_rmse =
        std::sqrt(err.bottomRows(err.rows() - skip).array().square().mean());
  }
  m.result = std::move(res);
  return m;
}

}  // namespace

EstimateMetrics estimate_koopman(const RunConfig& cfg, const PreparedData& d,
                                 const ModelContainer& mc, int threads) {
  GlobalModel gm = assemble_global(mc.models, mc.topo);
  EstimatorConfig ec = build_estimator_config(cfg, mc.topo, d.state_scaler);
  Eigen::MatrixXd Ys = d.Ys.middleRows(d.est_start, d.est_count);
  Eigen::MatrixXd Ul = lift_input_rows(
      mc.topo, mc.input_dicts(), d.Us.middleRows(d.est_start, d.est_count));
  Eigen::VectorXd x0bar_s = d.state_scaler.apply(cfg.x0bar);
  Eigen::VectorXd z0bar = lift_global(mc.topo, mc.state_dicts(), x0bar_s);
  EstimateResult res = run_dmhe(gm, mc.topo, ec, Ys, Ul, z0bar, threads);
  return finish_metrics(d, d.state_scaler, cfg.N, std::move(res));
}

EstimateMetrics estimate_baseline(const RunConfig& cfg, const PreparedData& d,
                                  int threads) {
  if (cfg.process != "cstr")
    throw std::invalid_argument(
        "estimate_baseline: linearized reference exists for the reactor "
        "network only");
  SubsystemTopology tb = d.topo;
  tb.nz = tb.nx;
  tb.nu = {1, 1, 1, 1};
  tb.build_offsets();
  GlobalModel gm = linearized_baseline(cfg.cstr, tb, d.state_scaler,
                                       d.input_scaler);
  EstimatorConfig ec = build_estimator_config(cfg, tb, d.state_scaler);
  Eigen::MatrixXd Ys = d.Ys.middleRows(d.est_start, d.est_count);
  Eigen::MatrixXd Ul = d.Us.middleRows(d.est_start, d.est_count);
  Eigen::VectorXd z0bar = d.state_scaler.apply(cfg.x0bar);
  EstimateResult res = run_dmhe(gm, tb, ec, Ys, Ul, z0bar, threads);
  return finish_metrics(d, d.state_scaler, cfg.N, std::move(res));
}

}  // namespace kdmhe
