#include "dmhe.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qp.hpp"

namespace kdmhe {

namespace {

struct CovTracker {
  double min_eig = std::numeric_limits<double>::infinity();
  double max_asym = 0.0;

  void record(const Eigen::MatrixXd& P_raw, const Eigen::MatrixXd& P_sym) {
    max_asym = std::max(max_asym,
                        (P_raw - P_raw.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P_sym,
                                                      Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
};

// Constraint rows for subsystem i: first nx coordinates of each predicted
// z_i block across the N+1 window slots, kept only where a bound is finite.
struct BoundRows {
  std::vector<int> rows;       // row indices into the (N+1)*nz_total stack
  Eigen::VectorXd lb, ub;      // matching bounds
};

BoundRows bound_rows(const SubsystemTopology& topo, int i, int N,
                     const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
  BoundRows br;
  const int nzt = topo.nz_total();
  std::vector<double> lo, hi;
  for (int w = 0; w <= N; ++w)
    for (int c = 0; c < topo.nx[i]; ++c) {
      const int gc = topo.x_off[i] + c;
      if (std::isfinite(lb(gc)) || std::isfinite(ub(gc))) {
        br.rows.push_back(w * nzt + topo.z_off[i] + c);
        lo.push_back(lb(gc));
        hi.push_back(ub(gc));
      }
    }
  br.lb = Eigen::Map<Eigen::VectorXd>(lo.data(), (Eigen::Index)lo.size());
  br.ub = Eigen::Map<Eigen::VectorXd>(hi.data(), (Eigen::Index)hi.size());
  return br;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& M,
                            const std::vector<int>& rows) {
  Eigen::MatrixXd R(rows.size(), M.cols());
  for (size_t r = 0; r < rows.size(); ++r) R.row((Eigen::Index)r) = M.row(rows[r]);
  return R;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v,
                            const std::vector<int>& rows) {
  Eigen::VectorXd r(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) r((Eigen::Index)k) = v[rows[k]];
  return r;
}

void check_cfg(const SubsystemTopology& topo, const EstimatorConfig& cfg) {
  if (cfg.N < 1) throw std::invalid_argument("estimator: N must be >= 1");
  if ((int)cfg.P0.size() != topo.m || (int)cfg.Q.size() != topo.m)
    throw std::invalid_argument("estimator: P0/Q must have one block per subsystem");
  if (cfg.r_channel <= 0.0)
    throw std::invalid_argument("estimator: measurement weight must be positive");
  if (cfg.lb.size() != topo.nx_total() || cfg.ub.size() != topo.nx_total())
    throw std::invalid_argument("estimator: bound vectors must cover all original states");
}

void run_parallel(int m, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || m <= 1) {
    for (int i = 0; i < m; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < m; i = next.fetch_add(1)) body(i);
  };
  std::vector<std::thread> pool;
  const int n = std::min(threads, m);
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

Eigen::MatrixXd covariance_update(const GlobalModel& gm,
                                  const SubsystemTopology& topo, int i,
                                  const Eigen::MatrixXd& Pi,
                                  const Eigen::MatrixXd& Qi,
                                  const Eigen::MatrixXd& R,
                                  Eigen::MatrixXd* L_out) {
  const int zo = topo.z_off[i], nzi = topo.nz[i];
  const Eigen::MatrixXd Aci = gm.A.middleCols(zo, nzi);
  const Eigen::MatrixXd Cci = gm.C.middleCols(zo, nzi);
  const Eigen::MatrixXd Aii = gm.A.block(zo, zo, nzi, nzi);
  const Eigen::MatrixXd CA = gm.C * Aci;
  const Eigen::MatrixXd T1 = CA * Pi * Aii.transpose() + Cci * Qi;
  Eigen::MatrixXd S =
      CA * Pi * CA.transpose() + Cci * Qi * Cci.transpose() + R;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible())
    throw std::runtime_error("covariance_update: innovation matrix singular");
  const Eigen::MatrixXd L = lu.solve(T1).transpose();  // T1' S^{-1}
  if (L_out) *L_out = L;
  Eigen::MatrixXd Pn = Aii * Pi * Aii.transpose() + Qi - L * T1;
  return Pn;
}

Eigen::VectorXd propagate_prior(const GlobalModel& gm,
                                const SubsystemTopology& topo, int i,
                                const Eigen::VectorXd& z_prev,
                                const Eigen::VectorXd& u_prev_lifted,
                                const Eigen::VectorXd& w0_i) {
  const int zo = topo.z_off[i], nzi = topo.nz[i];
  return gm.A.middleRows(zo, nzi) * z_prev +
         gm.B.middleRows(zo, nzi) * u_prev_lifted + w0_i;
}

EstimateResult run_centralized(const GlobalModel& gm,
                               const SubsystemTopology& topo,
                               const EstimatorConfig& cfg,
                               const Eigen::MatrixXd& Ys,
                               const Eigen::MatrixXd& Ul,
                               const Eigen::VectorXd& z0bar) {
  check_cfg(topo, cfg);
  const int N = cfg.N;
  const int nzt = topo.nz_total(), ny = topo.ny_total();
  const int T = (int)Ys.rows();
  StackedMatrices st = build_stacked(gm, N);

  Eigen::MatrixXd Pg = Eigen::MatrixXd::Zero(nzt, nzt);
  Eigen::MatrixXd Qg = Eigen::MatrixXd::Zero(nzt, nzt);
  for (int i = 0; i < topo.m; ++i) {
    Pg.block(topo.z_off[i], topo.z_off[i], topo.nz[i], topo.nz[i]) = cfg.P0[i];
    Qg.block(topo.z_off[i], topo.z_off[i], topo.nz[i], topo.nz[i]) = cfg.Q[i];
  }
  const Eigen::MatrixXd Rg = cfg.r_channel * Eigen::MatrixXd::Identity(ny, ny);
  const Eigen::MatrixXd QgI = Qg.inverse();

  EstimateResult res;
  res.Z.resize(T, nzt);
  res.X.resize(T, topo.nx_total());
  CovTracker cov;

  // Warm-up: open-loop rollout of the initial guess.
  std::vector<Eigen::VectorXd> Zol{z0bar};
  for (int k = 0; k < N; ++k)
    Zol.push_back(gm.A * Zol.back() + gm.B * Ul.row(k).transpose());
  for (int k = 0; k < std::min(N + 1, T); ++k) res.Z.row(k) = Zol[k].transpose();

  std::vector<Eigen::VectorXd> win = Zol;
  Eigen::VectorXd wstack = Eigen::VectorXd::Zero(N * nzt);
  std::vector<Eigen::MatrixXd> Phist{Pg};

  BoundRows br = bound_rows(topo, 0, N, cfg.lb, cfg.ub);
  // Centralized bounds span every subsystem's constrained coordinates.
  br.rows.clear();
  std::vector<double> lo, hi;
  for (int w = 0; w <= N; ++w)
    for (int i = 0; i < topo.m; ++i)
      for (int c = 0; c < topo.nx[i]; ++c) {
        const int gc = topo.x_off[i] + c;
        if (std::isfinite(cfg.lb(gc)) || std::isfinite(cfg.ub(gc))) {
          br.rows.push_back(w * nzt + topo.z_off[i] + c);
          lo.push_back(cfg.lb(gc));
          hi.push_back(cfg.ub(gc));
        }
      }
  br.lb = Eigen::Map<Eigen::VectorXd>(lo.data(), (Eigen::Index)lo.size());
  br.ub = Eigen::Map<Eigen::VectorXd>(hi.data(), (Eigen::Index)hi.size());
  const bool bounded = !br.rows.empty();

  const Eigen::MatrixXd M =
      (Eigen::MatrixXd(st.O.rows(), nzt + N * nzt) << st.O, st.Gam).finished();
  Eigen::MatrixXd Hq0 = M.transpose() * M / cfg.r_channel;
  for (int w = 0; w < N; ++w)
    Hq0.block(nzt + w * nzt, nzt + w * nzt, nzt, nzt) += QgI;
  Eigen::MatrixXd EJ;
  if (bounded)
    EJ = select_rows(
        (Eigen::MatrixXd(st.G.rows(), nzt + N * nzt) << st.G, st.J).finished(),
        br.rows);

  ActiveSet warm;
  for (int k = 1; k < T; ++k) {
    // Riccati covariance recursion, predict then update so the recursion
    // coincides with the distributed one when m = 1.
    const Eigen::MatrixXd& Pk = Phist.back();
    Eigen::MatrixXd Mp = gm.A * Pk * gm.A.transpose() + Qg;
    Eigen::MatrixXd S = Rg + gm.C * Mp * gm.C.transpose();
    Eigen::MatrixXd Pn =
        Mp - Mp * gm.C.transpose() * S.ldlt().solve(gm.C * Mp);
    Eigen::MatrixXd Psym = 0.5 * (Pn + Pn.transpose());
    cov.record(Pn, Psym);
    Phist.push_back(Psym);
    if (k < N + 1) continue;

    Eigen::VectorXd zbar = gm.A * win[0] +
                           gm.B * Ul.row(k - N - 1).transpose() +
                           wstack.head(nzt);
    Eigen::VectorXd ystack((N + 1) * ny), ustack(N * (int)Ul.cols());
    for (int w = 0; w <= N; ++w) ystack.segment(w * ny, ny) = Ys.row(k - N + w);
    for (int w = 0; w < N; ++w)
      ustack.segment(w * Ul.cols(), Ul.cols()) = Ul.row(k - N + w);

    const auto t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXd Hq = Hq0;
    const Eigen::MatrixXd PaI = Phist[(size_t)(k - N)].inverse();
    Hq.topLeftCorner(nzt, nzt) += PaI;
    Eigen::VectorXd r0 = ystack - st.Lam * ustack;
    Eigen::VectorXd gq = -M.transpose() * r0 / cfg.r_channel;
    gq.head(nzt) -= PaI * zbar;

    Eigen::VectorXd th;
    if (!bounded) {
      th = Hq.ldlt().solve(-gq);
    } else {
      QuadraticProgram qp{Hq, gq, EJ,
                          select_rows(Eigen::VectorXd(st.H * ustack), br.rows),
                          br.lb, br.ub};
      QpSolution sol = solve_qp(qp, &warm);
      warm = sol.active;
      th = sol.theta;
    }
    res.mean_solve_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    ++res.solve_count;
    if (!th.allFinite())
      throw std::runtime_error("centralized mhe: solve failed at instant " +
                               std::to_string(k));

    Eigen::VectorXd full =
        st.G * th.head(nzt) + st.H * ustack + st.J * th.tail(N * nzt);
    for (int w = 0; w <= N; ++w) win[w] = full.segment(w * nzt, nzt);
    wstack = th.tail(N * nzt);
    res.Z.row(k) = win[N].transpose();
  }
  for (int k = 0; k < T; ++k)
    res.X.row(k) = reconstruct_state(topo, res.Z.row(k).transpose()).transpose();
  if (res.solve_count > 0) res.mean_solve_seconds /= res.solve_count;
  res.min_cov_eigenvalue = cov.min_eig;
  res.max_cov_asymmetry = cov.max_asym;
  if (bounded) {
    for (int k = N + 1; k < T; ++k)
      for (int c = 0; c < topo.nx_total(); ++c) {
        double v = 0.0;
        if (std::isfinite(cfg.lb(c))) v = std::max(v, cfg.lb(c) - res.X(k, c));
        if (std::isfinite(cfg.ub(c))) v = std::max(v, res.X(k, c) - cfg.ub(c));
        res.max_bound_violation = std::max(res.max_bound_violation, v);
      }
  }
  return res;
}

EstimateResult run_dmhe(const GlobalModel& gm, const SubsystemTopology& topo,
                        const EstimatorConfig& cfg, const Eigen::MatrixXd& Ys,
                        const Eigen::MatrixXd& Ul,
                        const Eigen::VectorXd& z0bar, int threads) {
  check_cfg(topo, cfg);
  const int N = cfg.N, m = topo.m;
  const int nzt = topo.nz_total(), ny = topo.ny_total();
  const int nuc = (int)Ul.cols();
  const int T = (int)Ys.rows();
  StackedMatrices st = build_stacked(gm, N);

  EstimateResult res;
  res.Z.resize(T, nzt);
  res.X.resize(T, topo.nx_total());
  std::vector<CovTracker> cov(m);

  // Per-estimator constant pieces.
  std::vector<Eigen::MatrixXd> Osub(m), Gsub(m), Jsub(m), Msub(m), Hq0(m),
      EJ(m);
  std::vector<BoundRows> br(m);
  std::vector<Eigen::MatrixXd> QI(m);
  for (int i = 0; i < m; ++i) {
    Osub[i] = st.O.middleCols(topo.z_off[i], topo.nz[i]);
    Gsub[i] = st.G.middleCols(topo.z_off[i], topo.nz[i]);
    Jsub[i] = select_columns_z_windows(st.J, topo, i, N);
    Eigen::MatrixXd Gami = select_columns_z_windows(st.Gam, topo, i, N);
    Msub[i].resize(st.O.rows(), topo.nz[i] + N * topo.nz[i]);
    Msub[i] << Osub[i], Gami;
    QI[i] = cfg.Q[i].inverse();
    Hq0[i] = Msub[i].transpose() * Msub[i] / cfg.r_channel;
    const int nzi = topo.nz[i];
    for (int w = 0; w < N; ++w)
      Hq0[i].block(nzi + w * nzi, nzi + w * nzi, nzi, nzi) += QI[i];
    br[i] = bound_rows(topo, i, N, cfg.lb, cfg.ub);
    if (!br[i].rows.empty()) {
      Eigen::MatrixXd GJ(st.G.rows(), nzi + N * nzi);
      GJ << Gsub[i], Jsub[i];
      EJ[i] = select_rows(GJ, br[i].rows);
    }
  }

  const Eigen::MatrixXd Rg = cfg.r_channel * Eigen::MatrixXd::Identity(ny, ny);

  // Warm-up: open-loop rollout of the initial guess.
  std::vector<Eigen::VectorXd> Zol{z0bar};
  for (int k = 0; k < N; ++k)
    Zol.push_back(gm.A * Zol.back() + gm.B * Ul.row(k).transpose());
  for (int k = 0; k < std::min(N + 1, T); ++k) res.Z.row(k) = Zol[k].transpose();

  // Window buffers: zwin[i][d] for d = 0..N, wwin[i] rows = window slots.
  std::vector<std::vector<Eigen::VectorXd>> zwin(m);
  std::vector<Eigen::MatrixXd> wwin(m);
  std::vector<std::vector<Eigen::MatrixXd>> Phist(m);
  for (int i = 0; i < m; ++i) {
    for (int d = 0; d <= N; ++d)
      zwin[i].push_back(Zol[d].segment(topo.z_off[i], topo.nz[i]));
    wwin[i] = Eigen::MatrixXd::Zero(N, topo.nz[i]);
    Phist[i].push_back(cfg.P0[i]);
  }

  std::vector<ActiveSet> warm(m);
  std::vector<double> solve_seconds(m, 0.0);
  std::vector<long> solves(m, 0);
  std::vector<std::string> failure(m);

  for (int k = 1; k < T; ++k) {
    for (int i = 0; i < m; ++i) {
      Eigen::MatrixXd Pn =
          covariance_update(gm, topo, i, Phist[i].back(), cfg.Q[i], Rg);
      Eigen::MatrixXd Psym = 0.5 * (Pn + Pn.transpose());
      cov[i].record(Pn, Psym);
      Phist[i].push_back(Psym);
    }
    if (k < N + 1) continue;

    // Prior exchange barrier: every prior is computed from the previous
    // instant's windows before any local solve starts.
    Eigen::VectorXd zprev(nzt);
    for (int j = 0; j < m; ++j)
      zprev.segment(topo.z_off[j], topo.nz[j]) = zwin[j][0];
    const Eigen::VectorXd uprev = Ul.row(k - N - 1).transpose();
    Eigen::VectorXd zbar_full(nzt);
    for (int i = 0; i < m; ++i)
      zbar_full.segment(topo.z_off[i], topo.nz[i]) = propagate_prior(
          gm, topo, i, zprev, uprev, wwin[i].row(0).transpose());

    Eigen::VectorXd ystack((N + 1) * ny), ustack(N * nuc);
    for (int w = 0; w <= N; ++w) ystack.segment(w * ny, ny) = Ys.row(k - N + w);
    for (int w = 0; w < N; ++w) ustack.segment(w * nuc, nuc) = Ul.row(k - N + w);

    // Shared pieces of the residuals; each estimator removes its own prior
    // contribution instead of summing over the other m-1 subsystems.
    const Eigen::VectorXd Ozbar = st.O * zbar_full;
    const Eigen::VectorXd Lu = st.Lam * ustack;
    const Eigen::VectorXd Gzbar = st.G * zbar_full;
    const Eigen::VectorXd Hu = st.H * ustack;

    std::vector<std::vector<Eigen::VectorXd>> newwin(m);
    std::vector<Eigen::MatrixXd> neww(m);
    auto local_solve = [&](int i) {
      try {
        const int nzi = topo.nz[i];
        const Eigen::VectorXd zbi = zbar_full.segment(topo.z_off[i], nzi);
        const auto t0 = std::chrono::steady_clock::now();
        Eigen::MatrixXd Hq = Hq0[i];
        const Eigen::MatrixXd PaI = Phist[i][(size_t)(k - N)].inverse();
        Hq.topLeftCorner(nzi, nzi) += PaI;
        Eigen::VectorXd r0 = ystack - (Ozbar - Osub[i] * zbi) - Lu;
        Eigen::VectorXd gq = -Msub[i].transpose() * r0 / cfg.r_channel;
        gq.head(nzi) -= PaI * zbi;

        Eigen::VectorXd th;
        if (br[i].rows.empty()) {
          th = Hq.ldlt().solve(-gq);
        } else {
          Eigen::VectorXd fvec =
              select_rows(Eigen::VectorXd(Gzbar - Gsub[i] * zbi + Hu),
                          br[i].rows);
          QuadraticProgram qp{Hq, gq, EJ[i], fvec, br[i].lb, br[i].ub};
          QpSolution sol = solve_qp(qp, &warm[i]);
          warm[i] = sol.active;
          th = sol.theta;
        }
        solve_seconds[i] +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        ++solves[i];
        if (!th.allFinite())
          throw std::runtime_error("local solve returned non-finite estimate");

        Eigen::VectorXd full = Gsub[i] * th.head(nzi) +
                               (Gzbar - Gsub[i] * zbi) + Hu +
                               Jsub[i] * th.tail(N * nzi);
        newwin[i].resize(N + 1);
        for (int w = 0; w <= N; ++w)
          newwin[i][w] = full.segment(w * nzt + topo.z_off[i], nzi);
        neww[i] = Eigen::Map<Eigen::MatrixXd>(th.tail(N * nzi).data(), nzi, N)
                      .transpose();
      } catch (const std::exception& e) {
        failure[i] = "instant " + std::to_string(k) + ", subsystem " +
                     std::to_string(i + 1) + ": " + e.what();
      }
    };
    run_parallel(m, threads, local_solve);
    for (int i = 0; i < m; ++i)
      if (!failure[i].empty())
        throw std::runtime_error("dmhe: " + failure[i]);

    for (int i = 0; i < m; ++i) {
      zwin[i] = newwin[i];
      wwin[i] = neww[i];
      res.Z.row(k).segment(topo.z_off[i], topo.nz[i]) = newwin[i][N].transpose();
    }
  }

  for (int k = 0; k < T; ++k)
    res.X.row(k) = reconstruct_state(topo, res.Z.row(k).transpose()).transpose();
  for (int i = 0; i < m; ++i) {
    res.mean_solve_seconds += solve_seconds[i];
    res.solve_count += solves[i];
    res.min_cov_eigenvalue = std::min(res.min_cov_eigenvalue, cov[i].min_eig);
    res.max_cov_asymmetry = std::max(res.max_cov_asymmetry, cov[i].max_asym);
  }
  if (res.solve_count > 0) res.mean_solve_seconds /= res.solve_count;
  for (int k = N + 1; k < T; ++k)
    for (int c = 0; c < topo.nx_total(); ++c) {
      double v = 0.0;
      if (std::isfinite(cfg.lb(c))) v = std::max(v, cfg.lb(c) - res.X(k, c));
      if (std::isfinite(cfg.ub(c))) v = std::max(v, res.X(k, c) - cfg.ub(c));
      res.max_bound_violation = std::max(res.max_bound_violation, v);
    }
  return res;
}

GlobalModel linearized_baseline(const CstrConfig& cfg,
                                const SubsystemTopology& topo,
                                const Scaler& state_scaler,
                                const Scaler& input_scaler,
                                double fd_step) {
  const int nx = topo.nx_total();
  const int nu = input_scaler.dim();
  // Steady state of the reactor network under the midpoint heat duties.
  const Eigen::Vector4d Qs = 0.5 * (cfg.Q_min + cfg.Q_max);
  Eigen::VectorXd xs(8);
  xs << 310.8376, 3.0317, 310.8329, 2.8002, 312.4663, 2.844, 311.1576, 3.0142;
  const Eigen::VectorXd rgx = state_scaler.range();
  const Eigen::VectorXd xs_s = state_scaler.apply(xs);
  const Eigen::VectorXd us_s = input_scaler.apply(Qs);

  auto scaled_rhs = [&](const Eigen::VectorXd& x_s, const Eigen::VectorXd& u_s) {
    Eigen::VectorXd x = state_scaler.unscale(x_s);
    Eigen::Vector4d Q = input_scaler.unscale(u_s);
    return Eigen::VectorXd(cstr_rhs(cfg, x, Q).cwiseQuotient(rgx));
  };

  Eigen::MatrixXd Ac(nx, nx), Bc(nx, nu);
  for (int c = 0; c < nx; ++c) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nx);
    e(c) = fd_step;
    Ac.col(c) = (scaled_rhs(xs_s + e, us_s) - scaled_rhs(xs_s - e, us_s)) /
                (2.0 * fd_step);
  }
  for (int c = 0; c < nu; ++c) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nu);
    e(c) = fd_step;
    Bc.col(c) = (scaled_rhs(xs_s, us_s + e) - scaled_rhs(xs_s, us_s - e)) /
                (2.0 * fd_step);
  }
  if (!Ac.allFinite() || !Bc.allFinite())
    throw std::runtime_error("linearized_baseline: Jacobian evaluation failed");

  // Exact zero-order hold via the exponential of the augmented matrix.
  Eigen::MatrixXd Maug = Eigen::MatrixXd::Zero(nx + nu, nx + nu);
  Maug.topLeftCorner(nx, nx) = Ac;
  Maug.topRightCorner(nx, nu) = Bc;
  Eigen::MatrixXd E = (Maug * cfg.dt_h).exp();

  GlobalModel gm;
  gm.A = E.topLeftCorner(nx, nx);
  gm.B = E.topRightCorner(nx, nu);
  gm.C = Eigen::MatrixXd::Zero(topo.ny_total(), nx);
  for (int i = 0; i < topo.m; ++i)
    for (int s = 0; s < topo.ny[i]; ++s)
      gm.C(topo.y_off[i] + s, topo.z_off[i] + topo.sensor_map[i][s]) = 1.0;
  return gm;
}

}  // namespace kdmhe
