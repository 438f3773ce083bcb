#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "config.hpp"
#include "io.hpp"
#include "pipeline.hpp"
#include "predict.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kdmhe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string data_path;
  std::string model_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

std::vector<std::string> trajectory_columns(const SubsystemTopology& topo,
                                            int nu_raw) {
  std::vector<std::string> cols{"t"};
  for (int i = 0; i < topo.nx_total(); ++i)
    cols.push_back("x" + std::to_string(i + 1));
  for (int i = 0; i < nu_raw; ++i) cols.push_back("u" + std::to_string(i + 1));
  for (int i = 0; i < topo.ny_total(); ++i)
    cols.push_back("y" + std::to_string(i + 1));
  return cols;
}

void write_trajectory(const std::string& path, const Trajectory& traj,
                      const SubsystemTopology& topo,
                      const std::string& digest) {
  const int nu_raw = (int)traj.U.cols();
  Eigen::MatrixXd data(traj.X.rows(), 1 + traj.X.cols() + nu_raw + traj.Y.cols());
  data.col(0) = traj.t;
  data.middleCols(1, traj.X.cols()) = traj.X;
  data.middleCols(1 + traj.X.cols(), nu_raw) = traj.U;
  data.rightCols(traj.Y.cols()) = traj.Y;
  write_csv(path, "trajectory", trajectory_columns(topo, nu_raw), data);
  write_metadata(path, traj.seed, digest,
                 {{"samples", std::to_string(traj.X.rows())}});
}

Trajectory load_trajectory(const std::string& path,
                           const SubsystemTopology& topo, int nu_raw) {
  CsvFile f = read_csv(path);
  if (f.schema.rfind("trajectory", 0) != 0)
    throw std::runtime_error("expected a trajectory CSV, got schema '" +
                             f.schema + "' in " + path);
  const int nx = topo.nx_total(), ny = topo.ny_total();
  if ((int)f.columns.size() != 1 + nx + nu_raw + ny)
    throw std::runtime_error("trajectory column count mismatch in " + path);
  Trajectory traj;
  traj.t = f.data.col(0);
  traj.X = f.data.middleCols(1, nx);
  traj.U = f.data.middleCols(1 + nx, nu_raw);
  traj.Y = f.data.rightCols(ny);
  return traj;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

RunConfig load_config_checked(CommonOpts& opt) {
  RunConfig cfg = load_config(opt.config_path);
  if (opt.seed_given) {
    cfg.seed = opt.seed;
    cfg.noise.seed = opt.seed;
  }
  fs::create_directories(opt.out_dir);
  return cfg;
}

int cmd_simulate(CommonOpts& opt) {
  RunConfig cfg = load_config_checked(opt);
  try {
    PreparedData d = prepare_data(cfg, cfg.seed);
    const auto& s = cfg.splits;
    auto slice = [&](int start, int count) {
      Trajectory t;
      t.t = d.traj.t.segment(start, count);
      t.X = d.traj.X.middleRows(start, count);
      t.U = d.traj.U.middleRows(start, count);
      t.Y = d.traj.Y.middleRows(start, count);
      t.seed = d.traj.seed;
      return t;
    };
    write_trajectory(opt.out_dir + "/train.csv", slice(0, s.train), d.topo,
                     cfg.digest);
    if (s.validate > 0)
      write_trajectory(opt.out_dir + "/validate.csv",
                       slice(s.train, s.validate), d.topo, cfg.digest);
    if (s.test > 0)
      write_trajectory(opt.out_dir + "/test.csv",
                       slice(s.train + s.validate, s.test), d.topo, cfg.digest);
    std::cout << "simulated " << s.total() << " samples (" << cfg.process
              << ", seed " << cfg.seed << ") -> " << opt.out_dir << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "simulation failed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_identify(CommonOpts& opt) {
  RunConfig cfg = load_config_checked(opt);
  const std::string data =
      opt.data_path.empty() ? opt.out_dir + "/train.csv" : opt.data_path;
  try {
    SubsystemTopology topo = make_topology(cfg);
    const int nu_raw = cfg.process == "cstr" ? 4 : 1;
    PreparedData d = wrap_training(cfg, load_trajectory(data, topo, nu_raw));
    ModelContainer mc = identify_model(cfg, d, opt.threads);
    const std::string out = opt.out_dir + "/model.json";
    save_model(out, mc);
    for (int i = 0; i < topo.m; ++i)
      std::cout << "subsystem " << i + 1 << ": rank "
                << mc.diagnostics.rank[i] << " (" << mc.diagnostics.truncated[i]
                << " truncated), relative residual "
                << mc.diagnostics.residual[i] << "\n";
    std::cout << "model -> " << out << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "identification failed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_validate(CommonOpts& opt) {
  try {
    fs::create_directories(opt.out_dir);
    ModelContainer mc = load_model(opt.model_path);
    const int nu_raw = (int)mc.input_scaler.lo.size();
    PreparedData d =
        rescale_with(mc, load_trajectory(opt.data_path, mc.topo, nu_raw));
    Eigen::MatrixXd pred_scaled;
    Eigen::VectorXd rmse = validation_rmse(d, mc, &pred_scaled);
    Eigen::MatrixXd pred(pred_scaled.rows(), pred_scaled.cols());
    for (Eigen::Index k = 0; k < pred_scaled.rows(); ++k)
      pred.row(k) =
          mc.state_scaler.unscale(pred_scaled.row(k).transpose()).transpose();
    Eigen::MatrixXd out(pred.rows(), 1 + pred.cols());
    out.col(0) = d.traj.t.head(pred.rows());
    out.rightCols(pred.cols()) = pred;
    std::vector<std::string> cols{"t"};
    for (int i = 0; i < (int)pred.cols(); ++i)
      cols.push_back("xpred" + std::to_string(i + 1));
    write_csv(opt.out_dir + "/prediction.csv", "prediction", cols, out);
    json m;
    m["per_state_scaled_rmse"] = std::vector<double>(
        rmse.data(), rmse.data() + rmse.size());
    m["max_scaled_rmse"] = rmse.maxCoeff();
    write_json_file(opt.out_dir + "/validate_metrics.json", m);
    std::cout << "open-loop per-state scaled RMSE (max " << rmse.maxCoeff()
              << "):\n" << rmse.transpose() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_estimate(CommonOpts& opt) {
  RunConfig cfg = load_config_checked(opt);
  const std::string data =
      opt.data_path.empty() ? opt.out_dir + "/test.csv" : opt.data_path;
  const std::string model =
      opt.model_path.empty() ? opt.out_dir + "/model.json" : opt.model_path;
  try {
    ModelContainer mc = load_model(model);
    const int nu_raw = (int)mc.input_scaler.lo.size();
    PreparedData d = rescale_with(mc, load_trajectory(data, mc.topo, nu_raw));
    EstimateMetrics em = estimate_koopman(cfg, d, mc, opt.threads);
    Eigen::MatrixXd out(em.Xhat.rows(), 2 + em.Xhat.cols());
    out.col(0) = d.traj.t.head(em.Xhat.rows());
    out.middleCols(1, em.Xhat.cols()) = em.Xhat;
    out.col(out.cols() - 1) = em.error_norm;
    std::vector<std::string> cols{"t"};
    for (int i = 0; i < (int)em.Xhat.cols(); ++i)
      cols.push_back("xhat" + std::to_string(i + 1));
    cols.push_back("err_norm");
    write_csv(opt.out_dir + "/estimate.csv", "estimate", cols, out);
    write_metadata(opt.out_dir + "/estimate.csv", cfg.seed, cfg.digest);
    json m;
    m["scaled_rmse"] = em.scaled_rmse;
    m["mean_solve_seconds"] = em.result.mean_solve_seconds;
    m["solve_count"] = em.result.solve_count;
    m["min_cov_eigenvalue"] = em.result.min_cov_eigenvalue;
    m["max_bound_violation"] = em.result.max_bound_violation;
    write_json_file(opt.out_dir + "/estimate_metrics.json", m);
    std::cout << "scaled RMSE " << em.scaled_rmse << ", mean local solve "
              << em.result.mean_solve_seconds << " s over "
              << em.result.solve_count << " solves\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "estimation failed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_compare(CommonOpts& opt) {
  RunConfig cfg = load_config_checked(opt);
  if (cfg.process != "cstr") {
    std::cerr << "compare: the linearized baseline is defined for the cstr "
                 "preset only\n";
    return kExitConfig;
  }
  try {
    PreparedData d = prepare_data(cfg, cfg.seed);
    ModelContainer mc = identify_model(cfg, d, opt.threads);
    EstimateMetrics koop = estimate_koopman(cfg, d, mc, opt.threads);
    EstimateMetrics base = estimate_baseline(cfg, d, opt.threads);
    Eigen::MatrixXd table(2, 2);
    table << koop.scaled_rmse, koop.result.mean_solve_seconds,
        base.scaled_rmse, base.result.mean_solve_seconds;
    write_csv(opt.out_dir + "/comparison.csv", "comparison",
              {"scaled_rmse", "mean_solve_seconds"}, table);
    write_metadata(opt.out_dir + "/comparison.csv", cfg.seed, cfg.digest,
                   {{"rows", "koopman,baseline"}});
    json m;
    m["koopman_rmse"] = koop.scaled_rmse;
    m["baseline_rmse"] = base.scaled_rmse;
    m["ratio"] = base.scaled_rmse / koop.scaled_rmse;
    m["koopman_mean_solve_seconds"] = koop.result.mean_solve_seconds;
    m["baseline_mean_solve_seconds"] = base.result.mean_solve_seconds;
    write_json_file(opt.out_dir + "/compare_metrics.json", m);
    std::cout << "               scaled RMSE   mean solve (s)\n";
    std::cout << "koopman dmhe   " << koop.scaled_rmse << "      "
              << koop.result.mean_solve_seconds << "\n";
    std::cout << "linearized     " << base.scaled_rmse << "      "
              << base.result.mean_solve_seconds << "\n";
    std::cout << "rmse ratio     " << base.scaled_rmse / koop.scaled_rmse
              << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "comparison failed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_report(CommonOpts& opt) {
  try {
    bool any = false;
    for (const auto& entry : fs::directory_iterator(opt.out_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 13 &&
          name.substr(name.size() - 13) == "_metrics.json") {
        std::ifstream in(entry.path());
        json j = json::parse(in);
        std::cout << name << ":\n";
        for (auto it = j.begin(); it != j.end(); ++it)
          std::cout << "  " << it.key() << ": " << it.value().dump() << "\n";
        any = true;
      }
    }
    if (!any) std::cout << "no metrics found in " << opt.out_dir << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman subsystem identification and distributed moving "
               "horizon estimation"};
  app.require_subcommand(1);
  CommonOpts opt;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", opt.config_path, "run configuration file");
    if (need_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--threads", opt.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "override the configured seed")
        ->each([&](const std::string&) { opt.seed_given = true; });
  };

  auto* sim = app.add_subcommand("simulate", "generate trajectory splits");
  add_common(sim, true);
  auto* ide = app.add_subcommand("identify", "fit the lifted subsystem models");
  add_common(ide, true);
  ide->add_option("--data", opt.data_path, "training trajectory CSV");
  auto* val = app.add_subcommand("validate", "open-loop cross-validation");
  add_common(val, false);
  val->add_option("--model", opt.model_path, "model file")->required();
  val->add_option("--data", opt.data_path, "validation trajectory CSV")
      ->required();
  auto* est = app.add_subcommand("estimate", "distributed MHE on test data");
  add_common(est, true);
  est->add_option("--model", opt.model_path, "model file");
  est->add_option("--data", opt.data_path, "test trajectory CSV");
  auto* cmp = app.add_subcommand("compare",
                                 "Koopman vs linearized-baseline estimation");
  add_common(cmp, true);
  auto* rep = app.add_subcommand("report", "summarize metrics in --out");
  add_common(rep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(opt);
    if (ide->parsed()) return cmd_identify(opt);
    if (val->parsed()) return cmd_validate(opt);
    if (est->parsed()) return cmd_estimate(opt);
    if (cmp->parsed()) return cmd_compare(opt);
    if (rep->parsed()) return cmd_report(opt);
  } catch (const std::exception& e) {
    // errors thrown before the numeric phase are configuration problems
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
