#include "config.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

#include "io.hpp"
#include "json.hpp"

namespace kdmhe {

namespace {

using nlohmann::json;

// Scalar broadcast or explicit array; null entries map to `fill_null`.
Eigen::VectorXd as_vector(const json& j, int n, double fill_null) {
  Eigen::VectorXd v(n);
  if (j.is_number()) {
    v.setConstant(j.get<double>());
    return v;
  }
  if (!j.is_array() || (int)j.size() != n)
    throw std::runtime_error("config: expected scalar or array of length " +
                             std::to_string(n));
  for (int i = 0; i < n; ++i)
    v(i) = j[i].is_null() ? fill_null : j[i].get<double>();
  return v;
}

int state_dim(const RunConfig& cfg) {
  return cfg.process == "cstr" ? 8 : cfg.soil.compartments;
}

int measurement_dim(const RunConfig& cfg) {
  return cfg.process == "cstr" ? 4 : (cfg.soil.compartments / 12) * 2;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }
  if (j.value("schema", "") != "runconfig v1")
    throw std::runtime_error("config: unsupported schema in " + path);

  RunConfig cfg;
  cfg.source_path = path;
  cfg.digest = file_digest(path);
  cfg.process = j.at("process").get<std::string>();
  if (cfg.process != "cstr" && cfg.process != "agro")
    throw std::runtime_error("config: unknown process '" + cfg.process + "'");
  cfg.seed = j.value("seed", 0ull);

  const json& sp = j.at("splits");
  cfg.splits.train = sp.at("train").get<int>();
  cfg.splits.validate = sp.at("validate").get<int>();
  cfg.splits.test = sp.at("test").get<int>();
  if (cfg.splits.train < 2 || cfg.splits.validate < 0 || cfg.splits.test < 0)
    throw std::runtime_error("config: invalid data split");

  if (cfg.process == "agro" && j.contains("soil")) {
    const json& so = j["soil"];
    cfg.soil.compartments = so.value("compartments", cfg.soil.compartments);
    cfg.soil.depth_m = so.value("depth_m", cfg.soil.depth_m);
    cfg.soil.substeps = so.value("substeps", cfg.soil.substeps);
    if (cfg.soil.compartments % 12 != 0)
      throw std::runtime_error("config: compartments must be a multiple of 12");
  }

  const int nx = state_dim(cfg);
  const int ny = measurement_dim(cfg);
  const int nu_raw = cfg.process == "cstr" ? 4 : 1;

  const json& no = j.at("noise");
  cfg.noise.sigma_w = as_vector(no.at("sigma_w"), nx, 0.0);
  cfg.noise.sigma_v = as_vector(no.at("sigma_v"), ny, 0.0);
  cfg.noise.truncation = no.value("truncation", 5.0);
  cfg.noise.seed = cfg.seed;

  cfg.x0 = as_vector(j.at("initial_state"), nx, 0.0);
  if (j.contains("initial_guess"))
    cfg.x0bar = as_vector(j["initial_guess"], nx, 0.0);
  cfg.guess_offset = j.value("guess_offset", 0.0);
  if (cfg.x0bar.size() == 0) cfg.x0bar = cfg.x0.array() + cfg.guess_offset;
  cfg.settle_steps = j.value("settle_steps", 0);

  cfg.identify_rtol = j.at("identify").at("rank_rtol").get<double>();

  const json& est = j.at("estimator");
  cfg.N = est.at("N").get<int>();
  cfg.p0 = est.at("p0").get<double>();
  cfg.q = est.at("q").get<double>();
  cfg.r = est.at("r").get<double>();
  if (cfg.N < 1 || cfg.p0 <= 0 || cfg.q <= 0 || cfg.r <= 0)
    throw std::runtime_error("config: estimator weights must be positive, N >= 1");
  const double inf = std::numeric_limits<double>::infinity();
  cfg.lb = est.contains("lb") ? as_vector(est["lb"], nx, -inf)
                              : Eigen::VectorXd::Constant(nx, -inf);
  cfg.ub = est.contains("ub") ? as_vector(est["ub"], nx, inf)
                              : Eigen::VectorXd::Constant(nx, inf);
  for (int i = 0; i < nx; ++i)
    if (cfg.lb(i) > cfg.ub(i))
      throw std::runtime_error("config: lb > ub at state " + std::to_string(i));
  (void)nu_raw;
  return cfg;
}

SubsystemTopology make_topology(const RunConfig& cfg) {
  SubsystemTopology t;
  if (cfg.process == "cstr") {
    t.m = 4;
    t.nx = {2, 2, 2, 2};
    t.nz = {6, 6, 6, 6};
    t.nu = {2, 2, 2, 2};
    t.ny = {1, 1, 1, 1};
    t.neighbors = {{1, 3}, {0}, {1}, {2}};
    t.sensor_map = {{0}, {0}, {0}, {0}};
  } else {
    const int m = cfg.soil.compartments / 12;
    t.m = m;
    for (int i = 0; i < m; ++i) {
      t.nx.push_back(12);
      t.nz.push_back(36);
      t.nu.push_back(i == 0 ? 3 : 0);
      t.ny.push_back(2);
      std::vector<int> nb;
      if (i > 0) nb.push_back(i - 1);
      if (i + 1 < m) nb.push_back(i + 1);
      t.neighbors.push_back(nb);
      t.sensor_map.push_back({1, 11});
    }
  }
  t.build_offsets();
  const std::string err = t.validate();
  if (!err.empty()) throw std::runtime_error("config: " + err);
  return t;
}

std::vector<std::vector<std::string>> state_basis_names(const RunConfig& cfg) {
  const std::vector<std::string> names =
      cfg.process == "cstr"
          ? std::vector<std::string>{"identity", "cube_root", "exp"}
          : std::vector<std::string>{"identity", "square", "exp"};
  SubsystemTopology t = make_topology(cfg);
  return std::vector<std::vector<std::string>>((size_t)t.m, names);
}

std::vector<std::vector<std::string>> input_basis_names(const RunConfig& cfg) {
  SubsystemTopology t = make_topology(cfg);
  std::vector<std::vector<std::string>> out((size_t)t.m);
  if (cfg.process == "cstr") {
    for (auto& v : out) v = {"identity", "cube_root"};
  } else {
    out[0] = {"identity", "square", "exp"};
  }
  return out;
}

std::vector<LiftingDictionary> make_state_dicts(const RunConfig& cfg) {
  SubsystemTopology t = make_topology(cfg);
  auto names = state_basis_names(cfg);
  std::vector<LiftingDictionary> d;
  for (int i = 0; i < t.m; ++i)
    d.push_back(LiftingDictionary::elementwise(t.nx[i], names[(size_t)i]));
  return d;
}

std::vector<LiftingDictionary> make_input_dicts(const RunConfig& cfg) {
  SubsystemTopology t = make_topology(cfg);
  auto names = input_basis_names(cfg);
  std::vector<LiftingDictionary> d;
  for (int i = 0; i < t.m; ++i) {
    if (names[(size_t)i].empty()) {
      LiftingDictionary empty;
      empty.input_dim = 0;
      d.push_back(empty);
    } else {
      d.push_back(LiftingDictionary::elementwise(1, names[(size_t)i]));
    }
  }
  return d;
}

Trajectory simulate_process(const RunConfig& cfg, std::uint64_t seed) {
  SubsystemTopology topo = make_topology(cfg);
  NoiseSpec noise = cfg.noise;
  noise.seed = seed;
  const int nsteps = cfg.splits.total() - 1;
  if (cfg.process == "cstr")
    return simulate_cstr(cfg.cstr, topo, cfg.x0, nsteps, noise);
  return simulate_agro(cfg.soil, topo, cfg.x0, cfg.settle_steps, nsteps, noise);
}

}  // namespace kdmhe
