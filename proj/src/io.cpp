#include "io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace kdmhe {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

json mat_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  const Eigen::Index rows = (Eigen::Index)j.size();
  const Eigen::Index cols = rows ? (Eigen::Index)j[0].size() : 0;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  return M;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v((Eigen::Index)i) = j[i].get<double>();
  return v;
}

}  // namespace

void write_csv(const std::string& path, const std::string& schema,
               const std::vector<std::string>& columns,
               const Eigen::MatrixXd& data) {
  if ((Eigen::Index)columns.size() != data.cols())
    throw std::invalid_argument("write_csv: column count mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << "# schema: " << schema << " v1\n";
  for (size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (Eigen::Index c = 0; c < data.cols(); ++c)
      out << fmt_double(data(r, c)) << (c + 1 < data.cols() ? "," : "\n");
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  CsvFile f;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# schema: ", 0) != 0)
    throw std::runtime_error("read_csv: missing schema line in " + path);
  f.schema = line.substr(10);
  if (!std::getline(in, line))
    throw std::runtime_error("read_csv: missing header in " + path);
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.columns.push_back(tok);
  }
  std::vector<double> vals;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    ++rows;
  }
  const Eigen::Index cols = (Eigen::Index)f.columns.size();
  if ((Eigen::Index)vals.size() != rows * cols)
    throw std::runtime_error("read_csv: ragged rows in " + path);
  f.data.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) f.data(r, c) = vals[r * cols + c];
  return f;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_digest: cannot open " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= (unsigned char)buf[i];
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void write_metadata(const std::string& csv_path, std::uint64_t seed,
                    const std::string& config_digest,
                    const std::map<std::string, std::string>& extras) {
  json j;
  j["seed"] = seed;
  j["config_digest"] = config_digest;
  j["software_version"] = "1.0.0";
  for (const auto& [k, v] : extras) j[k] = v;
  std::ofstream out(csv_path + ".meta.json");
  if (!out) throw std::runtime_error("write_metadata: cannot open sidecar");
  out << j.dump(2) << "\n";
}

std::vector<LiftingDictionary> ModelContainer::state_dicts() const {
  std::vector<LiftingDictionary> d;
  for (int i = 0; i < topo.m; ++i)
    d.push_back(LiftingDictionary::elementwise(topo.nx[i], state_bases[i]));
  return d;
}

std::vector<LiftingDictionary> ModelContainer::input_dicts() const {
  std::vector<LiftingDictionary> d;
  for (int i = 0; i < topo.m; ++i) {
    if (input_bases[i].empty()) {
      LiftingDictionary empty;
      empty.input_dim = 0;
      d.push_back(empty);
    } else {
      d.push_back(LiftingDictionary::elementwise(1, input_bases[i]));
    }
  }
  return d;
}

void save_model(const std::string& path, const ModelContainer& mc) {
  json j;
  j["schema"] = "koopman-model v1";
  json t;
  t["m"] = mc.topo.m;
  t["nx"] = mc.topo.nx;
  t["nz"] = mc.topo.nz;
  t["nu"] = mc.topo.nu;
  t["ny"] = mc.topo.ny;
  t["neighbors"] = mc.topo.neighbors;
  t["sensor_map"] = mc.topo.sensor_map;
  j["topology"] = t;
  j["state_scaler"] = {{"lo", vec_to_json(mc.state_scaler.lo)},
                       {"hi", vec_to_json(mc.state_scaler.hi)}};
  j["input_scaler"] = {{"lo", vec_to_json(mc.input_scaler.lo)},
                       {"hi", vec_to_json(mc.input_scaler.hi)}};
  j["state_bases"] = mc.state_bases;
  j["input_bases"] = mc.input_bases;
  json models = json::array();
  for (const auto& m : mc.models) {
    json jm;
    jm["A_ii"] = mat_to_json(m.A_ii);
    json aij = json::object();
    for (const auto& [k, v] : m.A_ij) aij[std::to_string(k)] = mat_to_json(v);
    jm["A_ij"] = aij;
    jm["B"] = mat_to_json(m.B);
    jm["C"] = mat_to_json(m.C);
    models.push_back(std::move(jm));
  }
  j["models"] = models;
  j["diagnostics"] = {{"rank", mc.diagnostics.rank},
                      {"truncated", mc.diagnostics.truncated},
                      {"residual", mc.diagnostics.residual}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << j.dump(1) << "\n";
}

ModelContainer load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  json j = json::parse(in);
  if (j.value("schema", "") != "koopman-model v1")
    throw std::runtime_error("load_model: unsupported schema in " + path);
  ModelContainer mc;
  const json& t = j["topology"];
  mc.topo.m = t["m"].get<int>();
  mc.topo.nx = t["nx"].get<std::vector<int>>();
  mc.topo.nz = t["nz"].get<std::vector<int>>();
  mc.topo.nu = t["nu"].get<std::vector<int>>();
  mc.topo.ny = t["ny"].get<std::vector<int>>();
  mc.topo.neighbors = t["neighbors"].get<std::vector<std::vector<int>>>();
  mc.topo.sensor_map = t["sensor_map"].get<std::vector<std::vector<int>>>();
  mc.topo.build_offsets();
  const std::string err = mc.topo.validate();
  if (!err.empty()) throw std::runtime_error("load_model: " + err);
  mc.state_scaler.lo = vec_from_json(j["state_scaler"]["lo"]);
  mc.state_scaler.hi = vec_from_json(j["state_scaler"]["hi"]);
  mc.input_scaler.lo = vec_from_json(j["input_scaler"]["lo"]);
  mc.input_scaler.hi = vec_from_json(j["input_scaler"]["hi"]);
  mc.state_bases = j["state_bases"].get<std::vector<std::vector<std::string>>>();
  mc.input_bases = j["input_bases"].get<std::vector<std::vector<std::string>>>();
  for (const json& jm : j["models"]) {
    KoopmanSubsystemModel m;
    m.A_ii = mat_from_json(jm["A_ii"]);
    for (auto it = jm["A_ij"].begin(); it != jm["A_ij"].end(); ++it)
      m.A_ij[std::stoi(it.key())] = mat_from_json(it.value());
    m.B = mat_from_json(jm["B"]);
    m.C = mat_from_json(jm["C"]);
    mc.models.push_back(std::move(m));
  }
  mc.diagnostics.rank = j["diagnostics"]["rank"].get<std::vector<int>>();
  mc.diagnostics.truncated =
      j["diagnostics"]["truncated"].get<std::vector<int>>();
  mc.diagnostics.residual =
      j["diagnostics"]["residual"].get<std::vector<double>>();
  return mc;
}

}  // namespace kdmhe
