#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "identify.hpp"
#include "lifting.hpp"
#include "scaler.hpp"
#include "topology.hpp"

namespace kdmhe {

// CSV with a schema tag on the first line ("# schema: <name> v1"), then a
// column-name header, then one row per record. A sidecar "<path>.meta.json"
// carries run metadata (seed, config digest, software version, extras).
void write_csv(const std::string& path, const std::string& schema,
               const std::vector<std::string>& columns,
               const Eigen::MatrixXd& data);

struct CsvFile {
  std::string schema;
  std::vector<std::string> columns;
  Eigen::MatrixXd data;
};
CsvFile read_csv(const std::string& path);

void write_metadata(const std::string& csv_path, std::uint64_t seed,
                    const std::string& config_digest,
                    const std::map<std::string, std::string>& extras = {});

// FNV-1a digest of a file's bytes, hex-encoded (run manifests).
std::string file_digest(const std::string& path);

// Identified model container: topology, scalers, dictionaries, subsystem
// matrices, fit diagnostics.
struct ModelContainer {
  SubsystemTopology topo;
  Scaler state_scaler;
  Scaler input_scaler;  // over raw (unlifted) inputs; dim 0 when no inputs
  std::vector<std::vector<std::string>> state_bases;  // per subsystem
  std::vector<std::vector<std::string>> input_bases;  // per subsystem
  std::vector<KoopmanSubsystemModel> models;
  IdentifyDiagnostics diagnostics;

  std::vector<LiftingDictionary> state_dicts() const;
  std::vector<LiftingDictionary> input_dicts() const;
};

void save_model(const std::string& path, const ModelContainer& mc);
ModelContainer load_model(const std::string& path);

}  // namespace kdmhe
