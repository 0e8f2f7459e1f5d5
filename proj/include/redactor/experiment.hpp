// Manifest-driven experiments: size/build, verify, metrics and attack per
// benchmark, collected into CSV tables and a JSON bundle.
//
// Manifest (JSON):
//   {
//     "seed": 1,
//     "experiments": [{
//       "name": "pedc_lut",                  unique, [A-Za-z0-9_.-]+
//       "benchmark": "benchmarks/pedc.bench", relative to the manifest
//       "arch": {"k": 4, "ble": "lut", "n": 1, "grid_w": 1, "grid_h": 1,
//                "io_per_tile": 1, "w": "auto", "fc_in": .15, "fc_out": .1, "fs": 3, "l": 4},
//       "size_search": {"arch": {...}, "max_grid": 8, "max_n": 9, "max_io_per_tile": 16,
//                       "min_io_utilization": 0.9, "relax_io": false},
//       "flow": {"max_width": 128, "max_bles": 0},
//       "verify": {"method": "auto", "max_inputs": 16, "vectors": 100000},
//       "metrics": {"vectors": 4096} or false,
//       "attack": {"timeout_s": 600, "max_unroll": 256, "initial_unroll": 0,
//                  "strategy": "break_then_unroll", "seed": 1} or false,
//       "seed": 1
//     }]
//   }
// Exactly one of "arch" and "size_search" is required; everything else has defaults.
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "redactor/arch.hpp"
#include "redactor/netlist.hpp"

namespace redactor {

class ManifestError : public Error {
 public:
  using Error::Error;
};

/// Keys as in the manifest "arch" object; unknown keys are a ManifestError.
ArchParams arch_from_json(const nlohmann::json& j);
nlohmann::json arch_to_json(const ArchParams& p);

/// Throws ManifestError naming the offending field.
void validate_manifest(const nlohmann::json& manifest);

struct RunOptions {
  int jobs = 1;         // experiments run concurrently
  bool resume = false;  // reuse records of an existing bundle whose experiment entry is unchanged
};

/// Runs every experiment and writes table3.csv, table4.csv, overhead.csv,
/// bundle.json and bitstreams/<name>.bit under out_dir. A failing stage is
/// recorded and the experiment's later stages are skipped. Returns the bundle.
nlohmann::json run_experiment(const nlohmann::json& manifest, const std::filesystem::path& base_dir,
                              const std::filesystem::path& out_dir, const RunOptions& opt = {});
nlohmann::json run_experiment(const std::filesystem::path& manifest_file, const std::filesystem::path& out_dir,
                              const RunOptions& opt = {});

/// Column order of the CSV tables.
std::string table3_header();
std::string table4_header();

}  // namespace redactor
