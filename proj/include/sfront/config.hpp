#pragma once

// Experiment configuration: one JSON document with a schema version.
// Unknown keys are rejected.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfront/diffuse.hpp"
#include "sfront/harness.hpp"
#include "sfront/model.hpp"
#include "sfront/sharp.hpp"

namespace sfront {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct ExperimentConfig {
  int schema_version = kSchemaVersion;

  std::string well = "quartic";  ///< quartic | cubic
  double well_alpha = 0.4;       ///< cubic only

  std::string forcing = "constant";  ///< constant | cosine | table
  double g = 0.1;                    ///< constant value, or cosine mean
  double rel_amplitude = 0.0;        ///< cosine
  std::vector<double> table_y, table_g;

  // grid
  double length = 1.0;
  int sharp_nodes = 201;
  double dz = 0.0;
  double window_below = 16.0;
  double window_above = 16.0;
  double dt_factor = 0.25;
  double time_theta = 0.5;

  std::vector<double> eps{0.1, 0.05, 0.025};

  // tolerances
  double tol_c = 1e-7;
  double shape_tol = 1e-7;
  double sharp_shape_tol = 1e-6;
  double newton_tol = 1e-9;
  double el_tol = 10.0;
  double drift_tol = 5e-3;

  // speed-sharp
  double fmc_t_max = 40.0;
  double fmc_amplitude = 0.1;

  // speed-diffuse
  double diffuse_eps = 0.05;
  bool cross_check = true;
  double cross_check_t = 1.0;
  double dynamic_t_max = 10.0;  ///< unbalanced wells: lab-frame run length

  // sweep
  bool sweep_dynamic = true;

  // simulate
  double sim_eps = 0.05;
  double sim_t_max = 5.0;
  InitialDatum sim_initial{InitialDatum::Kind::step_cosine, 0.5, 1.0, 1.0, "initial"};
  double sim_noise = 0.0;  ///< uniform perturbation of the initial datum (uses --seed)
  std::vector<double> stability_eps;  ///< empty: no stability experiment
  std::vector<double> stability_times{0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<InitialDatum> stability_data{
      {InitialDatum::Kind::step_cosine, 1.0, 1.0, 1.0, "step"}};

  // density-audit
  double density_eps = 0.05;
  double beta = 0.5;
  std::vector<double> radii{1.0, 2.0, 4.0, 8.0};
  int r0 = 2;
  int R0 = 10;
  int centers = 5;

  std::string output_dir;

  /// Throws ConfigError("schema") on unknown keys, wrong types, a missing or
  /// unsupported schema_version, a missing well or forcing, or invalid values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;

  DoubleWell make_well() const;
  ForcingDescriptor make_forcing() const;
  DiffuseRunParams diffuse_params(double eps) const;
  SharpRunParams sharp_params() const;
  SweepConfig sweep_config(int workers) const;
  StabilityConfig stability_config() const;
};

}  // namespace sfront
