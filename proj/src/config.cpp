#include "sfront/config.hpp"

#include <set>

#include "sfront/error.hpp"
#include "sfront/io.hpp"

namespace sfront {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError("schema", where_ + " must be an object");
  }

  template <class T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return false;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("schema", where_ + "." + key + ": " + e.what());
    }
    return true;
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("schema", "unknown key '" + where_ + "." + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

InitialDatum::Kind datum_kind(const std::string& s) {
  if (s == "step_cosine") return InitialDatum::Kind::step_cosine;
  if (s == "smooth_cosine") return InitialDatum::Kind::smooth_cosine;
  throw ConfigError("schema", "unknown initial datum kind '" + s + "'");
}

std::string datum_kind(InitialDatum::Kind k) {
  return k == InitialDatum::Kind::step_cosine ? "step_cosine" : "smooth_cosine";
}

InitialDatum read_datum(const json& j, const std::string& where) {
  Reader r(j, where);
  InitialDatum d;
  std::string kind = "step_cosine";
  r.get("kind", kind);
  d.kind = datum_kind(kind);
  r.get("amplitude", d.amplitude);
  r.get("level", d.level);
  r.get("width", d.width);
  r.get("label", d.label);
  r.finish();
  return d;
}

json datum_json(const InitialDatum& d) {
  return {{"kind", datum_kind(d.kind)},
          {"amplitude", d.amplitude},
          {"level", d.level},
          {"width", d.width},
          {"label", d.label}};
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw ConfigError("schema", std::string(name) + " must be positive");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  Reader top(j, "config");
  if (!top.get("schema_version", c.schema_version))
    throw ConfigError("schema", "schema_version is required");
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("schema", "unsupported schema_version " + std::to_string(c.schema_version));

  const json* w = top.sub("well");
  if (!w) throw ConfigError("schema", "well is required");
  {
    Reader r(*w, "well");
    if (!r.get("kind", c.well)) throw ConfigError("schema", "well.kind is required");
    r.get("alpha", c.well_alpha);
    r.finish();
  }
  const json* f = top.sub("forcing");
  if (!f) throw ConfigError("schema", "forcing is required");
  {
    Reader r(*f, "forcing");
    if (!r.get("kind", c.forcing)) throw ConfigError("schema", "forcing.kind is required");
    if (c.forcing == "constant") {
      r.get("g", c.g);
    } else if (c.forcing == "cosine") {
      r.get("mean", c.g);
      r.get("rel_amplitude", c.rel_amplitude);
    } else if (c.forcing == "table") {
      r.get("y", c.table_y);
      r.get("g", c.table_g);
    }
    r.finish();
  }
  if (const json* g = top.sub("grid")) {
    Reader r(*g, "grid");
    r.get("length", c.length);
    r.get("sharp_nodes", c.sharp_nodes);
    r.get("dz", c.dz);
    r.get("window_below", c.window_below);
    r.get("window_above", c.window_above);
    r.get("dt_factor", c.dt_factor);
    r.get("time_theta", c.time_theta);
    r.finish();
  }
  top.get("eps", c.eps);
  if (const json* t = top.sub("tolerances")) {
    Reader r(*t, "tolerances");
    r.get("tol_c", c.tol_c);
    r.get("shape_tol", c.shape_tol);
    r.get("sharp_shape_tol", c.sharp_shape_tol);
    r.get("newton_tol", c.newton_tol);
    r.get("el_tol", c.el_tol);
    r.get("drift_tol", c.drift_tol);
    r.finish();
  }
  if (const json* s = top.sub("speed_sharp")) {
    Reader r(*s, "speed_sharp");
    r.get("fmc_t_max", c.fmc_t_max);
    r.get("fmc_amplitude", c.fmc_amplitude);
    r.finish();
  }
  if (const json* s = top.sub("speed_diffuse")) {
    Reader r(*s, "speed_diffuse");
    r.get("eps", c.diffuse_eps);
    r.get("cross_check", c.cross_check);
    r.get("cross_check_t", c.cross_check_t);
    r.get("dynamic_t_max", c.dynamic_t_max);
    r.finish();
  }
  if (const json* s = top.sub("sweep")) {
    Reader r(*s, "sweep");
    r.get("dynamic", c.sweep_dynamic);
    r.finish();
  }
  if (const json* s = top.sub("simulate")) {
    Reader r(*s, "simulate");
    r.get("eps", c.sim_eps);
    r.get("t_max", c.sim_t_max);
    if (const json* d = r.sub("initial")) c.sim_initial = read_datum(*d, "simulate.initial");
    r.get("noise", c.sim_noise);
    r.get("stability_eps", c.stability_eps);
    r.get("stability_times", c.stability_times);
    if (const json* d = r.sub("stability_data")) {
      if (!d->is_array()) throw ConfigError("schema", "simulate.stability_data must be an array");
      c.stability_data.clear();
      for (std::size_t k = 0; k < d->size(); ++k)
        c.stability_data.push_back(
            read_datum((*d)[k], "simulate.stability_data[" + std::to_string(k) + "]"));
    }
    r.finish();
  }
  if (const json* s = top.sub("density")) {
    Reader r(*s, "density");
    r.get("eps", c.density_eps);
    r.get("beta", c.beta);
    r.get("radii", c.radii);
    r.get("r0", c.r0);
    r.get("R0", c.R0);
    r.get("centers", c.centers);
    r.finish();
  }
  top.get("output_dir", c.output_dir);
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("schema", path.string() + ": " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::validate() const {
  if (well != "quartic" && well != "cubic")
    throw ConfigError("schema", "well.kind must be quartic or cubic");
  if (well == "cubic" && !(well_alpha > 0.0 && well_alpha < 1.0))
    throw ConfigError("schema", "well.alpha must lie in (0, 1)");
  if (forcing != "constant" && forcing != "cosine" && forcing != "table")
    throw ConfigError("schema", "forcing.kind must be constant, cosine or table");
  if (forcing == "table" && (table_y.size() < 2 || table_y.size() != table_g.size()))
    throw ConfigError("schema", "forcing table needs matching y and g arrays");
  require_positive(length, "grid.length");
  if (sharp_nodes < 3) throw ConfigError("schema", "grid.sharp_nodes must be at least 3");
  if (dz < 0.0) throw ConfigError("schema", "grid.dz must be nonnegative");
  require_positive(window_below, "grid.window_below");
  require_positive(window_above, "grid.window_above");
  require_positive(dt_factor, "grid.dt_factor");
  if (!(time_theta >= 0.5 && time_theta <= 1.0))
    throw ConfigError("schema", "grid.time_theta must lie in [0.5, 1]");
  if (eps.empty()) throw ConfigError("schema", "eps list must not be empty");
  for (double e : eps) require_positive(e, "eps");
  for (double e : stability_eps) require_positive(e, "simulate.stability_eps");
  require_positive(tol_c, "tolerances.tol_c");
  require_positive(shape_tol, "tolerances.shape_tol");
  require_positive(sharp_shape_tol, "tolerances.sharp_shape_tol");
  require_positive(newton_tol, "tolerances.newton_tol");
  require_positive(el_tol, "tolerances.el_tol");
  require_positive(drift_tol, "tolerances.drift_tol");
  require_positive(fmc_t_max, "speed_sharp.fmc_t_max");
  require_positive(diffuse_eps, "speed_diffuse.eps");
  require_positive(cross_check_t, "speed_diffuse.cross_check_t");
  require_positive(dynamic_t_max, "speed_diffuse.dynamic_t_max");
  require_positive(sim_eps, "simulate.eps");
  require_positive(sim_t_max, "simulate.t_max");
  if (sim_noise < 0.0) throw ConfigError("schema", "simulate.noise must be nonnegative");
  require_positive(density_eps, "density.eps");
  require_positive(beta, "density.beta");
  for (double r : radii) require_positive(r, "density.radii");
  if (r0 < 1 || R0 < r0 + 1) throw ConfigError("schema", "density needs 1 <= r0 and r0 + 1 <= R0");
  if (centers < 1) throw ConfigError("schema", "density.centers must be positive");
}

json ExperimentConfig::to_json() const {
  json f = {{"kind", forcing}};
  if (forcing == "constant") f["g"] = g;
  if (forcing == "cosine") f["mean"] = g, f["rel_amplitude"] = rel_amplitude;
  if (forcing == "table") f["y"] = table_y, f["g"] = table_g;
  json w = {{"kind", well}};
  if (well == "cubic") w["alpha"] = well_alpha;
  json data = json::array();
  for (const InitialDatum& d : stability_data) data.push_back(datum_json(d));
  return {
      {"schema_version", schema_version},
      {"well", w},
      {"forcing", f},
      {"grid",
       {{"length", length},
        {"sharp_nodes", sharp_nodes},
        {"dz", dz},
        {"window_below", window_below},
        {"window_above", window_above},
        {"dt_factor", dt_factor},
        {"time_theta", time_theta}}},
      {"eps", eps},
      {"tolerances",
       {{"tol_c", tol_c},
        {"shape_tol", shape_tol},
        {"sharp_shape_tol", sharp_shape_tol},
        {"newton_tol", newton_tol},
        {"el_tol", el_tol},
        {"drift_tol", drift_tol}}},
      {"speed_sharp", {{"fmc_t_max", fmc_t_max}, {"fmc_amplitude", fmc_amplitude}}},
      {"speed_diffuse",
       {{"eps", diffuse_eps}, {"cross_check", cross_check}, {"cross_check_t", cross_check_t}, {"dynamic_t_max", dynamic_t_max}}},
      {"sweep", {{"dynamic", sweep_dynamic}}},
      {"simulate",
       {{"eps", sim_eps},
        {"t_max", sim_t_max},
        {"initial", datum_json(sim_initial)},
        {"noise", sim_noise},
        {"stability_eps", stability_eps},
        {"stability_times", stability_times},
        {"stability_data", data}}},
      {"density",
       {{"eps", density_eps},
        {"beta", beta},
        {"radii", radii},
        {"r0", r0},
        {"R0", R0},
        {"centers", centers}}},
      {"output_dir", output_dir},
  };
}

DoubleWell ExperimentConfig::make_well() const {
  return well == "cubic" ? DoubleWell::cubic(well_alpha) : DoubleWell::quartic();
}

ForcingDescriptor ExperimentConfig::make_forcing() const {
  if (forcing == "cosine") return ForcingDescriptor::cosine(g, rel_amplitude, length);
  if (forcing == "table") return ForcingDescriptor::product_table(table_y, table_g);
  return ForcingDescriptor::constant(g);
}

DiffuseRunParams ExperimentConfig::diffuse_params(double e) const {
  DiffuseRunParams p;
  p.eps = e;
  p.dz = dz;
  p.window_below = window_below;
  p.window_above = window_above;
  p.dt_factor = dt_factor;
  p.time_theta = time_theta;
  p.tol_c = tol_c;
  p.shape_tol = shape_tol;
  p.drift_tol = drift_tol;
  p.cross_check = cross_check;
  p.cross_check_t = cross_check_t;
  return p;
}

SharpRunParams ExperimentConfig::sharp_params() const {
  SharpRunParams p;
  p.tol_c = tol_c;
  p.shape_tol = sharp_shape_tol;
  p.newton_tol = newton_tol;
  p.el_tol = el_tol;
  p.t_max = fmc_t_max;
  return p;
}

SweepConfig ExperimentConfig::sweep_config(int workers) const {
  SweepConfig s;
  s.well = make_well();
  s.forcing = make_forcing();
  s.length = length;
  s.sharp_nodes = sharp_nodes;
  s.diffuse = diffuse_params(eps.front());
  s.sharp = sharp_params();
  s.dynamic = sweep_dynamic;
  s.workers = workers;
  return s;
}

StabilityConfig ExperimentConfig::stability_config() const {
  StabilityConfig s;
  s.well = make_well();
  s.forcing = make_forcing();
  s.length = length;
  s.sharp_nodes = sharp_nodes;
  s.diffuse = diffuse_params(sim_eps);
  s.sharp = sharp_params();
  s.times = stability_times;
  return s;
}

}  // namespace sfront
