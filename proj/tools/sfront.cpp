// sfront: traveling fronts in stratified cylinders, sharp and diffuse.
//
// Exit codes: 0 success (negative verdicts included), 2 configuration error,
// 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfront/conditions.hpp"
#include "sfront/config.hpp"
#include "sfront/diffuse.hpp"
#include "sfront/error.hpp"
#include "sfront/harness.hpp"
#include "sfront/io.hpp"
#include "sfront/numerics.hpp"
#include "sfront/sharp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sfront;

namespace {

struct Globals {
  std::string config;
  std::string out;
  int workers = 1;
  std::uint64_t seed = 0;
};

/// Output directory with the list of files written so far.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    io::write_atomic(dir_ / name, content);
    names_.push_back(name);
  }
  void csv(const std::string& name, const io::CsvTable& t) { write(name, t.str()); }
  void json_doc(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  void plot(const std::string& stem, const io::Plot& p) {
    for (const fs::path& f : io::write_plot(dir_ / stem, p))
      names_.push_back(f.filename().string());
  }
  io::JsonLog& log() { return log_; }

  void finish(const std::string& command, const std::string& config_path,
              const ExperimentConfig* cfg, std::uint64_t seed) {
    log_.commit(dir_ / "run.jsonl");
    names_.push_back("run.jsonl");
    std::sort(names_.begin(), names_.end());
    names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
    json m = {{"tool", "sfront"}, {"version", kToolVersion}, {"command", command}, {"seed", seed}};
    if (cfg) {
      m["config_file"] = fs::path(config_path).filename().string();
      m["config_sha256"] = io::sha256_hex(io::read_file(config_path));
      m["resolved_config"] = cfg->to_json();
    }
    json outs = json::array();
    for (const std::string& n : names_)
      outs.push_back({{"file", n}, {"sha256", io::sha256_hex(io::read_file(dir_ / n))}});
    m["outputs"] = outs;
    io::write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
  io::JsonLog log_;
};

json speed_json(const SpeedResult& s) {
  json d = json::object();
  for (const auto& [k, v] : s.diagnostics) d[k] = v;
  return {{"c", s.c},
          {"method", s.method},
          {"bracket", {s.bracket_lo, s.bracket_hi}},
          {"residual", s.residual},
          {"converged", s.converged},
          {"note", s.note},
          {"diagnostics", d}};
}

json report_json(const AssumptionReport& r) {
  json m = json::object();
  for (const auto& [k, v] : r.margins) m[k] = v;
  return {{"assumption", r.assumption},
          {"verdict", to_string(r.verdict)},
          {"witness", r.witness},
          {"condition", r.condition},
          {"margin", r.margin},
          {"margins", m},
          {"notes", r.notes}};
}

io::CsvTable profile_csv(const Profile& p, const std::string& name) {
  io::CsvTable t({"y", name, "masked"});
  for (int i = 0; i < p.size(); ++i)
    t.add_numbers({p.section.y(i), p.value(i),
                   static_cast<double>(p.masked[i])});
  return t;
}

io::CsvTable field_csv(const Field& u) {
  io::CsvTable t({"y", "z", "u"});
  for (int j = 0; j < u.grid.nz; ++j)
    for (int i = 0; i < u.grid.ny(); ++i) t.add_numbers({u.grid.y(i), u.grid.z(j), u.at(i, j)});
  return t;
}

void require_balanced(const DoubleWell& w, const char* what) {
  if (!w.balanced()) throw ConfigError("well", std::string(what) + " needs a balanced double well");
}

// ---------------------------------------------------------------------------

void cmd_speed_sharp(const ExperimentConfig& cfg, Artifacts& out) {
  const DoubleWell well = cfg.make_well();
  require_balanced(well, "speed-sharp");
  const CrossSection section(cfg.length, cfg.sharp_nodes);
  const Forcing forcing = build_forcing(cfg.make_forcing(), section);
  const SharpRunParams sp = cfg.sharp_params();

  const SharpCResult r = find_c_dagger(sp, well, forcing);
  const Profile h0 = Profile::from_function(section, [&](double y) {
    return cfg.fmc_amplitude * std::cos(std::numbers::pi * y / cfg.length);
  });
  const SharpSpeedResult fmc = measure_speed_fmc(h0, sp, well, forcing);
  const EulerLagrangeReport el = check_euler_lagrange(r.psi, r.speed.c, well, forcing, sp.el_tol);
  const double rel = std::abs(fmc.speed.c - r.speed.c) / r.speed.c;

  out.json_doc("c_dagger.json",
               {{"c", r.speed.c},
                {"bracket", {r.speed.bracket_lo, r.speed.bracket_hi}},
                {"tol_c", sp.tol_c},
                {"variational", speed_json(r.speed)},
                {"dynamic", speed_json(fmc.speed)},
                {"dynamic_stationary", fmc.stationary},
                {"relative_difference", rel},
                {"methods_agree", rel <= 0.01},
                {"fingers", r.minimizer.fingers},
                {"euler_lagrange",
                 {{"residual", el.residual},
                  {"threshold", el.threshold},
                  {"interior", el.interior},
                  {"boundary", el.boundary},
                  {"neumann", el.neumann},
                  {"pass", el.pass}}}});
  auto samples = r.m_samples;
  std::sort(samples.begin(), samples.end());
  io::CsvTable mc({"c", "m"});
  for (const auto& [c, m] : samples) mc.add_numbers({c, m});
  out.csv("m_of_c.csv", mc);
  out.csv("psi.csv", profile_csv(r.psi, "psi"));

  io::Plot pp{"generalized traveling wave", "y", "psi", false, false, {}, {}};
  io::Series s{"psi (c = " + io::format_number(r.speed.c) + ")", {}, {}, false, true};
  for (int i = 0; i < r.psi.size(); ++i)
    if (!r.psi.is_masked(i)) s.x.push_back(section.y(i)), s.y.push_back(r.psi.values[i]);
  pp.series.push_back(s);
  pp.notes.push_back("max psi = " + io::format_number(r.psi.max_unmasked()));
  out.plot("psi", pp);

  io::Plot pm{"sign of m(c) selects c", "c", "m(c)", false, false, {}, {}};
  io::Series sm{"m", {}, {}, true, true};
  for (const auto& [c, m] : samples) sm.x.push_back(c), sm.y.push_back(m);
  pm.series.push_back(sm);
  out.plot("m_of_c", pm);
  out.log().write({{"event", "speed-sharp"}, {"c", r.speed.c}, {"fmc", fmc.speed.c}});
}

void cmd_speed_diffuse(const ExperimentConfig& cfg, Artifacts& out) {
  const DoubleWell well = cfg.make_well();
  const double eps = cfg.diffuse_eps;
  const CrossSection section = section_for_eps(cfg.length, eps);
  const Forcing forcing = build_forcing(cfg.make_forcing(), section);
  DiffuseRunParams p = cfg.diffuse_params(eps);

  if (!well.balanced()) {
    p.t_max = cfg.dynamic_t_max;
    const CylinderGrid grid = diffuse_grid(section, p);
    const InitialDatum step{InitialDatum::Kind::step_cosine, 0.0, 1.0, 1.0, "step"};
    const DynamicSpeedResult d =
        measure_speed_dynamic(make_initial(step, grid, eps, well), p, well, forcing);
    out.json_doc("c_eps.json", {{"eps", eps}, {"well", well.name()}, {"speed", speed_json(d.speed)}});
    io::CsvTable t({"t", "R_0.25", "R_0.5", "R_0.75"});
    for (std::size_t n = 0; n < d.times.size(); ++n)
      t.add_numbers({d.times[n], d.edges[0][n], d.edges[1][n], d.edges[2][n]});
    out.csv("r_theta.csv", t);
    out.log().write({{"event", "speed-diffuse"}, {"eps", eps}, {"c", d.speed.c}});
    return;
  }

  const DiffuseSpeedResult r = find_c_dagger_eps(p, well, forcing);
  out.json_doc("c_eps.json", {{"eps", eps},
                              {"c", r.speed.c},
                              {"speed", speed_json(r.speed)},
                              {"dynamic_speed", r.dynamic_speed},
                              {"cross_check_ok", r.cross_check_ok},
                              {"energy", r.energy.value},
                              {"energy_ok", r.energy_ok}});
  io::CsvTable h({"c", "outcome"});
  for (const auto& [c, o] : r.history) h.add_row({io::format_number(c), to_string(o)});
  out.csv("history.csv", h);
  out.csv("profile.csv", field_csv(r.profile));

  const Field& u = r.profile;
  io::Plot mid{"wave profile on the mid column", "z", "u", false, false, {}, {}};
  io::Series s{"u(L/2, z)", {}, {}, false, true};
  const int ic = u.grid.ny() / 2;
  for (int j = 0; j < u.grid.nz; ++j) s.x.push_back(u.grid.z(j)), s.y.push_back(u.at(ic, j));
  mid.series.push_back(s);
  mid.notes.push_back("c_eps = " + io::format_number(r.speed.c));
  out.plot("profile_midline", mid);

  io::Plot lv{"level set u = 1/2", "y", "z", false, false, {}, {}};
  io::Series ls{"z(y)", {}, {}, false, true};
  for (const Point& q : interface_centers(u, 0.5, u.grid.ny() - 2)) ls.x.push_back(q.y), ls.y.push_back(q.z);
  lv.series.push_back(ls);
  out.plot("level_set", lv);
  out.log().write({{"event", "speed-diffuse"}, {"eps", eps}, {"c", r.speed.c}});
}

void cmd_sweep(const ExperimentConfig& cfg, Artifacts& out, int workers) {
  const SweepTable t = run_eps_sweep(cfg.eps, cfg.sweep_config(workers));
  io::CsvTable csv({"eps", "c_eps", "dynamic_speed", "speed_error", "hausdorff",
                    "hausdorff_estimate", "v_defect", "ok", "error_code"});
  for (const SweepRow& r : t.rows) {
    csv.add_row({io::format_number(r.eps), io::format_number(r.c_eps),
                 io::format_number(r.dynamic_speed), io::format_number(r.speed_error),
                 io::format_number(r.hausdorff), io::format_number(r.hausdorff_estimate),
                 io::format_number(r.v_defect), r.ok ? "1" : "0", r.error_code});
    std::cerr << "eps " << r.eps << ": " << r.wall_clock << " s\n";
    out.log().write({{"event", "sweep-row"}, {"eps", r.eps}, {"ok", r.ok}, {"message", r.message}});
  }
  out.csv("sweep.csv", csv);
  out.csv("psi.csv", profile_csv(t.psi, "psi"));
  out.json_doc("sweep.json", {{"c_sharp", t.c_sharp},
                              {"M", t.M},
                              {"errors_decreasing", t.errors_decreasing},
                              {"order", t.order},
                              {"extrapolated", t.extrapolated},
                              {"single_limit", t.single_limit},
                              {"h4", report_json(t.h4)},
                              {"h6", report_json(t.h6)}});
  io::Plot p{"speed error against eps", "eps", "|c_eps - c|", true, true, {}, {}};
  io::Series s{"error", {}, {}, true, true};
  for (const SweepRow& r : t.rows)
    if (r.ok && r.speed_error > 0) s.x.push_back(r.eps), s.y.push_back(r.speed_error);
  p.series.push_back(s);
  p.notes.push_back("fitted slope " + io::format_number(t.order));
  out.plot("sweep_loglog", p);
}

void cmd_check_assumptions(const ExperimentConfig& cfg, Artifacts& out) {
  const DoubleWell well = cfg.make_well();
  require_balanced(well, "check-assumptions");
  const CrossSection section(cfg.length, cfg.sharp_nodes);
  const Forcing forcing = build_forcing(cfg.make_forcing(), section);
  const AssumptionReport h4 = check_h4(well, forcing);
  json doc = {{"h4", report_json(h4)}};
  try {
    doc["h6"] = report_json(check_h6_sufficient(well, forcing));
  } catch (const ConfigError& e) {
    doc["h6"] = {{"assumption", "H6"}, {"verdict", "undetermined"}, {"notes", {e.what()}}};
  }
  json wc = json::array();
  for (double eps : cfg.eps) {
    const CrossSection s = section_for_eps(cfg.length, eps);
    const WellConstantsReport r = check_well_constants(well, build_forcing(cfg.make_forcing(), s), eps);
    wc.push_back({{"eps", eps},
                  {"pass", r.pass},
                  {"nonnegative_margin", r.nonnegative_margin},
                  {"increase_margin", r.increase_margin},
                  {"reason", r.reason}});
  }
  doc["well_constants"] = wc;
  out.json_doc("assumptions.json", doc);
  out.log().write({{"event", "check-assumptions"}, {"h4", to_string(h4.verdict)}});
}

void cmd_simulate(const ExperimentConfig& cfg, Artifacts& out, std::uint64_t seed) {
  const DoubleWell well = cfg.make_well();
  const double eps = cfg.sim_eps;
  const CrossSection section = section_for_eps(cfg.length, eps);
  const Forcing forcing = build_forcing(cfg.make_forcing(), section);
  DiffuseRunParams p = cfg.diffuse_params(eps);
  p.t_max = cfg.sim_t_max;
  const double amp = std::abs(cfg.sim_initial.amplitude);
  const CylinderGrid grid(section, -amp - p.window_below * eps, amp + p.window_above * eps,
                          p.axial_spacing());
  Field u0 = make_initial(cfg.sim_initial, grid, eps, well);
  if (cfg.sim_noise > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-cfg.sim_noise, cfg.sim_noise);
    for (double& x : u0.u) x = std::clamp(x + noise(rng), 0.0, 1.0 + p.band_delta);
  }
  const DynamicSpeedResult d = measure_speed_dynamic(u0, p, well, forcing);
  io::CsvTable t({"t", "R_0.25", "R_0.5", "R_0.75"});
  for (std::size_t n = 0; n < d.times.size(); n += std::max<std::size_t>(1, d.times.size() / 2000))
    t.add_numbers({d.times[n], d.edges[0][n], d.edges[1][n], d.edges[2][n]});
  out.csv("r_theta.csv", t);
  out.csv("final_field.csv", field_csv(d.final_field));
  out.json_doc("simulate.json", {{"eps", eps}, {"speed", speed_json(d.speed)}, {"slopes", d.slopes}});
  io::Plot pr{"leading edges", "t", "R_theta", false, false, {}, {}};
  for (std::size_t k = 0; k < d.thetas.size(); ++k) {
    io::Series s{"theta = " + io::format_number(d.thetas[k]), t.numeric_column("t"), {}, false, true};
    s.y = t.numeric_column(t.header()[k + 1]);
    pr.series.push_back(s);
  }
  pr.notes.push_back("speed " + io::format_number(d.speed.c));
  out.plot("r_theta", pr);
  out.log().write({{"event", "simulate"}, {"eps", eps}, {"speed", d.speed.c}});

  if (cfg.stability_eps.empty()) return;
  const StabilityConfig sc = cfg.stability_config();
  io::CsvTable st({"eps", "label", "t", "l1"});
  json reports = json::array();
  io::Plot pl{"aligned L1(Sigma_M) distance to the sharp wave", "t", "L1", false, true, {}, {}};
  for (double e : cfg.stability_eps) {
    const StabilityReport rep = stability_experiment(e, cfg.stability_data, sc);
    json runs = json::array();
    for (const StabilityRun& r : rep.runs) {
      io::Series s{"eps " + io::format_number(e) + " " + r.label, r.times, r.l1, true, true};
      pl.series.push_back(s);
      for (std::size_t k = 0; k < r.times.size(); ++k)
        st.add_row({io::format_number(e), r.label, io::format_number(r.times[k]),
                    io::format_number(r.l1[k])});
      runs.push_back({{"label", r.label},
                      {"r_inf", r.r_inf},
                      {"initial", r.initial},
                      {"plateau", r.plateau},
                      {"plateau_reached", r.plateau_reached},
                      {"reduction", r.initial / r.plateau}});
    }
    reports.push_back({{"eps", e},
                       {"frame_speed", rep.frame_speed},
                       {"M", rep.M},
                       {"sigma_measure", rep.sigma_measure},
                       {"l1_estimate", rep.l1_estimate},
                       {"shape_spread", rep.shape_spread},
                       {"runs", runs}});
    out.log().write({{"event", "stability"}, {"eps", e}});
  }
  out.csv("stability.csv", st);
  out.json_doc("stability.json", reports);
  out.plot("stability", pl);
}

void cmd_density_audit(const ExperimentConfig& cfg, Artifacts& out) {
  const DoubleWell well = cfg.make_well();
  require_balanced(well, "density-audit");
  const double eps = cfg.density_eps;
  const CrossSection section = section_for_eps(cfg.length, eps);
  const Forcing forcing = build_forcing(cfg.make_forcing(), section);
  DiffuseRunParams p = cfg.diffuse_params(eps);
  p.cross_check = false;
  const DiffuseSpeedResult r = find_c_dagger_eps(p, well, forcing);
  const Field u = stretch(r.profile, eps);
  const std::vector<Point> centers = interface_centers(u, 0.5, cfg.centers);
  if (centers.empty()) throw NumericalError("no-interface", "the profile has no 1/2 crossing");
  const double alpha = fit_alpha(u, centers, cfg.r0);
  const DensityAudit a = density_audit_L2(u, centers, alpha, cfg.r0, cfg.R0);
  const LevelSetAudit ls = density_audit_levelset(u, cfg.beta, cfg.radii, centers[centers.size() / 2]);

  io::CsvTable t({"center_y", "center_z", "R", "mean_u2", "mean_1mu2"});
  for (std::size_t c = 0; c < a.centers.size(); ++c)
    for (std::size_t k = 0; k < a.radii.size(); ++k)
      t.add_numbers({a.centers[c].y, a.centers[c].z, static_cast<double>(a.radii[k]),
                     a.mean_u2[c][k], a.mean_1mu2[c][k]});
  out.csv("density_L2.csv", t);
  io::CsvTable lt({"R", "mu"});
  for (std::size_t k = 0; k < ls.radii.size(); ++k) lt.add_numbers({ls.radii[k], ls.mu[k]});
  out.csv("density_levelset.csv", lt);
  out.json_doc("density.json", {{"eps", eps},
                                {"c_eps", r.speed.c},
                                {"L2", {{"alpha", a.alpha},
                                        {"alpha_achieved", a.alpha_achieved},
                                        {"r0", cfg.r0},
                                        {"R0", cfg.R0},
                                        {"centers", a.centers.size()},
                                        {"pass", a.pass}}},
                                {"levelset", {{"beta", ls.beta},
                                              {"exponent", ls.exponent},
                                              {"C", ls.C},
                                              {"pass", ls.pass}}}});
  io::Plot pl{"measure of {|u| > beta} in B(x, R)", "R", "mu", true, true, {}, {}};
  pl.series.push_back({"mu", ls.radii, ls.mu, true, true});
  pl.notes.push_back("fitted exponent " + io::format_number(ls.exponent));
  out.plot("density_levelset", pl);
  out.log().write({{"event", "density-audit"}, {"alpha", alpha}, {"exponent", ls.exponent}});
}

void cmd_plot(const std::string& input, const std::string& kind, Artifacts& out) {
  const io::CsvTable t = io::CsvTable::parse(io::read_file(input));
  const std::string stem = fs::path(input).stem().string() + "_" + kind;
  io::Plot p;
  if (kind == "loglog") {
    const auto e = t.numeric_column("eps"), err = t.numeric_column("speed_error");
    p = {"speed error against eps", "eps", "|c_eps - c|", true, true, {}, {}};
    io::Series s{"error", {}, {}, true, true};
    for (std::size_t k = 0; k < e.size(); ++k)
      if (err[k] > 0 && std::isfinite(err[k])) s.x.push_back(e[k]), s.y.push_back(err[k]);
    if (s.x.size() < 2) throw ConfigError("plot", "need two positive errors for a log-log fit");
    std::vector<double> lx, ly;
    for (std::size_t k = s.x.size() >= 3 ? s.x.size() - 3 : 0; k < s.x.size(); ++k)
      lx.push_back(std::log(s.x[k])), ly.push_back(std::log(s.y[k]));
    const num::LineFit f = num::fit_line(lx, ly);
    p.series.push_back(s);
    io::Series fit{"fit", {}, {}, false, true};
    for (double x : s.x) fit.x.push_back(x), fit.y.push_back(std::exp(f.intercept) * std::pow(x, f.slope));
    p.series.push_back(fit);
    p.notes.push_back("fitted slope " + io::format_number(f.slope));
  } else if (kind == "profile") {
    const auto y = t.numeric_column("y"), psi = t.numeric_column("psi");
    p = {"generalized traveling wave", "y", "psi", false, false, {}, {}};
    io::Series s{"psi", {}, {}, false, true};
    for (std::size_t k = 0; k < y.size(); ++k)
      if (std::isfinite(psi[k])) s.x.push_back(y[k]), s.y.push_back(psi[k]);
    p.series.push_back(s);
  } else if (kind == "trace") {
    const auto tt = t.numeric_column("t");
    p = {"leading edges", "t", "R_theta", false, false, {}, {}};
    for (const std::string& h : t.header())
      if (h != "t") p.series.push_back({h, tt, t.numeric_column(h), false, true});
  } else if (kind == "m_of_c") {
    p = {"sign of m(c) selects c", "c", "m(c)", false, false, {}, {}};
    p.series.push_back({"m", t.numeric_column("c"), t.numeric_column("m"), true, true});
  } else {
    throw ConfigError("plot", "unknown plot kind '" + kind + "'");
  }
  out.plot(stem, p);
}

int fail(const Error& e, int code, const std::string& command, const fs::path& dir) {
  const json rec = {{"status", "error"},
                    {"command", command},
                    {"code", e.code()},
                    {"message", e.what()},
                    {"exit", code}};
  std::cerr << rec.dump() << "\n";
  try {
    io::write_atomic(dir / "error.json", rec.dump(2) + "\n");
  } catch (const std::exception&) {
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traveling fronts in stratified cylinders: sharp and diffuse wave speeds"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "experiment configuration (JSON)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--workers", g.workers, "parallel sweep rows")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed for randomized initial data");

  std::string plot_input, plot_kind = "loglog";
  CLI::App* speed_sharp = app.add_subcommand("speed-sharp", "variational and dynamic sharp speed");
  CLI::App* speed_diffuse = app.add_subcommand("speed-diffuse", "diffuse wave speed at one eps");
  CLI::App* sweep = app.add_subcommand("sweep", "eps sweep against the sharp limit");
  CLI::App* check = app.add_subcommand("check-assumptions", "existence and uniqueness checks");
  CLI::App* simulate = app.add_subcommand("simulate", "evolution, leading edges, stability");
  CLI::App* density = app.add_subcommand("density-audit", "density estimates on the wave");
  CLI::App* plot = app.add_subcommand("plot", "SVG chart from a CSV written by this tool");
  plot->add_option("--input", plot_input, "CSV file")->required();
  plot->add_option("--kind", plot_kind, "loglog | profile | trace | m_of_c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  fs::path dir = g.out.empty() ? fs::path("out") : fs::path(g.out);
  try {
    ExperimentConfig cfg;
    const bool needs_config = cmd != plot;
    if (needs_config) {
      if (g.config.empty()) throw ConfigError("schema", "--config is required for " + name);
      cfg = ExperimentConfig::from_file(g.config);
      if (g.out.empty() && !cfg.output_dir.empty()) dir = cfg.output_dir;
    }
    Artifacts out(dir);
    if (cmd == speed_sharp) cmd_speed_sharp(cfg, out);
    else if (cmd == speed_diffuse) cmd_speed_diffuse(cfg, out);
    else if (cmd == sweep) cmd_sweep(cfg, out, g.workers);
    else if (cmd == check) cmd_check_assumptions(cfg, out);
    else if (cmd == simulate) cmd_simulate(cfg, out, g.seed);
    else if (cmd == density) cmd_density_audit(cfg, out);
    else cmd_plot(plot_input, plot_kind, out);
    out.finish(name, g.config, needs_config ? &cfg : nullptr, g.seed);
  } catch (const ConfigError& e) {
    return fail(e, 2, name, dir);
  } catch (const Error& e) {
    return fail(e, 3, name, dir);
  } catch (const std::exception& e) {
    return fail(Error("internal", e.what()), 3, name, dir);
  }
  return 0;
}
