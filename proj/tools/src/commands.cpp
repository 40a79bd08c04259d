#include "lowmach_cli/cli.hpp"

#include "lowmach/compressible_solver.hpp"
#include "lowmach/error.hpp"
#include "lowmach/jensen.hpp"
#include "lowmach/limit_driver.hpp"
#include "lowmach/parallel.hpp"
#include "lowmach/relaxed_operator.hpp"
#include "lowmach/report_io.hpp"
#include "lowmach/state_space.hpp"
#include "lowmach/young_measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace lowmach::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "ladder",          "jensen",  "wavecone",
                                              "envelope", "relative-energy", "residual"};
  return names;
}

namespace {

struct Context {
  const CliConfig& cli;
  std::ostream& out;
  std::ostream& err;

  void log(const std::string& msg) const {
    if (cli.verbosity > 0) err << "[lowmach] " << msg << "\n";
  }
  std::string path(const std::string& name) const { return (fs::path(cli.output_dir) / name).string(); }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void prepare_output_dir(const Context& c) {
  std::error_code ec;
  fs::create_directories(c.cli.output_dir, ec);
  if (ec || !fs::is_directory(c.cli.output_dir))
    throw ValidationError("output directory '" + c.cli.output_dir + "' cannot be created", "output_dir");
  const fs::path probe = fs::path(c.cli.output_dir) / ".lowmach_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw ValidationError("output directory '" + c.cli.output_dir + "' is not writable", "output_dir");
  }
  fs::remove(probe, ec);
}

// --- simulation configuration ------------------------------------------------

std::string qualify_sim_field(const std::string& f) {
  static const std::map<std::string, std::string> where{
      {"d", "params.d"},         {"gamma", "params.gamma"},       {"eps", "params.eps"},
      {"rho_bar", "params.rho_bar"}, {"T", "params.T"},             {"n", "solver.n"},
      {"cfl", "solver.cfl"},     {"max_steps", "solver.max_steps"}, {"snapshot_count", "solver.snapshot_count"},
      {"snapshot_times", "solver.snapshot_times"}, {"flux", "solver.flux"}};
  const auto it = where.find(f);
  return it == where.end() ? f : it->second;
}

SimConfig read_sim(Section& root, const SimConfig& defaults) {
  SimConfig c = defaults;
  Section p = root.section("params");
  c.p.gamma = p.number("gamma", c.p.gamma);
  c.p.eps = p.number("eps", c.p.eps);
  c.p.rho_bar = p.number("rho_bar", c.p.rho_bar);
  c.p.T = p.number("T", c.p.T);
  p.finish();

  Section s = root.section("solver");
  c.n = static_cast<int>(s.integer("n", c.n));
  c.cfl = s.number("cfl", c.cfl);
  try {
    c.flux = flux_from_string(s.string("flux", to_string(c.flux)));
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), s.field("flux"));
  }
  c.snapshot_count = static_cast<int>(s.integer("snapshot_count", c.snapshot_count));
  c.snapshot_times = s.numbers("snapshot_times", c.snapshot_times);
  c.max_steps = s.integer("max_steps", c.max_steps);
  s.finish();

  Section i = root.section("init");
  c.init.name = i.string("name", c.init.name);
  c.init.amplitude = i.number("amplitude", c.init.amplitude);
  c.init.delta = i.number("delta", c.init.delta);
  c.init.ux = i.number("ux", c.init.ux);
  c.init.uy = i.number("uy", c.init.uy);
  i.finish();
  return c;
}

void validate_sim(const SimConfig& c) {
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), qualify_sim_field(e.field()));
  }
}

SimConfig sim_defaults() {
  SimConfig c;
  c.p.eps = 0.1;
  c.p.T = 0.5;
  return c;
}

json sim_json(const SimConfig& c) {
  json j = {{"params", {{"d", c.p.d}, {"gamma", c.p.gamma}, {"eps", c.p.eps}, {"rho_bar", c.p.rho_bar}, {"T", c.p.T}}},
            {"solver",
             {{"n", c.n},
              {"cfl", c.cfl},
              {"flux", to_string(c.flux)},
              {"snapshot_count", c.snapshot_count},
              {"max_steps", c.max_steps}}},
            {"init",
             {{"name", c.init.name},
              {"amplitude", c.init.amplitude},
              {"delta", c.init.delta},
              {"ux", c.init.ux},
              {"uy", c.init.uy}}}};
  if (!c.snapshot_times.empty()) j["solver"]["snapshot_times"] = c.snapshot_times;
  return j;
}

json admissibility_json(const AdmissibilityResult& a) {
  return {{"admissible", a.admissible},
          {"nonincreasing", a.nonincreasing},
          {"max_excess", a.max_excess},
          {"max_increase", a.max_increase},
          {"tolerance", a.tolerance}};
}

int print_plan(const Context& c, const std::string& sub, const json& config, const std::vector<std::string>& steps,
               const std::vector<std::string>& outputs) {
  json plan = {{"subcommand", sub},     {"dry_run", true},   {"seed", c.cli.seed}, {"threads", c.cli.threads},
               {"output_dir", c.cli.output_dir}, {"config", config}, {"steps", steps}, {"outputs", outputs}};
  c.out << report::dump(plan) << "\n";
  return kExitOk;
}

void write_csv_series(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  std::vector<std::vector<report::CsvCell>> rows;
  if (!columns.empty())
    for (std::size_t i = 0; i < columns.front().size(); ++i) {
      std::vector<report::CsvCell> row;
      for (const auto& col : columns) row.emplace_back(col[i]);
      rows.push_back(std::move(row));
    }
  report::write_csv(path, header, rows);
}

// --- simulate -----------------------------------------------------------------

int cmd_simulate(const Context& c, Section& root) {
  const SimConfig cfg = read_sim(root, sim_defaults());
  Section o = root.section("output");
  const bool write_snapshots = o.boolean("write_snapshots", true);
  const bool weak = o.boolean("weak_residual", true);
  const int kmax = static_cast<int>(o.integer("kmax", 4));
  o.finish();
  Section ch = root.section("checks");
  const bool assert_admissible = ch.boolean("assert_admissible", false);
  ch.finish();
  root.finish();
  validate_sim(cfg);
  const std::size_t nsnap = cfg.resolved_snapshot_times().size();
  if (weak) {
    require(nsnap >= 16, "the weak residual needs at least 16 snapshots", "output.weak_residual");
    require(kmax >= 0, "kmax must be nonnegative", "output.kmax");
  }

  json config = sim_json(cfg);
  config["output"] = {{"write_snapshots", write_snapshots}, {"weak_residual", weak}, {"kmax", kmax}};
  config["checks"] = {{"assert_admissible", assert_admissible}};
  if (c.cli.dry_run) {
    std::vector<std::string> outputs{"simulate.json", "energy.json"};
    if (write_snapshots) outputs.push_back("snapshots/snap_NNNN.bin x " + std::to_string(nsnap));
    return print_plan(c, "simulate", config,
                      {"run the finite-volume solver to T", "record the energy series", "check admissibility",
                       weak ? "evaluate weak-form residuals" : "skip weak-form residuals"},
                      outputs);
  }

  prepare_output_dir(c);
  c.log("running solver n = " + std::to_string(cfg.n) + ", eps = " + num(cfg.p.eps));
  const Trajectory traj = run(cfg);
  c.log("finished after " + std::to_string(traj.steps) + " steps");

  json doc = {{"schema", "lowmach.simulate/1"}, {"seed", c.cli.seed}, {"config", config}, {"steps", traj.steps}};
  std::vector<std::string> snaps;
  if (write_snapshots) {
    fs::create_directories(fs::path(c.cli.output_dir) / "snapshots");
    for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshots/snap_%04zu.bin", j);
      write_snapshot(c.path(name), traj.snapshots[j], cfg.p);
      snaps.emplace_back(name);
    }
  }
  doc["snapshots"] = snaps;
  write_energy_sidecar(c.path("energy.json"), traj);
  doc["energy_sidecar"] = "energy.json";
  const auto adm = admissibility_check(traj);
  doc["admissibility"] = admissibility_json(adm);

  auto totals = [&](const FieldState& s) {
    double mass = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < s.rho.size(); ++k) {
      mass += s.rho[k];
      mx += s.rho[k] * s.ux[k];
      my += s.rho[k] * s.uy[k];
    }
    const double h2 = 1.0 / (static_cast<double>(s.n) * s.n);
    return std::array<double, 3>{mass * h2, mx * h2, my * h2};
  };
  const auto first = totals(traj.snapshots.front());
  const auto last = totals(traj.snapshots.back());
  doc["conservation"] = {{"mass_initial", first[0]}, {"mass_final", last[0]},
                         {"momentum_initial", {first[1], first[2]}}, {"momentum_final", {last[1], last[2]}}};
  if (weak) doc["weak_residual"] = to_json(weak_residual(traj, kmax));
  report::write_json(c.path("simulate.json"), doc);

  c.out << "steps = " << traj.steps << "\n";
  c.out << "admissible = " << (adm.admissible ? "true" : "false") << "\n";
  if (assert_admissible && !adm.admissible) throw CheckFailed("energy exceeds its initial value beyond tolerance");
  return kExitOk;
}

// --- ladder ---------------------------------------------------------------------

jensen::JensenReportOptions read_jensen_options(Section& s, std::uint64_t seed) {
  jensen::JensenReportOptions o;
  o.q = s.number("q", o.q);
  o.diatomic_tol = s.number("diatomic_tol", o.diatomic_tol);
  o.laminate_depth = static_cast<int>(s.integer("laminate_depth", o.laminate_depth));
  o.planewave_modes = static_cast<int>(s.integer("planewave_modes", o.planewave_modes));
  o.quad_points = static_cast<int>(s.integer("quad_points", o.quad_points));
  o.trials = static_cast<int>(s.integer("trials", o.trials));
  o.time_stride = static_cast<int>(s.integer("time_stride", o.time_stride));
  o.seed = seed;
  s.finish();
  require(o.q >= 0.0, "q must be nonnegative", s.field("q"));
  require(o.diatomic_tol > 0.0, "diatomic_tol must be positive", s.field("diatomic_tol"));
  require(o.laminate_depth >= 1, "laminate_depth must be at least 1", s.field("laminate_depth"));
  require(o.planewave_modes == 1 || o.planewave_modes == 2, "planewave_modes must be 1 or 2", s.field("planewave_modes"));
  require(o.quad_points >= 4, "quad_points must be at least 4", s.field("quad_points"));
  require(o.trials >= 0, "trials must be nonnegative", s.field("trials"));
  require(o.time_stride >= 1, "time_stride must be positive", s.field("time_stride"));
  return o;
}

json jensen_options_json(const jensen::JensenReportOptions& o) {
  return {{"q", o.q},
          {"diatomic_tol", o.diatomic_tol},
          {"laminate_depth", o.laminate_depth},
          {"planewave_modes", o.planewave_modes},
          {"quad_points", o.quad_points},
          {"trials", o.trials},
          {"time_stride", o.time_stride}};
}

int cmd_ladder(const Context& c, Section& root) {
  limit::MachLadder ladder;
  Section l = root.section("ladder");
  ladder.eps_list = l.numbers("eps_list", ladder.eps_list);
  l.finish();
  ladder.base = read_sim(root, sim_defaults());

  limit::LadderAnalysisOptions opt;
  Section a = root.section("analysis");
  opt.coarsen = static_cast<int>(a.integer("coarsen", opt.coarsen));
  opt.measure_time_stride = static_cast<int>(a.integer("measure_time_stride", opt.measure_time_stride));
  opt.jensen_time_stride = static_cast<int>(a.integer("jensen_time_stride", opt.jensen_time_stride));
  opt.kappa = a.number("kappa", opt.kappa);
  opt.run_jensen = a.boolean("run_jensen", opt.run_jensen);
  opt.run_cauchy = a.boolean("run_cauchy", opt.run_cauchy);
  const bool include_cells = a.boolean("include_cells", false);
  a.finish();
  Section js = root.section("jensen");
  opt.jensen = read_jensen_options(js, c.cli.seed);
  Section ch = root.section("checks");
  const bool assert_no_violation = ch.boolean("assert_no_violation", true);
  const bool assert_concentration = ch.boolean("assert_concentration", false);
  const bool assert_lift = ch.boolean("assert_lift", false);
  ch.finish();
  Section o = root.section("output");
  const bool write_snapshots = o.boolean("write_snapshots", false);
  const bool write_measure = o.boolean("write_measure", false);
  o.finish();
  root.finish();

  try {
    ladder.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), e.field() == "eps_list" ? "ladder.eps_list" : qualify_sim_field(e.field()));
  }
  require(opt.coarsen >= 1 && ladder.base.n % opt.coarsen == 0, "coarsen must divide solver.n", "analysis.coarsen");
  require(opt.measure_time_stride >= 1, "measure_time_stride must be positive", "analysis.measure_time_stride");
  require(opt.jensen_time_stride >= 1, "jensen_time_stride must be positive", "analysis.jensen_time_stride");
  require(opt.kappa > 0.0, "kappa must be positive", "analysis.kappa");
  require(ladder.eps_list.size() >= 3 || !assert_concentration, "the concentration fit needs at least three eps values",
          "ladder.eps_list");

  json config = sim_json(ladder.base);
  config["params"].erase("eps");
  config["ladder"] = {{"eps_list", ladder.eps_list}};
  config["analysis"] = {{"coarsen", opt.coarsen},
                        {"measure_time_stride", opt.measure_time_stride},
                        {"jensen_time_stride", opt.jensen_time_stride},
                        {"kappa", opt.kappa},
                        {"run_jensen", opt.run_jensen},
                        {"run_cauchy", opt.run_cauchy},
                        {"include_cells", include_cells}};
  config["jensen"] = jensen_options_json(opt.jensen);
  config["checks"] = {{"assert_no_violation", assert_no_violation},
                      {"assert_concentration", assert_concentration},
                      {"assert_lift", assert_lift}};
  config["output"] = {{"write_snapshots", write_snapshots}, {"write_measure", write_measure}};

  if (c.cli.dry_run) {
    std::vector<std::string> steps;
    for (double e : ladder.eps_list) steps.push_back("run solver at eps = " + num(e));
    steps.push_back("extract empirical Young measures (coarsen " + std::to_string(opt.coarsen) + ")");
    if (opt.run_cauchy) steps.push_back("Cauchy distances between consecutive rungs");
    steps.push_back("concentration fit, lift bound, relative energy, Taylor gap, augmented residual");
    if (opt.run_jensen) steps.push_back("Jensen check on the finest-eps measure");
    std::vector<std::string> outputs{"report.json", "ladder.csv"};
    if (write_snapshots) outputs.push_back("snapshots/eps_NN_final.bin + energy sidecars");
    if (write_measure) outputs.push_back("limit_measure.json");
    return print_plan(c, "ladder", config, steps, outputs);
  }

  prepare_output_dir(c);
  c.log("running " + std::to_string(ladder.eps_list.size()) + " ladder rungs");
  const auto runs = limit::run_ladder(ladder);
  c.log("analysing ladder");
  const auto rep = limit::analyze_ladder(ladder, runs, opt);

  json doc = limit::to_json(rep, include_cells);
  doc["config"] = config;
  json files = json::array();
  if (write_snapshots) {
    fs::create_directories(fs::path(c.cli.output_dir) / "snapshots");
    for (std::size_t i = 0; i < runs.size(); ++i) {
      char snap[64], energy[64];
      std::snprintf(snap, sizeof snap, "snapshots/eps_%02zu_final.bin", i);
      std::snprintf(energy, sizeof energy, "snapshots/eps_%02zu_energy.json", i);
      write_snapshot(c.path(snap), runs[i].traj.snapshots.back(), runs[i].traj.config.p);
      write_energy_sidecar(c.path(energy), runs[i].traj);
      files.push_back({{"eps", runs[i].eps}, {"final_snapshot", snap}, {"energy", energy}});
    }
  }
  doc["snapshot_files"] = files;
  if (write_measure) {
    const auto lm = limit::extract_limit_measure(runs, opt.coarsen, opt.measure_time_stride, false);
    report::write_json(c.path("limit_measure.json"), young::to_json(lm.limit));
    doc["limit_measure"] = "limit_measure.json";
  }
  report::write_json(c.path("report.json"), doc);

  std::vector<std::vector<report::CsvCell>> rows;
  for (const auto& m : rep.runs)
    rows.push_back({m.eps, m.steps, m.concentration_norm, m.lift_sup, m.density_deviation_sup, m.lift_cross_check,
                    m.incompressibility_residual, m.energy_excess, m.energy_nonincreasing, m.e_rel_final,
                    m.relative_energy_bound, m.taylor_gap, m.augmented_residual, m.pressure_variance});
  report::write_csv(c.path("ladder.csv"),
                    {"eps", "steps", "concentration_norm", "lift_sup", "density_deviation_sup", "lift_cross_check",
                     "incompressibility_residual", "energy_excess", "energy_nonincreasing", "e_rel_final",
                     "relative_energy_bound", "taylor_gap", "augmented_residual", "pressure_variance"},
                    rows);

  c.out << "concentration slope = " << num(rep.concentration.slope) << "\n";
  c.out << "lift bound = " << (rep.lift.pass ? "PASS" : "FAIL") << "\n";
  if (rep.jensen_evaluated)
    c.out << "jensen: violated = " << rep.jensen.violated << ", certified = " << rep.jensen.certified
          << ", inconclusive = " << rep.jensen.inconclusive << "\n";

  if (assert_no_violation && rep.jensen_evaluated && rep.jensen.violated > 0)
    throw CheckFailed("Jensen violation found in a ladder-extracted measure");
  if (assert_concentration && !rep.concentration.pass) throw CheckFailed("concentration rate check failed");
  if (assert_lift && !rep.lift.pass) throw CheckFailed("pressure-lift bound check failed");
  return kExitOk;
}

// --- jensen ---------------------------------------------------------------------

int cmd_jensen(const Context& c, Section& root) {
  young::YoungMeasure mu;
  json input;
  std::string measure_path;
  std::vector<double> u1, u2;
  double P1 = 0.0, P2 = 0.0, weight = 0.5;
  const bool from_file = root.has("measure");
  if (from_file) {
    Section m = root.section("measure");
    measure_path = m.string("path", "");
    m.finish();
    require(!measure_path.empty(), "measure.path is required", "measure.path");
    input = {{"measure", measure_path}};
  } else {
    require(root.has("diatomic"), "provide either a [measure] or a [diatomic] table", "diatomic");
    Section dia = root.section("diatomic");
    u1 = dia.numbers("u1", {});
    u2 = dia.numbers("u2", {});
    P1 = dia.number("P1", 0.0);
    P2 = dia.number("P2", 0.0);
    weight = dia.number("weight", 0.5);
    dia.finish();
    require(u1.size() >= 2, "u1 needs at least two components", "diatomic.u1");
    require(u2.size() == u1.size(), "u2 must match the dimension of u1", "diatomic.u2");
    require(weight > 0.0 && weight < 1.0, "weight must lie in (0, 1)", "diatomic.weight");
    input = {{"diatomic", {{"u1", u1}, {"P1", P1}, {"u2", u2}, {"P2", P2}, {"weight", weight}}}};
  }
  Section dict_s = root.section("dictionary");
  std::vector<double> center = dict_s.numbers("c", {});
  const double p0 = dict_s.number("p0", 0.0);
  dict_s.finish();
  Section js = root.section("jensen");
  const auto opt = read_jensen_options(js, c.cli.seed);
  Section ch = root.section("checks");
  const bool assert_no_violation = ch.boolean("assert_no_violation", false);
  ch.finish();
  root.finish();

  if (from_file) {
    std::ifstream in(measure_path);
    if (!in) throw ValidationError("cannot read measure file '" + measure_path + "'", "measure.path");
    try {
      mu = young::young_measure_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed measure file: ") + e.what(), "measure.path");
    }
  } else {
    const int d = static_cast<int>(u1.size());
    Eigen::VectorXd a(d + 1), b(d + 1);
    a << to_eigen(u1), P1;
    b << to_eigen(u2), P2;
    young::SpacetimeGrid grid;
    grid.d = d;
    grid.n = 1;
    grid.T = 1.0;
    grid.times = {0.0};
    mu = young::YoungMeasure(grid, d + 1, {young::AtomicMeasure({{weight, a}, {1.0 - weight, b}})});
  }
  const int d = mu.dim() - 1;
  require(d >= 2, "the measure must live on (u, P) with d >= 2", from_file ? "measure.path" : "diatomic.u1");
  if (center.empty()) center.assign(static_cast<std::size_t>(d), 0.0);
  require(static_cast<int>(center.size()) == d, "dictionary.c must have d components", "dictionary.c");

  json config = {{"input", input}, {"dictionary", {{"c", center}, {"p0", p0}}}, {"jensen", jensen_options_json(opt)},
                 {"checks", {{"assert_no_violation", assert_no_violation}}}};
  if (c.cli.dry_run)
    return print_plan(c, "jensen", config,
                      {"lift cells to relaxed coordinates", "di-atomic criterion where applicable",
                       "envelope estimates for the remaining cells"},
                      {"jensen.json"});

  prepare_output_dir(c);
  const auto dict = jensen::default_dictionary(d, to_eigen(center), p0);
  const auto rep = jensen::jensen_report(mu, dict, opt);
  json doc = {{"schema", "lowmach.jensen_report/1"}, {"seed", c.cli.seed}, {"config", config},
              {"report", jensen::to_json(rep)}};
  report::write_json(c.path("jensen.json"), doc);
  c.out << "violated = " << rep.violated << ", certified = " << rep.certified << ", inconclusive = " << rep.inconclusive
        << "\n";
  if (assert_no_violation && rep.violated > 0) throw CheckFailed("Jensen violation found");
  return kExitOk;
}

// --- wavecone -------------------------------------------------------------------

int cmd_wavecone(const Context& c, Section& root) {
  require(root.has("wavecone"), "a [wavecone] table is required", "wavecone");
  Section w = root.section("wavecone");
  WaveConeOptions opt;
  opt.tol = w.number("tol", opt.tol);
  opt.sweep_per_angle = static_cast<int>(w.integer("sweep_per_angle", opt.sweep_per_angle));
  opt.refine_steps = static_cast<int>(w.integer("refine_steps", opt.refine_steps));
  opt.polish_steps = static_cast<int>(w.integer("polish_steps", opt.polish_steps));
  const bool from_states = w.has("u1") || w.has("u2") || w.has("P1") || w.has("P2");
  std::vector<double> u1, u2, z;
  double P1 = 0.0, P2 = 0.0;
  long d = 0;
  if (from_states) {
    u1 = w.numbers("u1", {});
    u2 = w.numbers("u2", {});
    P1 = w.number("P1", 0.0);
    P2 = w.number("P2", 0.0);
    require(u1.size() >= 2, "u1 needs at least two components", w.field("u1"));
    require(u2.size() == u1.size(), "u2 must match the dimension of u1", w.field("u2"));
    d = static_cast<long>(u1.size());
  } else {
    z = w.numbers("z", {});
    d = w.integer("d", 2);
    require(d >= 2, "d must be at least 2", w.field("d"));
    require(static_cast<long>(z.size()) == relaxed_dim(static_cast<int>(d)), "z must have relaxed dimension for d",
            w.field("z"));
  }
  w.finish();
  root.finish();
  require(opt.tol > 0.0, "tol must be positive", "wavecone.tol");
  require(opt.sweep_per_angle >= 4, "sweep_per_angle must be at least 4", "wavecone.sweep_per_angle");
  require(opt.refine_steps >= 0 && opt.polish_steps >= 0, "iteration counts must be nonnegative", "wavecone.refine_steps");

  json config = {{"d", d}, {"tol", opt.tol}, {"sweep_per_angle", opt.sweep_per_angle},
                 {"refine_steps", opt.refine_steps}, {"polish_steps", opt.polish_steps}};
  if (from_states) config["states"] = {{"u1", u1}, {"P1", P1}, {"u2", u2}, {"P2", P2}};
  else config["z"] = z;
  if (c.cli.dry_run) {
    std::vector<std::string> steps;
    if (from_states) steps.push_back("lift both states and take the difference");
    if (from_states && d == 2) steps.push_back("3x3 determinant of the contracted symbol");
    steps.push_back("sphere sweep, Nelder-Mead refinement and inverse-iteration polish of the smallest singular value");
    return print_plan(c, "wavecone", config, steps, {"wavecone.json"});
  }

  prepare_output_dir(c);
  const OperatorAE op(static_cast<int>(d));
  RelaxedState diff(static_cast<int>(d));
  json doc = {{"schema", "lowmach.wavecone/1"}, {"config", config}};
  bool have_det = false;
  DiatomicDeterminant det;
  if (from_states) {
    const RelaxedState z1 = lift_S({to_eigen(u1), P1});
    const RelaxedState z2 = lift_S({to_eigen(u2), P2});
    diff = z1 - z2;
    if (d == 2) {
      det = diatomic_det(z1, z2);
      have_det = true;
      doc["determinant"] = {{"value", det.determinant}, {"closed_form", det.closed_form}};
    }
  } else {
    diff = RelaxedState(static_cast<int>(d), to_eigen(z));
  }
  require(diff.vector().norm() > 0.0, "the state difference is zero", from_states ? "wavecone.u1" : "wavecone.z");
  const auto rep = wave_cone_membership(op, diff, opt);
  doc["difference"] = vec(diff.vector());
  doc["membership"] = to_json(rep);
  report::write_json(c.path("wavecone.json"), doc);

  if (have_det) c.out << "det = " << num(det.determinant) << "\n";
  c.out << "membership " << (rep.member ? "true" : "false") << "\n";
  c.out << "min singular value = " << num(rep.min_singular_value) << "\n";
  return kExitOk;
}

// --- envelope -------------------------------------------------------------------

int cmd_envelope(const Context& c, Section& root) {
  require(root.has("envelope"), "an [envelope] table is required", "envelope");
  Section e = root.section("envelope");
  const int d = static_cast<int>(e.integer("d", 2));
  require(d >= 2, "d must be at least 2", e.field("d"));
  const int N = relaxed_dim(d);
  Eigen::VectorXd z;
  json point;
  if (e.has("u") || e.has("P")) {
    const auto u = e.numbers("u", std::vector<double>(static_cast<std::size_t>(d), 0.0));
    const double P = e.number("P", 0.0);
    require(static_cast<int>(u.size()) == d, "u must have d components", e.field("u"));
    z = lift_S({to_eigen(u), P}).vector();
    point = {{"u", u}, {"P", P}};
  } else {
    const auto zz = e.numbers("z", std::vector<double>(static_cast<std::size_t>(N), 0.0));
    require(static_cast<int>(zz.size()) == N, "z must have the relaxed dimension", e.field("z"));
    z = to_eigen(zz);
    point = {{"z", zz}};
  }
  const std::string function = e.string("function", "kernel_quadratic");
  const auto center = e.numbers("c", std::vector<double>(static_cast<std::size_t>(d), 0.0));
  const double p0 = e.number("p0", 0.0);
  std::vector<int> freq(static_cast<std::size_t>(d + 1), 0);
  freq[0] = 1;
  freq = e.integers("kernel_frequency", freq);
  const int kernel_index = static_cast<int>(e.integer("kernel_index", 0));
  const std::string method = e.string("method", "both");
  std::vector<int> depths{static_cast<int>(e.integer("depth", 1))};
  depths = e.integers("depths", depths);
  const int modes = static_cast<int>(e.integer("modes", 1));
  std::vector<double> qs{e.number("q", 1.0)};
  qs = e.numbers("q_list", qs);
  const double h = e.number("h", 0.0);
  const int trials = static_cast<int>(e.integer("trials", 6));
  const int quad_points = static_cast<int>(e.integer("quad_points", 32));
  e.finish();
  root.finish();

  require(method == "laminate" || method == "planewave" || method == "both",
          "method must be laminate, planewave or both", "envelope.method");
  require(static_cast<int>(center.size()) == d, "c must have d components", "envelope.c");
  for (int dep : depths) require(dep >= 1 && dep <= 4, "depths must lie in [1, 4]", "envelope.depths");
  require(modes == 1 || modes == 2, "modes must be 1 or 2", "envelope.modes");
  for (double q : qs) require(q >= 0.0, "q must be nonnegative", "envelope.q");
  require(h >= 0.0, "h must be nonnegative", "envelope.h");
  require(trials >= 0, "trials must be nonnegative", "envelope.trials");
  require(quad_points >= 4, "quad_points must be at least 4", "envelope.quad_points");

  const OperatorAE op(d);
  jensen::Fn f;
  if (function == "kernel_quadratic") {
    require(static_cast<int>(freq.size()) == d + 1, "kernel_frequency needs d + 1 integers", "envelope.kernel_frequency");
    require(std::any_of(freq.begin(), freq.end(), [](int k) { return k != 0; }), "kernel_frequency must be nonzero",
            "envelope.kernel_frequency");
    const Eigen::MatrixXd K = op.kernel(integer_frequency(freq, 1.0));
    require(kernel_index >= 0 && kernel_index < K.cols(), "kernel_index out of range", "envelope.kernel_index");
    const Eigen::VectorXd v = K.col(kernel_index);
    const Eigen::VectorXd z0 = z;
    f = [v, z0](const Eigen::VectorXd& x) {
      const double s = v.dot(x - z0);
      return 0.0 - s * s;
    };
  } else {
    const auto dict = jensen::default_dictionary(d, to_eigen(center), p0);
    const auto it = std::find_if(dict.entries.begin(), dict.entries.end(),
                                 [&](const young::TestFunction& t) { return t.name == function; });
    if (it == dict.entries.end()) {
      std::string names = "kernel_quadratic";
      for (const auto& t : dict.entries) names += ", " + t.name;
      throw ValidationError("unknown function '" + function + "' (known: " + names + ")", "envelope.function");
    }
    f = it->eval;
  }

  json config = {{"d", d},          {"point", point}, {"function", function}, {"c", center},
                 {"p0", p0},        {"method", method}, {"depths", depths},     {"modes", modes},
                 {"q_list", qs},    {"h", h},         {"trials", trials},     {"quad_points", quad_points}};
  if (function == "kernel_quadratic") config["kernel"] = {{"frequency", freq}, {"index", kernel_index}};
  if (c.cli.dry_run) {
    std::vector<std::string> steps;
    for (double q : qs) {
      if (method != "planewave")
        for (int dep : depths) steps.push_back("laminate estimate, depth " + std::to_string(dep) + ", q = " + num(q));
      if (method != "laminate") steps.push_back("plane-wave estimate, modes " + std::to_string(modes) + ", q = " + num(q));
    }
    steps.push_back("re-evaluate every certificate by independent quadrature");
    return print_plan(c, "envelope", config, steps, {"envelope.json"});
  }

  prepare_output_dir(c);
  json estimates = json::array();
  auto record = [&](const jensen::EnvelopeEstimate& est, json extra) {
    const double re = jensen::reevaluate(est, f);
    const double rel = std::abs(re - est.value) / std::max(1.0, std::abs(est.value));
    json j = jensen::to_json(est);
    j["reevaluated"] = re;
    j["reevaluation_error"] = rel;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    estimates.push_back(j);
    c.out << est.method << " " << extra.dump() << ": value = " << num(est.value) << ", f(z) = " << num(est.f_at_z)
          << "\n";
  };
  for (double q : qs) {
    if (method != "planewave")
      for (int dep : depths) {
        jensen::LaminateOptions lo;
        lo.depth = dep;
        lo.q = q;
        lo.h = h;
        lo.trials = trials;
        lo.seed = c.cli.seed;
        record(jensen::envelope_upper_laminate(op, f, z, lo), {{"depth", dep}, {"q", q}});
      }
    if (method != "laminate") {
      jensen::PlaneWaveOptions po;
      po.modes = modes;
      po.q = q;
      po.h = h;
      po.trials = trials;
      po.quad_points = quad_points;
      po.seed = c.cli.seed;
      record(jensen::envelope_upper_planewave(op, f, z, po), {{"modes", modes}, {"q", q}});
    }
  }
  json doc = {{"schema", "lowmach.envelope/1"}, {"seed", c.cli.seed}, {"config", config}, {"estimates", estimates}};
  report::write_json(c.path("envelope.json"), doc);
  return kExitOk;
}

// --- relative-energy ---------------------------------------------------------------

int cmd_relative_energy(const Context& c, Section& root) {
  const SimConfig cfg = read_sim(root, sim_defaults());
  Section r = root.section("relative_energy");
  const double kappa = r.number("kappa", 10.0);
  r.finish();
  Section ch = root.section("checks");
  const bool assert_bound = ch.boolean("assert_bound", false);
  ch.finish();
  root.finish();
  validate_sim(cfg);
  require(cfg.init.name == "wellprepared_vortex", "relative energy is measured against the steady vortex", "init.name");
  require(kappa > 0.0, "kappa must be positive", "relative_energy.kappa");

  json config = sim_json(cfg);
  config["relative_energy"] = {{"kappa", kappa}};
  config["checks"] = {{"assert_bound", assert_bound}};
  if (c.cli.dry_run)
    return print_plan(c, "relative-energy", config,
                      {"run the finite-volume solver to T", "relative energy against the analytic vortex per snapshot",
                       "Gronwall-type bound check"},
                      {"relative_energy.json", "relative_energy.csv"});

  prepare_output_dir(c);
  const Trajectory traj = run(cfg);
  const auto series = limit::relative_energy_monitor(traj, cfg.init.amplitude, kappa);
  json doc = {{"schema", "lowmach.relative_energy/1"},
              {"config", config},
              {"times", series.times},
              {"e_rel", series.e_rel},
              {"bound", series.bound},
              {"model_error", series.model_error},
              {"grad_sup", series.grad_sup},
              {"kappa", series.kappa},
              {"bound_holds", series.bound_holds},
              {"required_kappa", series.required_kappa}};
  report::write_json(c.path("relative_energy.json"), doc);
  write_csv_series(c.path("relative_energy.csv"), {"t", "e_rel", "bound", "model_error"},
                   {series.times, series.e_rel, series.bound, series.model_error});
  c.out << "e_rel(T) = " << num(series.e_rel.back()) << "\n";
  c.out << "bound holds = " << (series.bound_holds ? "true" : "false") << "\n";
  if (assert_bound && !series.bound_holds) throw CheckFailed("relative energy exceeds its bound");
  return kExitOk;
}

// --- residual --------------------------------------------------------------------

RelaxedField lifted_relaxed_field(const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  const Params& p = traj.config.p;
  RelaxedField f;
  f.d = 2;
  f.n = snaps.front().n;
  f.nt = static_cast<int>(snaps.size()) - 1;
  f.T = p.T;
  const int N = relaxed_dim(2);
  const long S = f.spatial_points();
  f.values.resize(static_cast<std::size_t>(f.total_points() * N));
  for (int j = 0; j < f.nt; ++j) {
    const auto& s = snaps[static_cast<std::size_t>(j)];
    for (long k = 0; k < S; ++k) {
      const auto q = static_cast<std::size_t>(k);
      CompressibleState cs{s.rho[q], Eigen::Vector2d(s.ux[q], s.uy[q])};
      const Eigen::VectorXd z = lift_C(cs, p).vector();
      for (int comp = 0; comp < N; ++comp) f.values[static_cast<std::size_t>((j * S + k) * N + comp)] = z(comp);
    }
  }
  return f;
}

int cmd_residual(const Context& c, Section& root) {
  Section r = root.section("residual");
  const std::string source = r.string("source", "planewave");
  const std::string window_name = r.string("window", source == "planewave" ? "none" : "raised_cosine");
  const double margin = r.number("margin", 0.1);
  r.finish();
  require(source == "planewave" || source == "simulation", "source must be planewave or simulation", "residual.source");
  require(window_name == "none" || window_name == "raised_cosine", "window must be none or raised_cosine",
          "residual.window");
  require(margin > 0.0 && margin < 0.5, "margin must lie in (0, 0.5)", "residual.margin");
  const TimeWindow window = window_name == "none" ? TimeWindow::none : TimeWindow::raised_cosine;

  json config = {{"source", source}, {"window", window_name}, {"margin", margin}};
  if (source == "planewave") {
    Section pw = root.section("planewave");
    const int d = static_cast<int>(pw.integer("d", 2));
    require(d >= 2, "d must be at least 2", pw.field("d"));
    std::vector<int> k(static_cast<std::size_t>(d + 1), 1);
    k = pw.integers("k", k);
    const int kernel_index = static_cast<int>(pw.integer("kernel_index", 0));
    const auto amp_in = pw.numbers("amp", {});
    const auto perturb = pw.numbers("perturb", {});
    const std::string profile = pw.string("profile", "sin");
    const int nt = static_cast<int>(pw.integer("nt", 16));
    const int n = static_cast<int>(pw.integer("n", 16));
    const double T = pw.number("T", 1.0);
    pw.finish();
    root.finish();
    const int N = relaxed_dim(d);
    require(static_cast<int>(k.size()) == d + 1, "k needs d + 1 integers", "planewave.k");
    require(std::any_of(k.begin(), k.end(), [](int v) { return v != 0; }), "k must be nonzero", "planewave.k");
    require(amp_in.empty() || static_cast<int>(amp_in.size()) == N, "amp must have the relaxed dimension", "planewave.amp");
    require(perturb.empty() || static_cast<int>(perturb.size()) == N, "perturb must have the relaxed dimension",
            "planewave.perturb");
    require(profile == "sin" || profile == "cos", "profile must be sin or cos", "planewave.profile");
    require(nt >= 8 && n >= 8, "the grid needs at least 8 points per axis", "planewave.n");
    require(T > 0.0, "T must be positive", "planewave.T");
    config["planewave"] = {{"d", d}, {"k", k}, {"kernel_index", kernel_index}, {"profile", profile},
                           {"nt", nt}, {"n", n}, {"T", T}};
    if (!amp_in.empty()) config["planewave"]["amp"] = amp_in;
    if (!perturb.empty()) config["planewave"]["perturb"] = perturb;
    if (c.cli.dry_run)
      return print_plan(c, "residual", config,
                        {"build the kernel plane wave", "add the perturbation as a separate single mode",
                         "spectral negative-norm residual"},
                        {"residual.json"});

    prepare_output_dir(c);
    const OperatorAE op(d);
    const Eigen::VectorXd eta = integer_frequency(k, T);
    Eigen::VectorXd amp;
    if (amp_in.empty()) {
      const Eigen::MatrixXd K = op.kernel(eta);
      require(kernel_index >= 0 && kernel_index < K.cols(), "kernel_index out of range", "planewave.kernel_index");
      amp = K.col(kernel_index);
    } else {
      amp = to_eigen(amp_in);
    }
    const double two_pi = 2.0 * std::numbers::pi;
    std::function<double(double)> prof = profile == "sin" ? std::function<double(double)>([&](double s) { return std::sin(two_pi * s); })
                                                          : std::function<double(double)>([&](double s) { return std::cos(two_pi * s); });
    RelaxedField field;
    try {
      field = plane_wave_field(op, k, amp, prof, nt, n, T);
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), "planewave.amp");
    }
    const double kernel_residual = ae_residual_negative_norm(op, field, window, margin);
    json doc = {{"schema", "lowmach.residual/1"}, {"config", config}, {"amp", vec(amp)},
                {"kernel_residual", kernel_residual}};
    if (!perturb.empty()) {
      // The perturbation rides on the same phase as an independent non-kernel mode.
      const Eigen::VectorXd a = to_eigen(perturb);
      RelaxedField pf = field;
      const long S = pf.spatial_points();
      for (int j = 0; j < nt; ++j)
        for (long s = 0; s < S; ++s) {
          long rem = s;
          double phase = k[0] * static_cast<double>(j) / nt;
          for (int ax = d - 1; ax >= 0; --ax) {
            const long ix = rem % n;
            rem /= n;
            phase += k[static_cast<std::size_t>(ax + 1)] * (ix + 0.5) / n;
          }
          const double v = prof(phase);
          for (int comp = 0; comp < N; ++comp) pf.values[static_cast<std::size_t>((j * S + s) * N + comp)] += a(comp) * v;
        }
      const double perturbed = ae_residual_negative_norm(op, pf, window, margin);
      const Eigen::VectorXd eta_ang = two_pi * eta;
      const double closed = std::sqrt(T / 2.0) * (op.symbol(eta_ang) * a).norm() / eta_ang.norm();
      doc["perturbed_residual"] = perturbed;
      if (window == TimeWindow::none) doc["perturbed_closed_form"] = closed;
      c.out << "perturbed residual = " << num(perturbed) << "\n";
    }
    report::write_json(c.path("residual.json"), doc);
    c.out << "kernel residual = " << num(kernel_residual) << "\n";
    return kExitOk;
  }

  SimConfig defaults = sim_defaults();
  defaults.snapshot_count = 33;
  const SimConfig cfg = read_sim(root, defaults);
  Section wr = root.section("weak");
  const int kmax = static_cast<int>(wr.integer("kmax", 4));
  wr.finish();
  root.finish();
  validate_sim(cfg);
  require(cfg.snapshot_times.empty(), "the residual needs uniformly spaced snapshots", "solver.snapshot_times");
  require(cfg.snapshot_count >= 17, "the residual needs at least 17 snapshots", "solver.snapshot_count");
  require(cfg.n >= 8, "the residual needs n >= 8", "solver.n");
  require(kmax >= 0, "kmax must be nonnegative", "weak.kmax");
  config["simulation"] = sim_json(cfg);
  config["weak"] = {{"kmax", kmax}};
  if (c.cli.dry_run)
    return print_plan(c, "residual", config,
                      {"run the finite-volume solver to T", "lift snapshots to relaxed states",
                       "windowed spectral negative-norm residual", "weak-form residual table"},
                      {"residual.json"});

  prepare_output_dir(c);
  const Trajectory traj = run(cfg);
  const OperatorAE op(2);
  const double res = ae_residual_negative_norm(op, lifted_relaxed_field(traj), window, margin);
  json doc = {{"schema", "lowmach.residual/1"},
              {"config", config},
              {"negative_norm_residual", res},
              {"weak_residual", to_json(weak_residual(traj, kmax))}};
  report::write_json(c.path("residual.json"), doc);
  c.out << "negative-norm residual = " << num(res) << "\n";
  return kExitOk;
}

json error_record(const std::string& kind, int code, const std::string& message, const std::string& field) {
  json e = {{"kind", kind}, {"exit_code", code}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  return {{"error", e}};
}

}  // namespace

std::string version_text() {
  std::ostringstream s;
  s << "lowmach 0.3.0\n"
    << "schemas:\n"
    << "  snapshot LMSNAP01 version 1\n"
    << "  lowmach.energy/1\n"
    << "  lowmach.young_measure/1\n"
    << "  lowmach.simulate/1\n"
    << "  lowmach.ladder_report/1\n"
    << "  lowmach.jensen_report/1\n"
    << "  lowmach.wavecone/1\n"
    << "  lowmach.envelope/1\n"
    << "  lowmach.relative_energy/1\n"
    << "  lowmach.residual/1\n";
  return s.str();
}

int dispatch(const CliConfig& cli, std::ostream& out, std::ostream& err) {
  const Context c{cli, out, err};
  try {
    require(std::find(subcommands().begin(), subcommands().end(), cli.subcommand) != subcommands().end(),
            "unknown subcommand '" + cli.subcommand + "'", "subcommand");
    require(cli.threads >= 1, "threads must be at least 1", "threads");
    set_max_threads(cli.threads);
    Section root(cli.config_path.empty() ? json::object() : load_config(cli.config_path), "");
    if (cli.subcommand == "simulate") return cmd_simulate(c, root);
    if (cli.subcommand == "ladder") return cmd_ladder(c, root);
    if (cli.subcommand == "jensen") return cmd_jensen(c, root);
    if (cli.subcommand == "wavecone") return cmd_wavecone(c, root);
    if (cli.subcommand == "envelope") return cmd_envelope(c, root);
    if (cli.subcommand == "relative-energy") return cmd_relative_energy(c, root);
    return cmd_residual(c, root);
  } catch (const ValidationError& e) {
    err << report::dump(error_record("validation", kExitValidation, e.what(), e.field()), 0) << "\n";
    return kExitValidation;
  } catch (const NumericalAbort& e) {
    err << report::dump(error_record("numerical_abort", kExitNumerical, e.what(), ""), 0) << "\n";
    return kExitNumerical;
  } catch (const CheckFailed& e) {
    err << report::dump(error_record("check_failed", kExitCheckFailed, e.what(), ""), 0) << "\n";
    return kExitCheckFailed;
  }
}

}  // namespace lowmach::cli
