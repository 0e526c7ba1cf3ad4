#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "husimi_flow/errors.hpp"
#include "husimi_flow/experiment.hpp"
#include "husimi_flow/propagator.hpp"

using namespace husimi_flow;
namespace fs = std::filesystem;

namespace {

enum Exit : int { ok = 0, internal = 1, usage = 2, physics = 3, criterion = 4 };

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string preset = "desk";
  std::string config;
  std::vector<double> p0;
  double x0 = 0.0;
  bool x0_set = false;
  std::vector<double> times;
  std::string window;
  int order = -1;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c, bool times) {
  cmd->add_option("--preset", c.preset, "Parameter preset")->check(CLI::IsMember({"desk", "paper"}))->capture_default_str();
  cmd->add_option("--config", c.config, "key = value file applied on top of the preset")->check(CLI::ExistingFile);
  cmd->add_option("--p0", c.p0, "Initial mean momentum (sweep: list)")->delimiter(',');
  cmd->add_option_function<double>("--x0", [&c](double v) { c.x0 = v; c.x0_set = true; }, "Initial packet centre");
  if (times) cmd->add_option("--times", c.times, "Snapshot times, comma separated")->delimiter(',');
  cmd->add_option("--window", c.window, "Husimi window x_lo,x_hi,p_lo,p_hi[,nx,np]");
  cmd->add_option("--order", c.order, "Truncation order N")->check(CLI::Range(0, 11));
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

PhaseSpaceWindow parse_window(const std::string& text, PhaseSpaceWindow w) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--window: bad number '" + item + "'");
    }
  }
  if (v.size() != 4 && v.size() != 6) throw UsageError("--window expects 4 or 6 comma separated values");
  w.x_lo = v[0];
  w.x_hi = v[1];
  w.p_lo = v[2];
  w.p_hi = v[3];
  if (v.size() == 6) {
    w.nx = static_cast<int>(v[4]);
    w.np = static_cast<int>(v[5]);
  }
  return w;
}

RunConfig resolve(const Common& c, bool single_p0) {
  RunConfig rc = preset_by_name(c.preset);
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    std::stringstream ss;
    ss << in.rdbuf();
    rc = parse_run_config(ss.str(), rc);
  }
  if (single_p0) {
    if (c.p0.size() > 1) throw UsageError("--p0 takes a single value for this command");
    if (!c.p0.empty()) rc.p0 = c.p0.front();
  }
  if (c.x0_set) rc.x0 = c.x0;
  if (!c.window.empty()) rc.window = parse_window(c.window, rc.window);
  if (c.order >= 0) rc.physics.trunc_order = c.order;
  rc.validate();
  return rc;
}

std::string tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%.4f", t);
  return buf;
}

fs::path prepare(const Common& c, const RunConfig& rc) {
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::ofstream out(dir / "config.txt");
  out << "# config_hash = " << config_hash(rc) << '\n' << to_text(rc);
  if (!out) throw std::runtime_error("cannot write " + (dir / "config.txt").string());
  return dir;
}

int run_sweep(const Common& c) {
  const RunConfig rc = resolve(c, false);
  const fs::path dir = prepare(c, rc);
  const std::vector<double> grid = c.p0.empty() ? default_sweep_grid() : c.p0;
  const SweepResult sweep = run_transmission_sweep(grid, rc);
  write_sweep(sweep, config_hash(rc), dir / "sweep.csv");
  bool physics_failed = false;
  for (const auto& r : sweep.rows) {
    if (r.ok()) {
      std::printf("p0=%.3f  T_Q=%.6f  T_C=%.6f  D_T=%+.4f  D_R=%+.4f  t=%.2f  %s\n", r.p0, r.t_q, r.t_c, r.d_t, r.d_r,
                  r.t_final, std::string(to_string(r.stop)).c_str());
    } else {
      std::printf("p0=%.3f  failed: %s\n", r.p0, r.failure.c_str());
      physics_failed = physics_failed || r.physics_failure;
    }
  }
  if (physics_failed) return Exit::physics;
  return sweep.all_ok() ? Exit::ok : Exit::internal;
}

enum class Products { all, zeros, current, topology };

int run_snapshots(const Common& c, Products what) {
  const RunConfig rc = resolve(c, true);
  const fs::path dir = prepare(c, rc);
  if (c.times.empty()) {
    std::cout << to_text(rc);
    return Exit::ok;
  }
  const std::string hash = config_hash(rc);
  SnapshotOptions opts;
  opts.topology = what != Products::zeros && what != Products::current;
  const auto snaps = run_snapshot_pipeline(rc, c.times, opts);
  for (const Snapshot& s : snaps) {
    const std::string t = tag(s.time);
    int stable = 0;
    for (const auto& z : s.zeros.zeros) stable += z.stable() ? 1 : 0;
    std::printf("t=%.4f  zeros=%zu (stable %d)", s.time, s.zeros.zeros.size(), stable);
    if (what == Products::all || what == Products::zeros || what == Products::topology) {
      write_zeros(s.zeros, rc.physics, s.time, hash, dir / ("zeros_" + t + ".csv"));
    }
    if (what == Products::all || what == Products::current) {
      write_husimi(s.husimi, hash, dir / ("husimi_" + t + ".csv"));
      write_current(s.current, s.classical, hash, dir / ("current_" + t + ".csv"));
    }
    if (what == Products::current) {
      std::vector<int> orders;
      for (int n = 0; n <= rc.physics.trunc_order; ++n) orders.push_back(n);
      const auto study = continuity_study(s.husimi.sampler->wavefunction(), rc.window, rc.physics, orders);
      write_continuity(study, s.time, hash, dir / ("continuity_" + t + ".csv"));
      std::printf("  residual N=0: %.3e  N=%d: %.3e", study.residual_norms.front(), rc.physics.trunc_order,
                  study.residual_norms.back());
    }
    if (what == Products::all || what == Products::topology) {
      write_stagnation(s.stagnation, s.time, hash, dir / ("stagnation_" + t + ".csv"));
      write_dipoles(s.dipoles, s.stagnation.points, s.time, hash, dir / ("dipoles_" + t + ".csv"));
      write_contours(s.contours, s.time, hash, dir / ("contours_" + t + ".csv"));
      std::printf("  stagnation=%zu  dipoles=%zu  unpaired=%zu  anomalies=%d", s.stagnation.points.size(),
                  s.dipoles.dipoles.size(), s.dipoles.unpaired.size(), s.stagnation.anomalies);
    }
    std::printf("\n");
  }
  return Exit::ok;
}

int run_validate(const Common& c) {
  const RunConfig rc = resolve(c, false);
  const fs::path dir = prepare(c, rc);
  const std::vector<double> grid = c.p0.empty() ? std::vector<double>{1.8, 2.1} : c.p0;
  const auto rows = validate_presets(grid);
  write_validation(rows, config_hash(rc), dir / "validation.csv");
  bool pass = true;
  for (const auto& r : rows) {
    std::printf("p0=%.3f  T_Q desk=%.6f  paper=%.6f  diff=%+.2e  %s\n", r.p0, r.t_q_desk, r.t_q_paper, r.difference,
                r.pass ? "ok" : "FAIL");
    pass = pass && r.pass;
  }
  return pass ? Exit::ok : Exit::criterion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Husimi-function flow of a wavepacket scattering off a Gaussian barrier"};
  app.require_subcommand(1);
  Common c;
  auto* sweep = app.add_subcommand("sweep", "Quantum vs classical transmission over a p0 grid");
  auto* snapshot = app.add_subcommand("snapshot", "Every snapshot product at the given times");
  auto* zeros = app.add_subcommand("zeros", "Husimi zeros at the given times");
  auto* current = app.add_subcommand("current", "Husimi density, currents and continuity residuals");
  auto* topology = app.add_subcommand("topology", "Stagnation points, dipoles and energy contours");
  auto* validate = app.add_subcommand("validate", "Desk preset against the high-fidelity preset");
  add_common(sweep, c, false);
  for (auto* cmd : {snapshot, zeros, current, topology}) add_common(cmd, c, true);
  add_common(validate, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*sweep) return run_sweep(c);
    if (*snapshot) return run_snapshots(c, Products::all);
    if (*zeros) return run_snapshots(c, Products::zeros);
    if (*current) return run_snapshots(c, Products::current);
    if (*topology) return run_snapshots(c, Products::topology);
    if (*validate) return run_validate(c);
  } catch (const PhysicsError& e) {
    std::cerr << "physics failure: " << e.what() << '\n';
    return Exit::physics;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::internal;
  }
  return Exit::usage;
}
