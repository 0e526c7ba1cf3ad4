#include "husimi_flow/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace husimi_flow {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + value + "'");
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename Member>
Setter double_field(Member member) {
  return [member](RunConfig& c, const std::string& k, const std::string& v) {
    std::invoke(member, c) = parse_double(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"preset", [](RunConfig& c, const std::string&, const std::string& v) { c.preset = v; }},
      {"hbar", double_field([](RunConfig& c) -> double& { return c.physics.hbar; })},
      {"mass", double_field([](RunConfig& c) -> double& { return c.physics.mass; })},
      {"omega", double_field([](RunConfig& c) -> double& { return c.physics.omega; })},
      {"potential",
       [](RunConfig& c, const std::string&, const std::string& v) {
         c.physics.potential = potential_from_string(v);
       }},
      {"v0", double_field([](RunConfig& c) -> double& { return c.physics.v0; })},
      {"k", double_field([](RunConfig& c) -> double& { return c.physics.k; })},
      {"x_min", double_field([](RunConfig& c) -> double& { return c.physics.x_min; })},
      {"x_max", double_field([](RunConfig& c) -> double& { return c.physics.x_max; })},
      {"dx", double_field([](RunConfig& c) -> double& { return c.physics.dx; })},
      {"dt", double_field([](RunConfig& c) -> double& { return c.physics.dt; })},
      {"trunc_order",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.physics.trunc_order = parse_int(k, v);
       }},
      {"boundary_floor", double_field([](RunConfig& c) -> double& { return c.physics.boundary_floor; })},
      {"x0", double_field([](RunConfig& c) -> double& { return c.x0; })},
      {"p0", double_field([](RunConfig& c) -> double& { return c.p0; })},
      {"t_cap", double_field([](RunConfig& c) -> double& { return c.t_cap; })},
      {"window.x_lo", double_field([](RunConfig& c) -> double& { return c.window.x_lo; })},
      {"window.x_hi", double_field([](RunConfig& c) -> double& { return c.window.x_hi; })},
      {"window.p_lo", double_field([](RunConfig& c) -> double& { return c.window.p_lo; })},
      {"window.p_hi", double_field([](RunConfig& c) -> double& { return c.window.p_hi; })},
      {"window.nx",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.window.nx = parse_int(k, v); }},
      {"window.np",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.window.np = parse_int(k, v); }},
  };
  return table;
}

}  // namespace

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::gaussian_barrier: return "gaussian_barrier";
    case PotentialKind::free: return "free";
    case PotentialKind::harmonic: return "harmonic";
  }
  return "unknown";
}

PotentialKind potential_from_string(std::string_view name) {
  if (name == "gaussian_barrier") return PotentialKind::gaussian_barrier;
  if (name == "free") return PotentialKind::free;
  if (name == "harmonic") return PotentialKind::harmonic;
  throw std::invalid_argument("unknown potential '" + std::string(name) + "'");
}

double PhaseSpaceConfig::sigma_x() const { return std::sqrt(hbar / (2.0 * mass * omega)); }
double PhaseSpaceConfig::sigma_p() const { return std::sqrt(hbar * mass * omega / 2.0); }

std::size_t PhaseSpaceConfig::grid_size() const {
  return static_cast<std::size_t>(std::llround((x_max - x_min) / dx));
}

double PhaseSpaceConfig::potential_energy(double x) const {
  switch (potential) {
    case PotentialKind::gaussian_barrier: return v0 * std::exp(-k * x * x);
    case PotentialKind::free: return 0.0;
    case PotentialKind::harmonic: return 0.5 * mass * omega * omega * x * x;
  }
  return 0.0;
}

void PhaseSpaceConfig::validate() const {
  if (!(hbar > 0.0) || !(mass > 0.0) || !(omega > 0.0)) {
    throw std::invalid_argument("config: hbar, mass and omega must be positive");
  }
  if (!(dx > 0.0) || !(dt > 0.0)) throw std::invalid_argument("config: dx and dt must be positive");
  if (!(x_min < x_max)) throw std::invalid_argument("config: x_min must be below x_max");
  if (trunc_order < 0) throw std::invalid_argument("config: trunc_order must be non-negative");
  if (potential == PotentialKind::gaussian_barrier && !(k > 0.0)) {
    throw std::invalid_argument("config: barrier width parameter k must be positive");
  }
  if (grid_size() < 16) throw std::invalid_argument("config: coordinate grid too small");
  if (!(boundary_floor > 0.0)) throw std::invalid_argument("config: boundary_floor must be positive");
}

void PhaseSpaceWindow::validate() const {
  if (nx < 2 || np < 2) throw std::invalid_argument("window: nx and np must be at least 2");
  if (!(x_lo < x_hi) || !(p_lo < p_hi)) throw std::invalid_argument("window: empty range");
}

void RunConfig::validate() const {
  physics.validate();
  window.validate();
  if (!(t_cap > 0.0)) throw std::invalid_argument("config: t_cap must be positive");
}

RunConfig paper_preset() {
  RunConfig c;
  c.preset = "paper";
  c.window.nx = 500;
  c.window.np = 500;
  return c;
}

RunConfig desk_preset() {
  RunConfig c;
  c.preset = "desk";
  c.physics.dx = 0.01;
  c.physics.trunc_order = 6;
  c.window.nx = 200;
  c.window.np = 200;
  return c;
}

RunConfig preset_by_name(std::string_view name) {
  if (name == "paper") return paper_preset();
  if (name == "desk") return desk_preset();
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  // A `preset` line resets every other key, so it is applied first.
  std::map<std::string, std::string> entries;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (!setters().contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
    entries[key] = value;
  }
  RunConfig cfg = base;
  if (const auto it = entries.find("preset"); it != entries.end()) cfg = preset_by_name(it->second);
  for (const auto& [key, value] : entries) {
    if (key != "preset") setters().at(key)(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file " + path.string());
  out << to_text(cfg);
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "preset = " << c.preset << '\n'
      << "hbar = " << fmt_double(c.physics.hbar) << '\n'
      << "mass = " << fmt_double(c.physics.mass) << '\n'
      << "omega = " << fmt_double(c.physics.omega) << '\n'
      << "potential = " << to_string(c.physics.potential) << '\n'
      << "v0 = " << fmt_double(c.physics.v0) << '\n'
      << "k = " << fmt_double(c.physics.k) << '\n'
      << "x_min = " << fmt_double(c.physics.x_min) << '\n'
      << "x_max = " << fmt_double(c.physics.x_max) << '\n'
      << "dx = " << fmt_double(c.physics.dx) << '\n'
      << "dt = " << fmt_double(c.physics.dt) << '\n'
      << "trunc_order = " << c.physics.trunc_order << '\n'
      << "boundary_floor = " << fmt_double(c.physics.boundary_floor) << '\n'
      << "x0 = " << fmt_double(c.x0) << '\n'
      << "p0 = " << fmt_double(c.p0) << '\n'
      << "t_cap = " << fmt_double(c.t_cap) << '\n'
      << "window.x_lo = " << fmt_double(c.window.x_lo) << '\n'
      << "window.x_hi = " << fmt_double(c.window.x_hi) << '\n'
      << "window.p_lo = " << fmt_double(c.window.p_lo) << '\n'
      << "window.p_hi = " << fmt_double(c.window.p_hi) << '\n'
      << "window.nx = " << c.window.nx << '\n'
      << "window.np = " << c.window.np << '\n';
  return out.str();
}

std::string config_hash(const RunConfig& cfg) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace husimi_flow
