#include "husimi_flow/wavefunction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace husimi_flow {

WavefunctionGrid WavefunctionGrid::on_grid(const PhaseSpaceConfig& cfg, double time) {
  WavefunctionGrid psi;
  psi.x_min = cfg.x_min;
  psi.dx = cfg.dx;
  psi.time = time;
  psi.samples.assign(cfg.grid_size(), complex{});
  return psi;
}

double WavefunctionGrid::norm() const {
  double s = 0.0;
  for (const auto& v : samples) s += std::norm(v);
  return s * dx;
}

double WavefunctionGrid::mass_between(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = x_at(i);
    if (x > lo && x < hi) s += std::norm(samples[i]);
  }
  return s * dx;
}

double WavefunctionGrid::mean_x() const {
  double s = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) s += x_at(i) * std::norm(samples[i]);
  return s * dx / norm();
}

double WavefunctionGrid::edge_ratio(std::size_t band) const {
  double peak = 0.0;
  for (const auto& v : samples) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  const std::size_t n = samples.size();
  band = std::min(band, n / 2);
  double edge = 0.0;
  for (std::size_t i = 0; i < band; ++i) {
    edge = std::max({edge, std::abs(samples[i]), std::abs(samples[n - 1 - i])});
  }
  return edge / peak;
}

double fidelity(const WavefunctionGrid& a, const WavefunctionGrid& b) {
  if (a.size() != b.size()) throw std::invalid_argument("fidelity: grid mismatch");
  complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a.samples[i]) * b.samples[i];
  return std::norm(s * a.dx);
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("wavefunction file: bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_wavefunction(const WavefunctionGrid& psi, const std::string& cfg_hash,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# husimi_flow wavefunction\n"
      << "# config_hash = " << cfg_hash << '\n'
      << "# time = " << g17(psi.time) << '\n'
      << "# x_min = " << g17(psi.x_min) << '\n'
      << "# dx = " << g17(psi.dx) << '\n'
      << "# n = " << psi.size() << '\n'
      << "# x re im\n";
  for (std::size_t i = 0; i < psi.size(); ++i) {
    out << g17(psi.x_at(i)) << ' ' << g17(psi.samples[i].real()) << ' ' << g17(psi.samples[i].imag())
        << '\n';
  }
}

WavefunctionGrid read_wavefunction(const std::filesystem::path& path, std::string* cfg_hash) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  WavefunctionGrid psi;
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 3);
      if (key == "config_hash" && cfg_hash) *cfg_hash = value;
      if (key == "time") psi.time = to_double(value);
      if (key == "x_min") psi.x_min = to_double(value);
      if (key == "dx") psi.dx = to_double(value);
      if (key == "n") n = std::stoul(value);
      continue;
    }
    std::istringstream row(line);
    std::string xs, re, im;
    row >> xs >> re >> im;
    psi.samples.emplace_back(to_double(re), to_double(im));
  }
  if (psi.samples.size() != n) throw std::runtime_error("wavefunction file: truncated " + path.string());
  return psi;
}

}  // namespace husimi_flow
