#include "lowmach/compressible_solver.hpp"
#include "lowmach/error.hpp"
#include "lowmach/report_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace lowmach {

namespace {

constexpr std::array<char, 8> kMagic{'L', 'M', 'S', 'N', 'A', 'P', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError("snapshot file is truncated", "snapshot");
  return v;
}

}  // namespace

void write_snapshot(const std::string& path, const FieldState& s, const Params& p) {
  s.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing", "output_dir");
  out.write(kMagic.data(), kMagic.size());
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(s.n));
  put(out, static_cast<std::uint32_t>(2));
  put(out, static_cast<std::uint32_t>(0));
  put(out, s.time);
  put(out, p.gamma);
  put(out, p.eps);
  put(out, p.rho_bar);
  const auto bytes = static_cast<std::streamsize>(s.rho.size() * sizeof(double));
  out.write(reinterpret_cast<const char*>(s.rho.data()), bytes);
  out.write(reinterpret_cast<const char*>(s.ux.data()), bytes);
  out.write(reinterpret_cast<const char*>(s.uy.data()), bytes);
  if (!out) throw ValidationError("failed writing '" + path + "'", "output_dir");
}

FieldState read_snapshot(const std::string& path, Params* p) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open snapshot '" + path + "'", "snapshot");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError("'" + path + "' is not a snapshot file", "snapshot");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw ValidationError("unsupported snapshot version", "snapshot");
  FieldState s;
  s.n = static_cast<int>(get<std::uint32_t>(in));
  const auto d = get<std::uint32_t>(in);
  get<std::uint32_t>(in);
  if (d != 2) throw ValidationError("snapshot dimension must be 2", "snapshot");
  s.time = get<double>(in);
  Params params;
  params.gamma = get<double>(in);
  params.eps = get<double>(in);
  params.rho_bar = get<double>(in);
  if (p) *p = params;
  const auto c = static_cast<std::size_t>(s.cells());
  for (auto* v : {&s.rho, &s.ux, &s.uy}) {
    v->resize(c);
    in.read(reinterpret_cast<char*>(v->data()), static_cast<std::streamsize>(c * sizeof(double)));
    if (!in) throw ValidationError("snapshot file is truncated", "snapshot");
  }
  return s;
}

void write_energy_sidecar(const std::string& path, const Trajectory& traj) {
  nlohmann::json doc = {{"schema", "lowmach.energy/1"},
                        {"n", traj.config.n},
                        {"eps", traj.config.p.eps},
                        {"gamma", traj.config.p.gamma},
                        {"rho_bar", traj.config.p.rho_bar},
                        {"steps", traj.steps},
                        {"times", traj.energy_times},
                        {"energy", traj.energy}};
  report::write_json(path, doc);
}

}  // namespace lowmach
