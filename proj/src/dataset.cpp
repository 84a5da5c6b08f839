#include "pimpcs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pimpcs/evaluate.hpp"
#include "pimpcs/io.hpp"
#include "pimpcs/parallel.hpp"

namespace pimpcs {

namespace {

constexpr std::string_view kDatasetTag = "# pimpcs-dataset v";
constexpr std::string_view kAuxTag = "# pimpcs-auxset v";
constexpr int kFormatVersion = 1;
constexpr std::string_view kDatasetColumns =
    "traj_id,k,x,y,theta,xdot,ydot,thetadot,ucr,ucl,xp,yp,thetap,xdotp,ydotp,thetadotp";
constexpr std::string_view kAuxColumns = "x,y,theta,xdot,ydot,thetadot";

template <std::size_t N>
void append_values(std::string& out, const Vec<N>& v) {
  for (std::size_t i = 0; i < N; ++i) {
    out.push_back(',');
    out += format_double(v[i]);
  }
}

template <std::size_t N>
Vec<N> read_values(const std::vector<std::string_view>& fields, std::size_t offset) {
  Vec<N> v;
  for (std::size_t i = 0; i < N; ++i) v[i] = parse_double(fields[offset + i]);
  return v;
}

std::string short_digest(const std::string& text) { return sha256_hex(text).substr(0, 16); }

struct Lines {
  std::vector<std::string_view> lines;
  explicit Lines(std::string_view text) {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      lines.push_back(text.substr(start, nl - start));
      start = nl + 1;
    }
  }
};

// Checks the "# pimpcs-<kind> vN; ..." line and returns the field list.
std::vector<std::pair<std::string, std::string>> check_header(std::string_view line,
                                                              std::string_view tag,
                                                              const std::string& what) {
  if (line.substr(0, tag.size()) != tag)
    throw FormatError(FormatError::Kind::kVersion,
                      what + ": missing header '" + std::string(tag) + "1'", 1);
  std::string_view rest = line.substr(tag.size());
  const std::size_t semi = rest.find(';');
  const std::string_view version_token = trim(rest.substr(0, semi));
  long long version = 0;
  try {
    version = parse_int(version_token);
  } catch (const std::invalid_argument&) {
    throw FormatError(FormatError::Kind::kVersion,
                      what + ": unreadable version '" + std::string(version_token) + "'", 1);
  }
  if (version != kFormatVersion)
    throw FormatError(FormatError::Kind::kVersion,
                      what + ": unsupported format version " + std::to_string(version) +
                          " (expected " + std::to_string(kFormatVersion) + ")",
                      1);
  if (semi == std::string_view::npos) return {};
  return parse_header_fields(rest.substr(semi + 1));
}

// Splits sealed text into rows; verifies row widths before the digest so a
// truncated file reports the offending line.
struct SealedTable {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;  // (line, fields)
};

SealedTable read_sealed_table(std::string_view text, std::string_view tag,
                              std::string_view columns, std::size_t width,
                              const std::string& what) {
  Lines lines(text);
  if (lines.lines.empty()) throw FormatError(FormatError::Kind::kMalformedRow, what + ": empty", 1);
  SealedTable t;
  t.header = check_header(lines.lines[0], tag, what);
  if (lines.lines.size() < 2 || trim(lines.lines[1]) != columns)
    throw FormatError(FormatError::Kind::kMalformedRow,
                      what + ": line 2: expected column header '" + std::string(columns) + "'", 2);
  bool sealed = false;
  for (std::size_t i = 2; i < lines.lines.size(); ++i) {
    const std::string_view line = lines.lines[i];
    if (line.substr(0, 9) == "# sha256=") {
      if (i + 1 != lines.lines.size())
        throw FormatError(FormatError::Kind::kMalformedRow,
                          what + ": line " + std::to_string(i + 2) + ": data after checksum",
                          i + 2);
      sealed = true;
      break;
    }
    auto fields = split(line, ',');
    if (fields.size() != width)
      throw FormatError(FormatError::Kind::kMalformedRow,
                        what + ": line " + std::to_string(i + 1) + ": expected " +
                            std::to_string(width) + " fields, found " +
                            std::to_string(fields.size()),
                        i + 1);
    t.rows.emplace_back(i + 1, std::move(fields));
  }
  if (!sealed) {
    const std::size_t n = lines.lines.size();
    throw FormatError(FormatError::Kind::kMalformedRow,
                      what + ": line " + std::to_string(n + 1) +
                          ": missing checksum trailer (truncated file)",
                      n + 1);
  }
  unseal(text, what);
  return t;
}

std::string header_value(const std::vector<std::pair<std::string, std::string>>& fields,
                         const std::string& key) {
  for (const auto& [k, v] : fields)
    if (k == key) return v;
  return {};
}

}  // namespace

std::vector<State> Dataset::states() const {
  std::vector<State> out;
  out.reserve(samples.size());
  for (const auto& t : samples) out.push_back(t.s);
  return out;
}

void ReferenceGrid::validate() const {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid counts must be >= 1");
  if (!(x_max >= x_min) || !(y_max >= y_min))
    throw std::invalid_argument("grid bounds must be ordered");
}

std::vector<State> ReferenceGrid::initial_states() const {
  validate();
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(nx * ny));
  for (int ix = 0; ix < nx; ++ix) {
    const double x = nx == 1 ? 0.5 * (x_min + x_max) : x_min + (x_max - x_min) * ix / (nx - 1);
    for (int iy = 0; iy < ny; ++iy) {
      const double y =
          ny == 1 ? 0.5 * (y_min + y_max) : y_min + (y_max - y_min) * iy / (ny - 1);
      out.push_back(State{{x, y, 0.0, 0.0, 0.0, 0.0}});
    }
  }
  return out;
}

std::string plant_digest(const PlantParams& p) {
  std::string s = format_double(p.mass) + ";" + format_double(p.half_length) + ";" +
                  format_double(p.inertia) + ";" + format_double(p.gravity);
  for (double k : p.kappa.data) s += ";" + format_double(k);
  return short_digest(s);
}

std::string mpc_digest(const MpcConfig& cfg) {
  std::string s = std::to_string(cfg.horizon) + ";" + format_double(cfg.dt);
  for (double w : cfg.state_weight.data) s += ";" + format_double(w);
  for (double w : cfg.input_weight.data) s += ";" + format_double(w);
  for (double w : cfg.terminal_weight.data) s += ";" + format_double(w);
  s += cfg.terminal == TerminalCost::kLqr ? ";lqr" : ";diag";
  s += ";" + std::to_string(cfg.max_iters) + ";" + format_double(cfg.tol) + ";" +
       format_double(cfg.reg_init);
  return short_digest(s);
}

void append_trajectory(Dataset& d, int traj_id, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.ticks(); ++k)
    d.samples.push_back(TransitionSample{traj_id, static_cast<int>(k), traj.states[k],
                                         traj.controls[k], traj.states[k + 1]});
}

GenerationResult generate_reference(const ReferenceGrid& grid, const SimulationSettings& sim,
                                    const MpcConfig& mpc, const PlantParams& p,
                                    std::uint64_t seed, unsigned jobs) {
  grid.validate();
  sim.validate();
  mpc.validate();
  p.validate();
  const std::vector<State> starts = grid.initial_states();

  struct Outcome {
    std::optional<Trajectory> traj;
    std::string failure;
  };
  std::vector<Outcome> outcomes(starts.size());
  parallel_for(starts.size(), jobs, [&](std::size_t i) {
    Outcome& o = outcomes[i];
    try {
      Trajectory t = simulate(starts[i], mpc_controller(mpc, p), sim, p);
      const LandingClass c = classify_landing(t);
      if (!c.success) o.failure = "landing unsuccessful";
      else if (!c.safe) o.failure = "landing unsafe";
      o.traj = std::move(t);
    } catch (const std::exception& e) {
      o.failure = e.what();
    }
  });

  GenerationResult r;
  r.dataset.meta.control_dt = sim.control_dt;
  r.dataset.meta.duration = sim.duration;
  r.dataset.meta.plant_digest = plant_digest(p);
  r.dataset.meta.mpc_digest = mpc_digest(mpc);
  r.dataset.meta.seed = seed;
  r.dataset.samples.reserve(starts.size() * sim.ticks());
  int written = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const int id = static_cast<int>(i);
    if (!outcomes[i].failure.empty())
      r.failures.push_back(GenerationFailure{id, starts[i], outcomes[i].failure});
    if (outcomes[i].traj) {
      append_trajectory(r.dataset, id, *outcomes[i].traj);
      ++written;
    }
  }
  r.dataset.meta.trajectories = written;
  return r;
}

bool StateBox::contains(const State& s) const {
  for (std::size_t i = 0; i < 6; ++i)
    if (!(s[i] >= lo[i] && s[i] <= hi[i])) return false;
  return true;
}

StateBox bounding_box(const Dataset& d) {
  if (d.empty()) throw std::invalid_argument("bounding_box: empty dataset");
  StateBox b{d.samples.front().s, d.samples.front().s};
  auto grow = [&](const State& s) {
    for (std::size_t i = 0; i < 6; ++i) {
      b.lo[i] = std::min(b.lo[i], s[i]);
      b.hi[i] = std::max(b.hi[i], s[i]);
    }
  };
  for (const auto& t : d.samples) {
    grow(t.s);
    grow(t.s_plus);
  }
  return b;
}

StateBox near_origin_box() {
  return StateBox{Vec6{{-0.5, 0.0, -0.2, -0.5, -0.5, -0.5}}, Vec6{{0.5, 0.5, 0.2, 0.5, 0.5, 0.5}}};
}

bool in_distribution(const State& s, const StateBox& box) { return box.contains(s); }

bool in_distribution(const State& s, const Dataset& d) {
  return in_distribution(s, bounding_box(d));
}

AuxSet sample_auxiliary(const Dataset& d, std::size_t n_total, std::uint64_t seed) {
  if (d.empty()) throw std::invalid_argument("sample_auxiliary: empty dataset");
  if (n_total < 2) throw std::invalid_argument("sample_auxiliary: n_total must be >= 2");
  const StateBox wide = bounding_box(d);
  const StateBox near = near_origin_box();
  AuxSet a;
  a.seed = seed;
  a.near_origin_count = n_total / 2;
  a.low_density_count = n_total - a.near_origin_count;
  a.dataset_digest = dataset_digest(d);
  a.states.reserve(n_total);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](const StateBox& b) {
    State s;
    for (std::size_t i = 0; i < 6; ++i) s[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * unit(rng);
    return s;
  };
  for (std::size_t i = 0; i < a.low_density_count; ++i) a.states.push_back(draw(wide));
  for (std::size_t i = 0; i < a.near_origin_count; ++i) a.states.push_back(draw(near));
  return a;
}

std::string serialize_dataset(const Dataset& d) {
  std::string out;
  out.reserve(d.samples.size() * 360 + 256);
  out += "# pimpcs-dataset v1; control_dt=" + format_general(d.meta.control_dt) +
         "; duration=" + format_general(d.meta.duration) +
         "; trajectories=" + std::to_string(d.meta.trajectories) +
         "; samples=" + std::to_string(d.samples.size()) + "; plant=" + d.meta.plant_digest +
         "; mpc=" + d.meta.mpc_digest + "; seed=" + std::to_string(d.meta.seed) + "\n";
  out += kDatasetColumns;
  out += '\n';
  for (const auto& t : d.samples) {
    out += std::to_string(t.traj_id);
    out.push_back(',');
    out += std::to_string(t.k);
    append_values(out, t.s);
    append_values(out, t.u_c);
    append_values(out, t.s_plus);
    out.push_back('\n');
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  const std::string what = "dataset";
  SealedTable t = read_sealed_table(text, kDatasetTag, kDatasetColumns, 16, what);
  Dataset d;
  try {
    d.meta.control_dt = parse_double(header_value(t.header, "control_dt"));
    d.meta.duration = parse_double(header_value(t.header, "duration"));
    d.meta.trajectories = static_cast<int>(parse_int(header_value(t.header, "trajectories")));
    d.meta.seed = static_cast<std::uint64_t>(parse_int(header_value(t.header, "seed")));
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::kVersion, what + ": bad header field: " + e.what(), 1);
  }
  d.meta.plant_digest = header_value(t.header, "plant");
  d.meta.mpc_digest = header_value(t.header, "mpc");
  d.samples.reserve(t.rows.size());
  for (const auto& [line, f] : t.rows) {
    try {
      TransitionSample s;
      s.traj_id = static_cast<int>(parse_int(f[0]));
      s.k = static_cast<int>(parse_int(f[1]));
      s.s = read_values<6>(f, 2);
      s.u_c = read_values<2>(f, 8);
      s.s_plus = read_values<6>(f, 10);
      d.samples.push_back(s);
    } catch (const std::invalid_argument& e) {
      throw FormatError(FormatError::Kind::kMalformedRow,
                        what + ": line " + std::to_string(line) + ": " + e.what(), line);
    }
  }
  const std::string declared = header_value(t.header, "samples");
  if (!declared.empty() && std::to_string(d.samples.size()) != declared)
    throw FormatError(FormatError::Kind::kContent,
                      what + ": header declares " + declared + " samples, found " +
                          std::to_string(d.samples.size()));
  return d;
}

std::string dataset_digest(const Dataset& d) { return sha256_hex(serialize_dataset(d)); }

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_file(path, seal_with_digest(serialize_dataset(d)));
}

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_file(path)); }

std::string serialize_auxset(const AuxSet& a) {
  std::string out = "# pimpcs-auxset v1; low_density=" + std::to_string(a.low_density_count) +
                    "; near_origin=" + std::to_string(a.near_origin_count) +
                    "; seed=" + std::to_string(a.seed) + "; dataset=" + a.dataset_digest + "\n";
  out += kAuxColumns;
  out += '\n';
  for (const State& s : a.states) {
    std::string row;
    append_values(row, s);
    out.append(row, 1);
    out.push_back('\n');
  }
  return out;
}

AuxSet parse_auxset(std::string_view text) {
  const std::string what = "auxset";
  SealedTable t = read_sealed_table(text, kAuxTag, kAuxColumns, 6, what);
  AuxSet a;
  try {
    a.low_density_count = static_cast<std::size_t>(parse_int(header_value(t.header, "low_density")));
    a.near_origin_count = static_cast<std::size_t>(parse_int(header_value(t.header, "near_origin")));
    a.seed = static_cast<std::uint64_t>(parse_int(header_value(t.header, "seed")));
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::kVersion, what + ": bad header field: " + e.what(), 1);
  }
  a.dataset_digest = header_value(t.header, "dataset");
  for (const auto& [line, f] : t.rows) {
    try {
      a.states.push_back(read_values<6>(f, 0));
    } catch (const std::invalid_argument& e) {
      throw FormatError(FormatError::Kind::kMalformedRow,
                        what + ": line " + std::to_string(line) + ": " + e.what(), line);
    }
  }
  if (a.states.size() != a.low_density_count + a.near_origin_count)
    throw FormatError(FormatError::Kind::kContent, what + ": state count disagrees with header");
  return a;
}

void save_auxset(const AuxSet& a, const std::filesystem::path& path) {
  write_file(path, seal_with_digest(serialize_auxset(a)));
}

AuxSet load_auxset(const std::filesystem::path& path) { return parse_auxset(read_file(path)); }

}  // namespace pimpcs
