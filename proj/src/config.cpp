#include "pimpcs/config.hpp"

#include <functional>

#include "pimpcs/io.hpp"

namespace pimpcs {

namespace {

template <std::size_t N>
Vec<N> parse_vec(std::string_view v) {
  const auto parts = split(v, ',');
  if (parts.size() != N)
    throw std::invalid_argument("expected " + std::to_string(N) + " comma-separated values");
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = parse_double(trim(parts[i]));
  return out;
}

template <std::size_t N>
std::string format_vec(const Vec<N>& v) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out.push_back(',');
    out += format_general(v[i]);
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected a boolean (0/1, true/false)");
}

std::size_t parse_count(std::string_view v) {
  const long long n = parse_int(v);
  if (n < 0) throw std::invalid_argument("must be non-negative");
  return static_cast<std::size_t>(n);
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define PIMPCS_REAL(name, expr)                                                        \
  Field {                                                                              \
    name, [](RunConfig& c, std::string_view v) { c.expr = parse_double(v); },          \
        [](const RunConfig& c) { return format_general(c.expr); }                      \
  }
#define PIMPCS_INT(name, expr, type)                                                   \
  Field {                                                                              \
    name, [](RunConfig& c, std::string_view v) { c.expr = static_cast<type>(parse_int(v)); }, \
        [](const RunConfig& c) { return std::to_string(c.expr); }                      \
  }
#define PIMPCS_COUNT(name, expr)                                                       \
  Field {                                                                              \
    name, [](RunConfig& c, std::string_view v) { c.expr = parse_count(v); },           \
        [](const RunConfig& c) { return std::to_string(c.expr); }                      \
  }
#define PIMPCS_STR(name, expr)                                                         \
  Field {                                                                              \
    name, [](RunConfig& c, std::string_view v) { c.expr = std::string(v); },           \
        [](const RunConfig& c) { return c.expr; }                                      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      PIMPCS_REAL("mass", plant.mass),
      PIMPCS_REAL("half_length", plant.half_length),
      PIMPCS_REAL("inertia", plant.inertia),
      PIMPCS_REAL("gravity", plant.gravity),
      Field{"kappa_row1",
            [](RunConfig& c, std::string_view v) {
              const Vec6 r = parse_vec<6>(v);
              for (std::size_t j = 0; j < 6; ++j) c.plant.kappa(0, j) = r[j];
            },
            [](const RunConfig& c) {
              Vec6 r;
              for (std::size_t j = 0; j < 6; ++j) r[j] = c.plant.kappa(0, j);
              return format_vec(r);
            }},
      Field{"kappa_row2",
            [](RunConfig& c, std::string_view v) {
              const Vec6 r = parse_vec<6>(v);
              for (std::size_t j = 0; j < 6; ++j) c.plant.kappa(1, j) = r[j];
            },
            [](const RunConfig& c) {
              Vec6 r;
              for (std::size_t j = 0; j < 6; ++j) r[j] = c.plant.kappa(1, j);
              return format_vec(r);
            }},
      PIMPCS_REAL("duration", sim.duration),
      PIMPCS_REAL("control_dt", sim.control_dt),
      PIMPCS_INT("substeps", sim.substeps, int),
      PIMPCS_INT("mpc_horizon", mpc.horizon, int),
      PIMPCS_REAL("mpc_dt", mpc.dt),
      Field{"mpc_q", [](RunConfig& c, std::string_view v) { c.mpc.state_weight = parse_vec<6>(v); },
            [](const RunConfig& c) { return format_vec(c.mpc.state_weight); }},
      Field{"mpc_r", [](RunConfig& c, std::string_view v) { c.mpc.input_weight = parse_vec<2>(v); },
            [](const RunConfig& c) { return format_vec(c.mpc.input_weight); }},
      Field{"mpc_qf",
            [](RunConfig& c, std::string_view v) { c.mpc.terminal_weight = parse_vec<6>(v); },
            [](const RunConfig& c) { return format_vec(c.mpc.terminal_weight); }},
      Field{"mpc_terminal",
            [](RunConfig& c, std::string_view v) {
              if (v == "lqr") c.mpc.terminal = TerminalCost::kLqr;
              else if (v == "diag") c.mpc.terminal = TerminalCost::kDiagonal;
              else throw std::invalid_argument("expected 'lqr' or 'diag'");
            },
            [](const RunConfig& c) {
              return std::string(c.mpc.terminal == TerminalCost::kLqr ? "lqr" : "diag");
            }},
      PIMPCS_INT("mpc_max_iters", mpc.max_iters, int),
      PIMPCS_REAL("mpc_tol", mpc.tol),
      PIMPCS_REAL("mpc_reg_init", mpc.reg_init),
      Field{"grid",
            [](RunConfig& c, std::string_view v) {
              const auto x = v.find('x');
              if (x == std::string_view::npos)
                throw std::invalid_argument("expected NXxNY, e.g. 21x13");
              c.grid.nx = static_cast<int>(parse_int(v.substr(0, x)));
              c.grid.ny = static_cast<int>(parse_int(v.substr(x + 1)));
            },
            [](const RunConfig& c) {
              return std::to_string(c.grid.nx) + "x" + std::to_string(c.grid.ny);
            }},
      PIMPCS_REAL("grid_x_min", grid.x_min),
      PIMPCS_REAL("grid_x_max", grid.x_max),
      PIMPCS_REAL("grid_y_min", grid.y_min),
      PIMPCS_REAL("grid_y_max", grid.y_max),
      PIMPCS_COUNT("aux_count", aux_count),
      PIMPCS_REAL("profile_eps", fit.eps_floor),
      PIMPCS_INT("profile_max_iters", fit.max_iters, int),
      PIMPCS_REAL("profile_step", fit.step),
      PIMPCS_INT("epochs", train.epochs, int),
      PIMPCS_REAL("learning_rate", train.adam.learning_rate),
      PIMPCS_REAL("adam_beta1", train.adam.beta1),
      PIMPCS_REAL("adam_beta2", train.adam.beta2),
      PIMPCS_REAL("adam_epsilon", train.adam.epsilon),
      PIMPCS_COUNT("batch_size", train.batch_size),
      Field{"losses",
            [](RunConfig& c, std::string_view v) { c.train.losses = LossSet::parse(v); },
            [](const RunConfig& c) { return c.train.losses.str(); }},
      Field{"aux", [](RunConfig& c, std::string_view v) { c.train.aux = parse_bool(v); },
            [](const RunConfig& c) { return std::string(c.train.aux ? "1" : "0"); }},
      Field{"loss_weights",
            [](RunConfig& c, std::string_view v) {
              const Vec<4> w = parse_vec<4>(v);
              c.train.weights = {w[0], w[1], w[2], w[3]};
            },
            [](const RunConfig& c) {
              const auto& w = c.train.weights;
              return format_vec(Vec<4>{{w.w1, w.w2, w.w3, w.w4}});
            }},
      PIMPCS_COUNT("runs", runs),
      PIMPCS_COUNT("bench_runs", bench_runs),
      PIMPCS_REAL("ood_margin", ood_margin),
      Field{"seed",
            [](RunConfig& c, std::string_view v) {
              const long long s = parse_int(v);
              if (s < 0) throw std::invalid_argument("must be non-negative");
              c.seed = static_cast<std::uint64_t>(s);
            },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      Field{"jobs", [](RunConfig& c, std::string_view v) { c.jobs = static_cast<unsigned>(parse_count(v)); },
            [](const RunConfig& c) { return std::to_string(c.jobs); }},
      PIMPCS_STR("data", data),
      PIMPCS_STR("profile", profile),
      PIMPCS_STR("auxset", auxset),
      PIMPCS_STR("model", model),
      PIMPCS_STR("report", report),
  };
  return table;
}

#undef PIMPCS_REAL
#undef PIMPCS_INT
#undef PIMPCS_COUNT
#undef PIMPCS_STR

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown config key '" + std::string(key) + "'");
  try {
    f->set(*this, trim(value));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + std::string(key) + "': bad value '" +
                      std::string(trim(value)) + "': " + e.what());
  }
}

std::string RunConfig::get(std::string_view key) const {
  const Field* f = find_field(key);
  if (!f) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return f->get(*this);
}

void RunConfig::validate() const {
  try {
    plant.validate();
    sim.validate();
    mpc.validate();
    grid.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (!(fit.eps_floor > 0.0)) throw ConfigError("invalid config: profile_eps must be > 0");
  if (fit.eps_floor * 6.0 > kProfileTrace)
    throw ConfigError("invalid config: profile_eps too large for trace 6");
  if (fit.max_iters < 0) throw ConfigError("invalid config: profile_max_iters must be >= 0");
  if (!(fit.step > 0.0)) throw ConfigError("invalid config: profile_step must be > 0");
  if (train.aux && aux_count == 0)
    throw ConfigError("invalid config: aux=1 needs aux_count >= 1");
  if (runs < 1) throw ConfigError("invalid config: runs must be >= 1");
  if (bench_runs < 1) throw ConfigError("invalid config: bench_runs must be >= 1");
  if (!(ood_margin >= 0.0)) throw ConfigError("invalid config: ood_margin must be >= 0");
  if (jobs < 1) throw ConfigError("invalid config: jobs must be >= 1");
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(*this) + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

RunConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (file) {
    std::string text;
    try {
      text = read_file(*file);
    } catch (const std::exception& e) {
      throw ConfigError("cannot read config file " + file->string() + ": " + e.what());
    }
    for (const auto& [k, v] : parse_config_text(text)) {
      try {
        cfg.set(k, v);
      } catch (const ConfigError& e) {
        throw ConfigError(file->string() + ": " + e.what());
      }
    }
  }
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

std::filesystem::path config_dump_path(const std::filesystem::path& artifact) {
  return std::filesystem::path(artifact.string() + ".config");
}

void write_config_dump(const RunConfig& cfg, const std::filesystem::path& artifact,
                       const std::map<std::string, std::string>& input_digests) {
  std::string out = "# resolved configuration for " + artifact.filename().string() + "\n";
  out += cfg.dump();
  for (const auto& [name, digest] : input_digests) out += "# input " + name + " sha256=" + digest + "\n";
  write_file(config_dump_path(artifact), out);
}

}  // namespace pimpcs
