#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pimpcs/config.hpp"
#include "pimpcs/dataset.hpp"
#include "pimpcs/evaluate.hpp"
#include "pimpcs/io.hpp"
#include "pimpcs/lyapunov.hpp"
#include "pimpcs/mpc.hpp"
#include "pimpcs/surrogate.hpp"

namespace fs = std::filesystem;
using namespace pimpcs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Input problems detected before any work starts.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  // Keys given on the command line, in registration order.
  std::vector<std::string> order;
};

std::string hyphenate(std::string s) {
  for (char& c : s)
    if (c == '_') c = '-';
  return s;
}

// Registers --config and one --<key> option per config key not in `skip`.
void add_config_options(CLI::App* cmd, Common& c, const std::vector<std::string>& skip = {}) {
  cmd->add_option("--config", c.config_path,
                  "key = value config file (falls back to $PIMPCS_CONFIG)");
  for (const std::string& key : config_keys()) {
    if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
    std::string names = "--" + key;
    if (hyphenate(key) != key) names += ",--" + hyphenate(key);
    cmd->add_option_function<std::string>(
           names,
           [&c, key](const std::string& v) {
             if (!c.overrides.count(key)) c.order.push_back(key);
             c.overrides[key] = v;
           },
           "override config key '" + key + "'")
        ->type_name("VALUE");
  }
}

RunConfig resolve(const Common& c) {
  std::vector<std::pair<std::string, std::string>> ov;
  for (const auto& k : c.order) ov.emplace_back(k, c.overrides.at(k));
  std::string path = c.config_path;
  if (path.empty())
    if (const char* env = std::getenv("PIMPCS_CONFIG"); env && *env) path = env;
  if (path.empty()) return resolve_config(nullptr, ov);
  const fs::path p(path);
  if (!fs::exists(p)) throw ValidationError("config file not found: " + path);
  return resolve_config(&p, ov);
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ValidationError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path))
    throw ValidationError(std::string(what) + " file not found: " + path);
}

std::string file_digest(const std::string& path) { return sha256_hex(read_file(path)); }

struct LoadedModel {
  std::string path;
  SurrogateParams params;
};

std::vector<ControllerEntry> build_controllers(bool with_mpc,
                                               const std::vector<LoadedModel>& models,
                                               const RunConfig& cfg) {
  std::vector<ControllerEntry> out;
  if (with_mpc) {
    const MpcConfig mpc = cfg.mpc;
    const PlantParams plant = cfg.plant;
    out.push_back({"mpc", "mpc", false, true, [mpc, plant] { return mpc_controller(mpc, plant); }});
  }
  for (const auto& m : models) {
    const SurrogateParams mu = m.params;
    out.push_back({fs::path(m.path).stem().string(), mu.provenance.losses.str(),
                   mu.provenance.aux, false, [mu] { return surrogate_policy(mu); }});
  }
  return out;
}

std::vector<LoadedModel> load_models(const std::vector<std::string>& paths) {
  std::vector<LoadedModel> out;
  for (const auto& p : paths) require_file(p, "model");
  for (const auto& p : paths) out.push_back({p, load_model(p)});
  return out;
}

int cmd_gen_data(const Common& c, const std::string& out_flag) {
  const RunConfig cfg = resolve(c);
  const std::string out = out_flag.empty() ? cfg.data : out_flag;
  GenerationResult g = generate_reference(cfg.grid, cfg.sim, cfg.mpc, cfg.plant, cfg.seed, cfg.jobs);
  save_dataset(g.dataset, out);
  write_config_dump(cfg, out, {});
  std::printf("wrote %s: %zu trajectories, %zu samples\n", out.c_str(),
              static_cast<std::size_t>(g.dataset.meta.trajectories), g.dataset.size());
  if (!g.failures.empty()) {
    std::string manifest = "traj_id,x0,y0,reason\n";
    for (const auto& f : g.failures)
      manifest += std::to_string(f.traj_id) + "," + format_general(f.initial[kX]) + "," +
                  format_general(f.initial[kY]) + "," + f.reason + "\n";
    write_file(out + ".failures.csv", manifest);
    std::fprintf(stderr, "warning: %zu trajectories failed the landing criterion; see %s\n",
                 g.failures.size(), (out + ".failures.csv").c_str());
  }
  return kExitOk;
}

int cmd_fit_profile(const Common& c, const std::string& out_flag) {
  const RunConfig cfg = resolve(c);
  require_file(cfg.data, "dataset");
  const std::string out = out_flag.empty() ? cfg.profile : out_flag;
  const Dataset d = load_dataset(cfg.data);
  FitOptions opts = cfg.fit;
  opts.jobs = cfg.jobs;
  const StabilityProfile prof = fit_profile(d, opts);
  save_profile(prof, out);
  write_config_dump(cfg, out, {{"dataset", file_digest(cfg.data)}});
  const double base = profile_objective(SymMat6::identity(), d, cfg.jobs);
  std::printf("wrote %s: objective %s (P = I: %s), violation fraction %s, %d iterations\n",
              out.c_str(), format_general(prof.final_objective).c_str(),
              format_general(base).c_str(), format_general(prof.violation_fraction).c_str(),
              prof.iterations);
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& out_flag, bool aux_flag) {
  RunConfig cfg = resolve(c);
  if (aux_flag) cfg.train.aux = true;
  cfg.validate();
  require_file(cfg.data, "dataset");
  if (cfg.train.losses.needs_profile()) require_file(cfg.profile, "profile");
  const std::string out = out_flag.empty() ? cfg.model : out_flag;

  const Dataset d = load_dataset(cfg.data);
  std::map<std::string, std::string> inputs{{"dataset", file_digest(cfg.data)}};
  std::optional<StabilityProfile> prof;
  if (cfg.train.losses.needs_profile()) {
    prof = load_profile(cfg.profile);
    if (!prof->dataset_digest.empty() && prof->dataset_digest != dataset_digest(d))
      throw ValidationError("profile " + cfg.profile + " was fitted on a different dataset");
    inputs["profile"] = file_digest(cfg.profile);
  }
  std::optional<AuxSet> aux;
  if (cfg.train.aux) {
    aux = sample_auxiliary(d, cfg.aux_count, cfg.seed);
    save_auxset(*aux, cfg.auxset);
    write_config_dump(cfg, cfg.auxset, {{"dataset", inputs["dataset"]}});
    inputs["auxset"] = file_digest(cfg.auxset);
  }
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const TrainResult r = train(d, aux ? &*aux : nullptr, prof ? &*prof : nullptr, tc, cfg.plant);
  save_model(r.params, out);
  write_config_dump(cfg, out, inputs);
  std::printf("wrote %s: losses %s%s, objective %s -> %s over %d epochs\n", out.c_str(),
              tc.losses.str().c_str(), tc.aux ? " +aux" : "",
              format_general(r.initial_loss).c_str(), format_general(r.final_loss).c_str(),
              tc.epochs);
  return kExitOk;
}

int cmd_evaluate(const Common& c, bool with_mpc, const std::vector<std::string>& model_paths,
                 const std::string& out_flag) {
  const RunConfig cfg = resolve(c);
  if (!with_mpc && model_paths.empty())
    throw ValidationError("evaluate needs --mpc and/or at least one --model");
  const auto models = load_models(model_paths);
  const auto controllers = build_controllers(with_mpc, models, cfg);
  const InitialBox box = InitialBox{}.expanded(cfg.ood_margin);
  const auto reports = run_campaign(controllers, cfg.runs, box, cfg.seed, cfg.sim, cfg.plant, cfg.jobs);

  const std::string prefix = out_flag.empty() ? cfg.report : out_flag;
  std::map<std::string, std::string> inputs;
  for (const auto& m : models) inputs["model " + m.path] = file_digest(m.path);
  for (const auto& [ext, fmt] : {std::pair{".csv", ReportFormat::kCsv},
                                 std::pair{".txt", ReportFormat::kTextTable},
                                 std::pair{".svg", ReportFormat::kSvgHistogram}}) {
    const std::string path = prefix + ext;
    emit_report(reports, path, fmt);
    write_config_dump(cfg, path, inputs);
  }
  std::cout << report_text_table(reports);
  if (cfg.ood_margin > 0.0)
    std::printf("initial box expanded by %s m (out-of-distribution starts)\n",
                format_general(cfg.ood_margin).c_str());
  return kExitOk;
}

int cmd_bench(const Common& c, bool with_mpc, const std::vector<std::string>& model_paths,
              const std::string& out_flag) {
  const RunConfig cfg = resolve(c);
  if (!with_mpc && model_paths.empty())
    throw ValidationError("bench needs --mpc and/or at least one --model");
  const auto models = load_models(model_paths);
  const auto controllers = build_controllers(with_mpc, models, cfg);
  const BenchReport bench =
      bench_cpu(controllers, cfg.bench_runs, cfg.seed, InitialBox{}, cfg.sim, cfg.plant);
  const std::string text = bench_text(bench);
  std::cout << text;

  const std::string prefix = out_flag.empty() ? cfg.report + "_bench" : out_flag;
  std::map<std::string, std::string> inputs;
  for (const auto& m : models) inputs["model " + m.path] = file_digest(m.path);
  write_file(prefix + ".txt", text);
  write_config_dump(cfg, prefix + ".txt", inputs);
  std::vector<std::pair<std::string, std::vector<double>>> series;
  for (const auto& row : bench.rows) series.emplace_back(row.label, row.run_cpu_s);
  write_file(prefix + ".svg", cpu_histogram_svg(series));
  write_config_dump(cfg, prefix + ".svg", inputs);
  return kExitOk;
}

int cmd_simulate(const Common& c, bool with_mpc, const std::vector<std::string>& model_paths,
                 const std::string& x0_text, const std::string& out_flag) {
  const RunConfig cfg = resolve(c);
  if (with_mpc == !model_paths.empty() || model_paths.size() > 1)
    throw ValidationError("simulate needs exactly one of --mpc or --model <file>");
  State s0{};
  const auto parts = split(x0_text, ',');
  if (parts.size() != 2 && parts.size() != 6)
    throw ValidationError("--x0 takes 'x,y' or six comma-separated state values");
  try {
    for (std::size_t i = 0; i < parts.size(); ++i) s0[i] = parse_double(trim(parts[i]));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("--x0: ") + e.what());
  }
  const auto models = load_models(model_paths);
  const auto controllers = build_controllers(with_mpc, models, cfg);
  const Trajectory traj = simulate(s0, controllers.front().make(), cfg.sim, cfg.plant);
  const LandingClass lc = classify_landing(traj);

  std::string csv = "t,x,y,theta,xdot,ydot,thetadot,u1,u2\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    csv += format_general(static_cast<double>(k) * traj.control_dt);
    for (double v : traj.states[k].data) csv += "," + format_double(v);
    if (k < traj.controls.size())
      csv += "," + format_double(traj.controls[k][0]) + "," + format_double(traj.controls[k][1]);
    else
      csv += ",,";
    csv += "\n";
  }
  if (out_flag.empty() || out_flag == "-") {
    std::cout << csv;
  } else {
    write_file(out_flag, csv);
    std::map<std::string, std::string> inputs;
    for (const auto& m : models) inputs["model " + m.path] = file_digest(m.path);
    write_config_dump(cfg, out_flag, inputs);
  }
  std::fprintf(stderr, "%s: success=%d safe=%d landing_time=%s\n",
               controllers.front().label.c_str(), lc.success, lc.safe,
               lc.landing_time ? format_general(*lc.landing_time).c_str() : "-");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed MPC surrogate pipeline for planar quadcopter landing"};
  app.require_subcommand(1);

  Common gen_c, fit_c, train_c, eval_c, bench_c, sim_c;
  std::string gen_out, fit_out, train_out, eval_out, bench_out, sim_out, x0 = "0,5";
  bool train_aux = false, eval_mpc = false, bench_mpc = false, sim_mpc = false;
  std::vector<std::string> eval_models, bench_models, sim_models;

  auto* gen = app.add_subcommand("gen-data", "Generate the MPC reference dataset");
  add_config_options(gen, gen_c);
  gen->add_option("--out", gen_out, "dataset CSV (default: config key 'data')");

  auto* fit = app.add_subcommand("fit-profile", "Fit the quadratic stability profile");
  add_config_options(fit, fit_c);
  fit->add_option("--out", fit_out, "profile file (default: config key 'profile')");

  auto* trn = app.add_subcommand("train", "Train a surrogate controller");
  add_config_options(trn, train_c, {"aux"});
  trn->add_flag("--aux", train_aux, "augment L3/L4 with auxiliary states");
  trn->add_option("--out", train_out, "model file (default: config key 'model')");

  auto* ev = app.add_subcommand("evaluate", "Monte Carlo landing campaign");
  add_config_options(ev, eval_c, {"model"});
  ev->add_flag("--mpc", eval_mpc, "include the MPC (tracking reference)");
  ev->add_option("--model", eval_models, "surrogate model file (repeatable)");
  ev->add_option("--out", eval_out, "report path prefix (default: config key 'report')");

  auto* bn = app.add_subcommand("bench", "CPU time benchmark");
  add_config_options(bn, bench_c, {"model", "runs"});
  bn->add_flag("--mpc", bench_mpc, "include the MPC (reference row)");
  bn->add_option("--model", bench_models, "surrogate model file (repeatable)");
  bn->add_option_function<std::string>(
      "--runs", [&](const std::string& v) {
        if (!bench_c.overrides.count("bench_runs")) bench_c.order.push_back("bench_runs");
        bench_c.overrides["bench_runs"] = v;
      },
      "number of timed simulations (config key 'bench_runs')");
  bn->add_option("--out", bench_out, "report path prefix");

  auto* sm = app.add_subcommand("simulate", "Single rollout to a trajectory CSV");
  add_config_options(sm, sim_c, {"model"});
  sm->add_flag("--mpc", sim_mpc, "use the MPC");
  sm->add_option("--model", sim_models, "use a surrogate model file");
  sm->add_option("--x0", x0, "initial state: 'x,y' or six values")->capture_default_str();
  sm->add_option("--out", sim_out, "trajectory CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s (see --help)\n", e.what());
    return kExitValidation;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_c, gen_out);
    if (fit->parsed()) return cmd_fit_profile(fit_c, fit_out);
    if (trn->parsed()) return cmd_train(train_c, train_out, train_aux);
    if (ev->parsed()) return cmd_evaluate(eval_c, eval_mpc, eval_models, eval_out);
    if (bn->parsed()) return cmd_bench(bench_c, bench_mpc, bench_models, bench_out);
    if (sm->parsed()) return cmd_simulate(sim_c, sim_mpc, sim_models, x0, sim_out);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == FormatError::Kind::kIo ? kExitRuntime : kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
