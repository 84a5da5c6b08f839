#include <cstdlib>
#include <string>

#include "doctest.h"
#include "pimpcs/config.hpp"
#include "pimpcs/evaluate.hpp"
#include "pimpcs/io.hpp"
#include "pimpcs/surrogate.hpp"
#include "support.hpp"

using namespace pimpcs;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(PIMPCS_CLI) + " " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("defaults validate and dump every key once") {
  const RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  const std::string dump = cfg.dump();
  for (const auto& key : config_keys()) {
    const std::string line = key + " = ";
    const bool first = dump.rfind(line, 0) == 0;
    CHECK((first || dump.find("\n" + line) != std::string::npos));
  }
  CHECK(cfg.get("grid") == "21x13");
  CHECK(cfg.get("losses") == "l1");
  CHECK(cfg.get("mpc_terminal") == "lqr");
  CHECK(cfg.get("loss_weights") == "1,1000,1,100");
  CHECK(cfg.get("epochs") == "200");
}

TEST_CASE("dump parses back to the same configuration") {
  RunConfig a;
  a.set("grid", "3x2");
  a.set("losses", "l1,l2,l4");
  a.set("aux", "true");
  a.set("learning_rate", "0.002");
  a.set("mpc_r", "1,2");
  a.set("seed", "42");
  a.set("data", "x/y.csv");
  RunConfig b;
  for (const auto& [k, v] : parse_config_text(a.dump())) b.set(k, v);
  CHECK(b.dump() == a.dump());
  CHECK(b.grid.nx == 3);
  CHECK(b.grid.ny == 2);
  CHECK(b.train.aux);
  CHECK(b.train.losses == LossSet{true, true, false, true});
  CHECK(b.mpc.input_weight[1] == 2.0);
  CHECK(b.seed == 42);
  CHECK(b.data == "x/y.csv");
}

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text("# comment\n\n seed = 3  # trailing\nlosses=l1,l2\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"seed", "3"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"losses", "l1,l2"});
  try {
    parse_config_text("seed = 1\nnot a pair\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text(" = 4\n"), ConfigError);
}

TEST_CASE("unknown keys and bad values are rejected") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("colour", "blue"), ConfigError);
  CHECK_THROWS_AS(cfg.get("colour"), ConfigError);
  CHECK_THROWS_AS(cfg.set("epochs", "many"), ConfigError);
  CHECK_THROWS_AS(cfg.set("grid", "21by13"), ConfigError);
  CHECK_THROWS_AS(cfg.set("losses", "l2"), ConfigError);
  CHECK_THROWS_AS(cfg.set("mpc_q", "1,2,3"), ConfigError);
  CHECK_THROWS_AS(cfg.set("mpc_terminal", "exact"), ConfigError);
  CHECK_THROWS_AS(cfg.set("aux", "maybe"), ConfigError);
  CHECK_THROWS_AS(cfg.set("seed", "-1"), ConfigError);
  try {
    cfg.set("epochs", "many");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("epochs") != std::string::npos);
  }
}

TEST_CASE("validation names the bad field") {
  auto fails = [](const Overrides& o) {
    try {
      resolve_config(nullptr, o);
    } catch (const ConfigError&) {
      return true;
    }
    return false;
  };
  CHECK(fails({{"mass", "0"}}));
  CHECK(fails({{"epochs", "0"}}));
  CHECK(fails({{"learning_rate", "0"}}));
  CHECK(fails({{"runs", "0"}}));
  CHECK(fails({{"jobs", "0"}}));
  CHECK(fails({{"profile_eps", "0"}}));
  CHECK(fails({{"loss_weights", "0,1,1,1"}}));
  CHECK(fails({{"ood_margin", "-1"}}));
  CHECK_FALSE(fails({{"ood_margin", "0.5"}}));
}

TEST_CASE("file then overrides, last one wins") {
  testing::TempDir dir("cfg");
  write_file(dir / "run.cfg", "seed = 5\nepochs = 7\nlosses = l1,l2\n");
  const auto file = dir / "run.cfg";
  const RunConfig a = resolve_config(&file, {});
  CHECK(a.seed == 5);
  CHECK(a.train.epochs == 7);
  const RunConfig b = resolve_config(&file, {{"seed", "6"}, {"epochs", "9"}, {"seed", "8"}});
  CHECK(b.seed == 8);
  CHECK(b.train.epochs == 9);
  CHECK(b.train.losses == LossSet{true, true, false, false});

  write_file(dir / "bad.cfg", "seed = 1\nwobble = 2\n");
  const auto bad = dir / "bad.cfg";
  try {
    resolve_config(&bad, {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("wobble") != std::string::npos);
  }
  const auto missing = dir / "none.cfg";
  CHECK_THROWS_AS(resolve_config(&missing, {}), ConfigError);
}

TEST_CASE("config dumps carry input digests") {
  testing::TempDir dir("dump");
  RunConfig cfg;
  cfg.seed = 3;
  write_config_dump(cfg, dir / "model.txt", {{"dataset", std::string(64, 'f')}});
  CHECK(config_dump_path(dir / "model.txt") == dir / "model.txt.config");
  const std::string text = read_file(dir / "model.txt.config");
  CHECK(text.rfind("# resolved configuration for model.txt\n", 0) == 0);
  CHECK(text.find("seed = 3\n") != std::string::npos);
  CHECK(text.find("# input dataset sha256=" + std::string(64, 'f') + "\n") != std::string::npos);
  RunConfig back;
  for (const auto& [k, v] : parse_config_text(text)) back.set(k, v);
  CHECK(back.dump() == cfg.dump());
}

TEST_CASE("command line pipeline from one config file") {
  testing::TempDir dir("cli");
  const std::string d = dir.path().string();
  write_file(dir / "run.cfg",
             "grid = 2x1\ngrid_x_min = -0.5\ngrid_x_max = 0.5\ngrid_y_min = 4\ngrid_y_max = 4\n"
             "epochs = 2\naux_count = 50\nruns = 2\nbench_runs = 1\nseed = 7\njobs = 1\n"
             "profile_max_iters = 20\nlosses = l1,l2,l3,l4\naux = 1\n"
             "data = " + d + "/d.csv\nprofile = " + d + "/p.txt\nauxset = " + d + "/a.csv\n"
             "model = " + d + "/m.txt\nreport = " + d + "/r\n");
  const std::string cfg = "--config " + d + "/run.cfg";
  REQUIRE(run_cli("gen-data " + cfg) == 0);
  REQUIRE(run_cli("fit-profile " + cfg) == 0);
  REQUIRE(run_cli("train " + cfg) == 0);
  REQUIRE(run_cli("evaluate --mpc --model " + d + "/m.txt " + cfg) == 0);
  const std::string first = read_file(dir / "r.csv");
  REQUIRE(run_cli("evaluate --mpc --model " + d + "/m.txt " + cfg) == 0);
  const std::string second = read_file(dir / "r.csv");
  // Rates and gated means are reproducible; CPU columns are measurements.
  const auto ra = parse_report_csv(first);
  const auto rb = parse_report_csv(second);
  REQUIRE(ra.size() == 2);
  REQUIRE(rb.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ra[i].success_rate == rb[i].success_rate);
    CHECK(ra[i].safe_rate == rb[i].safe_rate);
    CHECK(ra[i].mean_landing_time == rb[i].mean_landing_time);
    CHECK(ra[i].mean_tracking_error == rb[i].mean_tracking_error);
  }
  CHECK(std::filesystem::exists(dir / "r.txt"));
  CHECK(std::filesystem::exists(dir / "r.svg"));

  // Provenance chain: the model names the digests of what it consumed.
  const SurrogateParams mu = load_model(dir / "m.txt");
  CHECK(mu.provenance.seed == 7);
  CHECK(mu.provenance.losses == LossSet{true, true, true, true});
  CHECK(mu.provenance.aux);
  CHECK(mu.provenance.dataset_digest == dataset_digest(load_dataset(dir / "d.csv")));
  CHECK(mu.provenance.profile_digest == profile_digest(load_profile(dir / "p.txt")));
  CHECK(mu.provenance.auxset_digest == sha256_hex(serialize_auxset(load_auxset(dir / "a.csv"))));
  for (const char* artifact : {"d.csv", "p.txt", "m.txt", "r.csv"})
    CHECK(std::filesystem::exists(dir / (std::string(artifact) + ".config")));
  CHECK(read_file(dir / "m.txt.config").find("# input dataset sha256=" +
                                             sha256_hex(read_file(dir / "d.csv"))) !=
        std::string::npos);

  // Environment variable as the config fallback.
  REQUIRE(run_cli("simulate --mpc --x0 0,4 --out " + d + "/t.csv",
                  "PIMPCS_CONFIG=" + d + "/run.cfg") == 0);
  CHECK(read_file(dir / "t.csv").rfind("t,x,y,theta,xdot,ydot,thetadot,u1,u2\n", 0) == 0);

  CHECK(run_cli("bench --mpc --model " + d + "/m.txt " + cfg + " --out " + d + "/b") == 0);
  CHECK(std::filesystem::exists(dir / "b.txt"));
}

TEST_CASE("command line exit codes") {
  testing::TempDir dir("exit");
  const std::string d = dir.path().string();
  CHECK(run_cli("gen-data --no-such-flag 1") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("gen-data --grid 0x3 --out " + d + "/d.csv") == 1);
  CHECK(run_cli("train --epochs 0 --data " + d + "/d.csv") == 1);
  write_file(dir / "bad.cfg", "wobble = 1\n");
  CHECK(run_cli("gen-data --config " + d + "/bad.cfg") == 1);
  // A missing input is a failed precondition; an unwritable output is a runtime error.
  CHECK(run_cli("fit-profile --data " + d + "/missing.csv --out " + d + "/p.txt") == 1);
  write_file(dir / "run.cfg", "grid = 1x1\ngrid_x_min = 0\ngrid_x_max = 0\ngrid_y_min = 4\n"
                              "grid_y_max = 4\n");
  CHECK(run_cli("gen-data --config " + d + "/run.cfg --out " + d + "/no/such/dir/d.csv") == 2);
  // Version mismatch is a validation error.
  write_file(dir / "v9.csv", "# pimpcs-dataset v9; control_dt=0.05\n");
  CHECK(run_cli("fit-profile --data " + d + "/v9.csv --out " + d + "/p.txt") == 1);
  CHECK(run_cli("evaluate --runs 1") == 1);
}
