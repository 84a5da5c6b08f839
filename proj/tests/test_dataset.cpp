#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pimpcs/dataset.hpp"
#include "pimpcs/io.hpp"
#include "support.hpp"

using namespace pimpcs;

namespace {

const PlantParams kPlant{};
const SimulationSettings kSim{};
const MpcConfig kMpc{};

ReferenceGrid small_grid() {
  ReferenceGrid g;
  g.nx = 3;
  g.ny = 2;
  return g;
}

const Dataset& small_dataset() {
  static const Dataset d = generate_reference(small_grid(), kSim, kMpc, kPlant, 5).dataset;
  return d;
}

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("single-cell grid yields one trajectory of 300 samples") {
  ReferenceGrid g{0.0, 0.0, 1, 5.0, 5.0, 1};
  const GenerationResult r = generate_reference(g, kSim, kMpc, kPlant);
  CHECK(r.failures.empty());
  CHECK(r.dataset.meta.trajectories == 1);
  CHECK(r.dataset.size() == 300);
  CHECK(r.dataset.samples.front().s == State{{0, 5, 0, 0, 0, 0}});
}

TEST_CASE("grid initial states are x-major over the box with zero rates") {
  const auto starts = ReferenceGrid{}.initial_states();
  REQUIRE(starts.size() == 273);
  CHECK(starts.front() == State{{-2.5, 3.5, 0, 0, 0, 0}});
  CHECK(starts[1] == State{{-2.5, 3.75, 0, 0, 0, 0}});
  CHECK(starts[13] == State{{-2.25, 3.5, 0, 0, 0, 0}});
  CHECK(starts.back() == State{{2.5, 6.5, 0, 0, 0, 0}});
  for (const auto& s : starts) {
    CHECK(s[kX] >= -2.5);
    CHECK(s[kX] <= 2.5);
    CHECK(s[kY] >= 3.5);
    CHECK(s[kY] <= 6.5);
    for (std::size_t i = 2; i < 6; ++i) CHECK(s[i] == 0.0);
  }
}

TEST_CASE("grid validation") {
  ReferenceGrid g;
  g.nx = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = ReferenceGrid{};
  g.x_max = -3.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("generated samples are chain-consistent per trajectory") {
  const Dataset& d = small_dataset();
  REQUIRE(d.size() == 6 * 300);
  CHECK(d.meta.trajectories == 6);
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    const auto& a = d.samples[i];
    const auto& b = d.samples[i + 1];
    if (a.traj_id == b.traj_id) {
      CHECK(b.k == a.k + 1);
      CHECK(b.s == a.s_plus);
    } else {
      CHECK(b.traj_id == a.traj_id + 1);
      CHECK(b.k == 0);
    }
  }
}

TEST_CASE("successor states follow the simulator") {
  const Dataset& d = small_dataset();
  for (std::size_t i = 0; i < d.size(); i += 97) {
    const auto& t = d.samples[i];
    State s = t.s;
    const Control u = net_control(s, t.u_c, kPlant);
    for (int j = 0; j < kSim.substeps; ++j) s = rk4_step(s, u, kSim.control_dt / kSim.substeps, kPlant);
    CHECK(s == t.s_plus);
  }
}

TEST_CASE("euler residual is small but nonzero") {
  const Dataset& d = small_dataset();
  std::array<std::vector<double>, 6> res;
  bool any_nonzero = false;
  for (const auto& t : d.samples) {
    const State e = euler_step(t.s, net_control(t.s, t.u_c, kPlant), kSim.control_dt, kPlant);
    for (std::size_t i = 0; i < 6; ++i) {
      const double r = std::fabs(t.s_plus[i] - e[i]);
      res[i].push_back(r);
      any_nonzero |= r > 0.0;
    }
  }
  CHECK(any_nonzero);
  for (auto& r : res) {
    std::nth_element(r.begin(), r.begin() + r.size() / 2, r.end());
    CHECK(r[r.size() / 2] < 1e-3);
  }
}

TEST_CASE("generation is reproducible byte for byte and independent of jobs") {
  const Dataset a = generate_reference(small_grid(), kSim, kMpc, kPlant, 5, 1).dataset;
  const Dataset b = generate_reference(small_grid(), kSim, kMpc, kPlant, 5, 3).dataset;
  CHECK(serialize_dataset(a) == serialize_dataset(b));
  CHECK(serialize_dataset(a) == serialize_dataset(small_dataset()));
}

TEST_CASE("dataset meta records provenance digests") {
  const Dataset& d = small_dataset();
  CHECK(d.meta.plant_digest == plant_digest(kPlant));
  CHECK(d.meta.mpc_digest == mpc_digest(kMpc));
  CHECK(d.meta.seed == 5);
  MpcConfig other = kMpc;
  other.input_weight[0] = 1.0;
  CHECK(mpc_digest(other) != mpc_digest(kMpc));
  PlantParams heavier = kPlant;
  heavier.mass = 2.0;
  CHECK(plant_digest(heavier) != plant_digest(kPlant));
}

TEST_CASE("save and load round-trip") {
  testing::TempDir dir("dataset");
  const Dataset& d = small_dataset();
  save_dataset(d, dir / "d.csv");
  const Dataset back = load_dataset(dir / "d.csv");
  CHECK(back == d);
  const std::string text = read_file(dir / "d.csv");
  CHECK(text.rfind("# pimpcs-dataset v1;", 0) == 0);
  CHECK(text.find("\ntraj_id,k,x,y,theta,xdot,ydot,thetadot,ucr,ucl,xp,yp,thetap,xdotp,ydotp,"
                  "thetadotp\n") != std::string::npos);
  CHECK(text.find("\n# sha256=" + dataset_digest(d) + "\n") != std::string::npos);
}

TEST_CASE("truncated file reports the offending line") {
  const std::string text = seal_with_digest(serialize_dataset(small_dataset()));
  // Cut in the middle of the 10th data row (file line 12).
  std::size_t pos = 0;
  for (int i = 0; i < 11; ++i) pos = text.find('\n', pos) + 1;
  const std::string cut = text.substr(0, pos + 20);
  try {
    parse_dataset(cut);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.kind() == FormatError::Kind::kMalformedRow);
    CHECK(e.line() == 12);
    CHECK(std::string(e.what()).find("line 12") != std::string::npos);
  }
  // Cut on a row boundary: only the trailer is missing.
  try {
    parse_dataset(text.substr(0, pos));
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.kind() == FormatError::Kind::kMalformedRow);
  }
}

TEST_CASE("unsupported version is a version error") {
  std::string text = seal_with_digest(serialize_dataset(small_dataset()));
  text.replace(text.find("v1;"), 3, "v99;");
  try {
    parse_dataset(text);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.kind() == FormatError::Kind::kVersion);
    CHECK(std::string(e.what()).find("99") != std::string::npos);
  }
}

TEST_CASE("edited content fails the checksum") {
  std::string text = seal_with_digest(serialize_dataset(small_dataset()));
  const std::size_t row = text.find('\n', text.find("traj_id")) + 1;
  text[row] = text[row] == '0' ? '1' : '0';
  try {
    parse_dataset(text);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.kind() == FormatError::Kind::kChecksum);
  }
}

TEST_CASE("in-distribution is a closed bounding box test") {
  const Dataset& d = small_dataset();
  const StateBox box = bounding_box(d);
  for (std::size_t i = 0; i < d.size(); i += 13) {
    CHECK(in_distribution(d.samples[i].s, d));
    CHECK(in_distribution(d.samples[i].s_plus, box));
  }
  CHECK_FALSE(in_distribution(State{{100, 100, 0, 0, 0, 0}}, d));
  State face = box.lo;
  face[kY] = box.hi[kY];
  CHECK(in_distribution(face, box));
  State outside = box.hi;
  outside[kX] = std::nextafter(box.hi[kX], 1e9);
  CHECK_FALSE(in_distribution(outside, box));
  CHECK_THROWS_AS(bounding_box(Dataset{}), std::invalid_argument);
}

TEST_CASE("auxiliary split puts one state in each region for n = 2") {
  const AuxSet a = sample_auxiliary(small_dataset(), 2, 1);
  CHECK(a.size() == 2);
  CHECK(a.low_density_count == 1);
  CHECK(a.near_origin_count == 1);
  CHECK(bounding_box(small_dataset()).contains(a.states[0]));
  CHECK(near_origin_box().contains(a.states[1]));
}

TEST_CASE("auxiliary states lie in their sampling boxes") {
  const AuxSet a = sample_auxiliary(small_dataset(), 5001, 2);
  CHECK(a.low_density_count == 2501);
  CHECK(a.near_origin_count == 2500);
  const StateBox wide = bounding_box(small_dataset());
  for (std::size_t i = 0; i < a.low_density_count; ++i) CHECK(wide.contains(a.states[i]));
  for (std::size_t i = a.low_density_count; i < a.size(); ++i) {
    const State& s = a.states[i];
    CHECK(std::fabs(s[kX]) <= 0.5);
    CHECK(s[kY] >= 0.0);
    CHECK(s[kY] <= 0.5);
    CHECK(std::fabs(s[kTheta]) <= 0.2);
    for (std::size_t j = 3; j < 6; ++j) CHECK(std::fabs(s[j]) <= 0.5);
  }
}

TEST_CASE("auxiliary sampling is deterministic and seed dependent") {
  const AuxSet a = sample_auxiliary(small_dataset(), 5000, 9);
  const AuxSet b = sample_auxiliary(small_dataset(), 5000, 9);
  const AuxSet c = sample_auxiliary(small_dataset(), 5000, 10);
  CHECK(a == b);
  CHECK_FALSE(a.states == c.states);
  CHECK(a.dataset_digest == dataset_digest(small_dataset()));
}

TEST_CASE("auxiliary sampling preconditions") {
  CHECK_THROWS_AS(sample_auxiliary(Dataset{}, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_auxiliary(small_dataset(), 1, 0), std::invalid_argument);
}

TEST_CASE("auxiliary set round-trips through its file") {
  testing::TempDir dir("aux");
  const AuxSet a = sample_auxiliary(small_dataset(), 101, 3);
  save_auxset(a, dir / "a.csv");
  CHECK(load_auxset(dir / "a.csv") == a);
  const std::string text = read_file(dir / "a.csv");
  CHECK(count_lines(text) == 101 + 3);
  CHECK(text.find("\nx,y,theta,xdot,ydot,thetadot\n") != std::string::npos);
}

TEST_CASE("dataset states accessor") {
  const auto states = small_dataset().states();
  REQUIRE(states.size() == small_dataset().size());
  CHECK(states[17] == small_dataset().samples[17].s);
}
