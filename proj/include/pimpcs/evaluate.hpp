#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pimpcs/dynamics.hpp"

namespace pimpcs {

// Closed box (x, y) in [-0.5, 0.5] x [0, 0.5].
struct LandingRegion {
  double x_min = -0.5;
  double x_max = 0.5;
  double y_min = 0.0;
  double y_max = 0.5;

  bool contains(const State& s) const {
    return s[kX] >= x_min && s[kX] <= x_max && s[kY] >= y_min && s[kY] <= y_max;
  }
};

struct LandingClass {
  bool success = false;
  bool safe = false;
  // Start of the final uninterrupted in-region stretch; set iff success.
  std::optional<double> landing_time;
};

// States are sampled at the control rate, states[k] at t = k * dt.
LandingClass classify_landing(std::span<const State> states, double dt,
                              const LandingRegion& region = {});
LandingClass classify_landing(const Trajectory& traj, const LandingRegion& region = {});

struct TrackingError {
  std::vector<double> per_tick;
  double mean = 0.0;
};

// Positional (x, y) Euclidean error per tick. Throws std::invalid_argument on
// length mismatch or empty input.
TrackingError tracking_error(std::span<const State> traj, std::span<const State> reference);

// Initial-condition box: (x, y, 0, 0, 0, 0) with x, y uniform.
struct InitialBox {
  double x_min = -2.5;
  double x_max = 2.5;
  double y_min = 3.5;
  double y_max = 6.5;

  InitialBox expanded(double margin) const {
    return {x_min - margin, x_max + margin, y_min - margin, y_max + margin};
  }
};

std::vector<State> draw_initial_states(std::size_t n, const InitialBox& box, std::uint64_t seed);

struct ControllerEntry {
  std::string label;
  std::string loss_set;  // e.g. "l1,l2,l3" or "mpc"
  bool aux = false;
  // MPC runs double as the tracking-error reference.
  bool is_reference = false;
  // Fresh policy per run; stateful controllers must not share state across runs.
  std::function<Policy()> make;
};

struct LandingReport {
  State initial{};
  bool diverged = false;
  bool success = false;
  bool safe = false;
  std::optional<double> landing_time;
  std::optional<double> tracking_error_mean;
  double cpu_seconds = 0.0;
  std::string trajectory_digest;
};

struct CampaignReport {
  std::string label;
  std::string loss_set;
  bool aux = false;
  double success_rate = 0.0;
  double safe_rate = 0.0;
  // Averaged over successful runs only; absent when none succeeded.
  std::optional<double> mean_landing_time;
  std::optional<double> mean_tracking_error;
  double mean_cpu_s = 0.0;
  double std_cpu_s = 0.0;
  std::vector<LandingReport> runs;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  double cpu_seconds = 0.0;
};

// Every controller sees the same initial draws. Diverged runs count as failed
// and unsafe; the campaign continues.
std::vector<CampaignReport> run_campaign(const std::vector<ControllerEntry>& controllers,
                                         std::size_t n_runs, const InitialBox& box,
                                         std::uint64_t seed, const SimulationSettings& sim,
                                         const PlantParams& p, unsigned jobs = 1);

double thread_cpu_seconds();
double thread_cpu_resolution();

struct TimingSummary {
  std::string label;
  std::vector<double> run_cpu_s;       // whole simulation, per run
  std::vector<double> run_tick_mean_s;  // mean controller latency per tick, per run
  double mean_cpu_s = 0.0;
  double std_cpu_s = 0.0;
  double mean_tick_s = 0.0;
  double std_tick_s = 0.0;
};

struct BenchReport {
  std::vector<TimingSummary> rows;
  // 1 - mean_cpu(candidate) / mean_cpu(reference), for the first non-reference
  // row against the reference row.
  std::optional<double> reduction_ratio;
  double timer_resolution_s = 0.0;
  std::string warning;
};

// Sequential on the calling thread; CPU time is thread CPU time.
BenchReport bench_cpu(const std::vector<ControllerEntry>& controllers, std::size_t n_runs,
                      std::uint64_t seed, const InitialBox& box, const SimulationSettings& sim,
                      const PlantParams& p);

enum class ReportFormat { kCsv, kTextTable, kSvgHistogram };

inline constexpr std::string_view kReportCsvHeader =
    "controller,loss_set,aux,success_rate,safe_rate,mean_landing_time_s,mean_tracking_error_m,"
    "mean_cpu_s,std_cpu_s";

std::string report_csv(const std::vector<CampaignReport>& reports);
std::string report_text_table(const std::vector<CampaignReport>& reports);
// Histogram of per-run simulation CPU times, one colour per controller.
std::string cpu_histogram_svg(const std::vector<std::pair<std::string, std::vector<double>>>& series);
std::string report_svg(const std::vector<CampaignReport>& reports);
void emit_report(const std::vector<CampaignReport>& reports, const std::filesystem::path& path,
                 ReportFormat format);

struct ReportRow {
  std::string controller;
  std::string loss_set;
  bool aux = false;
  double success_rate = 0.0;
  double safe_rate = 0.0;
  std::optional<double> mean_landing_time;
  std::optional<double> mean_tracking_error;
  double mean_cpu_s = 0.0;
  double std_cpu_s = 0.0;
};
std::vector<ReportRow> parse_report_csv(std::string_view text);

std::string bench_text(const BenchReport& bench);

}  // namespace pimpcs
