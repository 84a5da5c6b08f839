#include "pimpcs/evaluate.hpp"

#include <time.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "pimpcs/io.hpp"
#include "pimpcs/parallel.hpp"

namespace pimpcs {

LandingClass classify_landing(std::span<const State> states, double dt,
                              const LandingRegion& region) {
  if (states.empty()) throw std::invalid_argument("classify_landing: empty trajectory");
  LandingClass c;
  c.safe = std::all_of(states.begin(), states.end(), [](const State& s) { return s[kY] >= 0.0; });
  std::size_t start = states.size();
  while (start > 0 && region.contains(states[start - 1])) --start;
  if (start < states.size()) {
    c.success = true;
    c.landing_time = static_cast<double>(start) * dt;
  }
  return c;
}

LandingClass classify_landing(const Trajectory& traj, const LandingRegion& region) {
  return classify_landing(traj.states, traj.control_dt, region);
}

TrackingError tracking_error(std::span<const State> traj, std::span<const State> reference) {
  if (traj.size() != reference.size())
    throw std::invalid_argument("tracking_error: length mismatch (" + std::to_string(traj.size()) +
                                " vs " + std::to_string(reference.size()) + ")");
  if (traj.empty()) throw std::invalid_argument("tracking_error: empty trajectory");
  TrackingError e;
  e.per_tick.reserve(traj.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double dx = traj[k][kX] - reference[k][kX];
    const double dy = traj[k][kY] - reference[k][kY];
    const double d = std::sqrt(dx * dx + dy * dy);
    e.per_tick.push_back(d);
    sum += d;
  }
  e.mean = sum / static_cast<double>(traj.size());
  return e;
}

std::vector<State> draw_initial_states(std::size_t n, const InitialBox& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.x_min, box.x_max);
  std::uniform_real_distribution<double> uy(box.y_min, box.y_max);
  std::vector<State> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    out.push_back(State{{x, y, 0.0, 0.0, 0.0, 0.0}});
  }
  return out;
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double thread_cpu_resolution() {
  timespec ts{};
  clock_getres(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

namespace {

std::string states_digest(const std::vector<State>& states) {
  std::string_view bytes(reinterpret_cast<const char*>(states.data()),
                         states.size() * sizeof(State));
  return sha256_hex(bytes).substr(0, 16);
}

struct RunOutcome {
  LandingReport report;
  std::vector<State> states;
};

RunOutcome run_one(const ControllerEntry& c, const State& s0, const SimulationSettings& sim,
                   const PlantParams& p) {
  RunOutcome o;
  o.report.initial = s0;
  const double t0 = thread_cpu_seconds();
  try {
    Trajectory traj = simulate(s0, c.make(), sim, p);
    o.report.cpu_seconds = thread_cpu_seconds() - t0;
    const LandingClass lc = classify_landing(traj);
    o.report.success = lc.success;
    o.report.safe = lc.safe;
    o.report.landing_time = lc.landing_time;
    o.states = std::move(traj.states);
    o.report.trajectory_digest = states_digest(o.states);
  } catch (const SimulationError& e) {
    o.report.cpu_seconds = thread_cpu_seconds() - t0;
    o.report.diverged = true;
    o.report.trajectory_digest = states_digest(e.partial().states);
  }
  return o;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (v.empty()) return;
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

std::vector<CampaignReport> run_campaign(const std::vector<ControllerEntry>& controllers,
                                         std::size_t n_runs, const InitialBox& box,
                                         std::uint64_t seed, const SimulationSettings& sim,
                                         const PlantParams& p, unsigned jobs) {
  if (n_runs < 1) throw std::invalid_argument("run_campaign: n_runs must be >= 1");
  sim.validate();
  p.validate();
  const std::vector<State> starts = draw_initial_states(n_runs, box, seed);

  std::vector<std::vector<RunOutcome>> outcomes(controllers.size(),
                                                std::vector<RunOutcome>(n_runs));
  std::vector<double> wall(controllers.size(), 0.0);
  for (std::size_t ci = 0; ci < controllers.size(); ++ci) {
    const auto w0 = std::chrono::steady_clock::now();
    parallel_for(n_runs, jobs, [&](std::size_t i) {
      outcomes[ci][i] = run_one(controllers[ci], starts[i], sim, p);
    });
    wall[ci] = std::chrono::duration<double>(std::chrono::steady_clock::now() - w0).count();
  }

  const auto ref_it = std::find_if(controllers.begin(), controllers.end(),
                                   [](const ControllerEntry& c) { return c.is_reference; });
  const std::vector<RunOutcome>* reference =
      ref_it == controllers.end() ? nullptr : &outcomes[ref_it - controllers.begin()];

  std::vector<CampaignReport> reports;
  for (std::size_t ci = 0; ci < controllers.size(); ++ci) {
    CampaignReport r;
    r.label = controllers[ci].label;
    r.loss_set = controllers[ci].loss_set;
    r.aux = controllers[ci].aux;
    r.seed = seed;
    r.wall_seconds = wall[ci];
    std::size_t successes = 0, safe = 0;
    std::vector<double> times, errors, cpu;
    for (std::size_t i = 0; i < n_runs; ++i) {
      RunOutcome& o = outcomes[ci][i];
      LandingReport& lr = o.report;
      if (lr.success && reference && !(*reference)[i].report.diverged &&
          (*reference)[i].states.size() == o.states.size()) {
        lr.tracking_error_mean = tracking_error(o.states, (*reference)[i].states).mean;
      }
      successes += lr.success;
      safe += lr.safe;
      if (lr.success) {
        times.push_back(*lr.landing_time);
        if (lr.tracking_error_mean) errors.push_back(*lr.tracking_error_mean);
      }
      cpu.push_back(lr.cpu_seconds);
      r.runs.push_back(lr);
    }
    const double n = static_cast<double>(n_runs);
    r.success_rate = static_cast<double>(successes) / n;
    r.safe_rate = static_cast<double>(safe) / n;
    if (!times.empty())
      r.mean_landing_time =
          std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
    if (!errors.empty())
      r.mean_tracking_error =
          std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    mean_std(cpu, r.mean_cpu_s, r.std_cpu_s);
    r.cpu_seconds = std::accumulate(cpu.begin(), cpu.end(), 0.0);
    reports.push_back(std::move(r));
  }
  return reports;
}

BenchReport bench_cpu(const std::vector<ControllerEntry>& controllers, std::size_t n_runs,
                      std::uint64_t seed, const InitialBox& box, const SimulationSettings& sim,
                      const PlantParams& p) {
  if (n_runs < 1) throw std::invalid_argument("bench_cpu: n_runs must be >= 1");
  sim.validate();
  BenchReport bench;
  bench.timer_resolution_s = thread_cpu_resolution();
  if (bench.timer_resolution_s > 1e-6)
    bench.warning = "thread CPU timer resolution " + format_general(bench.timer_resolution_s) +
                    " s exceeds 1 us; per-tick latencies are unreliable";
  const std::vector<State> starts = draw_initial_states(n_runs, box, seed);

  for (const ControllerEntry& c : controllers) {
    TimingSummary row;
    row.label = c.label;
    for (const State& s0 : starts) {
      Policy inner = c.make();
      double tick_total = 0.0;
      std::size_t ticks = 0;
      Policy timed = [&](const State& s) {
        const double t0 = thread_cpu_seconds();
        const Control u = inner(s);
        tick_total += thread_cpu_seconds() - t0;
        ++ticks;
        return u;
      };
      const double t0 = thread_cpu_seconds();
      try {
        simulate(s0, timed, sim, p);
      } catch (const SimulationError&) {
        // Diverged runs still contribute the CPU they consumed.
      }
      row.run_cpu_s.push_back(thread_cpu_seconds() - t0);
      row.run_tick_mean_s.push_back(ticks ? tick_total / static_cast<double>(ticks) : 0.0);
    }
    mean_std(row.run_cpu_s, row.mean_cpu_s, row.std_cpu_s);
    mean_std(row.run_tick_mean_s, row.mean_tick_s, row.std_tick_s);
    bench.rows.push_back(std::move(row));
  }

  const auto ref = std::find_if(controllers.begin(), controllers.end(),
                                [](const ControllerEntry& c) { return c.is_reference; });
  const auto cand = std::find_if(controllers.begin(), controllers.end(),
                                 [](const ControllerEntry& c) { return !c.is_reference; });
  if (ref != controllers.end() && cand != controllers.end()) {
    const double ref_mean = bench.rows[ref - controllers.begin()].mean_cpu_s;
    if (ref_mean > 0.0)
      bench.reduction_ratio = 1.0 - bench.rows[cand - controllers.begin()].mean_cpu_s / ref_mean;
  }
  return bench;
}

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? format_general(*v) : ""; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> csv_fields(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

}  // namespace

std::string report_csv(const std::vector<CampaignReport>& reports) {
  std::string out(kReportCsvHeader);
  out.push_back('\n');
  for (const auto& r : reports) {
    out += csv_escape(r.label) + "," + csv_escape(r.loss_set) + "," + (r.aux ? "1" : "0") + "," +
           format_general(r.success_rate) + "," + format_general(r.safe_rate) + "," +
           opt_field(r.mean_landing_time) + "," + opt_field(r.mean_tracking_error) + "," +
           format_general(r.mean_cpu_s) + "," + format_general(r.std_cpu_s) + "\n";
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  std::vector<ReportRow> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (trim(line) != kReportCsvHeader)
        throw FormatError(FormatError::Kind::kMalformedRow, "report: unexpected CSV header",
                          line_no);
      header_seen = true;
      continue;
    }
    const auto f = csv_fields(line);
    if (f.size() != 9)
      throw FormatError(FormatError::Kind::kMalformedRow,
                        "report: line " + std::to_string(line_no) + ": expected 9 fields", line_no);
    try {
      ReportRow r;
      r.controller = f[0];
      r.loss_set = f[1];
      r.aux = f[2] == "1";
      r.success_rate = parse_double(f[3]);
      r.safe_rate = parse_double(f[4]);
      if (!f[5].empty()) r.mean_landing_time = parse_double(f[5]);
      if (!f[6].empty()) r.mean_tracking_error = parse_double(f[6]);
      r.mean_cpu_s = parse_double(f[7]);
      r.std_cpu_s = parse_double(f[8]);
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw FormatError(FormatError::Kind::kMalformedRow,
                        "report: line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  if (!header_seen) throw FormatError(FormatError::Kind::kMalformedRow, "report: missing header", 1);
  return rows;
}

std::string report_text_table(const std::vector<CampaignReport>& reports) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %-16s %-12s %-4s %6s %6s %8s %10s %10s\n", "No.",
                "controller", "losses", "aux", "suc.", "safe", "time_s", "tracking_m", "cpu_s");
  os << buf;
  int no = 1;
  for (const auto& r : reports) {
    auto opt = [](const std::optional<double>& v, const char* fmt) {
      if (!v) return std::string("-");
      char b[32];
      std::snprintf(b, sizeof b, fmt, *v);
      return std::string(b);
    };
    std::snprintf(buf, sizeof buf, "%-4d %-16s %-12s %-4s %6.2f %6.2f %8s %10s %10.4f\n", no++,
                  r.label.c_str(), r.loss_set.c_str(), r.aux ? "yes" : "", r.success_rate,
                  r.safe_rate, opt(r.mean_landing_time, "%.2f").c_str(),
                  opt(r.mean_tracking_error, "%.3f").c_str(), r.mean_cpu_s);
    os << buf;
  }
  return os.str();
}

std::string cpu_histogram_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  constexpr int kBins = 20;
  constexpr double kW = 640, kH = 360, kPad = 40;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [_, v] : series)
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!(hi >= lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi == lo) hi = lo + 1e-9;
  const double width = (hi - lo) / kBins;

  std::vector<std::array<int, kBins>> counts(series.size());
  int max_count = 1;
  for (std::size_t s = 0; s < series.size(); ++s) {
    counts[s].fill(0);
    for (double x : series[s].second) {
      const int b = std::clamp(static_cast<int>((x - lo) / width), 0, kBins - 1);
      max_count = std::max(max_count, ++counts[s][static_cast<std::size_t>(b)]);
    }
  }

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  os << "  <title>CPU time per simulation</title>\n";
  os << "  <rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  const double plot_w = kW - 2 * kPad, plot_h = kH - 2 * kPad;
  const double bar_w = plot_w / kBins / std::max<std::size_t>(1, series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 8];
    os << "  <g fill=\"" << color << "\" fill-opacity=\"0.8\">\n";
    for (int b = 0; b < kBins; ++b) {
      const int c = counts[s][static_cast<std::size_t>(b)];
      if (!c) continue;
      const double h = plot_h * c / max_count;
      const double x = kPad + b * plot_w / kBins + static_cast<double>(s) * bar_w;
      os << "    <rect x=\"" << x << "\" y=\"" << (kH - kPad - h) << "\" width=\"" << bar_w
         << "\" height=\"" << h << "\"/>\n";
    }
    os << "  </g>\n";
    os << "  <text x=\"" << (kW - kPad - 150) << "\" y=\"" << (kPad + 16 * (s + 1))
       << "\" font-size=\"12\" fill=\"" << color << "\">" << xml_escape(series[s].first)
       << "</text>\n";
  }
  os << "  <line x1=\"" << kPad << "\" y1=\"" << (kH - kPad) << "\" x2=\"" << (kW - kPad)
     << "\" y2=\"" << (kH - kPad) << "\" stroke=\"black\"/>\n";
  os << "  <text x=\"" << kPad << "\" y=\"" << (kH - 10) << "\" font-size=\"12\">"
     << format_general(lo) << " s</text>\n";
  os << "  <text x=\"" << (kW - kPad - 60) << "\" y=\"" << (kH - 10) << "\" font-size=\"12\">"
     << format_general(hi) << " s</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string report_svg(const std::vector<CampaignReport>& reports) {
  std::vector<std::pair<std::string, std::vector<double>>> series;
  for (const auto& r : reports) {
    std::vector<double> cpu;
    for (const auto& run : r.runs) cpu.push_back(run.cpu_seconds);
    series.emplace_back(r.label, std::move(cpu));
  }
  return cpu_histogram_svg(series);
}

void emit_report(const std::vector<CampaignReport>& reports, const std::filesystem::path& path,
                 ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv: write_file(path, report_csv(reports)); break;
    case ReportFormat::kTextTable: write_file(path, report_text_table(reports)); break;
    case ReportFormat::kSvgHistogram: write_file(path, report_svg(reports)); break;
  }
}

std::string bench_text(const BenchReport& bench) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %6s %12s %12s %14s %14s\n", "controller", "runs",
                "mean_cpu_s", "std_cpu_s", "mean_tick_us", "std_tick_us");
  os << buf;
  for (const auto& r : bench.rows) {
    std::snprintf(buf, sizeof buf, "%-16s %6zu %12.4f %12.4f %14.3f %14.3f\n", r.label.c_str(),
                  r.run_cpu_s.size(), r.mean_cpu_s, r.std_cpu_s, 1e6 * r.mean_tick_s,
                  1e6 * r.std_tick_s);
    os << buf;
  }
  if (bench.reduction_ratio) {
    std::snprintf(buf, sizeof buf, "CPU time reduced by %.1f%%\n", 100.0 * *bench.reduction_ratio);
    os << buf;
  }
  if (!bench.warning.empty()) os << "warning: " << bench.warning << "\n";
  return os.str();
}

}  // namespace pimpcs
