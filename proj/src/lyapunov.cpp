#include "pimpcs/lyapunov.hpp"

#include <array>
#include <cmath>

#include "pimpcs/io.hpp"
#include "pimpcs/parallel.hpp"

namespace pimpcs {

namespace {

// Fixed so objective sums are identical for any worker count.
constexpr std::size_t kReductionParts = 16;

struct PartialSums {
  double objective = 0.0;
  std::size_t violations = 0;
  Mat6 subgradient{};
};

void accumulate(const SymMat6& p, std::span<const StatePair> data, Partition r, bool with_grad,
                PartialSums& out) {
  for (std::size_t i = r.begin; i < r.end; ++i) {
    const StatePair& t = data[i];
    const double diff = p.quad(t.s_plus) - p.quad(t.s);
    if (std::isnan(diff)) {
      out.objective += diff;
    } else if (diff > 0.0) {
      out.objective += diff;
      ++out.violations;
      if (with_grad) {
        for (std::size_t a = 0; a < 6; ++a)
          for (std::size_t b = a; b < 6; ++b)
            out.subgradient(a, b) += t.s_plus[a] * t.s_plus[b] - t.s[a] * t.s[b];
      }
    }
  }
}

PartialSums evaluate(const SymMat6& p, std::span<const StatePair> data, bool with_grad,
                     unsigned jobs) {
  std::array<PartialSums, kReductionParts> parts{};
  parallel_for(kReductionParts, jobs, [&](std::size_t i) {
    accumulate(p, data, partition_range(data.size(), kReductionParts, i), with_grad, parts[i]);
  });
  PartialSums total;
  for (const auto& part : parts) {
    total.objective += part.objective;
    total.violations += part.violations;
    if (with_grad) total.subgradient += part.subgradient;
  }
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < a; ++b) total.subgradient(a, b) = total.subgradient(b, a);
  return total;
}

double frobenius(const Mat6& m) {
  double s = 0.0;
  for (double v : m.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace

std::vector<StatePair> state_pairs(const Dataset& d) {
  std::vector<StatePair> out;
  out.reserve(d.size());
  for (const auto& t : d.samples) out.push_back(StatePair{t.s, t.s_plus});
  return out;
}

double lyapunov_value(const SymMat6& p, const State& s) { return p.quad(s); }

double profile_objective(const SymMat6& p, std::span<const StatePair> data, unsigned jobs) {
  return evaluate(p, data, false, jobs).objective;
}

double profile_objective(const SymMat6& p, const Dataset& d, unsigned jobs) {
  const auto pairs = state_pairs(d);
  return profile_objective(p, pairs, jobs);
}

double violation_fraction(const SymMat6& p, std::span<const StatePair> data) {
  if (data.empty()) return 0.0;
  std::size_t count = 0;
  for (const auto& t : data)
    if (p.quad(t.s_plus) > p.quad(t.s)) ++count;
  return static_cast<double>(count) / static_cast<double>(data.size());
}

StabilityProfile fit_profile(std::span<const StatePair> data, const FitOptions& opts) {
  if (data.empty()) throw std::invalid_argument("fit_profile: empty dataset");
  if (!(opts.eps_floor > 0.0)) throw std::invalid_argument("fit_profile: eps_floor must be > 0");
  if (opts.max_iters < 0) throw std::invalid_argument("fit_profile: max_iters must be >= 0");
  if (!(opts.step > 0.0)) throw std::invalid_argument("fit_profile: step must be > 0");

  SymMat6 p = project_pd_trace(SymMat6::identity(), opts.eps_floor, kProfileTrace);
  PartialSums cur = evaluate(p, data, true, opts.jobs);
  if (!std::isfinite(cur.objective))
    throw ProfileFitError("fit_profile: non-finite objective at P = I", 0, p);

  SymMat6 best = p;
  PartialSums best_sums = cur;
  int t = 0;
  for (; t < opts.max_iters && cur.violations > 0; ++t) {
    const double gnorm = frobenius(cur.subgradient);
    if (!(gnorm > 0.0)) break;
    const double scale = opts.step / std::sqrt(static_cast<double>(t) + 1.0) / gnorm;
    p = project_pd_trace(p - SymMat6::symmetrize(cur.subgradient) * scale, opts.eps_floor,
                         kProfileTrace);
    cur = evaluate(p, data, true, opts.jobs);
    if (!std::isfinite(cur.objective))
      throw ProfileFitError("fit_profile: non-finite objective at iteration " +
                                std::to_string(t + 1),
                            t + 1, p);
    if (cur.objective < best_sums.objective) {
      best = p;
      best_sums = cur;
    }
  }

  StabilityProfile out;
  out.p = best;
  out.eps_floor = opts.eps_floor;
  out.final_objective = best_sums.objective;
  out.violation_fraction =
      static_cast<double>(best_sums.violations) / static_cast<double>(data.size());
  out.iterations = t;
  return out;
}

StabilityProfile fit_profile(const Dataset& d, const FitOptions& opts) {
  const auto pairs = state_pairs(d);
  StabilityProfile out = fit_profile(pairs, opts);
  out.dataset_digest = dataset_digest(d);
  return out;
}

std::vector<StatePair> active_pairs(std::span<const StatePair> data, const SymMat6& p) {
  std::vector<StatePair> out;
  for (const auto& t : data)
    if (p.quad(t.s_plus) > p.quad(t.s)) out.push_back(t);
  return out;
}

std::pair<double, double> trace_reform_check(std::span<const StatePair> subset,
                                             const SymMat6& p) {
  double lhs = 0.0;
  SymMat6 c;
  for (const auto& t : subset) {
    lhs += p.quad(t.s_plus) - p.quad(t.s);
    c += SymMat6::outer(t.s_plus);
    c -= SymMat6::outer(t.s);
  }
  return {lhs, trace_product(c, p)};
}

std::string serialize_profile(const StabilityProfile& profile) {
  std::string out = "# pimpcs-profile v1; eps=" + format_double(profile.eps_floor) +
                    "; objective=" + format_double(profile.final_objective) +
                    "; violations=" + format_double(profile.violation_fraction) +
                    "; iterations=" + std::to_string(profile.iterations) +
                    "; dataset=" + profile.dataset_digest + "\n";
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (j) out.push_back(',');
      out += format_double(profile.p(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

StabilityProfile parse_profile(std::string_view text) {
  const std::string what = "profile";
  std::vector<std::string_view> lines;
  for (std::string_view l : split(text, '\n'))
    if (!trim(l).empty()) lines.push_back(l);
  constexpr std::string_view tag = "# pimpcs-profile v";
  if (lines.empty() || lines[0].substr(0, tag.size()) != tag)
    throw FormatError(FormatError::Kind::kVersion, what + ": missing '# pimpcs-profile v1' header",
                      1);
  std::string_view rest = lines[0].substr(tag.size());
  const std::size_t semi = rest.find(';');
  if (trim(rest.substr(0, semi)) != "1")
    throw FormatError(FormatError::Kind::kVersion,
                      what + ": unsupported version '" + std::string(trim(rest.substr(0, semi))) +
                          "' (expected 1)",
                      1);
  StabilityProfile out;
  if (semi != std::string_view::npos) {
    for (const auto& [k, v] : parse_header_fields(rest.substr(semi + 1))) {
      try {
        if (k == "eps") out.eps_floor = parse_double(v);
        else if (k == "objective") out.final_objective = parse_double(v);
        else if (k == "violations") out.violation_fraction = parse_double(v);
        else if (k == "iterations") out.iterations = static_cast<int>(parse_int(v));
        else if (k == "dataset") out.dataset_digest = v;
      } catch (const std::invalid_argument& e) {
        throw FormatError(FormatError::Kind::kVersion, what + ": header field " + k + ": " + e.what(),
                          1);
      }
    }
  }
  if (lines.size() != 7)
    throw FormatError(FormatError::Kind::kMalformedRow,
                      what + ": expected 6 matrix rows, found " + std::to_string(lines.size() - 1),
                      lines.size() + 1);
  Mat6 m;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto fields = split(lines[i + 1], ',');
    if (fields.size() != 6)
      throw FormatError(FormatError::Kind::kMalformedRow,
                        what + ": line " + std::to_string(i + 2) + ": expected 6 entries", i + 2);
    for (std::size_t j = 0; j < 6; ++j) {
      try {
        m(i, j) = parse_double(fields[j]);
      } catch (const std::invalid_argument& e) {
        throw FormatError(FormatError::Kind::kMalformedRow,
                          what + ": line " + std::to_string(i + 2) + ": " + e.what(), i + 2);
      }
    }
  }
  try {
    out.p = SymMat6::from_symmetric(m);
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::kContent, what + ": " + e.what());
  }
  return out;
}

std::string profile_digest(const StabilityProfile& profile) {
  return sha256_hex(serialize_profile(profile));
}

void save_profile(const StabilityProfile& profile, const std::filesystem::path& path) {
  write_file(path, serialize_profile(profile));
}

StabilityProfile load_profile(const std::filesystem::path& path) {
  return parse_profile(read_file(path));
}

}  // namespace pimpcs
