#include "nlsn/survey.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>
#include <tuple>

#include "nlsn/error.hpp"
#include "nlsn/oracle.hpp"

namespace nlsn {

ThresholdReport threshold_critical(const Params& params, std::optional<double> m_estimate) {
  params.validate();
  if (params.N != 3 && params.N != 4) {
    throw Error(ErrorKind::InvalidParams, "threshold needs N = 3 or 4");
  }
  if (!params.is_q_critical()) {
    throw Error(ErrorKind::InvalidParams, "threshold needs q equal to the Sobolev exponent 2N/(N-2)");
  }
  if (params.is_p_critical()) {
    throw Error(ErrorKind::InvalidParams, "threshold needs p below the Sobolev exponent");
  }
  if (m_estimate && !std::isfinite(*m_estimate)) {
    throw Error(ErrorKind::InvalidArgument, "energy estimate must be finite");
  }
  const double half_n = 0.5 * params.N;
  ThresholdReport report;
  report.rhs = std::pow(sobolev_constant(params.N), half_n) /
               (params.N * std::pow(params.mu2, half_n - 1.0));
  report.used_closed_form = !m_estimate.has_value();
  const double level =
      m_estimate ? *m_estimate : single_energy_closed_form(params.mu1, params.p, params.a, params.N);
  report.lhs = level + params.beta * std::sqrt(params.a * params.b);
  report.margin = report.rhs - report.lhs;
  report.sufficient_condition_holds = report.margin > 0.0;
  return report;
}

std::string_view to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::A: return "a";
    case SweepAxis::B: return "b";
    case SweepAxis::Beta: return "beta";
    case SweepAxis::Mu1: return "mu1";
    case SweepAxis::Mu2: return "mu2";
    case SweepAxis::P: return "p";
    case SweepAxis::Q: return "q";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  for (SweepAxis axis : {SweepAxis::A, SweepAxis::B, SweepAxis::Beta, SweepAxis::Mu1,
                         SweepAxis::Mu2, SweepAxis::P, SweepAxis::Q}) {
    if (name == to_string(axis)) return axis;
  }
  throw Error(ErrorKind::InvalidArgument,
              "unknown sweep axis '" + std::string(name) + "' (expected a, b, beta, mu1, mu2, p or q)");
}

Params with_axis_value(const Params& base, SweepAxis axis, double value) {
  Params out = base;
  switch (axis) {
    case SweepAxis::A: out.a = value; break;
    case SweepAxis::B: out.b = value; break;
    case SweepAxis::Beta: out.beta = value; break;
    case SweepAxis::Mu1: out.mu1 = value; break;
    case SweepAxis::Mu2: out.mu2 = value; break;
    case SweepAxis::P: out.p = value; break;
    case SweepAxis::Q: out.q = value; break;
  }
  return out;
}

std::string_view SweepRecord::status_label() const noexcept {
  return failed() ? std::string_view("Failed") : to_string(status);
}

bool canonical_less(const SweepRecord& x, const SweepRecord& y) noexcept {
  const auto key = [](const Params& p) {
    return std::tie(p.N, p.p, p.q, p.mu1, p.mu2, p.beta, p.a, p.b);
  };
  return key(x.params) < key(y.params);
}

namespace {

bool threshold_applies(const Params& p) {
  return (p.N == 3 || p.N == 4) && p.is_q_critical() && !p.is_p_critical();
}

SweepRecord run_one(SweepAxis axis, double value, const Params& params, const SweepOptions& opts) {
  SweepRecord rec;
  rec.axis = axis;
  rec.value = value;
  rec.params = params;
  const auto start = std::chrono::steady_clock::now();
  try {
    const SolveResult result = descend(params, opts.solver, opts.grid);
    rec.energy = result.energy;
    rec.lambda1 = result.lambda1;
    rec.lambda2 = result.lambda2;
    rec.status = result.status;
    rec.pohozaev_residual = result.pohozaev_residual;
    rec.pde_residual = result.pde_residual;
    rec.iterations = result.iterations;
    if (params.is_p_critical() && params.is_q_critical()) {
      rec.identity = check_nonexistence_identity(result, params);
    }
    if (threshold_applies(params)) {
      const std::optional<double> level =
          result.status == SolveStatus::Converged ? std::optional<double>(result.energy)
                                                  : std::nullopt;
      rec.threshold = threshold_critical(params, level);
    }
  } catch (const std::exception& e) {
    rec.failure = e.what();
    if (rec.failure.empty()) rec.failure = "unknown error";
  }
  if (opts.record_wall_time) {
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return rec;
}

}  // namespace

std::vector<SweepRecord> sweep(const Params& base, SweepAxis axis, std::span<const double> values,
                               const SweepOptions& opts) {
  opts.solver.validate();
  std::vector<Params> tuples;
  tuples.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidParams,
                  "sweep value for " + std::string(to_string(axis)) + " must be finite");
    }
    tuples.push_back(with_axis_value(base, axis, v));
    tuples.back().validate();
  }

  std::vector<SweepRecord> records(values.size());
  unsigned workers = opts.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.jobs;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, values.size()));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      records[i] = run_one(axis, values[i], tuples[i], opts);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned k = 0; k < workers; ++k) pool.emplace_back(work);
  }
  std::stable_sort(records.begin(), records.end(), canonical_less);
  return records;
}

std::vector<SweepRecord> nonexistence_map(const Params& base, std::span<const double> betas,
                                          const SweepOptions& opts) {
  if (base.N != 3 && base.N != 4) {
    throw Error(ErrorKind::InvalidParams, "nonexistence map needs N = 3 or 4");
  }
  if (!base.is_p_critical() || !base.is_q_critical()) {
    throw Error(ErrorKind::InvalidParams,
                "nonexistence map needs p = q = 2N/(N-2) (doubly critical system)");
  }
  return sweep(base, SweepAxis::Beta, betas, opts);
}

bool nonexistence_confirmed(std::span<const SweepRecord> records) noexcept {
  for (const SweepRecord& rec : records) {
    if (rec.failed()) continue;
    if (rec.status == SolveStatus::Converged) return false;
    if (rec.identity && rec.identity->verdict != IdentityVerdict::Undefined &&
        !rec.identity->contradiction) {
      return false;
    }
  }
  return true;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRecord& r : records) {
    const Params& p = r.params;
    out << to_string(r.axis) << ',' << format_double(r.value) << ',' << p.N << ','
        << format_double(p.p) << ',' << format_double(p.q) << ',' << format_double(p.mu1) << ','
        << format_double(p.mu2) << ',' << format_double(p.beta) << ',' << format_double(p.a)
        << ',' << format_double(p.b) << ',' << format_double(r.energy) << ','
        << format_double(r.lambda1) << ',' << format_double(r.lambda2) << ',' << r.status_label()
        << ',' << format_double(r.pohozaev_residual) << ',' << format_double(r.pde_residual)
        << ',' << r.iterations << ',' << format_double(r.wall_time) << '\n';
  }
}

}  // namespace nlsn
