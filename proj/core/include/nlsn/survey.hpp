#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlsn/params.hpp"
#include "nlsn/solver.hpp"

namespace nlsn {

/// Sufficient condition for existence when q is Sobolev critical:
/// m(a, b) + beta sqrt(ab) < S^{N/2} / (N mu2^{N/2-1}).
struct ThresholdReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  ///< rhs - lhs
  bool sufficient_condition_holds = false;
  /// True when m(a, b) was replaced by the closed-form single-equation level
  /// m(a, 0), which bounds it from above.
  bool used_closed_form = false;
};

/// Requires N in {3, 4}, q = 2N/(N-2) and p subcritical; throws InvalidParams
/// otherwise.
ThresholdReport threshold_critical(const Params& params,
                                   std::optional<double> m_estimate = std::nullopt);

enum class SweepAxis { A, B, Beta, Mu1, Mu2, P, Q };

std::string_view to_string(SweepAxis axis) noexcept;
/// Accepts a, b, beta, mu1, mu2, p, q. Throws InvalidArgument otherwise.
SweepAxis parse_axis(std::string_view name);

/// Copy of `base` with one coordinate replaced.
Params with_axis_value(const Params& base, SweepAxis axis, double value);

struct SweepOptions {
  SolverOptions solver{};
  GridSpec grid{};
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned jobs = 1;
  /// Wall times are recorded only on request so that output bytes stay
  /// reproducible by default.
  bool record_wall_time = false;
};

struct SweepRecord {
  SweepAxis axis = SweepAxis::Beta;
  double value = 0.0;
  Params params{};
  double energy = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  double pohozaev_residual = 0.0;
  double pde_residual = 0.0;
  int iterations = 0;
  std::optional<ThresholdReport> threshold{};
  /// Identity verdict, filled for doubly critical parameters.
  std::optional<IdentityCheck> identity{};
  double wall_time = 0.0;
  /// Non-empty when the solve threw; the message of the exception.
  std::string failure{};

  bool failed() const noexcept { return !failure.empty(); }
  /// "Failed" for failed runs, the solve status otherwise.
  std::string_view status_label() const noexcept;
};

/// Lexicographic order over (N, p, q, mu1, mu2, beta, a, b).
bool canonical_less(const SweepRecord& x, const SweepRecord& y) noexcept;

/// One solve per value, run on up to opts.jobs threads and returned in
/// canonical order. Every value is validated before any solve starts; a
/// solve that throws yields a failed record instead of aborting the sweep.
std::vector<SweepRecord> sweep(const Params& base, SweepAxis axis, std::span<const double> values,
                               const SweepOptions& opts = {});

/// Sweep over beta for p = q = 2N/(N-2), N in {3, 4}.
std::vector<SweepRecord> nonexistence_map(const Params& base, std::span<const double> betas,
                                          const SweepOptions& opts = {});

/// True when no record converged and every record with finite multipliers
/// carries a contradiction verdict.
bool nonexistence_confirmed(std::span<const SweepRecord> records) noexcept;

/// CSV with the fixed header below, LF line endings and 17 significant
/// digits for every float.
inline constexpr std::string_view kSweepCsvHeader =
    "axis,value,N,p,q,mu1,mu2,beta,a,b,energy,lambda1,lambda2,status,pohozaev_residual,"
    "pde_residual,iterations,wall_time";

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records);

/// printf("%.17g") of x.
std::string format_double(double x);

}  // namespace nlsn
