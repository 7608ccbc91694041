#include "mrseries/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrseries/error.hpp"
#include "mrseries/summation.hpp"

namespace mrseries {

namespace {

void require_truncation(const CoefficientSequence& a, std::size_t N) {
  if (N > a.size()) {
    throw ValidationError("truncation " + std::to_string(N) + " exceeds coefficient support " + std::to_string(a.size()));
  }
}

std::vector<std::size_t> checked_truncations(const CoefficientSequence& a, std::span<const std::size_t> truncations) {
  if (truncations.empty()) throw ValidationError("at least one truncation is required");
  for (std::size_t i = 0; i < truncations.size(); ++i) {
    require_truncation(a, truncations[i]);
    if (i > 0 && truncations[i] <= truncations[i - 1]) throw ValidationError("truncations must be strictly increasing");
  }
  return {truncations.begin(), truncations.end()};
}

double log2_weight(std::size_t n) { return std::log2(static_cast<double>(n) + 1.0); }

// One pass over folded positions; single-sum criteria accumulate term(n).
template <class Term>
CriterionValue single_sum(CriterionKind kind, double b, const CoefficientSequence& a,
                          std::span<const std::size_t> truncations, Term term) {
  const auto ts = checked_truncations(a, truncations);
  CriterionValue v;
  v.kind = kind;
  v.b = b;
  CompensatedSum acc;
  std::size_t next = 0;
  // A zero truncation is an empty sum.
  if (ts.front() == 0) {
    v.history.push_back({0, 0.0});
    ++next;
  }
  for (std::size_t n = 1; n <= ts.back(); ++n) {
    acc += term(n);
    if (n == ts[next]) {
      v.history.push_back({n, acc.value()});
      ++next;
    }
  }
  v.truncation = ts.back();
  v.partial_value = v.history.back().value;
  return v;
}

// Full N x N grid of w_n w_m |gamma(n, m)|, row-major, one compensated
// accumulator. Rows and columns with w = 0 only add exact zeros, so they are
// skipped without changing the result.
double double_sum(const CoefficientSequence& a, const CovarianceKernel& kernel, std::size_t N, bool log_weights) {
  std::vector<double> w;
  std::vector<std::int64_t> idx;
  for (std::size_t k = 1; k <= N; ++k) {
    const double mag = std::abs(a.folded(k));
    if (mag == 0.0) continue;
    w.push_back(log_weights ? mag * log2_weight(k) : mag);
    idx.push_back(a.index_at(k));
  }
  if (w.empty()) return 0.0;

  CompensatedSum acc;
  if (kernel.stationary()) {
    const auto [lo, hi] = std::minmax_element(idx.begin(), idx.end());
    const std::int64_t span = *hi - *lo;
    std::vector<double> by_offset(static_cast<std::size_t>(2 * span + 1));
    for (std::int64_t d = -span; d <= span; ++d) {
      by_offset[static_cast<std::size_t>(d + span)] = kernel.magnitude(d, 0);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t j = 0; j < w.size(); ++j) {
        acc += (w[i] * w[j]) * by_offset[static_cast<std::size_t>(idx[i] - idx[j] + span)];
      }
    }
  } else {
    std::vector<double> row(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      kernel.magnitudes(idx[i], idx, row);
      for (std::size_t j = 0; j < w.size(); ++j) acc += (w[i] * w[j]) * row[j];
    }
  }
  return acc.value();
}

CriterionValue double_sum_history(CriterionKind kind, const CoefficientSequence& a, const CovarianceKernel& kernel,
                                  std::span<const std::size_t> truncations, bool log_weights) {
  const auto ts = checked_truncations(a, truncations);
  CriterionValue v;
  v.kind = kind;
  for (std::size_t N : ts) v.history.push_back({N, double_sum(a, kernel, N, log_weights)});
  v.truncation = ts.back();
  v.partial_value = v.history.back().value;
  return v;
}

}  // namespace

std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::menshov_rademacher: return "MR";
    case CriterionKind::theorem1: return "theorem1_L";
    case CriterionKind::weighted: return "weighted";
    case CriterionKind::gaussian: return "gaussian";
  }
  return "unknown";
}

CriterionKind criterion_kind_from_string(const std::string& s) {
  if (s == "MR") return CriterionKind::menshov_rademacher;
  if (s == "theorem1_L") return CriterionKind::theorem1;
  if (s == "weighted") return CriterionKind::weighted;
  if (s == "gaussian") return CriterionKind::gaussian;
  throw ValidationError("unknown criterion kind '" + s + "'");
}

CriterionValue mr_sum(const CoefficientSequence& a, std::size_t N) {
  const std::size_t t[] = {N};
  return mr_sum(a, t);
}

CriterionValue mr_sum(const CoefficientSequence& a, std::span<const std::size_t> truncations) {
  return single_sum(CriterionKind::menshov_rademacher, 0.0, a, truncations, [&](std::size_t n) {
    const double l = log2_weight(n);
    return std::norm(a.folded(n)) * l * l;
  });
}

CriterionValue weighted_sum(const CoefficientSequence& a, double b, std::size_t N) {
  const std::size_t t[] = {N};
  return weighted_sum(a, b, t);
}

CriterionValue weighted_sum(const CoefficientSequence& a, double b, std::span<const std::size_t> truncations) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw ValidationError("weighted criterion needs b >= 0");
  return single_sum(CriterionKind::weighted, b, a, truncations, [&](std::size_t n) {
    const double l = log2_weight(n);
    return std::norm(a.folded(n)) * std::pow(static_cast<double>(n), 2.0 * b) * l * l;
  });
}

CriterionValue theorem1_sum(const CoefficientSequence& a, const CovarianceKernel& kernel, std::size_t N) {
  const std::size_t t[] = {N};
  return theorem1_sum(a, kernel, t);
}

CriterionValue theorem1_sum(const CoefficientSequence& a, const CovarianceKernel& kernel,
                            std::span<const std::size_t> truncations) {
  return double_sum_history(CriterionKind::theorem1, a, kernel, truncations, true);
}

CriterionValue gaussian_condition_sum(const CoefficientSequence& a, const CovarianceKernel& kernel, std::size_t N) {
  const std::size_t t[] = {N};
  return gaussian_condition_sum(a, kernel, t);
}

CriterionValue gaussian_condition_sum(const CoefficientSequence& a, const CovarianceKernel& kernel,
                                      std::span<const std::size_t> truncations) {
  return double_sum_history(CriterionKind::gaussian, a, kernel, truncations, false);
}

double schur_row_ratio(const std::function<double(std::size_t, std::size_t)>& beta,
                       const std::function<double(std::size_t)>& x, std::size_t N) {
  if (N == 0) throw ValidationError("Schur ratio needs N >= 1");
  double best = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    CompensatedSum row;
    for (std::size_t m = 1; m <= N; ++m) row += beta(n, m) * x(m);
    const double xn = x(n);
    if (!(xn > 0.0)) throw ValidationError("Schur test vector must be positive");
    best = std::max(best, row.value() / xn);
  }
  return best;
}

SchurEstimate schur_bound_estimate(double a_exp, double b_exp, double c_exp, std::span<const std::size_t> grid) {
  for (double e : {a_exp, b_exp, c_exp}) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ValidationError("Schur exponents must be nonnegative");
  }
  if (grid.empty()) throw ValidationError("Schur grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 2) throw ValidationError("Schur truncations need N >= 2");
    if (i > 0 && grid[i] <= grid[i - 1]) throw ValidationError("Schur grid must be strictly increasing");
  }

  SchurEstimate est;
  est.a_exp = a_exp;
  est.b_exp = b_exp;
  est.c_exp = c_exp;
  est.admissible = a_exp + b_exp + c_exp > 1.0;

  const std::size_t top = grid.back();
  std::vector<double> nb(top + 1), x(top + 1), off(top);
  for (std::size_t n = 1; n <= top; ++n) {
    nb[n] = std::pow(static_cast<double>(n), -b_exp);
    x[n] = std::pow(static_cast<double>(n), -c_exp);
  }
  for (std::size_t d = 1; d < top; ++d) off[d] = std::pow(static_cast<double>(d), -a_exp);

  for (std::size_t N : grid) {
    double best = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
      CompensatedSum row;
      for (std::size_t m = 1; m <= N; ++m) {
        const double kernel = m == n ? 1.0 : off[m > n ? m - n : n - m];
        row += kernel * nb[n] * nb[m] * x[m];
      }
      best = std::max(best, row.value() / x[n]);
    }
    est.ratios.push_back({N, best});
  }
  for (std::size_t i = 1; i < est.ratios.size(); ++i) {
    est.growth.push_back(est.ratios[i].value / est.ratios[i - 1].value);
  }
  return est;
}

SchurEstimate schur_bound_estimate(double a_exp, double b_exp, double c_exp, std::size_t N) {
  const std::size_t g[] = {N};
  return schur_bound_estimate(a_exp, b_exp, c_exp, g);
}

double threshold_b(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw RangeError("threshold_b: decay exponent must lie in [0, 1]");
  return (1.0 - a) / 2.0;
}

std::string to_string(Convergence v) {
  switch (v) {
    case Convergence::plateau: return "plateau";
    case Convergence::growing: return "growing";
    case Convergence::inconclusive: return "inconclusive";
  }
  return "unknown";
}

ConvergenceVerdict convergence_diagnostic(const CriterionValue& value, const DiagnosticThresholds& thresholds) {
  const auto& h = value.history;
  if (h.size() < 4) throw InsufficientData("convergence diagnostic needs at least 4 truncations");

  ConvergenceVerdict v;
  const double last = h.back().value;
  const double increment = h.back().value - h[h.size() - 2].value;
  v.last_relative_increment = last > 0.0 ? increment / last : 0.0;

  std::vector<double> xs, ys;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double d = h[i].value - h[i - 1].value;
    if (d > 0.0 && h[i].N > 0) {
      xs.push_back(std::log(static_cast<double>(h[i].N)));
      ys.push_back(std::log(d));
    }
  }
  v.growth_exponent_estimate = std::numeric_limits<double>::quiet_NaN();
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx > 0.0) v.growth_exponent_estimate = sxy / sxx;
  }

  if (v.last_relative_increment < thresholds.plateau) {
    v.verdict = Convergence::plateau;
  } else if (std::isfinite(v.growth_exponent_estimate) && v.growth_exponent_estimate > thresholds.growth_slope) {
    v.verdict = Convergence::growing;
  } else {
    v.verdict = Convergence::inconclusive;
  }
  return v;
}

}  // namespace mrseries
