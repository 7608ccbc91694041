#include "mrseries/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mrseries/error.hpp"
#include "mrseries/rng.hpp"
#include "mrseries/summation.hpp"

namespace mrseries {

namespace {

constexpr double kJitterLevels[] = {0.0, 1e-12, 1e-10, 1e-8};

template <class Matrix>
struct LdltFactor {
  bool ok = false;
  double min_d = 0.0;
  Matrix factor;
};

// Pivoted LDL^*: A = P^T L D L^* P, so F = P^T L D^(1/2) satisfies F F^* = A.
template <class Matrix>
LdltFactor<Matrix> ldlt_factor(const Matrix& m, double tol) {
  LdltFactor<Matrix> out;
  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() != Eigen::Success) return out;
  Eigen::VectorXd d = ldlt.vectorD().real();
  const double d_max = std::max(d.maxCoeff(), 0.0);
  out.min_d = d.minCoeff();
  if (!std::isfinite(out.min_d) || out.min_d < -tol * std::max(d_max, 1.0)) return out;
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::sqrt(std::max(d(i), 0.0));
  Matrix lower = ldlt.matrixL();
  lower = lower * d.asDiagonal();
  out.factor = ldlt.transpositionsP().transpose() * lower;
  out.ok = true;
  return out;
}

template <class Row>
void accumulate_path(const CoefficientSequence& a, std::size_t N, Row&& x, double& sup, double& end_abs) {
  cdouble s{};
  sup = 0.0;
  const std::size_t terms = std::min(N, a.size());
  for (std::size_t n = 1; n <= terms; ++n) {
    s += a.folded(n) * x(n - 1);
    sup = std::max(sup, std::abs(s));
  }
  end_abs = std::abs(s);
}

double real_or_complex_abs_path(const SampleMatrix& samples, const CoefficientSequence& a, std::size_t r,
                                double& end_abs) {
  const std::size_t N = samples.width();
  double sup = 0.0;
  if (samples.field() == Field::real) {
    const auto col = samples.real().col(static_cast<Eigen::Index>(r));
    accumulate_path(a, N, [&](std::size_t i) { return cdouble{col(static_cast<Eigen::Index>(i)), 0.0}; }, sup, end_abs);
  } else {
    const auto col = samples.complex().col(static_cast<Eigen::Index>(r));
    accumulate_path(a, N, [&](std::size_t i) { return col(static_cast<Eigen::Index>(i)); }, sup, end_abs);
  }
  return sup;
}

void require_coefficients_fit(const SampleMatrix& samples, const CoefficientSequence& a) {
  if (a.is_two_sided()) throw UnsupportedConfiguration("Monte Carlo statistics take one-sided coefficients");
  if (a.size() > samples.width()) {
    throw ContractViolation("coefficient support " + std::to_string(a.size()) + " exceeds sample width " +
                            std::to_string(samples.width()));
  }
  if (samples.replicates() == 0) throw InsufficientData("no replicates");
}

}  // namespace

std::string to_string(Field f) { return f == Field::real ? "real" : "complex"; }

Field field_from_string(const std::string& s) {
  if (s == "real") return Field::real;
  if (s == "complex") return Field::complex;
  throw ValidationError("field must be 'real' or 'complex'");
}

PreparedCovariance prepare_covariance(const GramMatrix& gram, const SimulationConfig& config) {
  const std::size_t N = gram.size();
  if (N == 0) throw ValidationError("empty covariance");
  if (N > kMaxDenseDimension) {
    throw SizeError("dense sampling supports N <= " + std::to_string(kMaxDenseDimension) + " (got " + std::to_string(N) + ")");
  }
  if (config.field == Field::real && !gram.is_real()) {
    throw UnsupportedConfiguration("real-field sampling needs a real covariance");
  }

  PreparedCovariance prepared{gram, std::nullopt, 0.0, {}};
  const PsdVerdict verdict = validate_psd(gram, config.psd_tolerance);
  if (!verdict.valid) {
    if (!config.repair) {
      throw NumericalError("covariance is not positive semidefinite (min eigenvalue " + std::to_string(verdict.min_eigen) +
                           "); enable the clipping repair to sample it");
    }
    RepairedGram repaired = clip_repair(gram);
    prepared.used = repaired.gram;
    prepared.repair = repaired.record;
    prepared.used = prepared.used.with_min_eigen(validate_psd(prepared.used, config.psd_tolerance).min_eigen);
  } else {
    prepared.used = prepared.used.with_min_eigen(verdict.min_eigen);
  }

  const Eigen::MatrixXcd& base = prepared.used.entries();
  const double max_diag = base.diagonal().real().maxCoeff();
  const bool real = prepared.used.is_real();
  double last_min_d = 0.0;
  for (double level : kJitterLevels) {
    Eigen::MatrixXcd m = base;
    if (level > 0.0) m.diagonal().array() += level * max_diag;
    if (real) {
      auto f = ldlt_factor<Eigen::MatrixXd>(m.real(), config.psd_tolerance);
      last_min_d = f.min_d;
      if (!f.ok) continue;
      prepared.factor = f.factor.cast<cdouble>();
    } else {
      auto f = ldlt_factor<Eigen::MatrixXcd>(m, config.psd_tolerance);
      last_min_d = f.min_d;
      if (!f.ok) continue;
      prepared.factor = f.factor;
    }
    prepared.jitter = level;
    if (level > 0.0) prepared.used = GramMatrix(m, gram.psd_tolerance()).with_min_eigen(*prepared.used.min_eigen_estimate() + level * max_diag);
    return prepared;
  }
  throw NumericalError("LDL factorization failed after jitter up to 1e-8 (smallest pivot " + std::to_string(last_min_d) +
                       ", smallest eigenvalue " + std::to_string(*prepared.used.min_eigen_estimate()) + ")");
}

SampleMatrix::SampleMatrix(Field field, Eigen::MatrixXd real, Eigen::MatrixXcd complex)
    : field_(field), real_(std::move(real)), complex_(std::move(complex)) {}

std::size_t SampleMatrix::width() const {
  return static_cast<std::size_t>(field_ == Field::real ? real_.rows() : complex_.rows());
}

std::size_t SampleMatrix::replicates() const {
  return static_cast<std::size_t>(field_ == Field::real ? real_.cols() : complex_.cols());
}

cdouble SampleMatrix::at(std::size_t n, std::size_t replicate) const {
  const auto i = static_cast<Eigen::Index>(n);
  const auto j = static_cast<Eigen::Index>(replicate);
  return field_ == Field::real ? cdouble{real_(i, j), 0.0} : complex_(i, j);
}

bool operator==(const SampleMatrix& x, const SampleMatrix& y) {
  if (x.field_ != y.field_ || x.width() != y.width() || x.replicates() != y.replicates()) return false;
  return x.field_ == Field::real ? x.real_ == y.real_ : x.complex_ == y.complex_;
}

SampleMatrix sample_gaussian(const PreparedCovariance& prepared, const SimulationConfig& config) {
  const auto N = static_cast<Eigen::Index>(prepared.used.size());
  const auto R = static_cast<Eigen::Index>(config.replicates);
  if (R == 0) throw ValidationError("replicates must be positive");
  if (config.field == Field::real) {
    Eigen::MatrixXd z(N, R);
    for (Eigen::Index r = 0; r < R; ++r) {
      CounterStream stream(config.seed, static_cast<std::uint64_t>(r));
      for (Eigen::Index i = 0; i < N; ++i) z(i, r) = stream.next_normal();
    }
    const Eigen::MatrixXd f = prepared.factor.real();
    Eigen::MatrixXd x = f * z;
    return SampleMatrix(Field::real, std::move(x), {});
  }
  const double half = std::sqrt(0.5);
  Eigen::MatrixXcd z(N, R);
  for (Eigen::Index r = 0; r < R; ++r) {
    CounterStream stream(config.seed, static_cast<std::uint64_t>(r));
    for (Eigen::Index i = 0; i < N; ++i) {
      const double re = stream.next_normal();
      const double im = stream.next_normal();
      z(i, r) = {half * re, half * im};
    }
  }
  Eigen::MatrixXcd x = prepared.factor * z;
  return SampleMatrix(Field::complex, {}, std::move(x));
}

SampleMatrix sample_gaussian(const GramMatrix& gram, const SimulationConfig& config) {
  return sample_gaussian(prepare_covariance(gram, config), config);
}

Estimate estimate_mean(std::span<const double> values) {
  if (values.empty()) throw InsufficientData("cannot estimate a mean from zero replicates");
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  if (values.size() == 1) return {mean, 0.0};
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(dev) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

std::vector<double> replicate_maxima(const SampleMatrix& samples, const CoefficientSequence& a) {
  require_coefficients_fit(samples, a);
  std::vector<double> out(samples.replicates());
  double end_abs = 0.0;
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = real_or_complex_abs_path(samples, a, r, end_abs);
  return out;
}

MaximalStatistics maximal_statistics(const SampleMatrix& samples, const CoefficientSequence& a) {
  require_coefficients_fit(samples, a);
  const std::size_t R = samples.replicates();
  std::vector<double> sup_sq(R), sup_abs(R), end_sq(R);
  for (std::size_t r = 0; r < R; ++r) {
    double end_abs = 0.0;
    const double sup = real_or_complex_abs_path(samples, a, r, end_abs);
    sup_abs[r] = sup;
    sup_sq[r] = sup * sup;
    end_sq[r] = end_abs * end_abs;
  }
  MaximalStatistics stats;
  stats.N = samples.width();
  stats.replicates = R;
  stats.coefficient_fingerprint = a.fingerprint();
  stats.sup_sq = estimate_mean(sup_sq);
  stats.sup_abs = estimate_mean(sup_abs);
  stats.end_sq = estimate_mean(end_sq);
  return stats;
}

BlockStatistics block_maxima(const SampleMatrix& samples, const CoefficientSequence& a, unsigned r) {
  if (r > 30) throw RangeError("block level too large");
  const std::size_t N = std::size_t{1} << r;
  if (N > samples.width()) {
    throw SizeError("blocks need 2^r = " + std::to_string(N) + " <= sample width " + std::to_string(samples.width()));
  }
  if (a.is_two_sided()) throw UnsupportedConfiguration("Monte Carlo statistics take one-sided coefficients");
  if (a.size() < N) {
    throw ContractViolation("coefficients have length " + std::to_string(a.size()) + " < 2^r = " + std::to_string(N) +
                            "; pad with zeros explicitly");
  }
  const std::size_t R = samples.replicates();
  if (R == 0) throw InsufficientData("no replicates");

  // Blocks [2^k, 2^(k+1) - 1] for k < r, and the single index 2^r for k = r,
  // so together they partition [1, 2^r].
  const unsigned blocks = r + 1;
  std::vector<std::vector<double>> per_block(blocks, std::vector<double>(R));
  std::vector<double> total(R);
  for (std::size_t rep = 0; rep < R; ++rep) {
    double sum_sq = 0.0;
    for (unsigned k = 0; k < blocks; ++k) {
      const std::size_t start = std::size_t{1} << k;
      const std::size_t end = std::min((std::size_t{1} << (k + 1)) - 1, N);
      cdouble s{};
      double best = 0.0;
      for (std::size_t j = start; j <= end; ++j) {
        s += a.folded(j) * samples.at(j - 1, rep);
        best = std::max(best, std::abs(s));
      }
      per_block[k][rep] = best * best;
      sum_sq += best * best;
    }
    total[rep] = sum_sq;
  }
  BlockStatistics out;
  out.r = r;
  for (const auto& values : per_block) out.per_block.push_back(estimate_mean(values));
  out.total = estimate_mean(total);
  return out;
}

std::string to_string(BoundName b) {
  switch (b) {
    case BoundName::lemma: return "lemma";
    case BoundName::theorem_8L: return "theorem_8L";
    case BoundName::blocks_4L: return "blocks_4L";
    case BoundName::sudakov: return "sudakov";
  }
  return "unknown";
}

BoundName bound_name_from_string(const std::string& s) {
  if (s == "lemma") return BoundName::lemma;
  if (s == "theorem" || s == "theorem_8L") return BoundName::theorem_8L;
  if (s == "blocks" || s == "blocks_4L") return BoundName::blocks_4L;
  if (s == "sudakov") return BoundName::sudakov;
  throw ValidationError("unknown bound '" + s + "' (lemma, theorem, blocks, sudakov)");
}

std::string to_string(BoundVerdict v) {
  switch (v) {
    case BoundVerdict::pass: return "pass";
    case BoundVerdict::fail: return "fail";
    case BoundVerdict::insufficient: return "insufficient";
  }
  return "unknown";
}

BoundVerdict bound_verdict_from_string(const std::string& s) {
  if (s == "pass") return BoundVerdict::pass;
  if (s == "fail") return BoundVerdict::fail;
  if (s == "insufficient") return BoundVerdict::insufficient;
  throw ValidationError("unknown bound verdict '" + s + "'");
}

BoundReport bound_report(const MaximalStatistics& stats, const CoefficientSequence& a, const CovarianceKernel& kernel,
                         std::size_t N, BoundName which, double sigma_margin) {
  if (stats.N != N) {
    throw ContractViolation("statistics were computed at N = " + std::to_string(stats.N) + ", not " + std::to_string(N));
  }
  if (stats.coefficient_fingerprint != a.fingerprint()) {
    throw ContractViolation("statistics were computed from different coefficients");
  }
  if (!(sigma_margin >= 0.0)) throw ValidationError("sigma margin must be nonnegative");
  const std::size_t terms = std::min(N, a.size());

  BoundReport report;
  report.bound_name = which;
  switch (which) {
    case BoundName::lemma: {
      const double log_n = std::log2(static_cast<double>(N));
      report.criterion_value = gaussian_condition_sum(a, kernel, terms).partial_value;
      report.theoretical = (2.0 + log_n) * (2.0 + log_n) * report.criterion_value;
      report.empirical = stats.sup_sq;
      break;
    }
    case BoundName::theorem_8L:
      report.criterion_value = theorem1_sum(a, kernel, terms).partial_value;
      report.theoretical = 8.0 * report.criterion_value;
      report.empirical = stats.sup_sq;
      break;
    case BoundName::blocks_4L:
      if (!stats.blocks) throw ContractViolation("blocks bound needs block statistics");
      report.criterion_value = theorem1_sum(a, kernel, terms).partial_value;
      report.theoretical = 4.0 * report.criterion_value;
      report.empirical = stats.blocks->total;
      break;
    case BoundName::sudakov:
      report.criterion_value = gaussian_condition_sum(a, kernel, terms).partial_value;
      report.theoretical = 2.0 * std::sqrt(report.criterion_value);
      report.empirical = stats.sup_abs;
      break;
  }
  if (report.empirical.std_error > 0.0) {
    report.margin_sigmas = (report.theoretical - report.empirical.mean) / report.empirical.std_error;
  }
  if (stats.replicates < kMinReplicatesForVerdict) {
    report.verdict = BoundVerdict::insufficient;
  } else {
    report.verdict = report.empirical.mean + sigma_margin * report.empirical.std_error <= report.theoretical
                         ? BoundVerdict::pass
                         : BoundVerdict::fail;
  }
  return report;
}

CovarianceKernel sampled_kernel(const PreparedCovariance& prepared) {
  return explicit_kernel(prepared.used.entries(), false);
}

BoundReport sudakov_check(const CoefficientSequence& a, const CovarianceKernel& kernel, std::size_t N,
                          const SimulationConfig& config) {
  if (config.field != Field::real) {
    throw UnsupportedConfiguration("the Sudakov-Fernique comparison is implemented for real Gaussian sequences only");
  }
  SimulationConfig cfg = config;
  cfg.N = N;
  return run_bound_suite(a, kernel, cfg, {BoundName::sudakov}).bounds.front();
}

SimulationOutcome run_bound_suite(const CoefficientSequence& a, const CovarianceKernel& kernel,
                                  const SimulationConfig& config, const std::vector<BoundName>& bounds) {
  const std::size_t N = config.N;
  if (N == 0) throw ValidationError("simulation needs N >= 1");
  if (a.is_two_sided()) throw UnsupportedConfiguration("simulation takes one-sided coefficients");
  const bool wants_sudakov = std::find(bounds.begin(), bounds.end(), BoundName::sudakov) != bounds.end();
  if (wants_sudakov && config.field != Field::real) {
    throw UnsupportedConfiguration("the Sudakov-Fernique comparison is implemented for real Gaussian sequences only");
  }
  const bool wants_blocks = std::find(bounds.begin(), bounds.end(), BoundName::blocks_4L) != bounds.end();
  unsigned r = 0;
  if (wants_blocks) {
    while ((std::size_t{1} << r) < N) ++r;
    if ((std::size_t{1} << r) != N) {
      throw ContractViolation("blocks bound needs N = 2^r; got N = " + std::to_string(N) + ", pad to " +
                              std::to_string(std::size_t{1} << r));
    }
  }

  CoefficientSequence coeffs = a.size() >= N ? a.folded_prefix(N) : a.padded(N);
  // A normalized explicit kernel samples Y_n = X_n / sigma_n, so sigma_n moves
  // into the coefficients.
  if (const auto* scales = kernel.scales(); scales != nullptr && !scales->empty()) coeffs = coeffs.rescaled(*scales);
  SimulationOutcome out{prepare_covariance(gram_matrix(kernel, N), config), {}, {}, {}, {}};
  const SampleMatrix samples = sample_gaussian(out.prepared, config);
  out.stats = maximal_statistics(samples, coeffs);
  if (wants_blocks) out.stats.blocks = block_maxima(samples, coeffs, r);

  const CovarianceKernel used = sampled_kernel(out.prepared);
  out.theorem1 = theorem1_sum(coeffs, used, N);
  out.gaussian = gaussian_condition_sum(coeffs, used, N);
  for (BoundName b : bounds) out.bounds.push_back(bound_report(out.stats, coeffs, used, N, b, config.sigma_margin));
  return out;
}

void write_replicate_maxima_csv(const SampleMatrix& samples, const CoefficientSequence& a,
                                const std::filesystem::path& path) {
  require_coefficients_fit(samples, a);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "replicate,sup_abs,end_abs\n";
  for (std::size_t r = 0; r < samples.replicates(); ++r) {
    double end_abs = 0.0;
    const double sup = real_or_complex_abs_path(samples, a, r, end_abs);
    out << r << ',' << sup << ',' << end_abs << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mrseries
