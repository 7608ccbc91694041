#include "mrseries/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mrseries/error.hpp"

namespace mrseries {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(where + ": cannot parse number '" + t + "'");
  }
}

double max_abs_entry(const Eigen::MatrixXcd& m) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) s = std::max(s, std::abs(m(i, j)));
  return s;
}

bool hermitian_within(const Eigen::MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) return false;
    }
  }
  return true;
}

bool all_real(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j).imag() != 0.0) return false;
  return true;
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = {h(i, i).real(), 0.0};
  return h;
}

struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

// Ascending eigenvalues of a Hermitian matrix; takes the real solver when the
// entries allow it.
Spectrum hermitian_spectrum(const Eigen::MatrixXcd& m, bool want_vectors) {
  const int options = want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Spectrum s;
  if (all_real(m)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.real(), options);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    s.values = solver.eigenvalues();
    if (want_vectors) s.vectors = solver.eigenvectors().cast<cdouble>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, options);
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
    s.values = solver.eigenvalues();
    if (want_vectors) s.vectors = solver.eigenvectors();
  }
  return s;
}

}  // namespace

cdouble CovarianceKernel::eval(std::int64_t n, std::int64_t m) const {
  return std::visit(
      overloaded{
          [&](const IdentityKernel&) { return n == m ? cdouble{1.0, 0.0} : cdouble{}; },
          [&](const AllOnesKernel&) { return cdouble{1.0, 0.0}; },
          [&](const PowerDecayKernel& k) {
            if (n == m) return cdouble{1.0, 0.0};
            const double d = std::abs(static_cast<double>(n - m));
            return cdouble{k.K * std::pow(d, -k.a), 0.0};
          },
          [&](const FourierKernel& k) {
            return n >= m ? k.mu.fourier(n - m) : std::conj(k.mu.fourier(m - n));
          },
          [&](const ExplicitKernel& k) {
            const auto size = static_cast<std::int64_t>(k.matrix.rows());
            if (n < index_base_ || m < index_base_ || n >= index_base_ + size || m >= index_base_ + size) {
              throw IndexError("explicit kernel index (" + std::to_string(n) + ", " + std::to_string(m) +
                               ") outside [" + std::to_string(index_base_) + ", " +
                               std::to_string(index_base_ + size - 1) + "]");
            }
            const auto i = static_cast<Eigen::Index>(n - index_base_);
            const auto j = static_cast<Eigen::Index>(m - index_base_);
            return i <= j ? k.matrix(i, j) : std::conj(k.matrix(j, i));
          },
      },
      variant_);
}

void CovarianceKernel::magnitudes(std::int64_t n, std::span<const std::int64_t> ms, std::span<double> out) const {
  if (out.size() < ms.size()) throw SizeError("magnitudes: output span too short");
  std::visit(overloaded{
                 [&](const IdentityKernel&) {
                   for (std::size_t i = 0; i < ms.size(); ++i) out[i] = ms[i] == n ? 1.0 : 0.0;
                 },
                 [&](const AllOnesKernel&) { std::fill_n(out.begin(), ms.size(), 1.0); },
                 [&](const PowerDecayKernel& k) {
                   for (std::size_t i = 0; i < ms.size(); ++i) {
                     out[i] = ms[i] == n ? 1.0 : k.K * std::pow(std::abs(static_cast<double>(n - ms[i])), -k.a);
                   }
                 },
                 [&](const auto&) {
                   for (std::size_t i = 0; i < ms.size(); ++i) out[i] = std::abs(eval(n, ms[i]));
                 },
             },
             variant_);
}

bool CovarianceKernel::stationary() const {
  return !std::holds_alternative<ExplicitKernel>(variant_);
}

std::optional<std::size_t> CovarianceKernel::extent() const {
  if (const auto* e = std::get_if<ExplicitKernel>(&variant_)) return static_cast<std::size_t>(e->matrix.rows());
  return std::nullopt;
}

const std::vector<double>* CovarianceKernel::scales() const {
  if (const auto* e = std::get_if<ExplicitKernel>(&variant_)) return e->scales.empty() ? nullptr : &e->scales;
  return nullptr;
}

std::string CovarianceKernel::name() const {
  return std::visit(overloaded{
                        [](const IdentityKernel&) -> std::string { return "identity"; },
                        [](const AllOnesKernel&) -> std::string { return "all_ones"; },
                        [](const PowerDecayKernel&) -> std::string { return "power_decay"; },
                        [](const FourierKernel&) -> std::string { return "fourier"; },
                        [](const ExplicitKernel&) -> std::string { return "explicit"; },
                    },
                    variant_);
}

CovarianceKernel make_kernel(const KernelDescriptor& spec) {
  using Kind = KernelDescriptor::Kind;
  switch (spec.kind) {
    case Kind::identity:
      return CovarianceKernel(IdentityKernel{}, spec.index_base);
    case Kind::all_ones:
      return CovarianceKernel(AllOnesKernel{}, spec.index_base);
    case Kind::power_decay:
      if (!(spec.K > 0.0) || !std::isfinite(spec.K)) throw ValidationError("power_decay kernel needs K > 0");
      if (!(spec.a >= 0.0) || !std::isfinite(spec.a)) throw ValidationError("power_decay kernel needs a >= 0");
      return CovarianceKernel(PowerDecayKernel{spec.K, spec.a}, spec.index_base);
    case Kind::fourier:
      if (!spec.measure) throw ValidationError("fourier kernel needs a measure");
      return CovarianceKernel(FourierKernel{*spec.measure}, spec.index_base);
    case Kind::explicit_matrix: {
      const auto& m = spec.matrix;
      if (m.rows() == 0 || m.rows() != m.cols()) {
        throw ValidationError("explicit kernel matrix must be square and nonempty (got " + std::to_string(m.rows()) +
                              "x" + std::to_string(m.cols()) + ")");
      }
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
            throw ValidationError("explicit kernel has a non-finite entry");
      if (!hermitian_within(m, 1e-12 * std::max(1.0, max_abs_entry(m)))) {
        throw ValidationError("explicit kernel matrix is not Hermitian");
      }
      Eigen::MatrixXcd h = hermitian_part(m);
      std::vector<double> scales;
      for (Eigen::Index i = 0; i < h.rows(); ++i) {
        if (!(h(i, i).real() > 0.0)) throw ValidationError("explicit kernel diagonal must be positive");
      }
      if (spec.normalize) {
        scales.resize(static_cast<std::size_t>(h.rows()));
        for (Eigen::Index i = 0; i < h.rows(); ++i) scales[static_cast<std::size_t>(i)] = std::sqrt(h(i, i).real());
        for (Eigen::Index j = 0; j < h.cols(); ++j)
          for (Eigen::Index i = 0; i < h.rows(); ++i)
            h(i, j) /= scales[static_cast<std::size_t>(i)] * scales[static_cast<std::size_t>(j)];
        h = hermitian_part(h);
        for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = 1.0;
      }
      return CovarianceKernel(ExplicitKernel{std::move(h), std::move(scales)}, spec.index_base);
    }
  }
  throw ValidationError("unknown kernel kind");
}

CovarianceKernel identity_kernel() { return make_kernel({}); }

CovarianceKernel all_ones_kernel() {
  KernelDescriptor d;
  d.kind = KernelDescriptor::Kind::all_ones;
  return make_kernel(d);
}

CovarianceKernel power_decay_kernel(double K, double a) {
  KernelDescriptor d;
  d.kind = KernelDescriptor::Kind::power_decay;
  d.K = K;
  d.a = a;
  return make_kernel(d);
}

CovarianceKernel fourier_kernel(MeasureSpec mu) {
  KernelDescriptor d;
  d.kind = KernelDescriptor::Kind::fourier;
  d.measure = std::move(mu);
  return make_kernel(d);
}

CovarianceKernel explicit_kernel(Eigen::MatrixXcd matrix, bool normalize) {
  KernelDescriptor d;
  d.kind = KernelDescriptor::Kind::explicit_matrix;
  d.matrix = std::move(matrix);
  d.normalize = normalize;
  return make_kernel(d);
}

Eigen::MatrixXcd load_kernel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<double> row;
    std::string cleaned;
    for (char ch : line)
      if (ch != '"') cleaned.push_back(ch);
    std::istringstream fields(cleaned);
    std::string field;
    std::size_t col = 0;
    while (std::getline(fields, field, ',')) {
      ++col;
      row.push_back(parse_double(field, path.string() + ":" + std::to_string(line_no) + " field " + std::to_string(col)));
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw ValidationError(path.string() + ": empty kernel file");
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (row.size() != static_cast<std::size_t>(2 * n)) {
      throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) +
                            " fields, expected " + std::to_string(2 * n) + " (re,im pairs)");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = {row[static_cast<std::size_t>(2 * j)], row[static_cast<std::size_t>(2 * j + 1)]};
    }
  }
  return m;
}

KernelDescriptor kernel_descriptor_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw ValidationError("kernel descriptor: expected an object with a string 'type'");
  }
  KernelDescriptor d;
  const std::string type = j["type"].get<std::string>();
  d.index_base = j.value("index_base", std::int64_t{1});
  d.normalize = j.value("normalize", true);
  auto number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw ValidationError(std::string("kernel descriptor: '") + key + "' must be a number");
    return j[key].get<double>();
  };
  if (type == "identity") {
    d.kind = KernelDescriptor::Kind::identity;
  } else if (type == "all_ones") {
    d.kind = KernelDescriptor::Kind::all_ones;
  } else if (type == "power_decay") {
    d.kind = KernelDescriptor::Kind::power_decay;
    d.K = number("K");
    d.a = number("a");
  } else if (type == "fourier") {
    d.kind = KernelDescriptor::Kind::fourier;
    if (!j.contains("measure") || !j["measure"].is_string()) {
      throw ValidationError("kernel descriptor: fourier kernel needs a string 'measure'");
    }
    d.measure = resolve_measure(j["measure"].get<std::string>());
  } else if (type == "explicit") {
    d.kind = KernelDescriptor::Kind::explicit_matrix;
    if (j.contains("csv")) {
      d.matrix = load_kernel_csv(j["csv"].get<std::string>());
    } else if (j.contains("matrix") && j["matrix"].is_array()) {
      const auto& rows = j["matrix"];
      const auto n = static_cast<Eigen::Index>(rows.size());
      d.matrix.resize(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
          throw ValidationError("kernel descriptor: matrix row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
        }
        for (Eigen::Index c = 0; c < n; ++c) {
          const auto& v = row[static_cast<std::size_t>(c)];
          if (v.is_number()) {
            d.matrix(r, c) = v.get<double>();
          } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            d.matrix(r, c) = {v[0].get<double>(), v[1].get<double>()};
          } else {
            throw ValidationError("kernel descriptor: matrix[" + std::to_string(r) + "][" + std::to_string(c) +
                                  "] must be a number or [re, im]");
          }
        }
      }
    } else {
      throw ValidationError("kernel descriptor: explicit kernel needs 'csv' or 'matrix'");
    }
  } else {
    throw ValidationError("kernel descriptor: unknown type '" + type + "'");
  }
  return d;
}

KernelDescriptor resolve_kernel_descriptor(const std::string& text) {
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    try {
      return kernel_descriptor_from_json(nlohmann::json::parse(t));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("kernel descriptor: ") + e.what());
    }
  }
  const std::string prefix = t.substr(0, t.find(':'));
  const bool shorthand = prefix == "identity" || prefix == "all_ones" || prefix == "power_decay" ||
                         prefix == "fourier" || prefix == "explicit";
  const std::filesystem::path p(t);
  if (!shorthand && p.extension() == ".json") {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open kernel descriptor " + t);
    try {
      return kernel_descriptor_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(t + ": " + e.what());
    }
  }
  if (!shorthand && p.extension() == ".csv") {
    KernelDescriptor d;
    d.kind = KernelDescriptor::Kind::explicit_matrix;
    d.matrix = load_kernel_csv(p);
    return d;
  }
  const auto colon = t.find(':');
  const std::string head = t.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string{} : t.substr(colon + 1);
  KernelDescriptor d;
  if (head == "identity") return d;
  if (head == "all_ones") {
    d.kind = KernelDescriptor::Kind::all_ones;
    return d;
  }
  if (head == "power_decay") {
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) throw ValidationError("power_decay shorthand is power_decay:K:a");
    d.kind = KernelDescriptor::Kind::power_decay;
    d.K = parse_double(rest.substr(0, c2), "power_decay K");
    d.a = parse_double(rest.substr(c2 + 1), "power_decay a");
    return d;
  }
  if (head == "fourier") {
    d.kind = KernelDescriptor::Kind::fourier;
    d.measure = resolve_measure(rest.empty() ? "cantor" : rest);
    return d;
  }
  if (head == "explicit") {
    d.kind = KernelDescriptor::Kind::explicit_matrix;
    d.matrix = load_kernel_csv(rest);
    return d;
  }
  throw ValidationError("unknown kernel descriptor '" + text + "'");
}

GramMatrix::GramMatrix(Eigen::MatrixXcd entries, double psd_tolerance)
    : entries_(std::move(entries)), psd_tolerance_(psd_tolerance) {
  if (entries_.rows() != entries_.cols()) throw SizeError("Gram matrix must be square");
  if (!(psd_tolerance_ >= 0.0)) throw ValidationError("PSD tolerance must be nonnegative");
}

bool GramMatrix::is_hermitian(double tol) const { return hermitian_within(entries_, tol); }

bool GramMatrix::is_real() const { return all_real(entries_); }

GramMatrix GramMatrix::with_min_eigen(double value) const {
  GramMatrix g = *this;
  g.min_eigen_ = value;
  return g;
}

GramMatrix gram_matrix(const CovarianceKernel& kernel, std::size_t N) {
  if (N == 0) throw ValidationError("Gram matrix size must be at least 1");
  if (auto extent = kernel.extent(); extent && *extent < N) {
    throw SizeError("Gram size " + std::to_string(N) + " exceeds explicit kernel size " + std::to_string(*extent));
  }
  const auto n = static_cast<Eigen::Index>(N);
  const std::int64_t base = kernel.index_base();
  Eigen::MatrixXcd e(n, n);
  if (kernel.stationary()) {
    // gamma depends on n - m only: one evaluation per offset.
    std::vector<cdouble> below(N);
    std::vector<cdouble> above(N);
    for (std::size_t d = 0; d < N; ++d) {
      below[d] = kernel(base + static_cast<std::int64_t>(d), base);
      above[d] = kernel(base, base + static_cast<std::int64_t>(d));
    }
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        e(i, j) = i >= j ? below[static_cast<std::size_t>(i - j)] : above[static_cast<std::size_t>(j - i)];
  } else {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) e(i, j) = kernel(base + i, base + j);
  }
  return GramMatrix(hermitian_part(e));
}

PsdVerdict validate_psd(const GramMatrix& gram, double tol) {
  if (!(tol >= 0.0)) throw ValidationError("PSD tolerance must be nonnegative");
  const auto& m = gram.entries();
  if (!gram.is_hermitian(1e-12 * std::max(1.0, max_abs_entry(m)))) {
    throw ContractViolation("validate_psd: matrix is not Hermitian");
  }
  const Spectrum s = hermitian_spectrum(hermitian_part(m), false);
  PsdVerdict v;
  v.min_eigen = s.values.minCoeff();
  v.max_eigen = s.values.maxCoeff();
  const double scale = std::max(std::abs(v.max_eigen), std::abs(v.min_eigen));
  v.valid = v.min_eigen >= -tol * scale;
  return v;
}

RepairedGram clip_repair(const GramMatrix& gram) {
  const auto& m = gram.entries();
  if (!gram.is_hermitian(1e-12 * std::max(1.0, max_abs_entry(m)))) {
    throw ContractViolation("clip_repair: matrix is not Hermitian");
  }
  const Spectrum s = hermitian_spectrum(hermitian_part(m), true);
  RepairRecord record;
  record.min_eigen_before = s.values.minCoeff();
  Eigen::VectorXd clipped = s.values;
  for (Eigen::Index i = 0; i < clipped.size(); ++i) {
    if (clipped(i) < 0.0) {
      clipped(i) = 0.0;
      ++record.clipped_eigenvalues;
    }
  }
  Eigen::MatrixXcd r = s.vectors * clipped.cast<cdouble>().asDiagonal() * s.vectors.adjoint();
  std::vector<double> d(static_cast<std::size_t>(r.rows()));
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    const double v = r(i, i).real();
    if (!(v > 0.0)) throw NumericalError("clip_repair: diagonal entry " + std::to_string(i) + " vanished after clipping");
    d[static_cast<std::size_t>(i)] = std::sqrt(v);
  }
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < r.rows(); ++i) r(i, j) /= d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(j)];
  r = hermitian_part(r);
  for (Eigen::Index i = 0; i < r.rows(); ++i) r(i, i) = 1.0;
  if (all_real(m)) r = r.real().cast<cdouble>();
  record.frobenius_change = (r - m).norm();
  record.max_entry_change = max_abs_entry(r - m);
  return {GramMatrix(std::move(r), gram.psd_tolerance()), record};
}

}  // namespace mrseries
