#include "cxrseg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"

namespace cxrseg {

namespace {

constexpr double kBetaTolerance = 1e-10;
constexpr int kBetaMaxIterations = 500;
constexpr double kRhoTieTolerance = 1e-12;
constexpr std::uint64_t kMantelStream = 0x6d616e74ULL;  // "mant"

double beta_continued_fraction(double x, double a, double b) {
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaTolerance) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw ArgumentError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x < (a + 1) / (a + b + 2); use symmetry otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ArgumentError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) throw ArgumentError("t statistic is NaN");
  return std::clamp(incomplete_beta(df / (df + t * t), df / 2.0, 0.5), 0.0, 1.0);
}

PairedTestResult paired_t_test(std::span<const double> x, std::span<const double> y, double alpha) {
  if (x.size() != y.size()) throw ArgumentError("paired t-test needs equal-length samples");
  if (x.size() < 2) throw ArgumentError("paired t-test needs at least two pairs");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  PairedTestResult r;
  r.degrees_of_freedom = n - 1;
  r.mean_difference = mean;
  if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
    r.t_statistic = 0.0;
    r.p_value = 1.0;
  } else if (sd == 0.0) {
    // Identical nonzero differences: the statistic is unbounded.
    r.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p_value = student_t_two_sided_p(r.t_statistic, static_cast<double>(r.degrees_of_freedom));
  }
  r.significant = r.p_value < alpha;
  return r;
}

SquareMatrix::SquareMatrix(std::size_t k, std::vector<double> v) : size(k), values(std::move(v)) {
  if (values.size() != k * k) throw ArgumentError("square matrix needs k*k values");
}

SquareMatrix SquareMatrix::from(const CooccurrenceMatrix& m) {
  std::vector<double> v;
  v.reserve(kNumLabels * kNumLabels);
  for (const auto& row : m.counts) {
    for (auto c : row) v.push_back(static_cast<double>(c));
  }
  return SquareMatrix(kNumLabels, std::move(v));
}

bool SquareMatrix::symmetric() const noexcept {
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = i + 1; j < size; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) return false;
    }
  }
  return true;
}

std::vector<double> SquareMatrix::upper_triangle() const {
  std::vector<double> out;
  out.reserve(size * (size - 1) / 2);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = i + 1; j < size; ++j) out.push_back((*this)(i, j));
  }
  return out;
}

SquareMatrix SquareMatrix::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != size) throw ArgumentError("permutation length does not match matrix size");
  std::vector<double> v(size * size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) v[i * size + j] = (*this)(perm[i], perm[j]);
  }
  return SquareMatrix(size, std::move(v));
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ArgumentError("pearson needs two equal-length vectors of length >= 2");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedMetricError("correlation is undefined for a constant vector");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

void check_pair(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.size != b.size) throw ArgumentError("matrices differ in size");
  if (a.size < 3) throw ArgumentError("off-diagonal correlation needs at least 3 labels");
  if (!a.symmetric() || !b.symmetric()) throw ArgumentError("matrices must be symmetric");
}

double spearman_vectors(std::span<const double> ua, std::span<const double> ub) {
  const auto ra = average_ranks(ua);
  const auto rb = average_ranks(ub);
  return pearson(ra, rb);
}

}  // namespace

double spearman_offdiag(const SquareMatrix& a, const SquareMatrix& b) {
  check_pair(a, b);
  return spearman_vectors(a.upper_triangle(), b.upper_triangle());
}

MantelResult mantel_test(const SquareMatrix& a, const SquareMatrix& b, std::size_t permutations, std::uint64_t seed) {
  check_pair(a, b);
  const auto ua = a.upper_triangle();
  const auto ra = average_ranks(ua);
  MantelResult r;
  r.rho = pearson(ra, average_ranks(b.upper_triangle()));
  const double cutoff = r.rho - kRhoTieTolerance;

  auto rho_for = [&](std::span<const std::size_t> perm) {
    return pearson(ra, average_ranks(b.permuted(perm).upper_triangle()));
  };

  std::vector<std::size_t> perm(a.size);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t at_least = 0;
  if (a.size <= kExhaustiveMantelMaxLabels) {
    std::size_t total = 0;
    do {
      ++total;
      if (rho_for(perm) >= cutoff) ++at_least;
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.exhaustive = true;
    r.permutation_count = total;
    r.p_value = static_cast<double>(at_least) / static_cast<double>(total);
    return r;
  }

  if (permutations == 0) throw ArgumentError("Monte Carlo Mantel test needs at least one permutation");
  for (std::size_t i = 0; i < permutations; ++i) {
    // Each draw has its own stream, so any schedule yields the same p.
    CounterRng rng(derive_stream(seed, kMantelStream), i);
    const auto draw = random_permutation(a.size, rng);
    if (rho_for(draw) >= cutoff) ++at_least;
  }
  r.exhaustive = false;
  r.permutation_count = permutations;
  r.p_value = static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
  return r;
}

StatRow to_row(std::string name, const PairedTestResult& r) {
  return {std::move(name), r.t_statistic, r.degrees_of_freedom, r.p_value, r.significant};
}

StatRow to_row(std::string name, const MantelResult& r, double alpha) {
  return {std::move(name), r.rho, r.permutation_count, r.p_value, r.p_value < alpha};
}

std::string stat_rows_csv(const std::vector<StatRow>& rows) {
  std::string out = "test,statistic,df_or_permutations,p_value,significant\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:.17g},{},{:.17g},{}\n", r.test, r.statistic, r.df_or_permutations, r.p_value,
                       r.significant ? 1 : 0);
  }
  return out;
}

}  // namespace cxrseg
