#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cxrseg/curation.hpp"

namespace cxrseg {

/// Regularised incomplete beta I_x(a, b), continued fraction (modified Lentz)
/// with relative tolerance 1e-10.
double incomplete_beta(double x, double a, double b);

/// P(|T| > |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct PairedTestResult {
  double t_statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  bool significant = false;
  double mean_difference = 0.0;
};

/// Two-sided paired t-test on x - y. All-zero differences give t = 0, p = 1.
PairedTestResult paired_t_test(std::span<const double> x, std::span<const double> y, double alpha = 0.05);

/// Square matrix of reals, row-major.
struct SquareMatrix {
  std::size_t size = 0;
  std::vector<double> values;

  SquareMatrix() = default;
  SquareMatrix(std::size_t k, std::vector<double> v);
  static SquareMatrix from(const CooccurrenceMatrix& m);

  double operator()(std::size_t i, std::size_t j) const { return values[i * size + j]; }
  bool symmetric() const noexcept;
  /// Entries (i, j) with i < j, row by row.
  std::vector<double> upper_triangle() const;
  /// Relabels rows and columns together: out(i, j) = (*this)(perm[i], perm[j]).
  SquareMatrix permuted(std::span<const std::size_t> perm) const;
};

/// Ranks 1..n with ties replaced by their average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// Pearson correlation; throws UndefinedMetricError if either vector is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Spearman correlation of the strict upper triangles of two symmetric matrices.
double spearman_offdiag(const SquareMatrix& a, const SquareMatrix& b);

struct MantelResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t permutation_count = 0;
  bool exhaustive = false;
};

inline constexpr std::size_t kExhaustiveMantelMaxLabels = 7;
inline constexpr std::size_t kDefaultMantelPermutations = 10000;

/// One-sided (positive association) Mantel test on spearman_offdiag. The null
/// relabels b's rows and columns together. Up to 7 labels every permutation is
/// enumerated (identity included) and p = #{rho_perm >= rho} / k!; beyond that
/// `permutations` seeded draws give p = (#{rho_perm >= rho} + 1) / (N + 1).
MantelResult mantel_test(const SquareMatrix& a, const SquareMatrix& b,
                         std::size_t permutations = kDefaultMantelPermutations, std::uint64_t seed = 0);

/// One result line: test,statistic,df_or_permutations,p_value,significant.
struct StatRow {
  std::string test;
  double statistic = 0.0;
  std::size_t df_or_permutations = 0;
  double p_value = 1.0;
  bool significant = false;
};

StatRow to_row(std::string name, const PairedTestResult& r);
StatRow to_row(std::string name, const MantelResult& r, double alpha);
std::string stat_rows_csv(const std::vector<StatRow>& rows);

}  // namespace cxrseg
