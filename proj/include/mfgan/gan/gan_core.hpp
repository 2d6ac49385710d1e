#pragma once

#include <map>
#include <span>
#include <vector>

namespace mfgan::gan {

/// Probability masses on a finite, strictly increasing set of support
/// points. Masses are non-negative and sum to 1 within 1e-12.
class GridDensity {
 public:
  GridDensity(std::vector<double> points, std::vector<double> masses);

  /// Empirical measure (1/n)Σδ_{x_i} of a sample list.
  static GridDensity empirical(std::span<const double> samples);

  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return points_.size(); }
  /// Mass at x, zero off the support.
  double mass(double x) const;

 private:
  std::vector<double> points_;
  std::vector<double> masses_;
};

/// Discriminator scores on finitely many points; every score lies in [0,1].
/// Points not in the table score 1/2.
class DiscriminatorTable {
 public:
  DiscriminatorTable() = default;
  explicit DiscriminatorTable(std::map<double, double> scores);

  double score(double x) const;
  void set(double x, double score);
  const std::map<double, double>& scores() const { return scores_; }

 private:
  std::map<double, double> scores_;
};

/// Σ pr(x) log d(x) + Σ pg(x) log(1 − d(x)); zero-mass terms are dropped.
/// Throws NumericalError when a positive-mass point has score exactly 0
/// (for pr) or 1 (for pg).
double gan_value(const DiscriminatorTable& d, const GridDensity& pr, const GridDensity& pg);

/// Pointwise pr/(pr + pg) on the union of supports; 1/2 where both vanish.
DiscriminatorTable optimal_discriminator(const GridDensity& pr, const GridDensity& pg);

/// Jensen-Shannon divergence with 0·log 0 = 0 (natural log, so at most log 2).
double js_divergence(const GridDensity& pr, const GridDensity& pg);

/// Optimal discriminator for the empirical measures of real samples `xs`
/// and generated samples `gzs`.
DiscriminatorTable empirical_discriminator(std::span<const double> xs, std::span<const double> gzs);

/// N-player cost: the empirical objective maximized over discriminators.
double nplayer_cost(std::span<const double> xs, std::span<const double> gzs);

}  // namespace mfgan::gan
