#include "mfgan/gan/gan_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mfgan/common/error.hpp"

namespace mfgan::gan {

GridDensity::GridDensity(std::vector<double> points, std::vector<double> masses)
    : points_(std::move(points)), masses_(std::move(masses)) {
  if (points_.size() != masses_.size()) {
    throw ShapeError("grid density has " + std::to_string(points_.size()) + " points and " +
                     std::to_string(masses_.size()) + " masses");
  }
  if (points_.empty()) throw Error("grid density needs at least one support point");
  double total = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw Error("grid density support must be strictly increasing");
    }
    if (!(masses_[i] >= 0.0)) throw Error("grid density masses must be non-negative");
    total += masses_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("grid density masses must sum to 1");
}

GridDensity GridDensity::empirical(std::span<const double> samples) {
  if (samples.empty()) throw Error("empirical measure of an empty sample list");
  std::map<double, double> counts;
  for (double s : samples) counts[s] += 1.0;
  std::vector<double> points;
  std::vector<double> masses;
  const double n = static_cast<double>(samples.size());
  for (const auto& [x, c] : counts) {
    points.push_back(x);
    masses.push_back(c / n);
  }
  return GridDensity(std::move(points), std::move(masses));
}

double GridDensity::mass(double x) const {
  const auto it = std::lower_bound(points_.begin(), points_.end(), x);
  if (it == points_.end() || *it != x) return 0.0;
  return masses_[static_cast<std::size_t>(it - points_.begin())];
}

DiscriminatorTable::DiscriminatorTable(std::map<double, double> scores) {
  for (const auto& [x, s] : scores) set(x, s);
}

double DiscriminatorTable::score(double x) const {
  const auto it = scores_.find(x);
  return it == scores_.end() ? 0.5 : it->second;
}

void DiscriminatorTable::set(double x, double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw Error("discriminator scores must lie in [0,1]");
  scores_[x] = score;
}

double gan_value(const DiscriminatorTable& d, const GridDensity& pr, const GridDensity& pg) {
  double value = 0.0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    const double m = pr.masses()[i];
    if (m == 0.0) continue;
    const double s = d.score(pr.points()[i]);
    if (s == 0.0) throw NumericalError("discriminator scores 0 on a real point with positive mass (value -inf)");
    value += m * std::log(s);
  }
  for (std::size_t i = 0; i < pg.size(); ++i) {
    const double m = pg.masses()[i];
    if (m == 0.0) continue;
    const double s = d.score(pg.points()[i]);
    if (s == 1.0) throw NumericalError("discriminator scores 1 on a generated point with positive mass (value -inf)");
    value += m * std::log1p(-s);
  }
  return value;
}

namespace {

std::set<double> union_support(const GridDensity& a, const GridDensity& b) {
  std::set<double> support(a.points().begin(), a.points().end());
  support.insert(b.points().begin(), b.points().end());
  return support;
}

}  // namespace

DiscriminatorTable optimal_discriminator(const GridDensity& pr, const GridDensity& pg) {
  DiscriminatorTable d;
  for (double x : union_support(pr, pg)) {
    const double r = pr.mass(x);
    const double g = pg.mass(x);
    d.set(x, r + g > 0.0 ? r / (r + g) : 0.5);
  }
  return d;
}

double js_divergence(const GridDensity& pr, const GridDensity& pg) {
  double js = 0.0;
  for (double x : union_support(pr, pg)) {
    const double r = pr.mass(x);
    const double g = pg.mass(x);
    const double m = 0.5 * (r + g);
    if (r > 0.0) js += 0.5 * r * std::log(r / m);
    if (g > 0.0) js += 0.5 * g * std::log(g / m);
  }
  return js;
}

DiscriminatorTable empirical_discriminator(std::span<const double> xs, std::span<const double> gzs) {
  if (xs.empty() || gzs.empty()) throw Error("empirical discriminator needs non-empty sample lists");
  return optimal_discriminator(GridDensity::empirical(xs), GridDensity::empirical(gzs));
}

double nplayer_cost(std::span<const double> xs, std::span<const double> gzs) {
  const GridDensity real = GridDensity::empirical(xs);
  const GridDensity generated = GridDensity::empirical(gzs);
  return gan_value(optimal_discriminator(real, generated), real, generated);
}

}  // namespace mfgan::gan
