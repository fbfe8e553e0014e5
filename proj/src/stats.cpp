#include "longnav/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "longnav/error.hpp"

namespace longnav {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidInput("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("incomplete beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw InvalidInput("t distribution: df must be positive");
  if (std::isnan(t)) throw InvalidInput("t distribution: t is NaN");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size())
    throw InvalidInput("paired t-test: lengths differ (" + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  if (a.size() < 2) throw InvalidInput("paired t-test: need at least two pairs");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("paired t-test: alpha outside (0, 1)");

  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (a[i] - b[i]) - mean;
    ss += r * r;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult out;
  out.df = n - 1;
  out.mean_difference = mean;
  if (sd == 0.0) {
    if (mean == 0.0) {
      out.t = 0.0;
      out.p_value = 1.0;
    } else {
      out.t = mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
    }
  } else {
    out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    out.p_value = student_t_two_sided_p(out.t, static_cast<double>(out.df));
  }
  out.significant = out.p_value < alpha;
  return out;
}

std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> values,
                                                     std::span<const double> thresholds) {
  if (values.empty()) throw InvalidInput("cdf: empty sequence");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(thresholds.size());
  for (double th : thresholds) {
    const auto k = std::upper_bound(sorted.begin(), sorted.end(), th) - sorted.begin();
    out.emplace_back(th, static_cast<double>(k) / n);
  }
  return out;
}

}  // namespace longnav
