#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace longnav {

/// I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  bool significant = false;
  double mean_difference = 0.0;
};

/// Paired two-sided test on d_i = a_i - b_i. Requires equal lengths, N >= 2.
/// sd(d) = 0: t = +-inf, p = 0 when mean(d) != 0; t = 0, p = 1 otherwise.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, double alpha);

/// (threshold, |{v <= threshold}| / N) for each threshold. Throws on empty values.
std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> values,
                                                     std::span<const double> thresholds);

}  // namespace longnav
