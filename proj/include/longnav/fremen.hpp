#pragma once

// Frequency Map Enhancement: a bounded time-varying signal modelled as its mean
// plus the strongest harmonics from a fixed set of candidate periods. Each
// accumulator is the running average of v * exp(-i*omega*t) over the
// observations, so samples may arrive at arbitrary (non-uniform) times.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace longnav {

using PeriodSet = std::shared_ptr<const std::vector<double>>;

/// 86400/j s for j = 1..12, plus one week.
PeriodSet default_fremen_periods();

struct SpectralComponent {
  double period_s;
  double amplitude;  // 2|gamma|
  double phase;      // arg gamma, radians
};

class FremenModel {
 public:
  explicit FremenModel(PeriodSet periods = default_fremen_periods());

  /// Rebuilds a model from serialized state. `spectrum` pairs with `periods`.
  static FremenModel restore(std::size_t observations, double mean, PeriodSet periods,
                             std::vector<std::complex<double>> spectrum);

  /// v must lie in [-1, 1]; throws InvalidInput otherwise.
  void add_observation(double value, double time_s);

  /// clamp(mean + sum over the `order` strongest components of
  /// 2|gamma| cos(omega t + arg gamma), -1, 1). Zero for an empty model.
  double predict(double time_s, std::size_t order) const;

  double mean_score() const { return mean_; }

  /// Strongest `k` components by |gamma|, descending; ties go to the longer period.
  std::vector<SpectralComponent> dominant_components(std::size_t k) const;

  std::size_t observations() const { return observations_; }
  std::span<const double> periods() const { return *periods_; }
  const PeriodSet& period_set() const { return periods_; }
  std::span<const std::complex<double>> spectrum() const { return spectrum_; }

 private:
  std::vector<std::size_t> ranked_components() const;

  PeriodSet periods_;
  std::vector<double> omegas_;
  std::size_t observations_ = 0;
  double mean_ = 0.0;
  std::vector<std::complex<double>> spectrum_;
};

}  // namespace longnav
