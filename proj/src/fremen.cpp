#include "longnav/fremen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "longnav/error.hpp"

namespace longnav {

PeriodSet default_fremen_periods() {
  static const PeriodSet periods = [] {
    auto p = std::make_shared<std::vector<double>>();
    for (int j = 1; j <= 12; ++j) p->push_back(86400.0 / j);
    p->push_back(604800.0);
    return PeriodSet(std::move(p));
  }();
  return periods;
}

FremenModel::FremenModel(PeriodSet periods) : periods_(std::move(periods)) {
  if (!periods_) throw InvalidInput("FremenModel: null period set");
  omegas_.reserve(periods_->size());
  for (double p : *periods_) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidInput("FremenModel: periods must be positive");
    omegas_.push_back(2.0 * std::numbers::pi / p);
  }
  spectrum_.assign(periods_->size(), {0.0, 0.0});
}

FremenModel FremenModel::restore(std::size_t observations, double mean, PeriodSet periods,
                                 std::vector<std::complex<double>> spectrum) {
  FremenModel m(std::move(periods));
  if (spectrum.size() != m.spectrum_.size())
    throw InvalidInput("FremenModel::restore: spectrum length does not match the period set");
  if (!(mean >= -1.0 && mean <= 1.0)) throw InvalidInput("FremenModel::restore: mean outside [-1, 1]");
  if (observations == 0 && mean != 0.0) throw InvalidInput("FremenModel::restore: empty model with non-zero mean");
  m.observations_ = observations;
  m.mean_ = mean;
  m.spectrum_ = std::move(spectrum);
  return m;
}

void FremenModel::add_observation(double value, double time_s) {
  if (!(value >= -1.0 && value <= 1.0))
    throw InvalidInput("FremenModel: observation " + std::to_string(value) + " outside [-1, 1]");
  if (!std::isfinite(time_s)) throw InvalidInput("FremenModel: non-finite observation time");
  ++observations_;
  const double w = 1.0 / static_cast<double>(observations_);
  mean_ += (value - mean_) * w;
  for (std::size_t j = 0; j < spectrum_.size(); ++j) {
    const double angle = omegas_[j] * time_s;
    const std::complex<double> sample(value * std::cos(angle), -value * std::sin(angle));
    spectrum_[j] += (sample - spectrum_[j]) * w;
  }
}

std::vector<std::size_t> FremenModel::ranked_components() const {
  std::vector<std::size_t> idx(spectrum_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
    const double ma = std::abs(spectrum_[a]);
    const double mb = std::abs(spectrum_[b]);
    if (ma != mb) return ma > mb;
    return (*periods_)[a] > (*periods_)[b];
  });
  return idx;
}

double FremenModel::predict(double time_s, std::size_t order) const {
  if (observations_ == 0) return 0.0;
  double value = mean_;
  if (order > 0) {
    const auto ranked = ranked_components();
    const std::size_t k = std::min(order, ranked.size());
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t j = ranked[r];
      value += 2.0 * std::abs(spectrum_[j]) * std::cos(omegas_[j] * time_s + std::arg(spectrum_[j]));
    }
  }
  return std::clamp(value, -1.0, 1.0);
}

std::vector<SpectralComponent> FremenModel::dominant_components(std::size_t k) const {
  if (k > spectrum_.size()) throw InvalidInput("dominant_components: k exceeds the number of candidate periods");
  const auto ranked = ranked_components();
  std::vector<SpectralComponent> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t j = ranked[r];
    out.push_back({(*periods_)[j], 2.0 * std::abs(spectrum_[j]), std::arg(spectrum_[j])});
  }
  return out;
}

}  // namespace longnav
