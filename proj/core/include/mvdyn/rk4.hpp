#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvdyn {

/// Classical fourth-order Runge-Kutta on R^n. `rhs(y, dy)` writes the
/// derivative of an autonomous system. Scratch buffers are kept between
/// steps so repeated stepping does not allocate.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t dim)
      : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  template <class Rhs>
  void step(Rhs&& rhs, std::span<const double> y, double dt, std::span<double> out) {
    const std::size_t n = y.size();
    rhs(y, std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * dt * k1_[i];
    rhs(std::span<const double>(tmp_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * dt * k2_[i];
    rhs(std::span<const double>(tmp_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
    rhs(std::span<const double>(tmp_), std::span<double>(k4_));
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = y[i] + dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace mvdyn
