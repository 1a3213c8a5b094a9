#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mvdyn/strategy_space.hpp"

namespace mvdyn {

enum class UptakeFamily {
  kMonod,   // b S / (a + S)
  kLinear,  // b S
};

enum class MortalityFamily {
  kConstant,    // d0
  kDecreasing,  // d0 + c / (1 + S)
};

/// Named uptake family with per-atom coefficients.
struct UptakeSpec {
  UptakeFamily family = UptakeFamily::kMonod;
  std::vector<double> b;
  std::vector<double> a;  // half-saturation, monod only
};

struct MortalitySpec {
  MortalityFamily family = MortalityFamily::kConstant;
  std::vector<double> d0;
  std::vector<double> c;  // decreasing only
};

const char* to_string(UptakeFamily family) noexcept;
const char* to_string(MortalityFamily family) noexcept;

/// Inflow, dilution and per-strategy uptake and mortality.
///
/// Rates are only defined for S >= 0; negative arguments are read as 0. A
/// truncated copy additionally reads S > N as N, which makes both families
/// globally bounded and Lipschitz.
class VitalRates {
 public:
  VitalRates(double inflow, double dilution, UptakeSpec uptake, MortalitySpec mortality);

  double inflow() const noexcept { return inflow_; }
  double dilution() const noexcept { return dilution_; }
  std::size_t size() const noexcept { return uptake_.b.size(); }
  const UptakeSpec& uptake_spec() const noexcept { return uptake_; }
  const MortalitySpec& mortality_spec() const noexcept { return mortality_; }
  std::optional<double> truncation_level() const noexcept { return truncation_; }

  /// B(S, q_i)
  double uptake(double substrate, std::size_t atom) const;
  /// D_mort(S, q_i)
  double mortality(double substrate, std::size_t atom) const;

  /// Rates with the substrate argument clamped to [0, level]. Truncating an
  /// already truncated object keeps the smaller level.
  VitalRates truncated(double level) const;

  /// min over atoms and admissible S of the mortality, from the closed form
  /// of the family (over [0, N] when truncated, [0, inf) otherwise).
  double mortality_floor() const noexcept;

 private:
  double clamp(double substrate) const noexcept;

  double inflow_;
  double dilution_;
  UptakeSpec uptake_;
  MortalitySpec mortality_;
  std::optional<double> truncation_;
};

/// Outcome of the sampled admissibility checks.
struct AssumptionReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::size_t samples = 0;
  double substrate_max = 0.0;
  /// Sampled minimum of the mortality: the reported floor.
  double mortality_floor = 0.0;
  double uptake_sup = 0.0;
  double mortality_sup = 0.0;
  /// Largest finite-difference slope over the sample grid, uniform in atoms.
  double uptake_lipschitz = 0.0;
  double mortality_lipschitz = 0.0;
};

/// Samples S on `samples` equispaced points of [0, substrate_max] and checks:
/// B(0) = 0, B > 0 for S > 0, B nondecreasing, D nonincreasing, D > 0,
/// inflow >= 0 and dilution > 0.
AssumptionReport validate_assumptions(const VitalRates& rates, const StrategySpace& space,
                                      double substrate_max, std::size_t samples = 256);

/// Free-function forms of the evaluators.
inline double eval_uptake(const VitalRates& r, double s, std::size_t i) { return r.uptake(s, i); }
inline double eval_mortality(const VitalRates& r, double s, std::size_t i) { return r.mortality(s, i); }
inline VitalRates truncate(const VitalRates& r, double level) { return r.truncated(level); }

}  // namespace mvdyn
