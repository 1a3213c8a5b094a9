#include "mvdyn/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvdyn/error.hpp"

namespace mvdyn {

const char* to_string(UptakeFamily family) noexcept {
  switch (family) {
    case UptakeFamily::kMonod: return "monod";
    case UptakeFamily::kLinear: return "linear";
  }
  return "unknown";
}

const char* to_string(MortalityFamily family) noexcept {
  switch (family) {
    case MortalityFamily::kConstant: return "constant";
    case MortalityFamily::kDecreasing: return "decreasing";
  }
  return "unknown";
}

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ConfigError(std::string(what) + ": non-finite coefficient");
  }
}

}  // namespace

VitalRates::VitalRates(double inflow, double dilution, UptakeSpec uptake,
                       MortalitySpec mortality)
    : inflow_(inflow), dilution_(dilution), uptake_(std::move(uptake)),
      mortality_(std::move(mortality)) {
  if (!std::isfinite(inflow_) || !std::isfinite(dilution_)) {
    throw ConfigError("inflow and dilution must be finite");
  }
  const std::size_t n = uptake_.b.size();
  if (n == 0) throw ConfigError("rates need at least one atom");
  if (uptake_.family == UptakeFamily::kMonod) {
    if (uptake_.a.size() != n) throw DimensionError("monod: 'a' has wrong length");
    for (double a : uptake_.a) {
      if (!(a > 0.0)) throw ConfigError("monod: half-saturation 'a' must be positive");
    }
  }
  if (mortality_.d0.size() != n) throw DimensionError("mortality: 'd0' has wrong length");
  if (mortality_.family == MortalityFamily::kDecreasing && mortality_.c.size() != n) {
    throw DimensionError("mortality: 'c' has wrong length");
  }
  require_finite(uptake_.b, "uptake b");
  require_finite(uptake_.a, "uptake a");
  require_finite(mortality_.d0, "mortality d0");
  require_finite(mortality_.c, "mortality c");
}

double VitalRates::clamp(double substrate) const noexcept {
  double s = substrate > 0.0 ? substrate : 0.0;
  if (truncation_ && s > *truncation_) s = *truncation_;
  return s;
}

double VitalRates::uptake(double substrate, std::size_t atom) const {
  const double s = clamp(substrate);
  switch (uptake_.family) {
    case UptakeFamily::kMonod: return uptake_.b[atom] * s / (uptake_.a[atom] + s);
    case UptakeFamily::kLinear: return uptake_.b[atom] * s;
  }
  return 0.0;
}

double VitalRates::mortality(double substrate, std::size_t atom) const {
  const double s = clamp(substrate);
  switch (mortality_.family) {
    case MortalityFamily::kConstant: return mortality_.d0[atom];
    case MortalityFamily::kDecreasing: return mortality_.d0[atom] + mortality_.c[atom] / (1.0 + s);
  }
  return 0.0;
}

VitalRates VitalRates::truncated(double level) const {
  if (!(level > 0.0) || !std::isfinite(level)) {
    throw ConfigError("truncation level must be positive and finite");
  }
  VitalRates copy = *this;
  copy.truncation_ = truncation_ ? std::min(*truncation_, level) : level;
  return copy;
}

double VitalRates::mortality_floor() const noexcept {
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    double lo = mortality(0.0, i);
    if (mortality_.family == MortalityFamily::kDecreasing) {
      // Monotone in S, so the extreme is at an end of the admissible range.
      const double far = truncation_ ? mortality(*truncation_, i) : mortality_.d0[i];
      lo = std::min(lo, far);
    }
    floor = std::min(floor, lo);
  }
  return floor;
}

AssumptionReport validate_assumptions(const VitalRates& rates, const StrategySpace& space,
                                      double substrate_max, std::size_t samples) {
  if (!(substrate_max > 0.0)) throw ConfigError("validate_assumptions: S_max must be positive");
  if (samples < 2) throw ConfigError("validate_assumptions: need at least two samples");
  if (rates.size() != space.size()) {
    throw DimensionError("rates cover " + std::to_string(rates.size()) + " atoms, space has " +
                         std::to_string(space.size()));
  }

  AssumptionReport report;
  report.samples = samples;
  report.substrate_max = substrate_max;
  report.mortality_floor = std::numeric_limits<double>::infinity();

  auto fail = [&report](std::string message) {
    report.ok = false;
    report.violations.push_back(std::move(message));
  };

  if (!(rates.inflow() >= 0.0)) fail("inflow must be >= 0");
  if (!(rates.dilution() > 0.0)) fail("dilution must be > 0");

  const double h = substrate_max / static_cast<double>(samples - 1);
  constexpr double kMonotoneSlack = 1e-14;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    bool uptake_sign_ok = true;
    bool uptake_monotone = true;
    bool mortality_monotone = true;
    bool finite = true;
    double prev_b = 0.0;
    double prev_d = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const double s = k + 1 == samples ? substrate_max : h * static_cast<double>(k);
      const double b = rates.uptake(s, i);
      const double d = rates.mortality(s, i);
      if (!std::isfinite(b) || !std::isfinite(d)) {
        finite = false;
        continue;
      }
      if (k == 0) {
        if (b != 0.0) fail("atom " + std::to_string(i) + ": B(0) != 0");
      } else {
        if (!(b > 0.0)) uptake_sign_ok = false;
        if (b < prev_b - kMonotoneSlack * std::max(1.0, std::abs(prev_b))) uptake_monotone = false;
        if (d > prev_d + kMonotoneSlack * std::max(1.0, std::abs(prev_d))) mortality_monotone = false;
        report.uptake_lipschitz = std::max(report.uptake_lipschitz, std::abs(b - prev_b) / h);
        report.mortality_lipschitz = std::max(report.mortality_lipschitz, std::abs(d - prev_d) / h);
      }
      report.uptake_sup = std::max(report.uptake_sup, std::abs(b));
      report.mortality_sup = std::max(report.mortality_sup, std::abs(d));
      report.mortality_floor = std::min(report.mortality_floor, d);
      prev_b = b;
      prev_d = d;
    }
    const std::string tag = "atom " + std::to_string(i) + ": ";
    if (!finite) fail(tag + "non-finite rate values");
    if (!uptake_sign_ok) fail(tag + "B(S) must be > 0 for S > 0");
    if (!uptake_monotone) fail(tag + "B(., q) must be nondecreasing");
    if (!mortality_monotone) fail(tag + "D(., q) must be nonincreasing");
  }
  if (!(report.mortality_floor > 0.0)) {
    std::ostringstream os;
    os << "mortality floor must be > 0 (sampled minimum " << report.mortality_floor << ")";
    fail(os.str());
  }
  return report;
}

}  // namespace mvdyn
