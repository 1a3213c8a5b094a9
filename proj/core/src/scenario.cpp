#include "mvdyn/scenario.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mvdyn/error.hpp"

namespace mvdyn {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(where, "expected a finite number");
  return v;
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return number(j.at(key), where + "." + key);
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) bad(where, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < 0) bad(where, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::vector<double>> matrix(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(numbers(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SpacePtr parse_space(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    const auto bounds_raw = matrix(require(g, "bounds", where + ".grid"), where + ".grid.bounds");
    const auto& counts_raw = require(g, "counts", where + ".grid");
    if (!counts_raw.is_array()) bad(where + ".grid.counts", "expected an array");
    std::vector<Interval> bounds;
    for (const auto& b : bounds_raw) {
      if (b.size() != 2) bad(where + ".grid.bounds", "each bound must be [lo, hi]");
      bounds.push_back({b[0], b[1]});
    }
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < counts_raw.size(); ++i) {
      counts.push_back(count(counts_raw[i], where + ".grid.counts"));
    }
    return share(StrategySpace::grid(bounds, counts));
  }
  std::vector<std::vector<double>> points;
  if (j.contains("points")) points = matrix(j.at("points"), where + ".points");
  if (j.contains("distances")) {
    return share(StrategySpace::from_distances(matrix(j.at("distances"), where + ".distances"),
                                               std::move(points)));
  }
  if (!points.empty()) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (points[a].size() != points[b].size()) bad(where + ".points", "ragged coordinates");
        double sq = 0.0;
        for (std::size_t k = 0; k < points[a].size(); ++k) {
          sq += (points[a][k] - points[b][k]) * (points[a][k] - points[b][k]);
        }
        dist[a][b] = std::sqrt(sq);
      }
    }
    return share(StrategySpace::from_distances(std::move(dist), std::move(points)));
  }
  bad(where, "expected 'grid', 'distances' or 'points'");
}

// Coefficients: a scalar (broadcast), a per-atom array, or
// {"poly": [c0, c1, ...], "axis": k} evaluated at each atom's coordinate.
std::vector<double> coefficients(const json& j, const StrategySpace& space,
                                 const std::string& where) {
  const std::size_t n = space.size();
  if (j.is_number()) return std::vector<double>(n, number(j, where));
  if (j.is_array()) {
    auto v = numbers(j, where);
    if (v.size() != n) {
      throw DimensionError(where + ": " + std::to_string(v.size()) + " coefficients for " +
                           std::to_string(n) + " atoms");
    }
    return v;
  }
  if (j.is_object() && j.contains("poly")) {
    const auto poly = numbers(j.at("poly"), where + ".poly");
    const std::size_t axis = j.contains("axis") ? count(j.at("axis"), where + ".axis") : 0;
    if (!space.has_points()) bad(where, "polynomial coefficients need atom coordinates");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (axis >= space.points()[i].size()) bad(where + ".axis", "axis out of range");
      const double x = space.points()[i][axis];
      double acc = 0.0;
      for (std::size_t p = poly.size(); p-- > 0;) acc = acc * x + poly[p];  // Horner
      v[i] = acc;
    }
    return v;
  }
  bad(where, "expected a number, an array or {\"poly\": [...]}");
}

VitalRates parse_rates(const json& j, const StrategySpace& space) {
  const std::string where = "rates";
  const double inflow = number(require(j, "inflow", where), where + ".inflow");
  const double dilution = number(require(j, "dilution", where), where + ".dilution");

  const auto& up = require(j, "uptake", where);
  UptakeSpec uptake;
  const std::string ufam = require(up, "family", where + ".uptake").get<std::string>();
  if (ufam == "monod") {
    uptake.family = UptakeFamily::kMonod;
    uptake.a = coefficients(require(up, "a", where + ".uptake"), space, where + ".uptake.a");
  } else if (ufam == "linear") {
    uptake.family = UptakeFamily::kLinear;
  } else {
    bad(where + ".uptake.family", "unknown family '" + ufam + "'");
  }
  uptake.b = coefficients(require(up, "b", where + ".uptake"), space, where + ".uptake.b");

  const auto& mo = require(j, "mortality", where);
  MortalitySpec mortality;
  const std::string mfam = require(mo, "family", where + ".mortality").get<std::string>();
  if (mfam == "constant") {
    mortality.family = MortalityFamily::kConstant;
  } else if (mfam == "decreasing") {
    mortality.family = MortalityFamily::kDecreasing;
    mortality.c = coefficients(require(mo, "c", where + ".mortality"), space, where + ".mortality.c");
  } else {
    bad(where + ".mortality.family", "unknown family '" + mfam + "'");
  }
  mortality.d0 = coefficients(require(mo, "d0", where + ".mortality"), space, where + ".mortality.d0");
  return VitalRates(inflow, dilution, std::move(uptake), std::move(mortality));
}

std::pair<MutationKernel, std::string> parse_kernel(const json& j, const SpacePtr& space) {
  const std::string where = "kernel";
  if (j.contains("matrix")) {
    const bool renormalize = j.value("renormalize", false);
    return {MutationKernel(space, matrix(j.at("matrix"), where + ".matrix"), renormalize), "matrix"};
  }
  const std::string family = require(j, "family", where).get<std::string>();
  if (family == "pure_selection") return {pure_selection_kernel(space), family};
  if (family == "gaussian") {
    return {local_mutation_kernel(space, number(require(j, "width", where), where + ".width")),
            family};
  }
  bad(where + ".family", "unknown family '" + family + "'");
}

std::vector<double> parse_weights(const json& j, std::size_t n, const std::string& where) {
  if (j.contains("weights")) {
    auto w = numbers(j.at("weights"), where + ".weights");
    if (w.size() != n) {
      throw DimensionError(where + ".weights: " + std::to_string(w.size()) + " weights for " +
                           std::to_string(n) + " atoms");
    }
    return w;
  }
  std::vector<double> w(n, 0.0);
  if (j.contains("atoms")) {
    const auto& atoms = j.at("atoms");
    if (!atoms.is_array()) bad(where + ".atoms", "expected [[index, weight], ...]");
    for (const auto& entry : atoms) {
      if (!entry.is_array() || entry.size() != 2) bad(where + ".atoms", "expected [index, weight]");
      const std::size_t idx = count(entry[0], where + ".atoms index");
      if (idx >= n) throw DimensionError(where + ".atoms: index " + std::to_string(idx) + " out of range");
      w[idx] += number(entry[1], where + ".atoms weight");
    }
    return w;
  }
  if (j.contains("uniform")) {
    const double total = number(j.at("uniform"), where + ".uniform");
    for (double& x : w) x = total / static_cast<double>(n);
    return w;
  }
  bad(where, "expected 'weights', 'atoms' or 'uniform'");
}

StepControl parse_control(const json& j) {
  const std::string where = "integrator";
  StepControl c;
  const std::string method = j.value("method", std::string("rk4"));
  if (method == "rk4") {
    c.method = StepMethod::kFixed;
  } else if (method == "rk4-adaptive") {
    c.method = StepMethod::kAdaptive;
  } else {
    bad(where + ".method", "unknown method '" + method + "'");
  }
  c.dt = number_or(j, "dt", c.dt, where);
  c.tolerance = number_or(j, "tolerance", c.tolerance, where);
  c.t_end = number(require(j, "t_end", where), where + ".t_end");
  if (j.contains("output_stride")) c.output_stride = count(j.at("output_stride"), where + ".output_stride");
  if (!(c.dt > 0.0)) bad(where + ".dt", "must be positive");
  if (!(c.t_end >= 0.0)) bad(where + ".t_end", "must be >= 0");
  if (c.output_stride == 0) bad(where + ".output_stride", "must be >= 1");
  return c;
}

PicardOptions parse_picard(const json& j, double t_end) {
  const std::string where = "picard";
  PicardOptions p;
  p.horizon = std::min(t_end, 1.0);
  if (j.is_null()) return p;
  p.horizon = number_or(j, "horizon", p.horizon, where);
  if (j.contains("nodes")) p.nodes = count(j.at("nodes"), where + ".nodes");
  p.window = number_or(j, "window", p.window, where);
  if (j.contains("lambda") && !j.at("lambda").is_null()) p.lambda = number(j.at("lambda"), where + ".lambda");
  p.tolerance = number_or(j, "tolerance", p.tolerance, where);
  if (j.contains("max_iterations")) p.max_iterations = count(j.at("max_iterations"), where + ".max_iterations");
  return p;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  const json doc = parse_json(json_text);
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  try {
    auto space = parse_space(require(doc, "space", "scenario"), "space");
    auto rates = parse_rates(require(doc, "rates", "scenario"), *space);
    auto [kernel, family] = parse_kernel(require(doc, "kernel", "scenario"), space);
    const auto& init = require(doc, "initial", "scenario");
    SystemState initial{number(require(init, "S", "initial"), "initial.S"),
                        DiscreteMeasure(space, parse_weights(init, space->size(), "initial"))};
    if (initial.substrate < 0.0 || !initial.population.is_nonnegative()) {
      throw ConfigError("initial: state must lie in the nonnegative cone");
    }
    auto control = parse_control(require(doc, "integrator", "scenario"));
    std::optional<double> truncation;
    if (doc.contains("truncation") && !doc.at("truncation").is_null()) {
      truncation = number(doc.at("truncation"), "truncation");
    }
    auto picard = parse_picard(doc.value("picard", json()), control.t_end);

    Scenario s{doc.value("name", std::string("scenario")),
               space,
               std::move(rates),
               std::move(kernel),
               std::move(family),
               std::move(initial),
               control,
               truncation,
               picard,
               0,
               false,
               {},
               {},
               {}};
    if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
    s.allow_unvalidated = doc.value("allow_unvalidated", false);
    s.output_dir = doc.value("output_dir", std::string());
    s.canonical_json = doc.dump();
    s.hash = sha256_hex(s.canonical_json);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path));
}

PreparedModel Scenario::prepare() const {
  ModelOptions options;
  options.truncation = truncation;
  options.allow_unvalidated = allow_unvalidated;
  return prepare_model(rates, kernel, initial, options);
}

DiscreteMeasure parse_measure(std::string_view json_text) {
  const json doc = parse_json(json_text);
  try {
    auto space = parse_space(require(doc, "space", "measure"), "measure.space");
    return DiscreteMeasure(space, parse_weights(doc, space->size(), "measure"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("measure: ") + e.what());
  }
}

DiscreteMeasure load_measure(const std::filesystem::path& path) {
  return parse_measure(read_text_file(path));
}

std::string measure_to_json(const DiscreteMeasure& mu) {
  const auto& space = *mu.space();
  json distances = json::array();
  for (std::size_t i = 0; i < space.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < space.size(); ++j) row.push_back(space.distance(i, j));
    distances.push_back(std::move(row));
  }
  json atoms = json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] != 0.0) atoms.push_back(json::array({i, mu[i]}));
  }
  json doc = {{"space", {{"distances", distances}}}, {"atoms", atoms}};
  if (space.has_points()) doc["space"]["points"] = space.points();
  return doc.dump();
}

std::string random_scenario_json(std::uint64_t seed, const RandomScenarioOptions& options) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const auto n = static_cast<std::size_t>(
      std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(options.max_atoms, 1))(rng));

  auto per_atom = [&](double lo, double hi) {
    json v = json::array();
    for (std::size_t i = 0; i < n; ++i) v.push_back(uniform(lo, hi));
    return v;
  };

  json mortality;
  if (uniform(0.0, 1.0) < 0.5) {
    mortality = {{"family", "constant"}, {"d0", per_atom(0.1, 0.6)}};
  } else {
    mortality = {{"family", "decreasing"}, {"d0", per_atom(0.1, 0.5)}, {"c", per_atom(0.0, 0.3)}};
  }

  json kernel;
  const double pick = options.pure_selection ? 0.0 : uniform(0.0, 1.0);
  if (pick < 0.34) {
    kernel = {{"family", "pure_selection"}};
  } else if (pick < 0.67) {
    kernel = {{"family", "gaussian"}, {"width", uniform(0.05, 0.5)}};
  } else {
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < n; ++j) row.push_back(uniform(0.0, 1.0) + (i == j ? 2.0 : 0.0));
      rows.push_back(std::move(row));
    }
    kernel = {{"matrix", rows}, {"renormalize", true}};
  }

  json weights = json::array();
  for (std::size_t i = 0; i < n; ++i) weights.push_back(uniform(0.0, 1.0) < 0.2 ? 0.0 : uniform(0.0, 1.0));

  json doc = {
      {"name", "random-" + std::to_string(seed)},
      {"seed", seed},
      {"space", {{"grid", {{"bounds", json::array({json::array({0.0, 1.0})})},
                           {"counts", json::array({n})}}}}},
      {"rates",
       {{"inflow", uniform(0.2, 2.0)},
        {"dilution", uniform(0.2, 1.5)},
        {"uptake", {{"family", "monod"}, {"b", per_atom(0.5, 2.0)}, {"a", per_atom(0.5, 2.0)}}},
        {"mortality", mortality}}},
      {"kernel", kernel},
      {"initial", {{"S", uniform(0.0, 3.0)}, {"weights", weights}}},
      {"integrator", {{"method", "rk4"}, {"dt", options.dt}, {"t_end", options.t_end}}},
  };
  return doc.dump(2);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace mvdyn
