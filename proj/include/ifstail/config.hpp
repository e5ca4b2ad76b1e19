#pragma once

// Experiment configuration: a JSON document, validated with every default
// filled in. See README.md for the grammar.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ifstail/entropy_tools.hpp"
#include "ifstail/error.hpp"
#include "ifstail/generating_measure.hpp"
#include "ifstail/metric_maps.hpp"
#include "ifstail/presets.hpp"
#include "ifstail/tail_analysis.hpp"

namespace ifstail {

using Json = nlohmann::json;

enum class ExperimentKind {
  Chi,
  Moment,
  Lyapunov,
  Sample,
  Tail,
  Ldp,
  Rate,
  Entropy,
  LowerBound,
  Diagnose,
};

inline constexpr std::string_view kExperimentNames[] = {
    "chi",  "moment", "lyapunov", "sample",     "tail",
    "ldp",  "rate",   "entropy",  "lowerbound", "diagnose",
};

inline std::string_view to_string(ExperimentKind kind) noexcept {
  return kExperimentNames[static_cast<std::size_t>(kind)];
}

inline ExperimentKind parse_experiment_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kExperimentNames); ++i) {
    if (kExperimentNames[i] == name) return static_cast<ExperimentKind>(i);
  }
  fail(ErrorCode::ValidationError,
       "experiment: unknown kind '" + std::string(name) + "'");
}

struct PresetSpec {
  std::string name;
  // prime_q only.
  std::int64_t q = 5;
  // sequence_example only.
  std::size_t truncation = 10'000;

  bool operator==(const PresetSpec &) const = default;
};

struct MapSpec {
  LipschitzMap map;
  double weight = 0.0;

  bool operator==(const MapSpec &) const = default;
};

struct RadiiSpec {
  enum class Mode { Auto, List, Geometric };
  Mode mode = Mode::Auto;
  std::vector<double> list;
  // Geometric: r0 * 2^{j/2}, j < count.
  double r0 = 1.0;
  std::size_t count = 0;

  bool operator==(const RadiiSpec &) const = default;
};

struct ExperimentConfig {
  std::size_t space_dim = 1;
  // Exactly one of preset / maps describes the generating measure.
  std::optional<PresetSpec> preset;
  std::vector<MapSpec> maps;
  ExperimentKind experiment = ExperimentKind::Chi;
  std::uint64_t seed = 1;

  // Sampling.
  std::vector<double> start;  // empty = origin
  double tol = 1e-8;
  std::size_t count = 10'000;
  std::size_t max_steps = 0;  // 0 = automatic
  double truncation_ceiling = 1e-3;

  // Moments, rate function, Lyapunov exponent.
  std::vector<double> t_grid = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  std::vector<double> x_grid;  // empty = span of log rho
  double t_max = 200.0;
  std::size_t n = 1000;
  std::size_t trials = 10'000;
  double work_budget = 2e9;

  // Tails and large deviations.
  RadiiSpec radii;
  std::vector<double> center;  // empty = automatic
  std::size_t min_exceed = kDefaultMinExceed;
  std::vector<std::size_t> n_grid = {50, 100, 200, 400};
  double epsilon = 0.1;
  LdpVariant variant = LdpVariant::Factorwise;

  // Entropy.
  double sigma = 0.1;
  double L = 2.0;
  std::size_t eval_count = 10'000;
  std::optional<int> i_max;

  // Convergence diagnostic.
  double radius = 8.0;
  std::size_t reference_size = 0;  // 0 = 10 * trials

  bool operator==(const ExperimentConfig &) const = default;
};

namespace detail {

inline const std::set<std::string> kTopLevelKeys = {
    "space_dim", "preset",    "maps",       "experiment",  "seed",
    "start",     "tol",       "count",      "max_steps",   "truncation_ceiling",
    "t_grid",    "x_grid",    "t_max",      "n",           "trials",
    "work_budget", "radii",   "center",     "min_exceed",  "n_grid",
    "epsilon",   "variant",   "sigma",      "L",           "eval_count",
    "i_max",     "radius",    "reference_size",
};

inline void reject_unknown_keys(const Json &object,
                                const std::set<std::string> &allowed,
                                const std::string &where) {
  for (const auto &item : object.items()) {
    require(allowed.contains(item.key()), ErrorCode::ValidationError,
            where + item.key() + ": unknown key");
  }
}

inline double get_real(const Json &v, const std::string &key) {
  require(v.is_number(), ErrorCode::ValidationError, key + ": expected a number");
  const double x = v.get<double>();
  require(std::isfinite(x), ErrorCode::ValidationError,
          key + ": must be finite");
  return x;
}

inline std::uint64_t get_unsigned(const Json &v, const std::string &key) {
  require(v.is_number_integer() && (v.is_number_unsigned() || v.get<std::int64_t>() >= 0),
          ErrorCode::ValidationError,
          key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::vector<double> get_reals(const Json &v, const std::string &key) {
  require(v.is_array(), ErrorCode::ValidationError, key + ": expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(get_real(v[i], key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// A scalar is accepted wherever a length-1 vector is expected.
inline Point get_point(const Json &v, const std::string &key) {
  if (v.is_number()) return make_point({get_real(v, key)});
  const auto xs = get_reals(v, key);
  require(!xs.empty(), ErrorCode::ValidationError, key + ": empty vector");
  return Eigen::Map<const Point>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

inline Matrix get_matrix(const Json &v, const std::string &key) {
  if (v.is_number()) return Matrix::Constant(1, 1, get_real(v, key));
  require(v.is_array() && !v.empty(), ErrorCode::ValidationError,
          key + ": expected a list of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Matrix m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = get_reals(v[static_cast<std::size_t>(r)],
                               key + "[" + std::to_string(r) + "]");
    if (r == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    require(static_cast<Eigen::Index>(row.size()) == m.cols(),
            ErrorCode::ValidationError, key + ": ragged rows");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

inline Json point_json(const Point &p) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) out.push_back(p(i));
  return out;
}

inline Json matrix_json(const Matrix &m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

// Re-throws library errors raised while building a map as validation errors
// naming the offending key.
template <class F>
auto validated(const std::string &key, F &&build) {
  try {
    return build();
  } catch (const Error &e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    fail(ErrorCode::ValidationError, key + ": " + e.what());
  }
}

inline MapSpec parse_map(const Json &v, const std::string &key) {
  require(v.is_object(), ErrorCode::ValidationError,
          key + ": expected a map descriptor object");
  require(v.contains("kind") && v["kind"].is_string(),
          ErrorCode::ValidationError, key + ".kind: missing or not a string");
  require(v.contains("weight"), ErrorCode::ValidationError,
          key + ".weight: missing");
  const std::string kind = v["kind"].get<std::string>();
  std::optional<LipschitzMap> map;
  const double weight = get_real(v["weight"], key + ".weight");
  require(weight > 0.0 && weight <= 1.0, ErrorCode::ValidationError,
          key + ".weight: must lie in (0, 1]");
  auto field = [&](const char *name) -> const Json & {
    require(v.contains(name), ErrorCode::ValidationError,
            key + "." + name + ": missing");
    return v[name];
  };
  if (kind == "affine") {
    reject_unknown_keys(v, {"kind", "weight", "linear", "translation"}, key + ".");
    const Matrix a = get_matrix(field("linear"), key + ".linear");
    const Point b = get_point(field("translation"), key + ".translation");
    map = validated(key, [&] { return AffineMap(a, b); });
  } else if (kind == "similarity") {
    reject_unknown_keys(v, {"kind", "weight", "scale", "rotation", "translation"},
                        key + ".");
    const double s = get_real(field("scale"), key + ".scale");
    const Point b = get_point(field("translation"), key + ".translation");
    if (v.contains("rotation")) {
      const Matrix u = get_matrix(v["rotation"], key + ".rotation");
      map = validated(key, [&] { return Similarity(s, u, b); });
    } else if (b.size() == 1) {
      require(s != 0.0, ErrorCode::ValidationError, key + ".scale: must be nonzero");
      map = Similarity::scalar(s, b(0));
    } else {
      map = validated(key, [&] {
        return Similarity(s, Matrix::Identity(b.size(), b.size()), b);
      });
    }
  } else if (kind == "piecewise") {
    reject_unknown_keys(
        v, {"kind", "weight", "knots", "values", "left_slope", "right_slope"},
        key + ".");
    auto knots = get_reals(field("knots"), key + ".knots");
    auto values = get_reals(field("values"), key + ".values");
    const double left = get_real(field("left_slope"), key + ".left_slope");
    const double right = get_real(field("right_slope"), key + ".right_slope");
    map = validated(key, [&] {
      return PiecewiseLinear1D(std::move(knots), std::move(values), left, right);
    });
  } else {
    fail(ErrorCode::ValidationError,
         key + ".kind: unknown map kind '" + kind + "'");
  }
  return {*map, weight};
}

inline Json map_json(const MapSpec &spec) {
  Json out;
  std::visit(
      [&](const auto &m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineMap>) {
          out["kind"] = "affine";
          out["linear"] = matrix_json(m.linear());
          out["translation"] = point_json(m.translation());
        } else if constexpr (std::is_same_v<T, Similarity>) {
          out["kind"] = "similarity";
          if (m.dimension() == 1) {
            out["scale"] = m.scale() * m.rotation()(0, 0);
          } else {
            out["scale"] = m.scale();
            out["rotation"] = matrix_json(m.rotation());
          }
          out["translation"] = point_json(m.translation());
        } else {
          out["kind"] = "piecewise";
          out["knots"] = m.knots();
          out["values"] = m.values();
          out["left_slope"] = m.left_slope();
          out["right_slope"] = m.right_slope();
        }
      },
      spec.map);
  out["weight"] = spec.weight;
  return out;
}

inline const std::set<std::string> kPresetNames = {
    "prime_q",     "shear_matrix",  "bernoulli",         "single_contraction",
    "compact_flip", "noncompact_translation", "sequence_example",
};

inline PresetSpec parse_preset(const Json &v) {
  PresetSpec spec;
  if (v.is_string()) {
    spec.name = v.get<std::string>();
  } else {
    require(v.is_object() && v.contains("name") && v["name"].is_string(),
            ErrorCode::ValidationError,
            "preset: expected a name or an object with a name");
    reject_unknown_keys(v, {"name", "q", "N"}, "preset.");
    spec.name = v["name"].get<std::string>();
    if (v.contains("q")) {
      require(spec.name == "prime_q", ErrorCode::ValidationError,
              "preset.q: only prime_q takes q");
      require(v["q"].is_number_integer(), ErrorCode::ValidationError,
              "preset.q: expected an integer");
      spec.q = v["q"].get<std::int64_t>();
    }
    if (v.contains("N")) {
      require(spec.name == "sequence_example", ErrorCode::ValidationError,
              "preset.N: only sequence_example takes N");
      spec.truncation = get_unsigned(v["N"], "preset.N");
    }
  }
  if (!kPresetNames.contains(spec.name)) {
    fail(ErrorCode::UnknownPreset, "preset: unknown name '" + spec.name + "'");
  }
  require(spec.q >= 5, ErrorCode::ValidationError, "preset.q: must be >= 5");
  require(spec.truncation >= presets::kMinSequenceTruncation &&
              spec.truncation <= SpikeSequence::kMaxTruncation,
          ErrorCode::ValidationError, "preset.N: must lie in [10, 20000]");
  return spec;
}

inline Json preset_json(const PresetSpec &spec) {
  Json out;
  out["name"] = spec.name;
  if (spec.name == "prime_q") out["q"] = spec.q;
  if (spec.name == "sequence_example") out["N"] = spec.truncation;
  return out;
}

}  // namespace detail

inline GeneratingMeasure preset_measure(const PresetSpec &spec) {
  if (spec.name == "prime_q") return presets::prime_q(spec.q);
  if (spec.name == "shear_matrix") return presets::shear_matrix();
  if (spec.name == "bernoulli") return presets::bernoulli();
  if (spec.name == "single_contraction") return presets::single_contraction();
  if (spec.name == "compact_flip") return presets::compact_flip();
  if (spec.name == "noncompact_translation") {
    return presets::noncompact_translation();
  }
  if (spec.name == "sequence_example") {
    return presets::sequence_example(spec.truncation);
  }
  fail(ErrorCode::UnknownPreset, "unknown preset '" + spec.name + "'");
}

inline GeneratingMeasure build_measure(const ExperimentConfig &config) {
  if (config.preset) return preset_measure(*config.preset);
  std::vector<Atom> atoms;
  for (const auto &m : config.maps) atoms.push_back({m.map, m.weight});
  return GeneratingMeasure(std::move(atoms));
}

inline Point start_point(const ExperimentConfig &config) {
  if (config.start.empty()) {
    return Point::Zero(static_cast<Eigen::Index>(config.space_dim));
  }
  return Eigen::Map<const Point>(config.start.data(),
                                 static_cast<Eigen::Index>(config.start.size()));
}

namespace detail {

inline GeneratingMeasure checked_measure(const ExperimentConfig &c) {
  try {
    return build_measure(c);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::ValidationError ||
        e.code() == ErrorCode::UnknownPreset) {
      throw;
    }
    fail(ErrorCode::ValidationError,
         std::string(c.preset ? "preset" : "maps") + ": " + e.what());
  }
}

}  // namespace detail

/// Range checks on every knob; throws ValidationError naming the key.
inline void validate(const ExperimentConfig &c) {
  auto check = [](bool ok, const std::string &key, const std::string &what) {
    require(ok, ErrorCode::ValidationError, key + ": " + what);
  };
  check(c.preset.has_value() != !c.maps.empty(), "maps",
        "give exactly one of 'preset' or a non-empty 'maps' list");
  const GeneratingMeasure mu = detail::checked_measure(c);
  check(c.space_dim == mu.dimension(), "space_dim",
        "is " + std::to_string(c.space_dim) + " but the maps act on R^" +
            std::to_string(mu.dimension()));
  auto finite_all = [](const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  check(c.start.empty() || c.start.size() == c.space_dim, "start",
        "length must equal space_dim");
  check(c.center.empty() || c.center.size() == c.space_dim, "center",
        "length must equal space_dim");
  check(finite_all(c.start) && finite_all(c.center), "start",
        "coordinates must be finite");
  check(c.tol > 0.0 && c.tol < 1.0, "tol", "must lie in (0, 1)");
  check(c.count >= 1 && c.count <= 100'000'000, "count", "must lie in [1, 1e8]");
  check(c.truncation_ceiling >= 0.0 && c.truncation_ceiling <= 1.0,
        "truncation_ceiling", "must lie in [0, 1]");
  check(!c.t_grid.empty() && finite_all(c.t_grid), "t_grid",
        "must be a non-empty list of finite reals");
  check(finite_all(c.x_grid), "x_grid", "entries must be finite");
  check(c.t_max > 0.0, "t_max", "must be positive");
  check(c.n >= 1, "n", "must be positive");
  check(c.trials >= 1, "trials", "must be positive");
  check(c.work_budget > 0.0, "work_budget", "must be positive");
  check(!c.n_grid.empty(), "n_grid", "must be non-empty");
  for (std::size_t j = 1; j < c.n_grid.size(); ++j) {
    check(c.n_grid[j] > c.n_grid[j - 1], "n_grid", "must be strictly increasing");
  }
  check(c.epsilon > 0.0, "epsilon", "must be positive");
  check(c.min_exceed >= 1, "min_exceed", "must be positive");
  switch (c.radii.mode) {
    case RadiiSpec::Mode::Auto: break;
    case RadiiSpec::Mode::List:
      check(!c.radii.list.empty(), "radii", "list must be non-empty");
      for (std::size_t j = 0; j < c.radii.list.size(); ++j) {
        check(c.radii.list[j] > 0.0 &&
                  (j == 0 || c.radii.list[j] > c.radii.list[j - 1]),
              "radii", "must be positive and strictly increasing");
      }
      break;
    case RadiiSpec::Mode::Geometric:
      check(c.radii.r0 > 0.0, "radii.r0", "must be positive");
      check(c.radii.count >= 1 && c.radii.count <= 256, "radii.count",
            "must lie in [1, 256]");
      break;
  }
  check(c.sigma > 0.0, "sigma", "must be positive");
  check(c.L > 1.0, "L", "must exceed 1");
  check(c.eval_count >= 2, "eval_count", "must be at least 2");
  check(!c.i_max || (*c.i_max >= -1 && *c.i_max <= kMaxAnnulusIndex), "i_max",
        "must lie in [-1, 64]");
  check(c.radius > 0.0, "radius", "must be positive");
}

inline std::vector<double> resolve_radii(const RadiiSpec &spec) {
  if (spec.mode == RadiiSpec::Mode::List) return spec.list;
  std::vector<double> out;
  for (std::size_t j = 0; j < spec.count; ++j) {
    out.push_back(spec.r0 * std::exp2(0.5 * static_cast<double>(j)));
  }
  return out;
}

/*
 * Parses and validates a configuration document. When `kind` is given it
 * selects the experiment; a document naming a different one is rejected.
 */
inline ExperimentConfig parse_config(
    std::string_view text, std::optional<ExperimentKind> kind = std::nullopt) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error &e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1,
                                                  text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + e.what());
  }
  require(doc.is_object(), ErrorCode::ParseError,
          "line 1, column 1: document must be a JSON object");
  detail::reject_unknown_keys(doc, detail::kTopLevelKeys, "");

  using namespace detail;
  ExperimentConfig c;
  if (doc.contains("preset")) c.preset = parse_preset(doc["preset"]);
  if (doc.contains("maps")) {
    const Json &maps = doc["maps"];
    require(maps.is_array(), ErrorCode::ValidationError,
            "maps: expected a list of map descriptors");
    for (std::size_t i = 0; i < maps.size(); ++i) {
      c.maps.push_back(parse_map(maps[i], "maps[" + std::to_string(i) + "]"));
    }
  }
  require(!(doc.contains("preset") && doc.contains("maps")),
          ErrorCode::ValidationError,
          "maps: give exactly one of 'preset' or a non-empty 'maps' list");
  require(c.preset.has_value() || !c.maps.empty(), ErrorCode::ValidationError,
          "maps: give exactly one of 'preset' or a non-empty 'maps' list");
  require(!(c.preset.has_value() && !c.maps.empty()),
          ErrorCode::ValidationError,
          "maps: give exactly one of 'preset' or a non-empty 'maps' list");
  // space_dim defaults to the dimension the maps act on.
  c.space_dim = checked_measure(c).dimension();
  if (doc.contains("space_dim")) {
    c.space_dim = get_unsigned(doc["space_dim"], "space_dim");
  }

  if (doc.contains("experiment")) {
    require(doc["experiment"].is_string(), ErrorCode::ValidationError,
            "experiment: expected a string");
    c.experiment = parse_experiment_kind(doc["experiment"].get<std::string>());
    if (kind && *kind != c.experiment) {
      fail(ErrorCode::ValidationError,
           "experiment: document selects '" + std::string(to_string(c.experiment)) +
               "' but '" + std::string(to_string(*kind)) + "' was requested");
    }
  } else if (kind) {
    c.experiment = *kind;
  }
  if (doc.contains("seed")) c.seed = get_unsigned(doc["seed"], "seed");

  auto real = [&](const char *key, double &slot) {
    if (doc.contains(key)) slot = get_real(doc[key], key);
  };
  auto count = [&](const char *key, std::size_t &slot) {
    if (doc.contains(key)) slot = get_unsigned(doc[key], key);
  };
  auto reals = [&](const char *key, std::vector<double> &slot) {
    if (doc.contains(key)) slot = get_reals(doc[key], key);
  };
  auto point = [&](const char *key, std::vector<double> &slot) {
    if (doc.contains(key)) {
      const Point p = get_point(doc[key], key);
      slot.assign(p.data(), p.data() + p.size());
    }
  };
  point("start", c.start);
  real("tol", c.tol);
  count("count", c.count);
  count("max_steps", c.max_steps);
  real("truncation_ceiling", c.truncation_ceiling);
  reals("t_grid", c.t_grid);
  reals("x_grid", c.x_grid);
  real("t_max", c.t_max);
  count("n", c.n);
  count("trials", c.trials);
  real("work_budget", c.work_budget);
  point("center", c.center);
  count("min_exceed", c.min_exceed);
  if (doc.contains("n_grid")) {
    const Json &g = doc["n_grid"];
    require(g.is_array(), ErrorCode::ValidationError, "n_grid: expected a list");
    c.n_grid.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      c.n_grid.push_back(get_unsigned(g[i], "n_grid[" + std::to_string(i) + "]"));
    }
  }
  real("epsilon", c.epsilon);
  if (doc.contains("variant")) {
    const Json &v = doc["variant"];
    require(v.is_string() && (v == "factorwise" || v == "product"),
            ErrorCode::ValidationError,
            "variant: expected 'factorwise' or 'product'");
    c.variant = v == "product" ? LdpVariant::Product : LdpVariant::Factorwise;
  }
  if (doc.contains("radii")) {
    const Json &r = doc["radii"];
    if (r.is_string()) {
      require(r == "auto", ErrorCode::ValidationError,
              "radii: expected \"auto\", a list, or {\"r0\", \"count\"}");
    } else if (r.is_array()) {
      c.radii.mode = RadiiSpec::Mode::List;
      c.radii.list = get_reals(r, "radii");
    } else {
      require(r.is_object() && r.contains("r0") && r.contains("count"),
              ErrorCode::ValidationError,
              "radii: expected \"auto\", a list, or {\"r0\", \"count\"}");
      reject_unknown_keys(r, {"r0", "count"}, "radii.");
      c.radii.mode = RadiiSpec::Mode::Geometric;
      c.radii.r0 = get_real(r["r0"], "radii.r0");
      c.radii.count = get_unsigned(r["count"], "radii.count");
    }
  }
  real("sigma", c.sigma);
  real("L", c.L);
  count("eval_count", c.eval_count);
  if (doc.contains("i_max")) {
    const Json &v = doc["i_max"];
    require(v.is_number_integer(), ErrorCode::ValidationError,
            "i_max: expected an integer");
    const auto i = v.get<std::int64_t>();
    require(i >= -1 && i <= kMaxAnnulusIndex, ErrorCode::ValidationError,
            "i_max: must lie in [-1, 64]");
    c.i_max = static_cast<int>(i);
  }
  real("radius", c.radius);
  count("reference_size", c.reference_size);

  validate(c);
  return c;
}

/// Canonical document for `config`; parse_config(render_config(c)) == c.
inline std::string render_config(const ExperimentConfig &c) {
  Json doc;
  doc["space_dim"] = c.space_dim;
  if (c.preset) {
    doc["preset"] = detail::preset_json(*c.preset);
  } else {
    Json maps = Json::array();
    for (const auto &m : c.maps) maps.push_back(detail::map_json(m));
    doc["maps"] = maps;
  }
  doc["experiment"] = std::string(to_string(c.experiment));
  doc["seed"] = c.seed;
  if (!c.start.empty()) doc["start"] = c.start;
  doc["tol"] = c.tol;
  doc["count"] = c.count;
  doc["max_steps"] = c.max_steps;
  doc["truncation_ceiling"] = c.truncation_ceiling;
  doc["t_grid"] = c.t_grid;
  if (!c.x_grid.empty()) doc["x_grid"] = c.x_grid;
  doc["t_max"] = c.t_max;
  doc["n"] = c.n;
  doc["trials"] = c.trials;
  doc["work_budget"] = c.work_budget;
  switch (c.radii.mode) {
    case RadiiSpec::Mode::Auto: doc["radii"] = "auto"; break;
    case RadiiSpec::Mode::List: doc["radii"] = c.radii.list; break;
    case RadiiSpec::Mode::Geometric:
      doc["radii"] = {{"r0", c.radii.r0}, {"count", c.radii.count}};
      break;
  }
  if (!c.center.empty()) doc["center"] = c.center;
  doc["min_exceed"] = c.min_exceed;
  doc["n_grid"] = c.n_grid;
  doc["epsilon"] = c.epsilon;
  doc["variant"] = c.variant == LdpVariant::Product ? "product" : "factorwise";
  doc["sigma"] = c.sigma;
  doc["L"] = c.L;
  doc["eval_count"] = c.eval_count;
  if (c.i_max) doc["i_max"] = *c.i_max;
  doc["radius"] = c.radius;
  doc["reference_size"] = c.reference_size;
  return doc.dump(2);
}

}  // namespace ifstail
