#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "mpls/error.hpp"
#include "mpls/io.hpp"

namespace mpls::io {
namespace {

using nlohmann::json;

// ------------------------------------------------------------ scalar parsing

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("override " + key + ": cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("override " + key + ": expected true or false, got '" + text + "'");
}

// "15" or "15x15"; both axes of a grid get the same count when one is given.
std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) {
    const int n = parse_number<int>("grid", text);
    return {n, n};
  }
  return {parse_number<int>("grid", text.substr(0, x)), parse_number<int>("grid", text.substr(x + 1))};
}

void respace(Axis& axis, int n, const std::string& key) {
  if (n < 1) throw ConfigError("override " + key + ": point count must be >= 1");
  if (axis.values.size() < 2) return;  // fixed-level axes stay as they are
  axis.values = linspace(axis.values.front(), axis.values.back(), n);
}

// --------------------------------------------------------------- JSON helpers

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

json mask_to_json(const MaskSpec& m) {
  return {{"mechanism", to_string(m.mechanism)}, {"rate", m.rate}, {"strength", m.strength}};
}

MaskSpec mask_from_json(const json& j, const std::string& where) {
  check_keys(j, {"mechanism", "rate", "strength"}, where);
  MaskSpec m;
  if (j.contains("mechanism")) m.mechanism = parse_mechanism(j.at("mechanism").get<std::string>());
  read(j, "rate", m.rate);
  read(j, "strength", m.strength);
  return m;
}

json axis_to_json(const Axis& a) { return {{"param", to_string(a.param)}, {"values", a.values}}; }

Axis axis_from_json(const json& j, const std::string& where) {
  check_keys(j, {"param", "values", "linspace"}, where);
  Axis a;
  a.param = parse_axis_param(j.at("param").get<std::string>());
  if (j.contains("values") == j.contains("linspace")) {
    throw ConfigError(where + ": give exactly one of 'values' or 'linspace'");
  }
  if (j.contains("values")) {
    a.values = j.at("values").get<std::vector<double>>();
  } else {
    const json& l = j.at("linspace");
    if (!l.is_array() || l.size() != 3) throw ConfigError(where + ": linspace is [low, high, count]");
    a.values = linspace(l[0].get<double>(), l[1].get<double>(), l[2].get<int>());
  }
  return a;
}

json estimator_to_json(const EstimatorKind& e) {
  return {{"kind", to_string(e.tag)}, {"max_iter", e.max_iter}, {"tol", e.tol}, {"rank", e.rank},
          {"estimate_rho", e.estimate_rho}};
}

EstimatorKind estimator_from_json(const json& j, const std::string& where) {
  check_keys(j, {"kind", "max_iter", "tol", "rank", "estimate_rho"}, where);
  EstimatorKind e;
  if (j.contains("kind")) {
    // Start from the factory defaults of the named kind.
    switch (parse_estimator(j.at("kind").get<std::string>())) {
      case EstimatorTag::pls_svd_zero: e = EstimatorKind::pls_svd_zero(); break;
      case EstimatorTag::mean_impute: e = EstimatorKind::mean_impute(); break;
      case EstimatorTag::em_pls: e = EstimatorKind::em_pls(); break;
      case EstimatorTag::iterative_svd: e = EstimatorKind::iterative_svd(); break;
      case EstimatorTag::oracle: e = EstimatorKind::oracle(); break;
    }
  }
  read(j, "max_iter", e.max_iter);
  read(j, "tol", e.tol);
  read(j, "rank", e.rank);
  read(j, "estimate_rho", e.estimate_rho);
  return e;
}

json design_to_json(const DesignSource& d) {
  return {{"x_path", d.x_path},
          {"y_path", d.y_path},
          {"surrogate_rows", d.surrogate_rows},
          {"surrogate_cols_x", d.surrogate_cols_x},
          {"surrogate_cols_y", d.surrogate_cols_y},
          {"surrogate_seed", d.surrogate_seed},
          {"target_dims", d.target_dims},
          {"random_directions", d.random_directions}};
}

DesignSource design_from_json(const json& j, const std::string& where) {
  check_keys(j,
             {"x_path", "y_path", "surrogate_rows", "surrogate_cols_x", "surrogate_cols_y", "surrogate_seed",
              "target_dims", "random_directions"},
             where);
  DesignSource d;
  read(j, "x_path", d.x_path);
  read(j, "y_path", d.y_path);
  read(j, "surrogate_rows", d.surrogate_rows);
  read(j, "surrogate_cols_x", d.surrogate_cols_x);
  read(j, "surrogate_cols_y", d.surrogate_cols_y);
  read(j, "surrogate_seed", d.surrogate_seed);
  read(j, "target_dims", d.target_dims);
  read(j, "random_directions", d.random_directions);
  if (d.x_path.empty() != d.y_path.empty()) throw ConfigError(where + ": x_path and y_path go together");
  return d;
}

json sweep_to_json(const PlannedSweep& p) {
  const SweepSpec& s = p.spec;
  const ModelConfig& b = s.base;
  json base = {{"n_samples", b.n_samples}, {"dx", b.dx},
               {"dy", b.dy},               {"theta", b.theta},
               {"mask_x", mask_to_json(b.mask_x)}, {"mask_y", mask_to_json(b.mask_y)},
               {"noise", b.noise.label()}, {"seed", b.seed}};
  return {{"name", s.name},
          {"base", std::move(base)},
          {"axis1", axis_to_json(s.axis1)},
          {"axis2", s.axis2 ? axis_to_json(*s.axis2) : json(nullptr)},
          {"trials", s.trials},
          {"estimator", estimator_to_json(s.estimator)},
          {"diagnostics", {{"split_half", s.diagnostics.split_half}}},
          {"design", p.design ? design_to_json(*p.design) : json(nullptr)}};
}

PlannedSweep sweep_from_json(const json& j, std::size_t index) {
  std::string where = "sweeps[" + std::to_string(index) + "]";
  check_keys(j, {"name", "base", "axis1", "axis2", "trials", "estimator", "diagnostics", "design"}, where);
  PlannedSweep p;
  SweepSpec& s = p.spec;
  read(j, "name", s.name);
  where += " '" + s.name + "'";
  if (j.contains("base")) {
    const json& b = j.at("base");
    check_keys(b, {"n_samples", "dx", "dy", "theta", "mask_x", "mask_y", "noise", "seed"}, where + ".base");
    read(b, "n_samples", s.base.n_samples);
    read(b, "dx", s.base.dx);
    read(b, "dy", s.base.dy);
    read(b, "theta", s.base.theta);
    read(b, "seed", s.base.seed);
    if (b.contains("mask_x")) s.base.mask_x = mask_from_json(b.at("mask_x"), where + ".base.mask_x");
    if (b.contains("mask_y")) s.base.mask_y = mask_from_json(b.at("mask_y"), where + ".base.mask_y");
    if (b.contains("noise")) s.base.noise = NoiseSpec::parse(b.at("noise").get<std::string>());
  }
  if (!j.contains("axis1")) throw ConfigError(where + ": missing axis1");
  s.axis1 = axis_from_json(j.at("axis1"), where + ".axis1");
  if (j.contains("axis2") && !j.at("axis2").is_null()) s.axis2 = axis_from_json(j.at("axis2"), where + ".axis2");
  read(j, "trials", s.trials);
  if (j.contains("estimator")) s.estimator = estimator_from_json(j.at("estimator"), where + ".estimator");
  if (j.contains("diagnostics")) {
    check_keys(j.at("diagnostics"), {"split_half"}, where + ".diagnostics");
    read(j.at("diagnostics"), "split_half", s.diagnostics.split_half);
  }
  if (j.contains("design") && !j.at("design").is_null()) p.design = design_from_json(j.at("design"), where + ".design");
  return p;
}

void validate_plan(const RunPlan& plan) {
  if (plan.sweeps.empty()) throw ConfigError("configuration defines no sweeps");
  std::set<std::string> names;
  for (const PlannedSweep& p : plan.sweeps) {
    if (!names.insert(p.spec.name).second) throw ConfigError("duplicate sweep name '" + p.spec.name + "'");
    // Design-backed sweeps take their dimensions from the design once loaded.
    if (!p.spec.base.design && !p.design) p.spec.validate();
  }
}

Matrix gaussian(int rows, int cols, Stream rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

void apply_overrides(RunPlan& plan, const Overrides& overrides) {
  for (const auto& [key, value] : overrides) {
    bool touched_design = false;
    for (PlannedSweep& p : plan.sweeps) {
      SweepSpec& s = p.spec;
      if (key == "trials") {
        s.trials = parse_number<int>(key, value);
      } else if (key == "seed") {
        s.base.seed = parse_number<std::uint64_t>(key, value);
      } else if (key == "points") {
        respace(s.axis1, parse_number<int>(key, value), key);
      } else if (key == "grid") {
        if (!s.axis2) continue;
        const auto [n1, n2] = parse_grid(value);
        respace(s.axis1, n1, key);
        respace(*s.axis2, n2, key);
      } else if (key == "n_samples") {
        s.base.n_samples = parse_number<int>(key, value);
      } else if (key == "dx") {
        s.base.dx = parse_number<int>(key, value);
      } else if (key == "dy") {
        s.base.dy = parse_number<int>(key, value);
      } else if (key == "m_x") {
        s.base.mask_x.rate = parse_number<double>(key, value);
      } else if (key == "m_y") {
        s.base.mask_y.rate = parse_number<double>(key, value);
      } else if (key == "noise") {
        s.base.noise = NoiseSpec::parse(value);
      } else if (key == "estimator") {
        s.estimator = estimator_from_json(json{{"kind", value}}, "override estimator");
      } else if (key == "split_half") {
        s.diagnostics.split_half = parse_bool(key, value);
      } else if (key == "x_path" || key == "y_path" || key == "target_dims" || key == "surrogate_rows") {
        if (!p.design) continue;
        touched_design = true;
        if (key == "x_path") p.design->x_path = value;
        if (key == "y_path") p.design->y_path = value;
        if (key == "target_dims") p.design->target_dims = parse_number<int>(key, value);
        if (key == "surrogate_rows") p.design->surrogate_rows = parse_number<int>(key, value);
      } else {
        throw ConfigError("unknown override key '" + key + "'");
      }
    }
    const bool design_key = key == "x_path" || key == "y_path" || key == "target_dims" || key == "surrogate_rows";
    if (design_key && !touched_design) throw ConfigError("override " + key + ": no sweep in this plan uses a design");
  }
  validate_plan(plan);
}

RunPlan parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    if (!doc.contains("sweeps")) {
      check_keys(doc, {"preset", "scale", "overrides"}, "config");
      ExperimentPreset preset;
      preset.name = doc.at("preset").get<std::string>();
      if (doc.contains("scale")) preset.scale = parse_scale(doc.at("scale").get<std::string>());
      if (doc.contains("overrides")) {
        const json& o = doc.at("overrides");
        if (!o.is_object()) throw ConfigError("config: overrides must be an object");
        for (const auto& [k, v] : o.items()) {
          preset.overrides.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
        }
      }
      return resolve_preset(preset);
    }
    check_keys(doc, {"name", "preset", "scale", "sweeps"}, "config");
    RunPlan plan;
    read(doc, "name", plan.name);
    read(doc, "preset", plan.preset);
    if (doc.contains("scale")) plan.scale = parse_scale(doc.at("scale").get<std::string>());
    const json& sweeps = doc.at("sweeps");
    if (!sweeps.is_array()) throw ConfigError("config: sweeps must be an array");
    for (std::size_t i = 0; i < sweeps.size(); ++i) plan.sweeps.push_back(sweep_from_json(sweeps[i], i));
    validate_plan(plan);
    return plan;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::string echo_config(const RunPlan& plan) {
  json sweeps = json::array();
  for (const PlannedSweep& p : plan.sweeps) sweeps.push_back(sweep_to_json(p));
  json doc = {{"name", plan.name}, {"preset", plan.preset}, {"scale", to_string(plan.scale)}, {"sweeps", sweeps}};
  return doc.dump(2) + "\n";
}

std::shared_ptr<const FixedDesign> load_design(const DesignSource& source) {
  Matrix x_real;
  Matrix y_real;
  std::string origin;
  if (source.uses_files()) {
    x_real = ingest_matrix(source.x_path);
    y_real = ingest_matrix(source.y_path);
    origin = source.x_path + " + " + source.y_path;
  } else {
    // Two views sharing a few latent factors, so the top cross-covariance
    // direction carries real structure the way measured views would.
    constexpr int kFactors = 8;
    Stream rng(source.surrogate_seed, "surrogate");
    const Matrix factors = gaussian(source.surrogate_rows, kFactors, rng.split("factors"));
    x_real = factors * gaussian(kFactors, source.surrogate_cols_x, rng.split("loadings-x")) +
             gaussian(source.surrogate_rows, source.surrogate_cols_x, rng.split("noise-x"));
    y_real = factors * gaussian(kFactors, source.surrogate_cols_y, rng.split("loadings-y")) +
             gaussian(source.surrogate_rows, source.surrogate_cols_y, rng.split("noise-y"));
    origin = "surrogate(seed=" + std::to_string(source.surrogate_seed) + ")";
  }
  auto design = std::make_shared<FixedDesign>(semi_synthetic_basis(x_real, y_real, source.target_dims));
  design->random_directions = source.random_directions;
  design->source = origin;
  return design;
}

void attach_designs(RunPlan& plan) {
  std::vector<std::pair<DesignSource, std::shared_ptr<const FixedDesign>>> cache;
  for (PlannedSweep& p : plan.sweeps) {
    if (!p.design) continue;
    std::shared_ptr<const FixedDesign> design;
    for (const auto& [source, loaded] : cache) {
      if (source == *p.design) design = loaded;
    }
    if (!design) {
      design = load_design(*p.design);
      cache.emplace_back(*p.design, design);
    }
    ModelConfig& base = p.spec.base;
    base.design = design;
    base.n_samples = static_cast<int>(design->x_white.rows());
    base.dx = static_cast<int>(design->x_white.cols());
    base.dy = design->dy;
    p.spec.validate();
  }
}

}  // namespace mpls::io
