#include <cmath>

#include "mpls/error.hpp"
#include "mpls/io.hpp"

namespace mpls::io {
namespace {

// Desk scale keeps model dimensions and shrinks only grids and trial counts.
struct Budget {
  bool paper;
  int trials(int paper_trials, int desk_trials = 20) const { return paper ? paper_trials : desk_trials; }
  int points(int paper_points, int desk_points = 15) const { return paper ? paper_points : desk_points; }
};

ModelConfig base_config(int n, int dx, int dy, double m_x, double m_y) {
  ModelConfig c;
  c.n_samples = n;
  c.dx = dx;
  c.dy = dy;
  c.mask_x = MaskSpec::mcar(m_x);
  c.mask_y = MaskSpec::mcar(m_y);
  return c;
}

SweepSpec ratio_sweep(std::string name, const ModelConfig& base, double lo, double hi, int points, int trials) {
  SweepSpec s;
  s.name = std::move(name);
  s.base = base;
  s.axis1 = {AxisParam::theta_over_crit, linspace(lo, hi, points)};
  s.trials = trials;
  return s;
}

const std::vector<double> kMissingLevels{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

// Recovery at a fixed supercritical ratio across missingness levels.
SweepSpec missingness_sweep(std::string name, const ModelConfig& base, int trials) {
  SweepSpec s;
  s.name = std::move(name);
  s.base = base;
  s.axis1 = {AxisParam::m_joint, kMissingLevels};
  s.axis2 = Axis{AxisParam::theta_over_crit, {1.5}};
  s.trials = trials;
  return s;
}

void exp1(RunPlan& plan, Budget b) {
  plan.sweeps.push_back(
      {ratio_sweep("transition", base_config(1000, 200, 50, 0.3, 0.4), 0.5, 2.5, b.points(25), b.trials(100)), {}});
}

void exp2(RunPlan& plan, Budget b) {
  SweepSpec s;
  s.name = "phase_diagram";
  s.base = base_config(1000, 150, 120, 0.0, 0.0);
  const int n = b.points(30);
  s.axis1 = {AxisParam::theta, linspace(0.5, 2.0, n)};
  s.axis2 = Axis{AxisParam::rho, linspace(0.1, 0.95, n)};
  s.trials = b.trials(30, 10);
  plan.sweeps.push_back({std::move(s), {}});
}

void exp3(RunPlan& plan, Budget b) {
  FiniteSizeOptions o;
  o.n_list = b.paper ? std::vector<int>{100, 250, 500, 1000, 2000, 5000} : std::vector<int>{100, 500, 2000};
  o.points = b.points(21);
  o.trials = b.trials(30);
  for (SweepSpec& s : finite_size_specs(o)) plan.sweeps.push_back({std::move(s), {}});
}

void exp4(RunPlan& plan, Budget b) {
  const int n = b.points(50);
  for (auto [name, param] : {std::pair{"single_view", AxisParam::m_x}, std::pair{"joint", AxisParam::m_joint}}) {
    SweepSpec s;
    s.name = name;
    s.base = base_config(800, 200, 200, 0.0, 0.0);
    s.axis1 = {AxisParam::theta, linspace(0.3, 2.0, n)};
    s.axis2 = Axis{param, linspace(0.0, 0.9, n)};
    s.trials = b.trials(30, 10);
    plan.sweeps.push_back({std::move(s), {}});
  }
}

void exp5(RunPlan& plan, Budget b) {
  DesignSource source;
  source.surrogate_rows = b.paper ? 5000 : 1000;
  DesignSource random_source = source;
  random_source.random_directions = true;

  const ModelConfig base = base_config(source.surrogate_rows, source.target_dims, source.target_dims, 0.3, 0.3);
  const int trials = b.trials(500);
  plan.sweeps.push_back({ratio_sweep("transition", base, 0.5, 2.5, b.points(20), trials), source});
  plan.sweeps.push_back({missingness_sweep("missingness", base, trials), source});
  plan.sweeps.push_back({ratio_sweep("random_directions", base, 0.5, 2.5, b.points(20), trials), random_source});
}

void exp6(RunPlan& plan, Budget b) {
  // alpha = 7.5 at N = 2000 gives D = 266.67; D is rounded down to 266.
  SweepSpec s = ratio_sweep("split_half", base_config(2000, 266, 266, 0.1, 0.1), 0.5, 2.5, b.points(60), b.trials(25));
  s.diagnostics.split_half = true;
  plan.sweeps.push_back({std::move(s), {}});
}

void b1(RunPlan& plan, Budget b) {
  const NoiseSpec kinds[] = {NoiseSpec::gaussian(),    NoiseSpec::student_t(5.0), NoiseSpec::student_t(4.5),
                             NoiseSpec::student_t(3.0), NoiseSpec::laplace(),      NoiseSpec::heteroskedastic(0.5, 1.5)};
  for (const NoiseSpec& noise : kinds) {
    ModelConfig base = base_config(1000, 200, 150, 0.3, 0.3);
    base.noise = noise;
    plan.sweeps.push_back({ratio_sweep(noise.label(), base, 0.5, 2.5, b.points(25), b.trials(100)), {}});
  }
}

void b2(RunPlan& plan, Budget b) {
  const MaskMechanism mechanisms[] = {MaskMechanism::signal_dependent, MaskMechanism::magnitude_dependent,
                                      MaskMechanism::thresholded, MaskMechanism::correlated};
  for (MaskMechanism m : mechanisms) {
    ModelConfig base = base_config(1000, 200, 150, 0.3, 0.3);
    // Signal-dependent and correlated masks act on Y through X; X stays MCAR.
    const bool y_only = m == MaskMechanism::signal_dependent || m == MaskMechanism::correlated;
    base.mask_y.mechanism = m;
    if (!y_only) base.mask_x.mechanism = m;
    SweepSpec s = ratio_sweep(to_string(m), base, 0.5, 2.5, b.points(25), b.trials(100));
    s.axis2 = Axis{AxisParam::gamma, {0.0, 0.25, 0.5, 0.75, 1.0}};
    plan.sweeps.push_back({std::move(s), {}});
  }
}

void b3(RunPlan& plan, Budget b) {
  const EstimatorKind kinds[] = {EstimatorKind::pls_svd_zero(), EstimatorKind::mean_impute(), EstimatorKind::em_pls(),
                                 EstimatorKind::iterative_svd(), EstimatorKind::oracle()};
  const ModelConfig base = base_config(1000, 200, 150, 0.3, 0.3);
  for (const EstimatorKind& kind : kinds) {
    const std::string tag = to_string(kind.tag);
    SweepSpec t = ratio_sweep("transition_" + tag, base, 0.5, 2.0, b.points(16, 10), b.trials(50));
    t.estimator = kind;
    plan.sweeps.push_back({std::move(t), {}});
  }
  for (const EstimatorKind& kind : kinds) {
    SweepSpec m = missingness_sweep("missingness_" + to_string(kind.tag), base, b.trials(50));
    m.estimator = kind;
    plan.sweeps.push_back({std::move(m), {}});
  }
}

using Builder = void (*)(RunPlan&, Budget);

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> r{
      {"exp1_transition", exp1},        {"exp2_phase_diagram", exp2}, {"exp3_finite_size", exp3},
      {"exp4_missingness_modes", exp4}, {"exp5_semi_synthetic", exp5}, {"exp6_split_half", exp6},
      {"b1_noise", b1},                 {"b2_mar", b2},               {"b3_baselines", b3}};
  return r;
}

}  // namespace

std::string to_string(Scale s) { return s == Scale::paper ? "paper" : "desk"; }

Scale parse_scale(const std::string& s) {
  if (s == "paper") return Scale::paper;
  if (s == "desk") return Scale::desk;
  throw ConfigError("unknown scale '" + s + "' (expected paper or desk)");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

RunPlan resolve_preset(const ExperimentPreset& preset) {
  for (const auto& [name, build] : registry()) {
    if (name != preset.name) continue;
    RunPlan plan;
    plan.name = name;
    plan.preset = name;
    plan.scale = preset.scale;
    build(plan, Budget{preset.scale == Scale::paper});
    apply_overrides(plan, preset.overrides);
    return plan;
  }
  std::string known;
  for (const std::string& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + preset.name + "' (known: " + known + ")");
}

}  // namespace mpls::io
