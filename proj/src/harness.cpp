#include "mpls/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "mpls/error.hpp"
#include "mpls/theory.hpp"

namespace mpls {
namespace {

constexpr std::size_t kKeptErrors = 3;

bool is_theta_axis(AxisParam p) { return p == AxisParam::theta || p == AxisParam::theta_over_crit; }

void apply_structural(ModelConfig& cfg, AxisParam p, double v) {
  switch (p) {
    case AxisParam::theta:
    case AxisParam::theta_over_crit:
      return;
    case AxisParam::m_x:
      cfg.mask_x.rate = v;
      return;
    case AxisParam::m_y:
      cfg.mask_y.rate = v;
      return;
    case AxisParam::m_joint:
      cfg.mask_x.rate = v;
      cfg.mask_y.rate = v;
      return;
    case AxisParam::rho: {
      if (!(v > 0.0 && v <= 1.0)) throw ConfigError("axis rho: values must lie in (0, 1]");
      const double m = 1.0 - std::sqrt(v);
      cfg.mask_x.rate = m;
      cfg.mask_y.rate = m;
      return;
    }
    case AxisParam::n_samples: {
      if (v != std::floor(v) || v < 1.0) throw ConfigError("axis n_samples: values must be positive integers");
      cfg.n_samples = static_cast<int>(v);
      return;
    }
    case AxisParam::gamma:
      cfg.mask_x.strength = v;
      cfg.mask_y.strength = v;
      return;
  }
}

void apply_theta(ModelConfig& cfg, AxisParam p, double v) {
  if (p == AxisParam::theta) {
    cfg.theta = v;
  } else if (p == AxisParam::theta_over_crit) {
    cfg.theta = v * theory::critical_threshold(cfg.alpha_x(), cfg.alpha_y(), cfg.rho());
  }
}

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int b = 0; b < 8; ++b) {
    h ^= (word >> (8 * b)) & 0xFFu;
    h *= 0x100000001B3ULL;
  }
}

void fnv_mix(std::uint64_t& h, double x) { fnv_mix(h, std::bit_cast<std::uint64_t>(x)); }

}  // namespace

std::string to_string(AxisParam p) {
  switch (p) {
    case AxisParam::theta:
      return "theta";
    case AxisParam::theta_over_crit:
      return "theta_over_crit";
    case AxisParam::m_x:
      return "m_x";
    case AxisParam::m_y:
      return "m_y";
    case AxisParam::m_joint:
      return "m_joint";
    case AxisParam::rho:
      return "rho";
    case AxisParam::n_samples:
      return "n_samples";
    case AxisParam::gamma:
      return "gamma";
  }
  return "theta";
}

AxisParam parse_axis_param(const std::string& name) {
  for (auto p : {AxisParam::theta, AxisParam::theta_over_crit, AxisParam::m_x, AxisParam::m_y, AxisParam::m_joint,
                 AxisParam::rho, AxisParam::n_samples, AxisParam::gamma}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown axis parameter '" + name + "'");
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("linspace: need at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

Summary summarize(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++count;
    }
  }
  if (count == 0) return {NAN, NAN};
  const double mean = sum / static_cast<double>(count);
  if (count == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(ss / static_cast<double>(count - 1))};
}

void SweepSpec::validate() const {
  if (trials < 1) throw ConfigError("sweep '" + name + "': trials must be >= 1");
  estimator.validate();
  auto check_axis = [&](const Axis& axis, const char* which) {
    if (axis.values.empty()) throw ConfigError("sweep '" + name + "': " + which + " has no values");
    for (double v : axis.values) {
      if (!std::isfinite(v)) throw ConfigError("sweep '" + name + "': " + which + " has a non-finite value");
    }
  };
  check_axis(axis1, "axis1");
  if (axis2) {
    check_axis(*axis2, "axis2");
    if (axis2->param == axis1.param) throw ConfigError("sweep '" + name + "': both axes drive the same parameter");
  }
  const std::vector<double> none{NAN};
  for (double a : axis1.values) {
    for (double b : axis2 ? axis2->values : none) {
      try {
        resolve_point(*this, a, axis2 ? std::optional<double>(b) : std::nullopt).validate();
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "sweep '" << name << "': point (" << a;
        if (axis2) msg << ", " << b;
        msg << ") is invalid: " << e.what();
        throw ConfigError(msg.str());
      }
    }
  }
}

ModelConfig resolve_point(const SweepSpec& spec, double axis1, std::optional<double> axis2) {
  ModelConfig cfg = spec.base;
  apply_structural(cfg, spec.axis1.param, axis1);
  if (spec.axis2 && axis2) apply_structural(cfg, spec.axis2->param, *axis2);
  cfg.mask_x.validate();
  cfg.mask_y.validate();
  apply_theta(cfg, spec.axis1.param, axis1);
  if (spec.axis2 && axis2) apply_theta(cfg, spec.axis2->param, *axis2);
  return cfg;
}

TrialResult run_trial(const ModelConfig& config, const EstimatorKind& estimator, const Diagnostics& diagnostics,
                      std::uint64_t trial_index) {
  TrialResult out;
  out.seed = derive_seed(config.seed, trial_index);
  out.stability = NAN;
  try {
    ModelConfig cfg = config;
    cfg.seed = out.seed;
    const MaskedPair pair = generate_pair(cfg);
    const EstimateResult est = estimate(pair, estimator);
    out.r2_x = est.r2_x;
    out.r2_y = est.r2_y;
    out.runtime = est.runtime;
    out.iterations = est.iterations;
    out.converged = est.converged;
    if (diagnostics.split_half) out.stability = split_half_stability(pair, out.seed);
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
    out.r2_x = NAN;
    out.r2_y = NAN;
    out.stability = NAN;
  }
  return out;
}

SweepResult run_sweep(const SweepSpec& spec, int threads) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();

  struct Point {
    double a1;
    double a2;
    ModelConfig cfg;
  };
  std::vector<Point> points;
  const std::vector<double> none{NAN};
  for (double a : spec.axis1.values) {
    for (double b : spec.axis2 ? spec.axis2->values : none) {
      points.push_back({a, b, resolve_point(spec, a, spec.axis2 ? std::optional<double>(b) : std::nullopt)});
    }
  }

  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t total = points.size() * trials;
  std::vector<TrialResult> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t item = next++; item < total; item = next++) {
      const std::size_t p = item / trials;
      const std::size_t t = item % trials;
      results[item] = run_trial(points[p].cfg, spec.estimator, spec.diagnostics, sweep_trial_index(p, t));
    }
  };
  const int workers = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(total, 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  SweepResult out;
  out.name = spec.name;
  out.axis1_param = spec.axis1.param;
  if (spec.axis2) out.axis2_param = spec.axis2->param;
  out.seed = spec.base.seed;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const ModelConfig& cfg = points[p].cfg;
    PointRecord rec;
    rec.axis1 = points[p].a1;
    rec.axis2 = points[p].a2;
    rec.theta = cfg.theta;
    rec.rho = cfg.rho();
    const theory::Prediction pred = theory::predict(cfg.alpha_x(), cfg.alpha_y(), cfg.rho(), cfg.theta);
    rec.theory_r2_x = pred.r2_x;
    rec.theory_r2_y = pred.r2_y;
    rec.theta_crit = pred.theta_crit;
    rec.trials = spec.trials;
    std::vector<double> rx, ry, st;
    double runtime = 0.0;
    rec.seeds_digest = 0xCBF29CE484222325ULL;
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialResult& r = results[p * trials + t];
      fnv_mix(rec.seeds_digest, r.seed);
      if (!r.ok) {
        if (rec.errors.size() < kKeptErrors) rec.errors.push_back(r.error);
        continue;
      }
      ++rec.trials_effective;
      rx.push_back(r.r2_x);
      ry.push_back(r.r2_y);
      st.push_back(r.stability);
      runtime += r.runtime;
    }
    rec.valid = 2 * rec.trials_effective >= rec.trials;
    rec.r2_x = summarize(rx);
    rec.r2_y = summarize(ry);
    rec.stability = summarize(st);
    rec.mean_runtime = rec.trials_effective > 0 ? runtime / rec.trials_effective : NAN;
    out.points.push_back(std::move(rec));
  }

  auto safe_corr = [&](bool super) -> double {
    try {
      return correlation_with_theory(out, super);
    } catch (const Error&) {
      return NAN;
    }
  };
  out.correlation = safe_corr(false);
  out.correlation_supercritical = safe_corr(true);
  out.total_runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double correlation_with_theory(const SweepResult& result) { return correlation_with_theory(result, false); }

double correlation_with_theory(const SweepResult& result, bool supercritical_only) {
  std::vector<double> emp, th;
  for (const PointRecord& p : result.points) {
    if (!p.valid || !std::isfinite(p.r2_x.mean) || !std::isfinite(p.theory_r2_x)) continue;
    if (supercritical_only && !(p.theory_r2_x > 0.0)) continue;
    emp.push_back(p.r2_x.mean);
    th.push_back(p.theory_r2_x);
  }
  if (emp.size() < 3) throw DomainError("correlation_with_theory: need at least 3 points with finite values");
  const double n = static_cast<double>(emp.size());
  double me = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < emp.size(); ++i) {
    me += emp[i];
    mt += th[i];
  }
  me /= n;
  mt /= n;
  double see = 0.0, stt = 0.0, set = 0.0;
  for (std::size_t i = 0; i < emp.size(); ++i) {
    see += (emp[i] - me) * (emp[i] - me);
    stt += (th[i] - mt) * (th[i] - mt);
    set += (emp[i] - me) * (th[i] - mt);
  }
  if (see == 0.0 || stt == 0.0) throw DomainError("correlation_with_theory: constant series, correlation undefined");
  return std::clamp(set / std::sqrt(see * stt), -1.0, 1.0);
}

std::uint64_t result_digest(const SweepResult& r) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : r.name) fnv_mix(h, static_cast<std::uint64_t>(c));
  fnv_mix(h, r.seed);
  for (const PointRecord& p : r.points) {
    for (double x : {p.axis1, p.axis2, p.theta, p.rho, p.r2_x.mean, p.r2_x.std, p.r2_y.mean, p.r2_y.std,
                     p.stability.mean, p.stability.std, p.theory_r2_x, p.theory_r2_y, p.theta_crit}) {
      fnv_mix(h, x);
    }
    fnv_mix(h, static_cast<std::uint64_t>(p.trials));
    fnv_mix(h, static_cast<std::uint64_t>(p.trials_effective));
    fnv_mix(h, p.seeds_digest);
  }
  fnv_mix(h, r.correlation);
  fnv_mix(h, r.correlation_supercritical);
  return h;
}

std::vector<SweepSpec> finite_size_specs(const FiniteSizeOptions& o) {
  if (!(o.window_low < 1.0 && o.window_high > 1.0)) {
    throw ConfigError("finite_size_study: theta window must contain theta_crit (low < 1 < high)");
  }
  if (o.n_list.empty()) throw ConfigError("finite_size_study: empty N list");
  std::vector<SweepSpec> specs;
  for (int n : o.n_list) {
    SweepSpec s;
    s.name = "n" + std::to_string(n);
    s.base.n_samples = n;
    s.base.dx = static_cast<int>(std::lround(n / o.alpha_x));
    s.base.dy = static_cast<int>(std::lround(n / o.alpha_y));
    s.base.mask_x = MaskSpec::mcar(o.m_x);
    s.base.mask_y = MaskSpec::mcar(o.m_y);
    s.base.seed = o.seed;
    s.axis1 = {AxisParam::theta_over_crit, linspace(o.window_low, o.window_high, o.points)};
    s.trials = o.trials;
    s.estimator = o.estimator;
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<FiniteSizeEntry> finite_size_study(const FiniteSizeOptions& options, int threads) {
  std::vector<FiniteSizeEntry> out;
  for (const SweepSpec& spec : finite_size_specs(options)) {
    FiniteSizeEntry e;
    e.n_samples = spec.base.n_samples;
    e.dx = spec.base.dx;
    e.dy = spec.base.dy;
    e.sweep = run_sweep(spec, threads);
    e.transition_width = transition_width(e.sweep);
    out.push_back(std::move(e));
  }
  return out;
}

double transition_width(const SweepResult& sweep) {
  if (sweep.axis2_param || !is_theta_axis(sweep.axis1_param)) {
    throw DomainError("transition_width: needs a 1-D sweep over theta or theta_over_crit");
  }
  std::vector<std::pair<double, double>> curve;
  for (const PointRecord& p : sweep.points) {
    if (p.valid && std::isfinite(p.r2_x.mean)) curve.emplace_back(p.theta, p.r2_x.mean);
  }
  std::sort(curve.begin(), curve.end());
  if (curve.size() < 2) throw DomainError("transition_width: need at least two valid points");
  double peak = 0.0;
  for (const auto& c : curve) peak = std::max(peak, c.second);
  if (!(peak > 0.0)) return NAN;

  auto crossing = [&](double level) {
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (curve[i].second >= level) {
        if (i == 0) return curve[0].first;
        const auto [t0, y0] = curve[i - 1];
        const auto [t1, y1] = curve[i];
        return t0 + (level - y0) / (y1 - y0) * (t1 - t0);
      }
    }
    return curve.back().first;
  };
  return crossing(0.75 * peak) - crossing(0.25 * peak);
}

std::vector<BoundaryPoint> empirical_boundary(const SweepResult& grid, int dx, double multiple) {
  if (!grid.axis2_param) throw DomainError("empirical_boundary: needs a 2-D grid");
  const bool theta_first = is_theta_axis(grid.axis1_param);
  if (theta_first == is_theta_axis(*grid.axis2_param)) {
    throw DomainError("empirical_boundary: exactly one axis must be a theta axis");
  }
  if (dx < 1) throw DomainError("empirical_boundary: dx must be positive");
  const double level = multiple / dx;

  std::vector<double> order;
  std::map<double, double> best;
  for (const PointRecord& p : grid.points) {
    const double m = theta_first ? p.axis2 : p.axis1;
    if (!best.contains(m)) {
      order.push_back(m);
      best[m] = NAN;
    }
    if (p.valid && p.r2_x.mean > level && (std::isnan(best[m]) || p.theta < best[m])) best[m] = p.theta;
  }
  std::vector<BoundaryPoint> out;
  for (double m : order) out.push_back({m, best[m]});
  return out;
}

}  // namespace mpls
