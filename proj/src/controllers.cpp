#include "dcc/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcc {
namespace {

void require_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg << what << " must lie in [0,1], got " << v;
    throw InputError(msg.str());
  }
}

// Step 1: mix the previous smoothed value with the mean of the last two windows.
double smooth(double cbr_vehicle_prev, const CbrSample& s) {
  return 0.5 * cbr_vehicle_prev + 0.5 * ((s.cbr_l + s.cbr_lprev) / 2.0);
}

// Steps 3-5 for a given alpha.
double etsi_step(double delta_prev, double alpha, double offset, const ControllerParams& p) {
  double delta = (1.0 - alpha) * delta_prev + offset;
  delta = std::min(delta, p.delta_max);
  delta = std::max(delta, p.delta_min);
  return delta;
}

}  // namespace

void ControllerParams::validate() const {
  auto fail = [](const char* field, const std::string& why) {
    throw ConfigError(std::string("controller.") + field, why);
  };
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha", "must be in (0,1)");
  if (!(beta > 0.0)) fail("beta", "must be positive");
  if (!(cbr_target > 0.0 && cbr_target < 1.0)) fail("cbr_target", "must be in (0,1)");
  if (!(delta_min > 0.0)) fail("delta_min", "must be positive");
  if (!(delta_min <= delta_max && delta_max <= 1.0))
    fail("delta_max", "must satisfy delta_min <= delta_max <= 1");
  if (!(g_minus_max < 0.0)) fail("g_minus_max", "must be negative");
  if (!(g_plus_max > 0.0)) fail("g_plus_max", "must be positive");
  if (x_bound && !(*x_bound > 0.0)) fail("x_bound", "must be positive");
  if (!(alpha_high >= alpha && alpha_high < 1.0)) fail("alpha_high", "must be in [alpha,1)");
  if (!(th >= 0.0)) fail("th", "must be non-negative");
  if (t_cbr <= Duration::zero()) fail("t_cbr", "must be positive");
  if (!(delta_initial >= 0.0 && delta_initial <= 1.0)) fail("delta_initial", "must be in [0,1]");
}

void ReactiveTable::validate() const {
  if (lower_bounds.size() < 3 || lower_bounds.size() != rates.size())
    throw ConfigError("controller.reactive", "needs >= 3 levels with one rate per level");
  if (lower_bounds.front() != 0.0)
    throw ConfigError("controller.reactive", "first level must start at CBR 0");
  for (std::size_t i = 1; i < lower_bounds.size(); ++i) {
    if (!(lower_bounds[i] > lower_bounds[i - 1]))
      throw ConfigError("controller.reactive", "thresholds must increase");
    if (!(rates[i] < rates[i - 1]))
      throw ConfigError("controller.reactive", "rates must decrease with level");
  }
  if (!(rates.back() > 0.0)) throw ConfigError("controller.reactive", "rates must be positive");
}

int ReactiveTable::level_for(double cbr) const {
  auto it = std::upper_bound(lower_bounds.begin(), lower_bounds.end(), cbr);
  return static_cast<int>(it - lower_bounds.begin()) - 1;
}

double limeric_update(ControllerState& state, const ControllerParams& p, double cbr) {
  require_fraction(cbr, "cbr");
  const double delta = (1.0 - p.alpha) * state.delta + p.beta * (p.cbr_target - cbr);
  state.delta = std::max(delta, 0.0);
  state.cbr_prev = cbr;
  return state.delta;
}

double limeric_bounded_update(ControllerState& state, const ControllerParams& p, double cbr) {
  if (!p.x_bound) throw ConfigError("controller.x_bound", "bounded LIMERIC needs x_bound");
  require_fraction(cbr, "cbr");
  const double err = p.cbr_target - cbr;
  const double magnitude = std::min(*p.x_bound, p.beta * std::abs(err));
  const double offset = err > 0 ? magnitude : (err < 0 ? -magnitude : 0.0);
  state.delta = std::max((1.0 - p.alpha) * state.delta + offset, 0.0);
  state.cbr_prev = cbr;
  return state.delta;
}

double etsi_offset(const ControllerParams& p, double cbr_vehicle) {
  const double raw = p.beta * (p.cbr_target - cbr_vehicle);
  if (raw > 0) return std::min(raw, p.g_plus_max);
  return std::max(raw, p.g_minus_max);
}

double etsi_adaptive_update(ControllerState& state, const ControllerParams& p,
                            const CbrSample& sample) {
  require_fraction(sample.cbr_l, "cbr_l");
  require_fraction(sample.cbr_lprev, "cbr_lprev");
  state.cbr_vehicle = smooth(state.cbr_vehicle, sample);
  state.delta = etsi_step(state.delta, p.alpha, etsi_offset(p, state.cbr_vehicle), p);
  return state.delta;
}

double dual_alpha_update(ControllerState& state, const ControllerParams& p,
                         const CbrSample& sample) {
  require_fraction(sample.cbr_l, "cbr_l");
  require_fraction(sample.cbr_lprev, "cbr_lprev");
  state.cbr_vehicle = smooth(state.cbr_vehicle, sample);
  const double offset = etsi_offset(p, state.cbr_vehicle);
  const double delta_low = etsi_step(state.delta, p.alpha, offset, p);
  // Strict inequality: a drop of exactly th keeps the low gain.
  if (state.delta - delta_low > p.th) {
    state.delta = etsi_step(state.delta, p.alpha_high, offset, p);
  } else {
    state.delta = delta_low;
  }
  return state.delta;
}

double reactive_update(ControllerState& state, const ReactiveTable& table, double cbr) {
  require_fraction(cbr, "cbr");
  const int target = table.level_for(cbr);
  // Only neighbouring states are reachable in one step.
  if (target > state.fsm_level) {
    ++state.fsm_level;
  } else if (target < state.fsm_level) {
    --state.fsm_level;
  }
  state.cbr_prev = cbr;
  return table.rates[static_cast<std::size_t>(state.fsm_level)];
}

double steady_state_cbr(double k, const ControllerParams& p) {
  if (k < 0) throw InputError("steady_state_cbr: k must be >= 0");
  return k * p.beta * p.cbr_target / (p.alpha + k * p.beta);
}

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::Limeric: return "limeric";
    case Algorithm::LimericBounded: return "limeric-bounded";
    case Algorithm::EtsiAdaptive: return "etsi-adaptive";
    case Algorithm::DualAlpha: return "dual-alpha";
    case Algorithm::Reactive: return "reactive";
    case Algorithm::EdcaOnly: return "edca-only";
  }
  return "unknown";
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "limeric-original", "limeric-079", "limeric-forwarding", "etsi-adaptive",
      "dual-alpha",       "reactive",    "edca-only"};
  return names;
}

ControllerConfig make_preset(std::string_view name) {
  ControllerConfig c;
  c.preset = std::string(name);
  ControllerParams& p = c.params;  // defaults are the ETSI adaptive table
  if (name == "limeric-original") {
    c.algorithm = Algorithm::Limeric;
    p.alpha = 0.1;
    p.beta = 0.0067;
    p.cbr_target = 0.60;
  } else if (name == "limeric-079") {
    c.algorithm = Algorithm::Limeric;
    p.alpha = 0.1;
    p.beta = 0.00167;
    p.cbr_target = 0.79;
  } else if (name == "limeric-forwarding") {
    c.algorithm = Algorithm::Limeric;
    p.alpha = 0.01;
    p.beta = 0.001;
    p.cbr_target = 0.65;
  } else if (name == "etsi-adaptive") {
    c.algorithm = Algorithm::EtsiAdaptive;
  } else if (name == "dual-alpha") {
    c.algorithm = Algorithm::DualAlpha;
  } else if (name == "reactive") {
    c.algorithm = Algorithm::Reactive;
  } else if (name == "edca-only") {
    c.algorithm = Algorithm::EdcaOnly;
  } else {
    std::ostringstream msg;
    msg << "unknown controller '" << name << "'; valid presets:";
    for (const auto& n : preset_names()) msg << ' ' << n;
    throw ConfigError("controller.preset", msg.str());
  }
  p.alpha_high = std::max(p.alpha_high, p.alpha);
  // Bounded LIMERIC offset defaults to the ETSI positive gain limit.
  p.x_bound = p.g_plus_max;
  return c;
}

RateController::RateController(const ControllerConfig& config) : config_(&config) {
  state_.delta = config.params.delta_initial;
  state_.fsm_level = 0;
}

void RateController::on_cbr_window(double cbr, SimTime window_end) {
  sample_.cbr_lprev = have_window_ ? sample_.cbr_l : cbr;
  sample_.cbr_l = cbr;
  sample_.window_end = window_end;
  have_window_ = true;
}

GateLimit RateController::update(SimTime now) {
  const ControllerParams& p = config_->params;
  state_.last_update = now;
  if (!have_window_) return limit();
  switch (config_->algorithm) {
    case Algorithm::Limeric: limeric_update(state_, p, sample_.cbr_l); break;
    case Algorithm::LimericBounded: limeric_bounded_update(state_, p, sample_.cbr_l); break;
    case Algorithm::EtsiAdaptive: etsi_adaptive_update(state_, p, sample_); break;
    case Algorithm::DualAlpha: dual_alpha_update(state_, p, sample_); break;
    case Algorithm::Reactive: reactive_update(state_, config_->reactive, sample_.cbr_l); break;
    case Algorithm::EdcaOnly: break;
  }
  return limit();
}

GateLimit RateController::limit() const {
  switch (config_->algorithm) {
    case Algorithm::EdcaOnly: return GateLimit::unlimited();
    case Algorithm::Reactive:
      return GateLimit::rate_cap(config_->reactive.rates[static_cast<std::size_t>(state_.fsm_level)]);
    default: return GateLimit::share(state_.delta);
  }
}

IdealLoopTrace ideal_loop(const ControllerConfig& config, int k, int steps) {
  if (k < 1) throw InputError("ideal_loop: k must be >= 1");
  if (steps < 0) throw InputError("ideal_loop: steps must be >= 0");
  IdealLoopTrace trace;
  trace.delta.reserve(static_cast<std::size_t>(steps));
  trace.cbr.reserve(static_cast<std::size_t>(steps));
  ControllerState state;
  state.delta = config.params.delta_initial;
  for (int n = 0; n < steps; ++n) {
    const double cbr = std::min(1.0, k * state.delta);
    const CbrSample sample{cbr, cbr, SimTime{0}};
    switch (config.algorithm) {
      case Algorithm::Limeric: limeric_update(state, config.params, cbr); break;
      case Algorithm::LimericBounded: limeric_bounded_update(state, config.params, cbr); break;
      case Algorithm::EtsiAdaptive: etsi_adaptive_update(state, config.params, sample); break;
      case Algorithm::DualAlpha: dual_alpha_update(state, config.params, sample); break;
      case Algorithm::Reactive:
      case Algorithm::EdcaOnly:
        throw InputError("ideal_loop: only the linear controllers have a closed-form loop");
    }
    trace.cbr.push_back(cbr);
    trace.delta.push_back(state.delta);
  }
  return trace;
}

}  // namespace dcc
