#include "flashopt/composer/attack_vector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flashopt::composer {

using models::ExecutionMode;
using models::Transition;

namespace {

struct EndpointInfo {
  Endpoint endpoint;
  const char* name;
};

constexpr EndpointInfo kEndpoints[] = {
    {Endpoint::flash_loan, "flash_loan"},
    {Endpoint::flash_repay, "flash_repay"},
    {Endpoint::sell_x_for_y_fixed, "sell_x_for_y_fixed"},
    {Endpoint::amm_swap_x_for_y, "amm_swap_x_for_y"},
    {Endpoint::amm_swap_y_for_x, "amm_swap_y_for_x"},
    {Endpoint::reserve_convert_x_to_y, "reserve_convert_x_to_y"},
    {Endpoint::collateralized_borrow, "collateralized_borrow"},
    {Endpoint::collateralized_repay, "collateralized_repay"},
    {Endpoint::margin_short, "margin_short"},
};

std::string param_name(int index) { return "p" + std::to_string(index + 1); }

Transition dispatch(const EndpointCall& call, const WorldState& state, const EntityId& trader,
                    Scalar amount, ExecutionMode mode) {
  switch (call.endpoint) {
    case Endpoint::flash_loan:
      return models::flash_loan(state, call.pool, trader, amount, mode);
    case Endpoint::flash_repay:
      return models::flash_repay(state, call.pool, trader, amount, mode);
    case Endpoint::sell_x_for_y_fixed:
      return models::sell_x_for_y_fixed(state, call.pool, trader, amount, mode);
    case Endpoint::amm_swap_x_for_y:
      return models::amm_swap_x_for_y(state, call.pool, trader, amount, mode);
    case Endpoint::amm_swap_y_for_x:
      return models::amm_swap_y_for_x(state, call.pool, trader, amount, mode);
    case Endpoint::reserve_convert_x_to_y:
      return models::reserve_convert_x_to_y(state, call.pool, trader, amount, mode);
    case Endpoint::collateralized_borrow:
      return models::collateralized_borrow(state, call.pool, trader, amount, mode, call.cap);
    case Endpoint::collateralized_repay:
      return models::collateralized_repay(state, call.pool, trader, mode);
    case Endpoint::margin_short:
      return models::margin_short(state, call.pool, trader, amount, mode);
  }
  throw ConfigError("unknown endpoint");
}

}  // namespace

const char* endpoint_name(Endpoint e) {
  for (const auto& info : kEndpoints) {
    if (info.endpoint == e) return info.name;
  }
  return "?";
}

Endpoint endpoint_from_name(const std::string& name) {
  for (const auto& info : kEndpoints) {
    if (name == info.name) return info.endpoint;
  }
  throw ParseError("unknown endpoint '" + name + "'");
}

bool endpoint_takes_amount(Endpoint e) { return e != Endpoint::collateralized_repay; }

Scalar resolve_binding(const Binding& binding, const WorldState& state, const EntityId& trader,
                       const Vector& params) {
  struct Visitor {
    const WorldState& state;
    const EntityId& trader;
    const Vector& params;

    Scalar operator()(const ParamRef& b) const { return params[b.index]; }
    Scalar operator()(const ParamSum& b) const {
      Scalar sum = 0.0;
      for (int i : b.indices) sum += params[i];
      return sum;
    }
    Scalar operator()(const AllHeld& b) const { return state.balance(trader, b.asset); }
    Scalar operator()(const DebtBuyback& b) const {
      const auto& lending = state.pool_as<models::LendingPool>(b.lending_pool);
      const auto& market = state.pool_as<models::FixedPriceMarket>(b.market);
      const models::LendingPosition* position = lending.first_position(trader);
      if (position == nullptr) {
        throw UsageError("no open position in '" + b.lending_pool + "' to buy back");
      }
      return position->debt * market.price;
    }
    Scalar operator()(const LoanOutstanding& b) const {
      return state.pool_as<models::FlashLoanPool>(b.pool).outstanding_of(trader);
    }
    Scalar operator()(const FixedAmount& b) const { return b.value; }
  };
  return std::visit(Visitor{state, trader, params}, binding);
}

std::string describe_binding(const Binding& binding) {
  struct Visitor {
    std::string operator()(const ParamRef& b) const { return param_name(b.index); }
    std::string operator()(const ParamSum& b) const {
      std::string out;
      for (std::size_t i = 0; i < b.indices.size(); ++i) {
        if (i) out += " + ";
        out += param_name(b.indices[i]);
      }
      return out;
    }
    std::string operator()(const AllHeld& b) const { return "all held " + b.asset; }
    std::string operator()(const DebtBuyback& b) const {
      return "debt of " + b.lending_pool + " x price of " + b.market;
    }
    std::string operator()(const LoanOutstanding& b) const {
      return "outstanding loan of " + b.pool;
    }
    std::string operator()(const FixedAmount& b) const {
      std::ostringstream s;
      s << b.value;
      return s.str();
    }
  };
  return std::visit(Visitor{}, binding);
}

int max_param_index(const Binding& binding) {
  if (const auto* p = std::get_if<ParamRef>(&binding)) return p->index;
  if (const auto* s = std::get_if<ParamSum>(&binding)) {
    int m = -1;
    for (int i : s->indices) m = std::max(m, i);
    return m;
  }
  return -1;
}

bool binding_uses_param(const Binding& binding, int index) {
  if (const auto* p = std::get_if<ParamRef>(&binding)) return p->index == index;
  if (const auto* s = std::get_if<ParamSum>(&binding)) {
    return std::find(s->indices.begin(), s->indices.end(), index) != s->indices.end();
  }
  return false;
}

Vector AttackVector::lower_bounds() const {
  Vector v(n_params());
  for (int i = 0; i < n_params(); ++i) v[i] = params[i].lower;
  return v;
}

Vector AttackVector::upper_bounds() const {
  Vector v(n_params());
  for (int i = 0; i < n_params(); ++i) v[i] = params[i].upper;
  return v;
}

void AttackVector::validate() const {
  for (std::size_t s = 0; s < steps.size(); ++s) {
    for (const auto& call : steps[s].calls) {
      if (endpoint_takes_amount(call.endpoint) && !call.amount) {
        throw ConfigError("step " + std::to_string(s + 1) + ": " +
                          endpoint_name(call.endpoint) + " needs an amount binding");
      }
      if (call.amount) {
        if (max_param_index(*call.amount) >= n_params()) {
          throw ConfigError("step " + std::to_string(s + 1) + ": parameter index out of range");
        }
        if (const auto* sum = std::get_if<ParamSum>(&*call.amount)) {
          for (int i : sum->indices) {
            if (i < 0) throw ConfigError("negative parameter index");
          }
        } else if (const auto* ref = std::get_if<ParamRef>(&*call.amount)) {
          if (ref->index < 0) throw ConfigError("negative parameter index");
        }
      }
    }
  }
  for (const auto& p : params) {
    if (!(p.lower <= p.upper)) throw ConfigError("parameter " + p.name + ": lower > upper");
  }
}

Vector EvaluationTrace::constraint_values() const {
  std::vector<Scalar> values;
  for (const auto& r : residuals) {
    if (r.exported) values.push_back(r.residual.value);
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Scalar objective_value(const AttackVector& vector, const WorldState& s0, const WorldState& sn) {
  return sn.balance(vector.objective.entity, vector.objective.asset) -
         s0.balance(vector.objective.entity, vector.objective.asset);
}

EvaluationTrace evaluate(const AttackVector& vector, const WorldState& scenario,
                         const Vector& params, ExecutionMode mode) {
  if (params.size() != vector.n_params()) {
    throw ConfigError("expected " + std::to_string(vector.n_params()) + " parameters, got " +
                      std::to_string(params.size()));
  }
  if (!params.allFinite()) throw ConfigError("parameters must be finite");

  EvaluationTrace trace;
  trace.states.reserve(vector.steps.size() + 1);
  trace.states.push_back(scenario);
  WorldState current = scenario;
  for (std::size_t s = 0; s < vector.steps.size(); ++s) {
    const int step = static_cast<int>(s) + 1;
    const ActionStep& action = vector.steps[s];
    for (const auto& call : action.calls) {
      Scalar amount = 0.0;
      Transition t;
      try {
        if (call.amount) amount = resolve_binding(*call.amount, current, vector.trader, params);
        if (!std::isfinite(amount)) {
          throw EvaluationError(step, std::string("non-finite amount for ") +
                                          endpoint_name(call.endpoint));
        }
        t = dispatch(call, current, vector.trader, amount, mode);
      } catch (const ConfigError& e) {
        throw ConfigError("step " + std::to_string(step) + " (" + action.label + "): " + e.what());
      } catch (const UsageError& e) {
        throw UsageError("step " + std::to_string(step) + " (" + action.label + "): " + e.what());
      } catch (const ConstraintViolation& e) {
        throw ConstraintViolation(
            "step " + std::to_string(step) + " (" + action.label + "): " + e.what(),
            e.residual());
      }
      for (auto& r : t.residuals) {
        if (!std::isfinite(r.value)) {
          throw EvaluationError(step, "non-finite residual '" + r.key + "'");
        }
        const bool exported =
            std::find(call.exported.begin(), call.exported.end(), r.key) != call.exported.end() &&
            vector.ignored.count(r.symbol) == 0;
        trace.residuals.push_back({step, std::move(r), exported});
      }
      current = std::move(t.state);
    }
    current = current.at_step(scenario.step_index() + step);
    if (!current.all_finite()) {
      throw EvaluationError(step, "state contains a non-finite value");
    }
    trace.states.push_back(current);
  }
  trace.objective = objective_value(vector, scenario, current);
  if (!std::isfinite(trace.objective)) {
    throw EvaluationError(static_cast<int>(vector.steps.size()), "non-finite objective");
  }
  return trace;
}

namespace {

// Box used for probing: infinite upper bounds are replaced by a finite span.
std::pair<Vector, Vector> probe_box(const AttackVector& vector) {
  Vector lo = vector.lower_bounds();
  Vector hi = vector.upper_bounds();
  for (int i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i])) lo[i] = 0.0;
    if (!std::isfinite(hi[i])) hi[i] = lo[i] + 1000.0 * std::max(1.0, std::abs(lo[i]));
  }
  return {lo, hi};
}

// A residual is affine in the parameters iff it commutes with midpoints.
std::vector<bool> classify_linear(const AttackVector& vector, const WorldState& scenario,
                                  Eigen::Index m) {
  std::vector<bool> linear(static_cast<std::size_t>(m), true);
  if (m == 0 || vector.n_params() == 0) return linear;
  const auto [lo, hi] = probe_box(vector);
  std::optional<ClosedForm> closed;
  if (vector.closed_form) closed = vector.closed_form(scenario);
  auto values = [&](const Vector& p) -> Vector {
    if (closed) {
      ClosedFormValue v;
      closed->evaluate(p, v);
      return v.constraints;
    }
    return evaluate(vector, scenario, p).constraint_values();
  };
  Rng rng(0x5eed);
  const int n = vector.n_params();
  for (int trial = 0; trial < 8; ++trial) {
    Vector a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.uniform(lo[i], hi[i]);
      b[i] = rng.uniform(lo[i], hi[i]);
    }
    const Vector mid = 0.5 * (a + b);
    try {
      const Vector ra = values(a), rb = values(b), rm = values(mid);
      for (Eigen::Index k = 0; k < m; ++k) {
        const Scalar mag = std::max({1.0, std::abs(ra[k]), std::abs(rb[k]), std::abs(rm[k])});
        if (std::abs(rm[k] - 0.5 * (ra[k] + rb[k])) > 1e-9 * mag) linear[k] = false;
      }
    } catch (const std::exception&) {
      std::fill(linear.begin(), linear.end(), false);
    }
  }
  return linear;
}

}  // namespace

std::vector<ConstraintDescriptor> exported_constraints(const AttackVector& vector,
                                                       const WorldState& scenario) {
  vector.validate();
  const auto [lo, hi] = probe_box(vector);
  const EvaluationTrace trace = evaluate(vector, scenario, lo);
  std::vector<ConstraintDescriptor> out;
  for (const auto& r : trace.residuals) {
    if (!r.exported) continue;
    out.push_back({r.step, r.residual.key, r.residual.symbol, r.residual.description, true,
                   r.residual.scale});
  }
  // Balance-type scales depend on the point; also look at the box centre.
  try {
    const EvaluationTrace centre = evaluate(vector, scenario, 0.5 * (lo + hi));
    std::size_t k = 0;
    for (const auto& r : centre.residuals) {
      if (!r.exported || k >= out.size()) continue;
      out[k].scale = std::max(out[k].scale, r.residual.scale);
      ++k;
    }
  } catch (const std::exception&) {
  }
  if (vector.closed_form) {
    if (auto closed = vector.closed_form(scenario)) {
      if (closed->scales.size() == static_cast<Eigen::Index>(out.size())) {
        for (std::size_t k = 0; k < out.size(); ++k) out[k].scale = closed->scales[k];
      }
    }
  }
  const auto linear = classify_linear(vector, scenario, static_cast<Eigen::Index>(out.size()));
  for (std::size_t k = 0; k < out.size(); ++k) out[k].linear = linear[k];
  return out;
}

std::vector<ConstraintDescriptor> list_constraints(const AttackVector& vector,
                                                   const WorldState& scenario) {
  std::vector<ConstraintDescriptor> out;
  if (vector.steps.empty()) return out;
  for (int i = 0; i < vector.n_params(); ++i) {
    const auto& p = vector.params[i];
    if (!std::isfinite(p.lower)) continue;
    std::ostringstream desc;
    desc << p.name << " >= " << p.lower;
    out.push_back({0, "param_lower", p.name, desc.str(), true, 1.0});
  }
  const auto exported = exported_constraints(vector, scenario);
  out.insert(out.end(), exported.begin(), exported.end());
  return out;
}

}  // namespace flashopt::composer
