#include "flashopt/composer/vector_io.hpp"

#include <cmath>

#include "flashopt/models/scenario_io.hpp"

namespace flashopt::composer {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(path + "." + key + ": missing field");
  }
  return obj.at(key);
}

std::string text(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

int param_index(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long>() < 1) {
    throw ParseError(path + ": parameter references are integers >= 1");
  }
  return static_cast<int>(v.get<long>()) - 1;
}

Binding parse_binding(const json& v, const std::string& path) {
  if (!v.is_object() || v.size() != 1) {
    throw ParseError(path + ": expected an object with exactly one key");
  }
  const auto& [kind, arg] = *v.items().begin();
  if (kind == "param") return ParamRef{param_index(arg, path + ".param")};
  if (kind == "sum") {
    if (!arg.is_array() || arg.empty()) throw ParseError(path + ".sum: expected a non-empty array");
    ParamSum s;
    for (const auto& i : arg) s.indices.push_back(param_index(i, path + ".sum"));
    return s;
  }
  if (kind == "all_held") {
    if (!arg.is_string()) throw ParseError(path + ".all_held: expected an asset id");
    return AllHeld{arg.get<std::string>()};
  }
  if (kind == "debt_buyback") {
    return DebtBuyback{text(arg, "lending", path + ".debt_buyback"),
                       text(arg, "market", path + ".debt_buyback")};
  }
  if (kind == "loan_outstanding") {
    if (!arg.is_string()) throw ParseError(path + ".loan_outstanding: expected a pool id");
    return LoanOutstanding{arg.get<std::string>()};
  }
  if (kind == "fixed") {
    if (!arg.is_number()) throw ParseError(path + ".fixed: expected a number");
    return FixedAmount{arg.get<Scalar>()};
  }
  throw ParseError(path + ": unknown amount kind '" + kind + "'");
}

json binding_to_json(const Binding& b) {
  struct Visitor {
    json operator()(const ParamRef& r) const { return {{"param", r.index + 1}}; }
    json operator()(const ParamSum& s) const {
      json idx = json::array();
      for (int i : s.indices) idx.push_back(i + 1);
      return {{"sum", idx}};
    }
    json operator()(const AllHeld& a) const { return {{"all_held", a.asset}}; }
    json operator()(const DebtBuyback& d) const {
      return {{"debt_buyback", {{"lending", d.lending_pool}, {"market", d.market}}}};
    }
    json operator()(const LoanOutstanding& l) const { return {{"loan_outstanding", l.pool}}; }
    json operator()(const FixedAmount& f) const { return {{"fixed", f.value}}; }
  };
  return std::visit(Visitor{}, b);
}

Scalar bound(const json& obj, const char* key, Scalar fallback, const std::string& path) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  if (!obj.at(key).is_number()) throw ParseError(path + "." + key + ": expected a number");
  return obj.at(key).get<Scalar>();
}

}  // namespace

AttackVector vector_from_json(const json& doc) {
  const std::string root = "vector";
  if (!doc.is_object()) throw ParseError(root + ": expected an object");
  AttackVector v;
  v.name = doc.value("name", std::string("custom"));
  v.trader = text(doc, "trader", root);
  const json& obj = field(doc, "objective", root);
  v.objective = {obj.value("entity", v.trader), text(obj, "asset", root + ".objective")};

  const json& params = field(doc, "params", root);
  if (!params.is_array()) throw ParseError(root + ".params: expected an array");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string path = root + ".params[" + std::to_string(i) + "]";
    ParamSpec p;
    p.name = params[i].value("name", "p" + std::to_string(i + 1));
    p.lower = bound(params[i], "lower", 0.0, path);
    p.upper = bound(params[i], "upper", kInfinity, path);
    v.params.push_back(p);
  }
  if (doc.contains("ignore")) {
    for (const auto& s : doc["ignore"]) {
      if (!s.is_string()) throw ParseError(root + ".ignore: expected strings");
      v.ignored.insert(s.get<std::string>());
    }
  }

  const json& steps = field(doc, "steps", root);
  if (!steps.is_array()) throw ParseError(root + ".steps: expected an array");
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const std::string spath = root + ".steps[" + std::to_string(s) + "]";
    ActionStep step;
    step.label = steps[s].value("label", "step " + std::to_string(s + 1));
    const json& calls = field(steps[s], "calls", spath);
    if (!calls.is_array() || calls.empty()) {
      throw ParseError(spath + ".calls: expected a non-empty array");
    }
    for (std::size_t c = 0; c < calls.size(); ++c) {
      const std::string cpath = spath + ".calls[" + std::to_string(c) + "]";
      EndpointCall call;
      call.endpoint = endpoint_from_name(text(calls[c], "endpoint", cpath));
      call.pool = text(calls[c], "pool", cpath);
      if (calls[c].contains("amount")) {
        call.amount = parse_binding(calls[c]["amount"], cpath + ".amount");
      }
      if (calls[c].contains("export")) {
        for (const auto& k : calls[c]["export"]) {
          if (!k.is_string()) throw ParseError(cpath + ".export: expected strings");
          call.exported.push_back(k.get<std::string>());
        }
      }
      const std::string cap = calls[c].value("cap", std::string("residual"));
      if (cap == "clamp") {
        call.cap = models::BorrowCap::clamp;
      } else if (cap != "residual") {
        throw ParseError(cpath + ".cap: expected 'residual' or 'clamp'");
      }
      step.calls.push_back(std::move(call));
    }
    v.steps.push_back(std::move(step));
  }
  try {
    v.validate();
  } catch (const ConfigError& e) {
    throw ParseError(root + ": " + e.what());
  }
  return v;
}

json vector_to_json(const AttackVector& v) {
  json out;
  out["name"] = v.name;
  out["trader"] = v.trader;
  out["objective"] = {{"entity", v.objective.entity}, {"asset", v.objective.asset}};
  json params = json::array();
  for (const auto& p : v.params) {
    json j = {{"name", p.name}, {"lower", p.lower}};
    if (std::isfinite(p.upper)) j["upper"] = p.upper;
    params.push_back(j);
  }
  out["params"] = params;
  if (!v.ignored.empty()) out["ignore"] = v.ignored;
  json steps = json::array();
  for (const auto& step : v.steps) {
    json calls = json::array();
    for (const auto& c : step.calls) {
      json j = {{"endpoint", endpoint_name(c.endpoint)}, {"pool", c.pool}};
      if (c.amount) j["amount"] = binding_to_json(*c.amount);
      if (!c.exported.empty()) j["export"] = c.exported;
      if (c.cap == models::BorrowCap::clamp) j["cap"] = "clamp";
      calls.push_back(j);
    }
    steps.push_back({{"label", step.label}, {"calls", calls}});
  }
  out["steps"] = steps;
  return out;
}

AttackVector load_vector(const std::filesystem::path& path) {
  const std::string body = models::read_text_file(path);
  try {
    return vector_from_json(models::parse_json_text(body, path.string()));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace flashopt::composer
