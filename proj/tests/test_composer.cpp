#include <gtest/gtest.h>

#include <cmath>

#include "flashopt/composer/builtin_vectors.hpp"
#include "flashopt/composer/vector_io.hpp"

using namespace flashopt;
using namespace flashopt::composer;

namespace {

Vector draw(const AttackVector& v, Rng& rng) {
  Vector x(v.n_params());
  for (int k = 0; k < v.n_params(); ++k) x(k) = rng.uniform(v.params[k].lower, v.params[k].upper);
  return x;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST(Composer, ClosedFormMatchesTrace) {
  for (const char* name : {"paa", "oracle"}) {
    for (auto mode : {DebtCapMode::residual, DebtCapMode::ignored}) {
      const auto sc = models::bundled_scenario(name);
      BuiltinOptions o;
      o.debt_cap = mode;
      const auto v = build_builtin_vector(name, sc, o);
      const auto cf = v.closed_form(sc.state);
      ASSERT_TRUE(cf.has_value());
      Rng rng(42);
      for (int i = 0; i < 500; ++i) {
        const Vector x = draw(v, rng);
        const auto t = evaluate(v, sc.state, x);
        ClosedFormValue c;
        cf->evaluate(x, c);
        ASSERT_LT(rel(t.objective, c.objective), 1e-9) << name;
        const Vector tc = t.constraint_values();
        ASSERT_EQ(tc.size(), c.constraints.size());
        for (Eigen::Index k = 0; k < tc.size(); ++k) ASSERT_LT(rel(tc(k), c.constraints(k)), 1e-9);
      }
    }
  }
}

TEST(Composer, PaaOriginalParameters) {
  const auto sc = models::bundled_scenario("paa");
  const auto v = build_paa_vector(sc);
  Vector x(2);
  x << 5500.0, 1300.0;
  const auto t = evaluate(v, sc.state, x);
  EXPECT_NEAR(t.objective, 1171.70, 0.005 * 1171.70);
  EXPECT_EQ(t.states.size(), v.steps.size() + 1);
  EXPECT_EQ(t.states.back().step_index(), static_cast<int>(v.steps.size()));
}

TEST(Composer, ZeroParamsZeroObjective) {
  for (const char* name : {"paa", "oracle"}) {
    const auto sc = models::bundled_scenario(name);
    const auto v = build_builtin_vector(name, sc);
    EXPECT_DOUBLE_EQ(evaluate(v, sc.state, Vector::Zero(v.n_params())).objective, 0.0) << name;
  }
}

TEST(Composer, RejectsBadParams) {
  const auto sc = models::bundled_scenario("paa");
  const auto v = build_paa_vector(sc);
  EXPECT_ANY_THROW(evaluate(v, sc.state, Vector::Zero(3)));
  Vector x(2);
  x << std::nan(""), 1.0;
  EXPECT_ANY_THROW(evaluate(v, sc.state, x));
}

TEST(Composer, StrictModeStopsAtStep) {
  const auto sc = models::bundled_scenario("oracle");
  const auto v = build_oracle_vector(sc);
  Vector x(3);
  x << 898.58, 546.80, 3517.86;
  try {
    evaluate(v, sc.state, x, models::ExecutionMode::strict);
    FAIL() << "expected a violation";
  } catch (const ConstraintViolation& e) {
    EXPECT_NE(std::string(e.what()).find("step 5"), std::string::npos);
    EXPECT_LT(e.residual(), 0.0);
  }
}

TEST(Composer, ConstraintClassification) {
  const auto paa = models::bundled_scenario("paa");
  const auto pc = list_constraints(build_paa_vector(paa), paa.state);
  EXPECT_EQ(pc.size(), 6u);
  EXPECT_EQ(std::count_if(pc.begin(), pc.end(), [](auto& d) { return d.linear; }), 5);
  const auto ora = models::bundled_scenario("oracle");
  const auto oc = list_constraints(build_oracle_vector(ora), ora.state);
  EXPECT_EQ(oc.size(), 7u);
  for (const auto& d : oc) {
    if (d.key == "debt_cap" || d.key == "reserve_max_price") {
      EXPECT_FALSE(d.linear) << d.key;
    } else {
      EXPECT_TRUE(d.linear) << d.key;
    }
  }
}

TEST(Composer, IgnoredSymbolDropsConstraint) {
  const auto sc = models::bundled_scenario("oracle");
  BuiltinOptions o;
  o.debt_cap = DebtCapMode::ignored;
  const auto v = build_oracle_vector(sc, o);
  for (const auto& d : exported_constraints(v, sc.state)) EXPECT_NE(d.symbol, "zY");
}

TEST(Composer, UpperOverride) {
  const auto sc = models::bundled_scenario("paa");
  BuiltinOptions o;
  o.upper["p2"] = 1344.0;
  EXPECT_DOUBLE_EQ(build_paa_vector(sc, o).params[1].upper, 1344.0);
  o.upper["p9"] = 1.0;
  EXPECT_THROW(build_paa_vector(sc, o), ConfigError);
}

TEST(VectorIo, RoundTripEvaluatesIdentically) {
  for (const char* name : {"paa", "oracle"}) {
    const auto sc = models::bundled_scenario(name);
    const auto v = build_builtin_vector(name, sc);
    const auto w = vector_from_json(vector_to_json(v));
    EXPECT_FALSE(static_cast<bool>(w.closed_form));
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
      const Vector x = draw(v, rng);
      const auto a = evaluate(v, sc.state, x);
      const auto b = evaluate(w, sc.state, x);
      ASSERT_EQ(a.objective, b.objective);
      ASSERT_EQ(a.constraint_values(), b.constraint_values());
    }
  }
}

TEST(VectorIo, BadReferences) {
  auto doc = vector_to_json(build_paa_vector(models::bundled_scenario("paa")));
  doc["steps"][0]["calls"][0]["amount"] = {{"param", 7}};
  EXPECT_ANY_THROW(vector_from_json(doc));
  doc["steps"][0]["calls"][0]["endpoint"] = "teleport";
  EXPECT_ANY_THROW(vector_from_json(doc));
}
