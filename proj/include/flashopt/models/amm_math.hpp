#pragma once

// Closed-form pricing formulas shared by the state-transition operations and
// by the algebraic objective paths of the built-in attack vectors.

#include <cmath>

namespace flashopt::models {

// Output of a constant-product swap: input `amount_in` of the asset held in
// `reserve_in`, fee rate `fee` charged on the input.
template <typename T>
T constant_product_output(T reserve_in, T reserve_out, T amount_in, T fee = T(0)) {
  const T effective = amount_in * (T(1) - fee);
  return effective * reserve_out / (reserve_in + effective);
}

// Price of Y expressed in X.
template <typename T>
T spot_price(T reserve_x, T reserve_y) {
  return reserve_x / reserve_y;
}

// minP * e^(lr * inventory)
template <typename T>
T reserve_price(T min_price, T liquidity_rate, T inventory) {
  using std::exp;
  return min_price * exp(liquidity_rate * inventory);
}

// Y paid out by an exponential price reserve for `amount_in` of X, quoting
// from the pre-trade price. Positive for positive input.
template <typename T>
T reserve_output(T liquidity_rate, T pre_trade_price, T amount_in) {
  using std::expm1;
  return -expm1(-liquidity_rate * amount_in) / (liquidity_rate * pre_trade_price);
}

template <typename T>
T slippage(T expected_price, T executed_price) {
  return (executed_price - expected_price) / expected_price;
}

}  // namespace flashopt::models
