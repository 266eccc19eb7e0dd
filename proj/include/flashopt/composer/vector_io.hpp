#pragma once

#include <filesystem>

#include <json.hpp>

#include "flashopt/composer/attack_vector.hpp"

namespace flashopt::composer {

// Vector files. Parameter references are 1-based:
//
//   {"name": "...", "trader": "adversary",
//    "objective": {"entity": "adversary", "asset": "ETH"},
//    "params": [{"name": "p1", "lower": 0, "upper": 10000}],
//    "ignore": ["zY"],
//    "steps": [{"label": "flash loan",
//               "calls": [{"endpoint": "flash_loan", "pool": "dydx",
//                          "amount": {"sum": [1, 2]}, "export": ["loan_cap"]}]}]}
//
// Amount forms: {"param": i}, {"sum": [i, j]}, {"all_held": asset},
// {"debt_buyback": {"lending": id, "market": id}}, {"loan_outstanding": id},
// {"fixed": x}. A call may carry "cap": "clamp". Vectors read from file have
// no closed form.
AttackVector vector_from_json(const nlohmann::json& doc);
nlohmann::json vector_to_json(const AttackVector& vector);
AttackVector load_vector(const std::filesystem::path& path);

}  // namespace flashopt::composer
