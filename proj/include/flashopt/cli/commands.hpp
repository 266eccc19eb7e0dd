#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flashopt/cli/report.hpp"

namespace flashopt::cli {

struct GlobalArgs {
  std::uint64_t seed = 1;
  std::string format = "text";
  bool strict = false;
  std::string echo;
};

struct VectorArgs {
  std::string scenario;  // file, or the name of a bundled scenario
  std::string vector;    // built-in name or vector file
  std::string debt_cap = "residual";
  std::vector<std::string> ignore;  // residual symbols, e.g. zY
  std::vector<std::string> upper;   // "p2=1344"
};

struct SolverArgs {
  int max_iter = 200;
  double tol = 1e-9;
  double fd_step = 1e-6;
  int starts = 16;
  int grid_res = 0;  // 0: picked from the parameter count
  double grid_tol = 0.02;
  bool no_grid = false;
  std::string method = "sqp";
  int threads = 1;
  bool trace_only = false;  // skip the closed form
};

struct AtomicityArgs {
  std::string market;
  std::string trace;  // replay file; synthetic stream when empty
  std::vector<int> i_values{0, 1, 10, 100, 1000};
  int trials = 100;
  double budget = 0.0;  // 0: optimal budget
  int bootstrap = 2000;
  double log_mean = -7.0;
  double log_sd = 1.0;
  bool neutral = false;
};

struct ClassifyArgs {
  std::string input;  // empty: the `in` stream
  std::string map;
  std::string prices;
  long min_count = 5;
};

RunReport cmd_optimize(const GlobalArgs& g, const VectorArgs& v, const SolverArgs& s);
RunReport cmd_evaluate(const GlobalArgs& g, const VectorArgs& v, const std::vector<double>& params);
RunReport cmd_atomicity(const GlobalArgs& g, const AtomicityArgs& a);
RunReport cmd_classify(const GlobalArgs& g, const ClassifyArgs& c, std::istream& in);
RunReport cmd_describe(const GlobalArgs& g, const VectorArgs& v);

// Full command line without the program name. The report goes to `out` in
// one piece; input errors go to `err` only. Exit codes: 0 ok, 1 infeasible or
// violated, 2 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::istream& in);

}  // namespace flashopt::cli
