#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nleig/scf.hpp"

namespace nleig::cli {

/// One fully resolved run: a command plus every knob it reads. The manifest
/// echoes this structure; feeding the echo back through --config reproduces
/// the run byte for byte.
struct RunConfig {
  std::string command;  // solve | study-fourier | study-fem | study-quadrature | selftest
  ProblemSpec problem{Geometry::periodic(), Potential::sin_kink(), Nonlinearity(0.5, 2.0)};
  SCFConfig scf;

  std::string disc = "fourier";  // solve-time family: fourier | fem
  int N = 8;
  int Ng = 0;
  int degree = 1;
  int n = 16;

  std::vector<int> N_list;   // study-fourier
  int ref_N = 65;            // study-fourier / study-quadrature
  std::vector<int> n_list;   // study-fem
  int ref_factor = 8;        // study-fem
  std::vector<int> Ng_list;  // study-quadrature

  std::string out_dir = ".";
  int jobs = 1;
  long seed = 0;  // reserved; every algorithm is deterministic
};

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Integer list syntax: "a..b" (inclusive, step 1), "a..b:s" (step s), comma
/// lists, and geometric continuation "128,256,...,32768".
std::vector<int> parse_int_list(const std::string& text);

/// "c=0.5,m=2".
Nonlinearity parse_nonlinearity(const std::string& text);

/// Executes a validated run and writes its artifacts (result/study files and
/// manifest.json) under cfg.out_dir. Returns the process exit status:
/// 0 success, 2 validation error, 3 solver non-convergence.
int run(const RunConfig& cfg);

/// Full argv entry point (parsing + run).
int main_entry(int argc, char** argv);

extern const char* kVersion;

}  // namespace nleig::cli
