#pragma once

#include <json.hpp>

#include "nleig/analysis.hpp"
#include "nleig/scf.hpp"

namespace nleig {

// JSON bindings for the on-disk interchange formats:
//   problem   {geometry:{kind,d,sides}, potential:{kind,params,sigma},
//              nonlinearity:{c,m}}
//   coeffs    [[re,im], ...] ordered k = -N..N
//   grid      {Ng, values:[re,im,re,im,...]}
//   result    {lambda, energy, residual, iterations, disc:{...}, u:[...],
//              trace:[...], min_value}

void to_json(nlohmann::json& j, const Nonlinearity& nl);
void from_json(const nlohmann::json& j, Nonlinearity& nl);

void to_json(nlohmann::json& j, const Potential& p);
void from_json(const nlohmann::json& j, Potential& p);

void to_json(nlohmann::json& j, const Geometry& g);
void from_json(const nlohmann::json& j, Geometry& g);

void to_json(nlohmann::json& j, const ProblemSpec& p);
void from_json(const nlohmann::json& j, ProblemSpec& p);

void to_json(nlohmann::json& j, const SCFConfig& c);
void from_json(const nlohmann::json& j, SCFConfig& c);

nlohmann::json disc_to_json(const Disc& disc);
Disc disc_from_json(const nlohmann::json& j);

nlohmann::json solve_result_to_json(const SolveResult& result, const Disc& disc);
/// Reconstructs the result together with its discretization (FEM spaces are
/// rebuilt from the mesh descriptor).
std::pair<SolveResult, Disc> solve_result_from_json(const nlohmann::json& j);

namespace fourier_io {
nlohmann::json coeffs_to_json(const fourier::FourierCoeffs& c);
fourier::FourierCoeffs coeffs_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const fourier::SampledGrid& g);
fourier::SampledGrid grid_from_json(const nlohmann::json& j);
}  // namespace fourier_io

namespace fem_io {
nlohmann::json function_to_json(const fem::FEFunction& f);
fem::FEFunction function_from_json(const nlohmann::json& j);
}  // namespace fem_io

}  // namespace nleig
