#include "nleig/serialize.hpp"

#include <stdexcept>

namespace nleig {

namespace {

PotentialKind potential_kind_from_string(const std::string& s) {
  if (s == "zero") return PotentialKind::zero;
  if (s == "sin_kink") return PotentialKind::sin_kink;
  if (s == "harmonic_2d") return PotentialKind::harmonic_2d;
  if (s == "custom_samples") return PotentialKind::custom_samples;
  throw std::invalid_argument("unknown potential kind: " + s);
}

}  // namespace

void to_json(nlohmann::json& j, const Nonlinearity& nl) {
  j = nlohmann::json{{"c", nl.c}, {"m", nl.m}};
}

void from_json(const nlohmann::json& j, Nonlinearity& nl) {
  nl.c = j.at("c").get<double>();
  nl.m = j.at("m").get<double>();
  nl.validate();
}

void to_json(nlohmann::json& j, const Potential& p) {
  j = nlohmann::json{{"kind", to_string(p.kind)}, {"sigma", p.sigma}, {"params", p.params}};
}

void from_json(const nlohmann::json& j, Potential& p) {
  p.kind = potential_kind_from_string(j.at("kind").get<std::string>());
  p.sigma = j.value("sigma", 0.0);
  p.params = j.value("params", std::vector<double>{});
  if (p.kind == PotentialKind::custom_samples && p.params.empty())
    throw std::invalid_argument("custom_samples potential requires params");
}

void to_json(nlohmann::json& j, const Geometry& g) {
  j = nlohmann::json{
      {"kind",
       g.kind == GeometryKind::periodic_interval ? "periodic_interval" : "dirichlet_rectangle"},
      {"d", g.d},
      {"sides", {g.sides[0], g.sides[1]}}};
}

void from_json(const nlohmann::json& j, Geometry& g) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "periodic_interval") {
    g = Geometry::periodic();
    return;
  }
  if (kind != "dirichlet_rectangle")
    throw std::invalid_argument("unknown geometry kind: " + kind);
  const auto sides = j.at("sides");
  const int d = j.at("d").get<int>();
  if (d == 1)
    g = Geometry::interval(sides.at(0).get<double>());
  else
    g = Geometry::rectangle(sides.at(0).get<double>(), sides.at(1).get<double>());
}

void to_json(nlohmann::json& j, const ProblemSpec& p) {
  j = nlohmann::json{
      {"geometry", p.geometry}, {"potential", p.potential}, {"nonlinearity", p.nonlinearity}};
}

void from_json(const nlohmann::json& j, ProblemSpec& p) {
  j.at("geometry").get_to(p.geometry);
  j.at("potential").get_to(p.potential);
  j.at("nonlinearity").get_to(p.nonlinearity);
  validate(p);
}

void to_json(nlohmann::json& j, const SCFConfig& c) {
  j = nlohmann::json{{"tol_density", c.tol_density},
                     {"tol_lambda", c.tol_lambda},
                     {"max_iter", c.max_iter},
                     {"damping", c.damping},
                     {"adaptive", c.adaptive}};
}

void from_json(const nlohmann::json& j, SCFConfig& c) {
  c.tol_density = j.value("tol_density", c.tol_density);
  c.tol_lambda = j.value("tol_lambda", c.tol_lambda);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.damping = j.value("damping", c.damping);
  c.adaptive = j.value("adaptive", c.adaptive);
  c.validate();
}

nlohmann::json disc_to_json(const Disc& disc) {
  if (const auto* fd = std::get_if<FourierDisc>(&disc))
    return nlohmann::json{{"type", "fourier"}, {"N", fd->N}, {"Ng", fd->Ng}};
  const auto& fe = std::get<FemDisc>(disc);
  const auto& mesh = fe.space->mesh;
  return nlohmann::json{{"type", "fem"},
                        {"degree", fe.space->degree},
                        {"mesh",
                         {{"d", mesh.d},
                          {"sides", {mesh.sides[0], mesh.sides[1]}},
                          {"n", mesh.n}}}};
}

Disc disc_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "fourier") return FourierDisc{j.at("N").get<int>(), j.value("Ng", 0)};
  if (type != "fem") throw std::invalid_argument("unknown discretization type: " + type);
  const auto& mj = j.at("mesh");
  const fem::Mesh mesh = fem::build_mesh(
      mj.at("d").get<int>(),
      Eigen::Vector2d(mj.at("sides").at(0).get<double>(), mj.at("sides").at(1).get<double>()),
      mj.at("n").get<int>());
  return FemDisc{fem::make_space(mesh, j.at("degree").get<int>())};
}

namespace fourier_io {

nlohmann::json coeffs_to_json(const fourier::FourierCoeffs& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (int k = -c.N; k <= c.N; ++k)
    arr.push_back({c.at(k).real(), c.at(k).imag()});
  return arr;
}

fourier::FourierCoeffs coeffs_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() % 2 == 0)
    throw std::invalid_argument("coefficient array must have odd length 2N+1");
  const int N = (static_cast<int>(j.size()) - 1) / 2;
  fourier::FourierCoeffs c(N);
  for (int k = -N; k <= N; ++k) {
    const auto& pair = j.at(static_cast<size_t>(k + N));
    c.at(k) = {pair.at(0).get<double>(), pair.at(1).get<double>()};
  }
  return c;
}

nlohmann::json grid_to_json(const fourier::SampledGrid& g) {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(2 * g.Ng()));
  for (int i = 0; i < g.Ng(); ++i) {
    flat.push_back(g.values[i].real());
    flat.push_back(g.values[i].imag());
  }
  return nlohmann::json{{"Ng", g.Ng()}, {"values", flat}};
}

fourier::SampledGrid grid_from_json(const nlohmann::json& j) {
  const int Ng = j.at("Ng").get<int>();
  const auto flat = j.at("values").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != 2 * Ng)
    throw std::invalid_argument("grid values length must be 2*Ng");
  Eigen::VectorXcd v(Ng);
  for (int i = 0; i < Ng; ++i) v[i] = {flat[2 * i], flat[2 * i + 1]};
  return fourier::SampledGrid(std::move(v));
}

}  // namespace fourier_io

namespace fem_io {

nlohmann::json function_to_json(const fem::FEFunction& f) {
  const auto& mesh = f.space->mesh;
  std::vector<double> coeffs(f.coeffs.data(), f.coeffs.data() + f.coeffs.size());
  return nlohmann::json{{"mesh", {{"d", mesh.d}, {"sides", {mesh.sides[0], mesh.sides[1]}}, {"n", mesh.n}}},
                        {"degree", f.space->degree},
                        {"coeffs", coeffs}};
}

fem::FEFunction function_from_json(const nlohmann::json& j) {
  const auto& mj = j.at("mesh");
  const fem::Mesh mesh = fem::build_mesh(
      mj.at("d").get<int>(),
      Eigen::Vector2d(mj.at("sides").at(0).get<double>(), mj.at("sides").at(1).get<double>()),
      mj.at("n").get<int>());
  auto space = fem::make_space(mesh, j.at("degree").get<int>());
  const auto coeffs = j.at("coeffs").get<std::vector<double>>();
  if (static_cast<int>(coeffs.size()) != space->dof_count)
    throw std::invalid_argument("fem coefficients do not match the space");
  fem::FEFunction f;
  f.space = std::move(space);
  f.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(),
                                               static_cast<long>(coeffs.size()));
  return f;
}

}  // namespace fem_io

nlohmann::json solve_result_to_json(const SolveResult& result, const Disc& disc) {
  nlohmann::json j;
  j["lambda"] = result.lambda;
  j["energy"] = result.energy;
  j["residual"] = result.residual;
  j["iterations"] = result.iterations;
  j["min_value"] = result.min_value;
  j["inexact_nonlinearity"] = result.inexact_nonlinearity;
  j["disc"] = disc_to_json(disc);
  if (const auto* fc = std::get_if<fourier::FourierCoeffs>(&result.u))
    j["u"] = fourier_io::coeffs_to_json(*fc);
  else
    j["u"] = fem_io::function_to_json(std::get<fem::FEFunction>(result.u))["coeffs"];
  j["trace"] = nlohmann::json::array();
  for (const auto& t : result.trace)
    j["trace"].push_back({{"iter", t.iter},
                          {"lambda", t.lambda},
                          {"energy", t.energy},
                          {"density_change", t.density_change},
                          {"beta", t.beta}});
  return j;
}

std::pair<SolveResult, Disc> solve_result_from_json(const nlohmann::json& j) {
  SolveResult r;
  Disc disc = disc_from_json(j.at("disc"));
  r.lambda = j.at("lambda").get<double>();
  r.energy = j.at("energy").get<double>();
  r.residual = j.at("residual").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.min_value = j.value("min_value", 0.0);
  r.inexact_nonlinearity = j.value("inexact_nonlinearity", false);
  if (std::holds_alternative<FourierDisc>(disc)) {
    r.u = fourier_io::coeffs_from_json(j.at("u"));
  } else {
    auto space = std::get<FemDisc>(disc).space;
    const auto coeffs = j.at("u").get<std::vector<double>>();
    if (static_cast<int>(coeffs.size()) != space->dof_count)
      throw std::invalid_argument("fem coefficients do not match the space");
    fem::FEFunction f;
    f.space = space;
    f.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(),
                                                 static_cast<long>(coeffs.size()));
    r.u = std::move(f);
  }
  for (const auto& t : j.value("trace", nlohmann::json::array()))
    r.trace.push_back({t.at("iter").get<int>(), t.at("lambda").get<double>(),
                       t.at("energy").get<double>(), t.at("density_change").get<double>(),
                       t.at("beta").get<double>()});
  return {std::move(r), std::move(disc)};
}

}  // namespace nleig
