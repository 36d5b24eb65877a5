#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "nleig/analysis.hpp"
#include "nleig/serialize.hpp"

namespace nleig::cli {

const char* kVersion = "1.0.0";

namespace fs = std::filesystem;

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["problem"] = cfg.problem;
  j["scf"] = cfg.scf;
  j["disc"] = cfg.disc;
  j["N"] = cfg.N;
  j["Ng"] = cfg.Ng;
  j["degree"] = cfg.degree;
  j["n"] = cfg.n;
  j["N_list"] = cfg.N_list;
  j["ref_N"] = cfg.ref_N;
  j["n_list"] = cfg.n_list;
  j["ref_factor"] = cfg.ref_factor;
  j["Ng_list"] = cfg.Ng_list;
  j["out_dir"] = cfg.out_dir;
  j["jobs"] = cfg.jobs;
  j["seed"] = cfg.seed;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.command = j.at("command").get<std::string>();
  j.at("problem").get_to(cfg.problem);
  if (j.contains("scf")) j.at("scf").get_to(cfg.scf);
  cfg.disc = j.value("disc", cfg.disc);
  cfg.N = j.value("N", cfg.N);
  cfg.Ng = j.value("Ng", cfg.Ng);
  cfg.degree = j.value("degree", cfg.degree);
  cfg.n = j.value("n", cfg.n);
  cfg.N_list = j.value("N_list", cfg.N_list);
  cfg.ref_N = j.value("ref_N", cfg.ref_N);
  cfg.n_list = j.value("n_list", cfg.n_list);
  cfg.ref_factor = j.value("ref_factor", cfg.ref_factor);
  cfg.Ng_list = j.value("Ng_list", cfg.Ng_list);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) throw std::invalid_argument("empty integer list");

  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos && text.find(',') == std::string::npos) {
    const int lo = std::stoi(text.substr(0, range_pos));
    std::string rest = text.substr(range_pos + 2);
    int step = 1;
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      step = std::stoi(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const int hi = std::stoi(rest);
    if (step < 1 || hi < lo) throw std::invalid_argument("bad range: " + text);
    for (int v = lo; v <= hi; v += step) out.push_back(v);
    return out;
  }

  // Comma list with optional geometric continuation "a,b,...,z".
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      tokens.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  tokens.push_back(cur);

  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "...") {
      if (out.size() < 2 || i + 1 != tokens.size() - 1)
        throw std::invalid_argument("'...' needs two leading values and one closing value");
      const long long a = out[out.size() - 2];
      const long long b = out.back();
      if (a <= 0 || b % a != 0)
        throw std::invalid_argument("'...' continuation requires an integer ratio");
      const long long ratio = b / a;
      if (ratio < 2) throw std::invalid_argument("'...' continuation requires growth");
      const long long target = std::stoll(tokens[i + 1]);
      long long v = b * ratio;
      while (v < target) {
        out.push_back(static_cast<int>(v));
        v *= ratio;
      }
      if (v != target) throw std::invalid_argument("'...' does not land on the last value");
      out.push_back(static_cast<int>(target));
      return out;
    }
    out.push_back(std::stoi(tokens[i]));
  }
  return out;
}

Nonlinearity parse_nonlinearity(const std::string& text) {
  double c = 0.5, m = 2.0;
  std::string cur;
  auto apply = [&](const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value: " + kv);
    const std::string key = kv.substr(0, eq);
    const double val = std::stod(kv.substr(eq + 1));
    if (key == "c")
      c = val;
    else if (key == "m")
      m = val;
    else
      throw std::invalid_argument("unknown nonlinearity field: " + key);
  };
  for (char ch : text) {
    if (ch == ',') {
      apply(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) apply(cur);
  return Nonlinearity(c, m);
}

namespace {

void validate_config(const RunConfig& cfg) {
  validate(cfg.problem);
  cfg.scf.validate();
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  auto check_sorted = [](const std::vector<int>& v, const char* what) {
    if (v.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
    for (size_t i = 1; i < v.size(); ++i)
      if (v[i] <= v[i - 1])
        throw std::invalid_argument(std::string(what) + " list must be strictly increasing");
  };
  if (cfg.command == "study-fourier") check_sorted(cfg.N_list, "N");
  if (cfg.command == "study-fem") check_sorted(cfg.n_list, "n");
  if (cfg.command == "study-quadrature") check_sorted(cfg.Ng_list, "Ng");
  fs::create_directories(cfg.out_dir);
  const fs::path probe = fs::path(cfg.out_dir) / ".write_probe";
  std::ofstream f(probe);
  if (!f) throw std::invalid_argument("output directory is not writable: " + cfg.out_dir);
  f.close();
  fs::remove(probe);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
}

void write_manifest(const RunConfig& cfg, double wall_seconds, bool partial) {
  nlohmann::json m;
  m["tool"] = "nleig";
  m["version"] = kVersion;
  m["config"] = config_to_json(cfg);
  m["wall_time_seconds"] = wall_seconds;
  m["partial"] = partial;
  write_text(fs::path(cfg.out_dir) / "manifest.json", m.dump(2) + "\n");
}

void write_study_artifacts(const RunConfig& cfg, const analysis::StudyTable& table,
                           const std::string& stem) {
  std::ostringstream csv, js, plot;
  analysis::write_csv(csv, table);
  analysis::write_json(js, table);
  analysis::write_plot_data(plot, table);
  const fs::path dir(cfg.out_dir);
  write_text(dir / (stem + ".csv"), csv.str());
  write_text(dir / (stem + ".json"), js.str());
  write_text(dir / (stem + ".dat"), plot.str());
}

int run_solve(const RunConfig& cfg) {
  Disc disc;
  if (cfg.disc == "fourier") {
    disc = FourierDisc{cfg.N, cfg.Ng};
  } else if (cfg.disc == "fem") {
    const auto& g = cfg.problem.geometry;
    disc = FemDisc{fem::make_space(fem::build_mesh(g.d, g.sides, cfg.n), cfg.degree)};
  } else {
    throw std::invalid_argument("unknown discretization family: " + cfg.disc);
  }
  const SolveResult res = solve_ground_state(cfg.problem, disc, cfg.scf);
  nlohmann::json j = solve_result_to_json(res, disc);
  j["problem"] = cfg.problem;
  write_text(fs::path(cfg.out_dir) / "solve_result.json", j.dump(2) + "\n");
  std::cout << "lambda = " << std::setprecision(16) << res.lambda
            << "  energy = " << res.energy << "  iterations = " << res.iterations << "\n";
  return 0;
}

int run_study_fourier(const RunConfig& cfg) {
  analysis::FourierStudySpec spec;
  spec.N_values = cfg.N_list;
  spec.ref_N = cfg.ref_N;
  spec.Ng = cfg.Ng;
  try {
    const auto table = analysis::convergence_study(cfg.problem, spec, cfg.scf, cfg.jobs);
    write_study_artifacts(cfg, table, "study_fourier");
    for (const auto& [key, fit] : table.slopes)
      std::cout << key << " slope = " << fit.slope << " (" << fit.rows_used << " rows)\n";
    return 0;
  } catch (const analysis::StudyError& e) {
    write_study_artifacts(cfg, e.partial, "study_fourier");
    std::cerr << "study aborted: " << e.what() << "\n";
    return 3;
  }
}

int run_study_fem(const RunConfig& cfg) {
  analysis::FemStudySpec spec;
  spec.degree = cfg.degree;
  spec.n_values = cfg.n_list;
  spec.ref_factor = cfg.ref_factor;
  try {
    const auto table = analysis::convergence_study(cfg.problem, spec, cfg.scf, cfg.jobs);
    write_study_artifacts(cfg, table, "study_fem");
    for (const auto& [key, fit] : table.slopes)
      std::cout << key << " slope = " << fit.slope << " (" << fit.rows_used << " rows)\n";
    return 0;
  } catch (const analysis::StudyError& e) {
    write_study_artifacts(cfg, e.partial, "study_fem");
    std::cerr << "study aborted: " << e.what() << "\n";
    return 3;
  }
}

int run_study_quadrature(const RunConfig& cfg) {
  analysis::QuadratureStudySpec spec;
  spec.N = cfg.N;
  spec.Ng_values = cfg.Ng_list;
  spec.ref_N = cfg.ref_N;
  try {
    const auto table = analysis::quadrature_study(cfg.problem, spec, cfg.scf, cfg.jobs);
    write_study_artifacts(cfg, table, "study_quadrature");
    for (const auto& [key, fit] : table.slopes)
      std::cout << key << " slope = " << fit.slope << " (" << fit.rows_used << " rows)\n";
    return 0;
  } catch (const analysis::StudyError& e) {
    write_study_artifacts(cfg, e.partial, "study_quadrature");
    std::cerr << "study aborted: " << e.what() << "\n";
    return 3;
  }
}

int run_selftest(const RunConfig& cfg) {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    ProblemSpec free_prob{Geometry::periodic(), Potential::zero(), Nonlinearity(0.5, 2.0)};
    const auto res = solve_ground_state(free_prob, FourierDisc{8, 0});
    report("analytic fixed point lambda = 1/(2 pi)",
           std::abs(res.lambda - 1.0 / (2.0 * M_PI)) < 1e-12);
    report("analytic fixed point energy = 1/(8 pi)",
           std::abs(res.energy - 1.0 / (8.0 * M_PI)) < 1e-12);
  }
  {
    const auto s = fourier::SampledGrid::from_function(
        24, [](double x) { return std::exp(std::cos(x)); });
    const auto back = fourier::sample(fourier::interpolate(s), 24);
    report("transform/interpolation roundtrip",
           (back.values - s.values).norm() < 1e-12 * s.values.norm());
  }
  {
    fourier::FourierCoeffs u(3);
    u.at(0) = 0.9;
    u.at(1) = {0.2, 0.1};
    u.at(-1) = {0.2, -0.1};
    u.data /= u.data.norm();
    const auto rho = fourier::nonlinear_density_coeffs(u);
    const double quart = fourier::grid_quartic_integral(u, 13);
    report("quartic quadrature identity", std::abs(quart - rho.data.squaredNorm()) < 1e-12);
  }
  {
    ProblemSpec kink{Geometry::periodic(), Potential::sin_kink(), Nonlinearity(0.5, 2.0)};
    const auto res = solve_ground_state(kink, FourierDisc{8, 0});
    report("kink ground state converges", res.residual < 1e-8 && res.min_value > -1e-8);
  }
  {
    ProblemSpec lin{Geometry::interval(M_PI), Potential::zero(), Nonlinearity(0.0, 2.0)};
    auto space = fem::make_space(fem::build_mesh(1, {M_PI, 0.0}, 32), 1);
    const auto res = solve_ground_state(lin, FemDisc{space});
    report("fem linear eigenvalue near 1", res.lambda > 1.0 && res.lambda < 1.001);
  }
  (void)cfg;
  return failures == 0 ? 0 : 1;
}

int dispatch(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  bool partial = false;
  try {
    if (cfg.command == "solve")
      status = run_solve(cfg);
    else if (cfg.command == "study-fourier")
      status = run_study_fourier(cfg);
    else if (cfg.command == "study-fem")
      status = run_study_fem(cfg);
    else if (cfg.command == "study-quadrature")
      status = run_study_quadrature(cfg);
    else if (cfg.command == "selftest")
      status = run_selftest(cfg);
    else
      throw std::invalid_argument("unknown command: " + cfg.command);
  } catch (const ScfError& e) {
    std::cerr << "solver did not converge: " << e.what() << "\n";
    status = 3;
    partial = true;
  }
  if (status == 3) partial = true;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg, wall, partial);
  return status;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    validate_config(cfg);
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  }
  return dispatch(cfg);
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Ground states of periodic and Dirichlet nonlinear eigenvalue problems"};
  app.set_version_flag("--version", kVersion);

  RunConfig cfg;
  if (const char* env = std::getenv("NLEIG_OUT_DIR")) cfg.out_dir = env;

  std::string config_path;
  std::string geometry = "periodic";
  std::string potential = "sin-kink";
  std::string nl_text = "c=0.5,m=2";
  std::string sides_text;
  std::string potential_file;
  double sigma = -1.0;
  std::string N_text, n_text, Ng_text;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-o,--out-dir", cfg.out_dir, "output directory");
    cmd->add_option("--jobs", cfg.jobs, "worker threads for study rows");
    cmd->add_option("--seed", cfg.seed, "reserved, all algorithms deterministic");
    cmd->add_option("--geometry", geometry, "periodic | interval | rectangle");
    cmd->add_option("--sides", sides_text, "side lengths, e.g. 3.14159,3.14159");
    cmd->add_option("--potential", potential, "zero | sin-kink | harmonic | custom");
    cmd->add_option("--potential-file", potential_file,
                    "JSON file with custom potential samples");
    cmd->add_option("--sigma", sigma, "declared potential regularity index");
    cmd->add_option("--nl", nl_text, "nonlinearity, e.g. c=0.5,m=2");
    cmd->add_option("--tol-density", cfg.scf.tol_density, "SCF density tolerance");
    cmd->add_option("--tol-lambda", cfg.scf.tol_lambda, "SCF eigenvalue tolerance");
    cmd->add_option("--max-iter", cfg.scf.max_iter, "SCF iteration cap");
    cmd->add_option("--damping", cfg.scf.damping, "density mixing weight in (0,1]");
    cmd->add_flag("--adaptive,!--no-adaptive", cfg.scf.adaptive,
                  "energy-decrease damping safeguard");
  };

  auto* solve = app.add_subcommand("solve", "single ground-state solve");
  add_common(solve);
  solve->add_option("--disc", cfg.disc, "fourier | fem");
  solve->add_option("--N", cfg.N, "spectral cutoff");
  solve->add_option("--Ng", cfg.Ng, "integration grid (0 = exact coefficients)");
  solve->add_option("--degree", cfg.degree, "fem degree 1 or 2");
  solve->add_option("--n", cfg.n, "fem subdivisions per side");

  auto* sf = app.add_subcommand("study-fourier", "spectral convergence study");
  add_common(sf);
  sf->add_option("--N", N_text, "cutoff list, e.g. 4..30")->required();
  sf->add_option("--ref-N", cfg.ref_N, "reference cutoff");
  sf->add_option("--Ng", cfg.Ng, "integration grid for rows (0 = exact)");

  auto* sm = app.add_subcommand("study-fem", "finite element convergence study");
  add_common(sm);
  sm->add_option("--degree", cfg.degree, "element degree 1 or 2")->required();
  sm->add_option("--n", n_text, "mesh list, e.g. 8,16,32,64")->required();
  sm->add_option("--ref-factor", cfg.ref_factor, "reference refinement factor");

  auto* sq = app.add_subcommand("study-quadrature", "integration grid study");
  add_common(sq);
  sq->add_option("--N", cfg.N, "fixed spectral cutoff")->required();
  sq->add_option("--Ng", Ng_text, "grid list, e.g. 128,256,...,32768")->required();
  sq->add_option("--ref-N", cfg.ref_N, "reference cutoff");

  auto* st = app.add_subcommand("selftest", "fast built-in checks");
  add_common(st);

  app.add_option("--config", config_path, "run configuration JSON (overrides flags)");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!config_path.empty()) {
    try {
      std::ifstream f(config_path);
      if (!f) throw std::invalid_argument("cannot read config file: " + config_path);
      nlohmann::json j;
      f >> j;
      return run(config_from_json(j));
    } catch (const std::exception& e) {
      std::cerr << "invalid configuration: " << e.what() << "\n";
      return 2;
    }
  }

  if (app.get_subcommands().empty()) {
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();

    if (geometry == "periodic") {
      cfg.problem.geometry = Geometry::periodic();
    } else if (geometry == "interval") {
      double len = M_PI;
      if (!sides_text.empty()) len = std::stod(sides_text);
      cfg.problem.geometry = Geometry::interval(len);
    } else if (geometry == "rectangle") {
      double sx = M_PI, sy = M_PI;
      if (!sides_text.empty()) {
        const auto comma = sides_text.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("rectangle needs sx,sy");
        sx = std::stod(sides_text.substr(0, comma));
        sy = std::stod(sides_text.substr(comma + 1));
      }
      cfg.problem.geometry = Geometry::rectangle(sx, sy);
    } else {
      throw std::invalid_argument("unknown geometry: " + geometry);
    }

    if (potential == "zero")
      cfg.problem.potential = Potential::zero();
    else if (potential == "sin-kink" || potential == "sin_kink")
      cfg.problem.potential = Potential::sin_kink();
    else if (potential == "harmonic" || potential == "harmonic_2d")
      cfg.problem.potential = Potential::harmonic_2d();
    else if (potential == "custom") {
      if (potential_file.empty())
        throw std::invalid_argument("custom potential requires --potential-file");
      std::ifstream f(potential_file);
      if (!f) throw std::invalid_argument("cannot read potential file: " + potential_file);
      nlohmann::json j;
      f >> j;
      std::vector<double> samples = j.is_array()
                                        ? j.get<std::vector<double>>()
                                        : j.at("values").get<std::vector<double>>();
      cfg.problem.potential =
          Potential::custom_samples(std::move(samples), sigma > 0 ? sigma : 1.0);
    } else {
      throw std::invalid_argument("unknown potential: " + potential);
    }
    if (sigma > 0) cfg.problem.potential.sigma = sigma;

    cfg.problem.nonlinearity = parse_nonlinearity(nl_text);
    if (cfg.command == "study-fourier") cfg.N_list = parse_int_list(N_text);
    if (cfg.command == "study-fem") cfg.n_list = parse_int_list(n_text);
    if (cfg.command == "study-quadrature") cfg.Ng_list = parse_int_list(Ng_text);
    if (cfg.command == "solve" && cfg.disc == "fem" &&
        cfg.problem.geometry.kind == GeometryKind::periodic_interval)
      throw std::invalid_argument("fem solves need interval or rectangle geometry");
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  }

  return run(cfg);
}

}  // namespace nleig::cli
