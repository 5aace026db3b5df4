#include "cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "cli/corpus_config.hpp"
#include "cli/output.hpp"
#include "json.hpp"
#include "onsager/core.hpp"
#include "onsager/corpus_solver.hpp"
#include "onsager/errors.hpp"
#include "onsager/kinetics.hpp"
#include "onsager/maier_saupe.hpp"
#include "onsager/two_rod.hpp"

namespace onsager::cli {

namespace {

struct Globals {
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 1;
  std::size_t grid_n = 0;
  std::size_t modes = 0;
  double tol = 0.0;
  bool validate = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* grid_opt = nullptr;
  CLI::Option* modes_opt = nullptr;
  CLI::Option* tol_opt = nullptr;

  std::size_t grid_or(std::size_t fallback) const { return grid_opt->count() ? grid_n : fallback; }
  std::size_t modes_or(std::size_t fallback) const { return modes_opt->count() ? modes : fallback; }
  double tol_or(double fallback) const { return tol_opt->count() ? tol : fallback; }
};

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void emit(const Globals& g, std::ostream& out, const std::string& command, const Params& params, const Table& table) {
  Sink sink(g.out, out);
  if (g.format == "json") {
    sink.stream() << table_json(command, g.seed, params, table);
  } else {
    write_csv_header(sink.stream(), command, g.seed, params);
    write_csv(sink.stream(), table);
  }
}

void check_globals(const Globals& g) {
  if (g.grid_opt->count() && g.grid_n < 4) throw InputError("--grid-n must be at least 4");
  if (g.modes_opt->count() && g.modes < 2) throw InputError("--modes-J must be at least 2");
  if (g.tol_opt->count() && !(g.tol > 0.0)) throw InputError("--tol must be positive");
}

std::string join_values(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

// ---------------------------------------------------------------- ms-branch

int cmd_ms_branch(const Globals& g, const std::string& b_text, std::ostream& out) {
  const auto bs = parse_values(b_text);
  if (b_text.find(':') == std::string::npos || bs.size() < 2) {
    throw InputError("--b must be a range min:max:steps with steps >= 2");
  }
  if (!(bs.front() > ms::kCriticalIntensity)) throw InputError("--b: b_min must exceed 4 (no nematic branch below)");
  const std::size_t J = g.modes_or(8);
  const auto branch = ms::branch_continuation(bs.front(), bs.back(), bs.size(), J);

  Table t;
  t.columns = {"b", "r"};
  for (std::size_t j = 1; j <= J; ++j) t.columns.push_back("g" + std::to_string(j));
  t.columns.push_back("dbdr");
  for (const auto& p : branch) {
    std::vector<double> row = {p.b, p.r};
    row.insert(row.end(), p.g.begin(), p.g.end());
    row.push_back(p.dbdr);
    t.rows.push_back(std::move(row));
  }
  if (g.validate) {
    for (std::size_t k = 0; k < branch.size(); ++k) {
      const auto& p = branch[k];
      if (std::abs(p.g[1] - (1.0 - 4.0 / p.b)) > 1e-8) throw NumericalError("validate: g2 != 1 - 4/b at b=" + format_number(p.b));
      if (k > 0 && !(p.r > branch[k - 1].r)) throw NumericalError("validate: r not increasing at b=" + format_number(p.b));
    }
  }
  emit(g, out, "ms-branch", {{"b", b_text}, {"modes_J", std::to_string(J)}}, t);
  return kExitOk;
}

// ---------------------------------------------------------------- kinetics

struct KineticsArgs {
  double b = 0.0;
  double y1 = 0.1;
  double t_end = 20.0;
  std::size_t samples = 100;
  std::string solver = "spectral";
  double dt = 1e-4;
  double perturb = 0.0;
};

int cmd_kinetics(const Globals& g, const KineticsArgs& a, std::ostream& out) {
  if (!(a.b >= 0.0)) throw InputError("--b must be nonnegative");
  if (!(a.t_end > 0.0)) throw InputError("--t-end must be positive");
  if (a.samples < 1) throw InputError("--samples must be positive");
  if (!(std::abs(a.y1) < 1.0)) throw InputError("--y1 must satisfy |y1| < 1");
  if (!(a.perturb >= 0.0)) throw InputError("--perturb must be nonnegative");
  const std::size_t J = g.modes_or(kinetics::kDefaultModes);
  const double tol = g.tol_or(1e-10);

  std::vector<double> y0(J, 0.0);
  y0[0] = a.y1;
  if (a.perturb > 0.0) {
    std::mt19937_64 rng(g.seed);
    std::uniform_real_distribution<double> xi(-1.0, 1.0);
    for (std::size_t j = 1; j < J; ++j) y0[j] += a.perturb * xi(rng) / static_cast<double>((j + 1) * (j + 1));
  }
  Params params = {{"b", format_number(a.b)},         {"y1_0", format_number(a.y1)},
                   {"t_end", format_number(a.t_end)}, {"samples", std::to_string(a.samples)},
                   {"modes_J", std::to_string(J)},    {"tol", format_number(tol)},
                   {"solver", a.solver},              {"perturb", format_number(a.perturb)}};

  Table t;
  if (a.solver == "spectral") {
    kinetics::SpectralOptions opts;
    opts.samples = a.samples;
    const auto traj = kinetics::integrate_spectral(y0, a.b, a.t_end, tol, opts);
    t.columns = {"t", "E", "dissipation"};
    for (std::size_t j = 1; j <= J; ++j) t.columns.push_back("y" + std::to_string(j));
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples) {
      const double E = kinetics::free_energy_spectral(s.y, a.b);
      if (g.validate && E > prev + 1e-9) throw NumericalError("validate: free energy increased at t=" + format_number(s.t));
      prev = E;
      std::vector<double> row = {s.t, E, kinetics::dissipation_rate(s.y, a.b)};
      row.insert(row.end(), s.y.begin(), s.y.end());
      t.rows.push_back(std::move(row));
    }
  } else if (a.solver == "pde") {
    const std::size_t n = g.grid_or(256);
    CircleGrid grid(n);
    FourierDensity fd{y0};
    kinetics::PdeState s0{grid, fd.reconstruct(grid), a.b, 0.0};
    kinetics::PdeOptions opts;
    opts.samples = a.samples;
    params.emplace_back("grid_n", std::to_string(n));
    params.emplace_back("dt", format_number(a.dt));
    const auto snaps = kinetics::integrate_pde(s0, a.t_end, a.dt, opts);
    t.columns = {"t", "theta", "f"};
    for (const auto& s : snaps) {
      for (std::size_t i = 0; i < n; ++i) t.rows.push_back({s.t, grid.node(i), s.f[i]});
    }
  } else {
    throw InputError("--solver must be spectral or pde");
  }
  emit(g, out, "kinetics", params, t);
  return kExitOk;
}

// ---------------------------------------------------------------- two-rod

struct TwoRodArgs {
  std::string b_text;
  std::string z_text;
  std::string tau_text;
  bool surface = false;
};

int cmd_two_rod(const Globals& g, const TwoRodArgs& a, std::ostream& out) {
  const std::size_t n = g.grid_or(two_rod::kDefaultGridN);
  two_rod::TwoRodModel model(n);
  Table t;
  Params params = {{"grid_n", std::to_string(n)}};
  if (a.surface) {
    if (a.z_text.empty() || a.tau_text.empty()) throw InputError("--surface needs --z and --tau");
    const auto zs = parse_values(a.z_text);
    const auto taus = parse_values(a.tau_text);
    for (double z : zs) {
      if (!(std::abs(z) < 1.0)) throw InputError("--z values must lie in (-1, 1)");
    }
    for (double tau : taus) {
      if (!(tau > 0.0)) throw InputError("--tau values must be positive");
    }
    params.emplace_back("z", a.z_text);
    params.emplace_back("tau", a.tau_text);
    t.columns = {"z", "tau", "lambda"};
    for (double z : zs) {
      for (double tau : taus) t.rows.push_back({z, tau, model.lambda(z, tau)});
    }
  } else {
    if (a.b_text.empty()) throw InputError("--b is required");
    auto bs = parse_values(a.b_text);
    for (double b : bs) {
      if (!(b > 0.0)) throw InputError("--b values must be positive");
    }
    std::sort(bs.begin(), bs.end());
    params.emplace_back("b", a.b_text);
    t.columns = {"b", "z_root", "gamma", "energy"};
    for (double b : bs) {
      const auto sols = model.solve(b);
      bool has_zero = false;
      for (const auto& s : sols) {
        has_zero = has_zero || s.z == 0.0;
        t.rows.push_back({s.b, s.z, s.gamma, s.energy});
      }
      if (g.validate && !has_zero) throw NumericalError("validate: z = 0 missing at b=" + format_number(b));
    }
  }
  emit(g, out, "two-rod", params, t);
  return kExitOk;
}

// ---------------------------------------------------------------- corpus / concentrate

GridDensity initial_density(const CorpusConfig& cfg, std::size_t component, std::uint64_t seed) {
  const auto& space = cfg.components[component];
  const auto& w = space.weights();
  if (cfg.init == "uniform") return GridDensity::uniform(w);
  if (cfg.init == "random") return corpus::perturbed_uniform(w, seed + component, cfg.perturbation);
  if (cfg.init == "explicit") return GridDensity::normalized(cfg.init_values, w);
  // cos2 on an equispaced circle: node i sits at angle 2 pi i / n.
  std::vector<double> v(space.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = 1.0 + 0.1 * std::cos(2.0 * kTwoPi * static_cast<double>(i) / static_cast<double>(v.size()));
  }
  return GridDensity::normalized(std::move(v), w);
}

corpus::SolveReport solve_one(const CorpusConfig& cfg, const corpus::CorpusProblem& problem, std::size_t component,
                              std::uint64_t seed, double tol) {
  GridDensity init = initial_density(cfg, component, seed);
  if (cfg.solver == "fixed_point") {
    corpus::FixedPointOptions o;
    o.damping = cfg.damping;
    o.tol = tol;
    o.max_iter = cfg.max_iter;
    o.f_init = std::move(init);
    return corpus::fixed_point_solve(problem, o);
  }
  corpus::MinimizeOptions o;
  o.tol = tol;
  o.max_iter = cfg.max_iter;
  o.f_init = std::move(init);
  o.seed = seed + 1000 * (component + 1);
  o.perturbation = std::max(cfg.perturbation, 1e-3);
  o.restarts = cfg.restarts;
  o.concentrated_starts = cfg.concentrated_starts;
  return corpus::minimize_energy(problem, o);
}

struct CorpusRun {
  double b = 0.0;
  double residual = 0.0;
  double energy = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool oscillating = false;
  std::string note;
  GridDensity density;
};

struct CorpusOutcome {
  std::vector<CorpusRun> runs;
  std::vector<corpus::SolveReport> reports;  // single-space runs only
  std::optional<corpus::CorpusProblem> problem;
};

CorpusOutcome solve_config(const CorpusConfig& cfg, std::uint64_t seed, double tol) {
  CorpusOutcome outcome;
  auto bs = cfg.b_values;
  std::sort(bs.begin(), bs.end());
  if (!cfg.product) {
    corpus::CorpusProblem base(cfg.components[0], cfg.kernels[0], bs.front());
    for (double b : bs) {
      const auto problem = base.with_b(b);
      auto rep = solve_one(cfg, problem, 0, seed, tol);
      outcome.runs.push_back({b, rep.residual, rep.energy, rep.iterations, rep.converged, rep.oscillating, rep.note,
                              rep.density});
      outcome.reports.push_back(std::move(rep));
    }
    outcome.problem = std::move(base);
    return outcome;
  }
  const auto product = corpus::product_space(cfg.components);
  for (double b : bs) {
    std::vector<corpus::SolveReport> parts;
    std::size_t iterations = 0;
    std::string note;
    bool converged = true;
    bool oscillating = false;
    for (std::size_t j = 0; j < cfg.components.size(); ++j) {
      corpus::CorpusProblem problem(cfg.components[j], cfg.kernels[j], b);
      auto rep = solve_one(cfg, problem, j, seed, tol);
      iterations += rep.iterations;
      converged = converged && rep.converged;
      oscillating = oscillating || rep.oscillating;
      if (!rep.note.empty()) note += "component " + std::to_string(j) + ": " + rep.note + "; ";
      parts.push_back(std::move(rep));
    }
    if (!converged) {
      outcome.runs.push_back({b, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                              iterations, false, oscillating, note + "component solve did not converge",
                              GridDensity::uniform(product.weights())});
      continue;
    }
    GridDensity f = corpus::product_compose(product, std::span<const corpus::SolveReport>(parts));
    const double residual = corpus::product_onsager_residual(product, cfg.kernels, f, b);
    const double energy = corpus::product_free_energy(product, cfg.kernels, f, b);
    outcome.runs.push_back({b, residual, energy, iterations, true, oscillating, note, std::move(f)});
  }
  return outcome;
}

double default_tol(const CorpusConfig& cfg) { return cfg.solver == "minimize" ? 1e-12 : 1e-10; }

int cmd_corpus(const Globals& g, const std::string& path, std::ostream& out, std::ostream& err) {
  const auto cfg = load_corpus_config(path, g.grid_or(kDefaultGridN), g.validate ? TriangleCheck::always : TriangleCheck::automatic);
  const std::uint64_t seed = g.seed_opt->count() ? g.seed : cfg.seed;
  const double tol = g.tol_or(cfg.tol.value_or(default_tol(cfg)));
  auto outcome = solve_config(cfg, seed, tol);

  std::optional<corpus::ConcentrationReport> conc;
  std::vector<double> distinct = cfg.b_values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (!cfg.product && distinct.size() >= 2) {
    conc = corpus::concentration_report(*outcome.problem, outcome.reports, cfg.eps);
  }

  const Params params = {{"config", path},
                         {"solver", cfg.solver},
                         {"b", join_values(cfg.b_values)},
                         {"tol", format_number(tol)},
                         {"init", cfg.init},
                         {"points", std::to_string(outcome.runs.front().density.size())}};
  Globals gg = g;
  gg.seed = seed;
  Sink sink(g.out, out);
  if (g.format == "json") {
    nlohmann::ordered_json doc;
    doc["header"]["version"] = ONSAGER_VERSION;
    doc["header"]["command"] = "corpus";
    doc["header"]["seed"] = seed;
    for (const auto& [k, v] : params) doc["header"]["parameters"][k] = v;
    doc["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : outcome.runs) {
      nlohmann::ordered_json j;
      j["b"] = r.b;
      j["residual"] = std::isfinite(r.residual) ? nlohmann::ordered_json(r.residual) : nlohmann::ordered_json();
      j["energy"] = std::isfinite(r.energy) ? nlohmann::ordered_json(r.energy) : nlohmann::ordered_json();
      j["iterations"] = r.iterations;
      j["converged"] = r.converged;
      j["oscillating"] = r.oscillating;
      j["note"] = r.note;
      j["density"] = r.density.values();
      doc["runs"].push_back(j);
    }
    if (conc) {
      auto& c = doc["concentration"];
      c["min_u"] = conc->min_u;
      c["sigma_set"] = conc->sigma_set;
      c["degenerate"] = conc->degenerate;
      c["b_values"] = conc->b_values;
      c["mass_on_sigma"] = conc->mass_on_sigma;
      c["potential_drift"] = conc->potential_drift;
    } else {
      doc["concentration"] = nullptr;
    }
    sink.stream() << doc.dump(2) << "\n";
  } else {
    write_csv_header(sink.stream(), "corpus", seed, params);
    Table t;
    t.columns = {"b", "residual", "energy", "mass_on_sigma", "iterations"};
    for (std::size_t k = 0; k < outcome.runs.size(); ++k) {
      const auto& r = outcome.runs[k];
      const double mass = conc ? conc->mass_on_sigma[k] : std::numeric_limits<double>::quiet_NaN();
      t.rows.push_back({r.b, r.residual, r.energy, mass, static_cast<double>(r.iterations)});
    }
    write_csv(sink.stream(), t);
  }

  int code = kExitOk;
  for (const auto& r : outcome.runs) {
    if (!r.converged) {
      err << "onsager corpus: b=" << format_number(r.b) << " did not converge";
      if (!r.note.empty()) err << " (" << r.note << ")";
      err << "\n";
      code = kExitFailure;
    } else if (g.validate && !(r.residual <= std::max(10.0 * tol, 1e-8))) {
      err << "onsager corpus: validate: residual " << format_number(r.residual) << " at b=" << format_number(r.b) << "\n";
      code = kExitFailure;
    }
  }
  return code;
}

int cmd_concentrate(const Globals& g, const std::string& path, std::ostream& out, std::ostream& err) {
  const auto cfg = load_corpus_config(path, g.grid_or(kDefaultGridN), g.validate ? TriangleCheck::always : TriangleCheck::automatic);
  if (cfg.product) throw InputError("concentrate: product spaces are not supported; use corpus");
  std::vector<double> distinct = cfg.b_values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw InputError("concentrate: config field 'b' needs at least two distinct values");
  const std::uint64_t seed = g.seed_opt->count() ? g.seed : cfg.seed;
  const double tol = g.tol_or(cfg.tol.value_or(default_tol(cfg)));

  if (cfg.mesh > 0.0) {
    for (double b : distinct) {
      if (b * cfg.mesh > 1.0) {
        err << "onsager concentrate: warning: b=" << format_number(b) << " exceeds 1/mesh=" << format_number(1.0 / cfg.mesh)
            << "; balls of radius 1/b hold a single node and the sublinear bound is not resolved\n";
      }
    }
  }
  auto outcome = solve_config(cfg, seed, tol);
  const auto conc = corpus::concentration_report(*outcome.problem, outcome.reports, cfg.eps);

  Table t;
  t.columns = {"b", "energy", "energy_over_b", "ball_energy_over_b", "uniform_energy_over_b", "mass_on_sigma",
               "potential_drift"};
  for (std::size_t k = 0; k < outcome.runs.size(); ++k) {
    const auto& r = outcome.runs[k];
    const auto problem = outcome.problem->with_b(r.b);
    const double ball = r.b > 0.0 ? corpus::best_ball_energy(problem, 1.0 / r.b) / r.b
                                  : std::numeric_limits<double>::quiet_NaN();
    const double uni = r.b > 0.0 ? problem.free_energy(problem.uniform()) / r.b : std::numeric_limits<double>::quiet_NaN();
    const double drift = k == 0 ? std::numeric_limits<double>::quiet_NaN() : conc.potential_drift[k - 1];
    t.rows.push_back({r.b, r.energy, r.b > 0.0 ? r.energy / r.b : std::numeric_limits<double>::quiet_NaN(), ball, uni,
                      conc.mass_on_sigma[k], drift});
  }
  std::string sigma;
  for (std::size_t i = 0; i < conc.sigma_set.size(); ++i) sigma += (i ? "," : "") + std::to_string(conc.sigma_set[i]);
  const Params params = {{"config", path},
                         {"solver", cfg.solver},
                         {"b", join_values(cfg.b_values)},
                         {"tol", format_number(tol)},
                         {"eps", format_number(cfg.eps)},
                         {"min_u", format_number(conc.min_u)},
                         {"sigma_set", sigma},
                         {"degenerate", conc.degenerate ? "true" : "false"}};
  Globals gg = g;
  gg.seed = seed;
  emit(gg, out, "concentrate", params, t);

  for (const auto& r : outcome.runs) {
    if (!r.converged) {
      err << "onsager concentrate: b=" << format_number(r.b) << " did not converge\n";
      return kExitFailure;
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Onsager mean-field equilibrium solvers", "onsager"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--out", g.out, "Write the table to this file instead of standard output");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  g.seed_opt = app.add_option("--seed", g.seed, "Random seed (recorded in the header)");
  g.grid_opt = app.add_option("--grid-n", g.grid_n, "Grid size (circle nodes)");
  g.modes_opt = app.add_option("--modes-J", g.modes, "Number of Fourier modes");
  g.tol_opt = app.add_option("--tol", g.tol, "Solver tolerance");
  app.add_flag("--validate", g.validate, "Check documented postconditions and fail with exit 1 if violated");

  std::string ms_b;
  auto* ms = app.add_subcommand("ms-branch", "Maier-Saupe nematic branch b -> (r, g_j, db/dr)");
  ms->add_option("--b", ms_b, "Range min:max:steps with min > 4")->required();

  KineticsArgs ka;
  auto* kin = app.add_subcommand("kinetics", "Smoluchowski relaxation on the circle");
  kin->add_option("--b", ka.b, "Intensity")->required();
  kin->add_option("--y1", ka.y1, "Initial first coefficient");
  kin->add_option("--t-end", ka.t_end, "Final time");
  kin->add_option("--samples", ka.samples, "Number of output intervals");
  kin->add_option("--solver", ka.solver, "spectral or pde")->check(CLI::IsMember({"spectral", "pde"}));
  kin->add_option("--dt", ka.dt, "PDE time step");
  kin->add_option("--perturb", ka.perturb, "Random perturbation amplitude on higher modes (uses --seed)");

  TwoRodArgs ta;
  auto* tr = app.add_subcommand("two-rod", "Two articulated rods: roots z_b, gamma and energies");
  tr->add_option("--b", ta.b_text, "List or range of intensities");
  tr->add_flag("--surface", ta.surface, "Emit the lambda(z, tau) surface instead");
  tr->add_option("--z", ta.z_text, "z values for --surface");
  tr->add_option("--tau", ta.tau_text, "tau values for --surface");

  std::string corpus_path;
  auto* cp = app.add_subcommand("corpus", "Solve the Onsager equation on a finite space from a JSON config");
  cp->add_option("config", corpus_path, "Config file")->required();

  std::string conc_path;
  auto* cc = app.add_subcommand("concentrate", "Zero-temperature diagnostics over a b sweep");
  cc->add_option("config", conc_path, "Config file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    check_globals(g);
    if (*ms) return cmd_ms_branch(g, ms_b, out);
    if (*kin) return cmd_kinetics(g, ka, out);
    if (*tr) return cmd_two_rod(g, ta, out);
    if (*cp) return cmd_corpus(g, corpus_path, out, err);
    if (*cc) return cmd_concentrate(g, conc_path, out, err);
  } catch (const InputError& e) {
    err << "onsager: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "onsager: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace onsager::cli
