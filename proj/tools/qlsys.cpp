// qlsys: batch driver for the weighted quasi-linear solvers.
//
//   qlsys <solve|oracle|sphere|halfspace|gradcheck> --spec FILE [--out-dir DIR] [--seed N]
//
// Exit codes: 0 converged, 2 not converged, 3 spec error, 4 I/O error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlsys/energy.hpp"
#include "qlsys/halfspace.hpp"
#include "qlsys/io.hpp"
#include "qlsys/optimizer.hpp"
#include "qlsys/problem.hpp"
#include "qlsys/scalar_oracle.hpp"
#include "qlsys/sphere.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qlsys;

namespace {

constexpr int kConverged = 0;
constexpr int kNotConverged = 2;
constexpr int kSpecError = 3;
constexpr int kIoError = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Run {
  ProblemSpec spec;
  fs::path out_dir;
  std::uint64_t seed = 0;
  json timings = json::object();
};

fs::path with_suffix(const std::string& file, const std::string& suffix) {
  fs::path p(file);
  return p.parent_path() / (p.stem().string() + suffix + p.extension().string());
}

void merge(json& dst, const json& src) {
  for (const auto& [k, v] : src.items()) dst[k] = v;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json grid_json(const Grid& g) {
  return json{{"dims", g.dims()},
              {"spacing", g.spacing()},
              {"origin", g.origin()},
              {"interior_nodes", g.interior_nodes().size()},
              {"boundary_nodes", g.boundary_nodes().size()}};
}

double sup_in_domain(const Field& U) {
  double m = 0.0;
  for (std::size_t p = 0; p < U.grid().node_count(); ++p)
    if (U.grid().in_domain(p))
      for (double v : U.at(p)) m = std::max(m, std::abs(v));
  return m;
}

double interior_sup(const Field& r) {
  double m = 0.0;
  for (std::size_t p : r.grid().interior_nodes())
    for (double v : r.at(p)) m = std::max(m, std::abs(v));
  return m;
}

json q_norms_json(const EnergyValue& e) {
  json q = json::object();
  for (const auto& [exponent, value] : e.q_norms) q[format_double(exponent)] = value;
  return q;
}

json report_json(const SolveReport& r) {
  return json{{"converged", r.converged},
              {"status", r.status},
              {"iterations", r.iterations},
              {"final_energy", r.energy_history.back()},
              {"pg_norm", r.pg_history.back()},
              {"tol_pg", r.tol_pg},
              {"active_constraints", r.active_constraints},
              {"line_search_failures", r.line_search_failures}};
}

Weight spec_weight(const ProblemSpec& spec) {
  Weight w = make_weight(spec.weight);
  return spec.weight_shift != 0.0 ? w.shifted(spec.weight_shift) : w;
}

fs::path out(const Run& run, const fs::path& file) { return run.out_dir / file; }

int run_solve(Run& run, json& summary) {
  const ProblemSpec& spec = run.spec;
  const GridPtr grid = build_spec_grid(spec);
  const BoundaryData bd = sample_spec_boundary(spec, grid);
  const Weight w = spec_weight(spec);
  const CoefficientTensor A = spec_tensor(spec);
  const CoefficientTensor* Ap = spec.tensor_diagonal ? &A : nullptr;
  const auto adm = AdmissibleSet::from_boundary(bd, spec.bound);

  summary["grid"] = grid_json(*grid);
  summary["weight"] = w.label();
  summary["components"] = spec.components();
  summary["bound"] = adm.bound;
  summary["tensor"] = Ap ? "diagonal" : "identity";

  const auto t0 = Clock::now();
  const SolveResult res = minimize(w, adm, Ap, spec.solver);
  run.timings["solve_seconds"] = seconds_since(t0);

  const EnergyValue ev = energy(res.solution, w, Ap);
  merge(summary, report_json(res.report));
  summary["el_residual_norm"] = interior_sup(el_residual(res.solution, w, Ap));
  summary["q_norms"] = q_norms_json(ev);
  summary["sup_norm"] = sup_in_domain(res.solution);
  summary["feasible"] = is_admissible(res.solution, adm);
  if (Ap) {
    std::vector<std::vector<double>> points;
    for (std::size_t p = 0; p < grid->node_count(); ++p)
      if (grid->in_domain(p)) points.push_back(grid->coords(p));
    const auto eb = ellipticity_bounds(A, points, 16);
    summary["ellipticity"] = json{{"lower", eb.lower}, {"upper", eb.upper}};
  }
  summary["outputs"] = json{{"field", spec.field_path}, {"history", spec.history_path}};

  write_field(res.solution, out(run, spec.field_path));
  write_text(out(run, spec.history_path), format_history(res.report));
  std::cout << "solve: " << res.report.status << " after " << res.report.iterations
            << " iterations, energy " << format_double(res.report.energy_history.back()) << "\n";
  return res.report.converged ? kConverged : kNotConverged;
}

int run_oracle(Run& run, json& summary) {
  const ProblemSpec& spec = run.spec;
  const GridPtr grid = build_spec_grid(spec);
  const BoundaryData bd = sample_spec_boundary(spec, grid);
  const Weight w = spec_weight(spec);
  summary["grid"] = grid_json(*grid);
  summary["weight"] = w.label();

  const auto t0 = Clock::now();
  bool ok = true;
  Field u(grid, 1);
  if (spec.source) {
    SourceField h = SourceField::zeros(*grid);
    for (std::size_t p = 0; p < grid->node_count(); ++p)
      if (grid->in_domain(p)) h.values[p] = spec.source->expr(grid->coords(p));
    const auto r = solve_scalar_source(bd, w, h, spec.damping, spec.picard_iters);
    u = r.solution;
    ok = r.converged;
    summary["method"] = "picard";
    summary["picard"] = json{{"converged", r.converged},
                             {"iterations", r.iterations},
                             {"last_change", r.last_change},
                             {"damping", r.damping}};
  } else {
    u = solve_scalar_exact(bd, w);
    summary["method"] = "exact";
  }
  run.timings["oracle_seconds"] = seconds_since(t0);
  summary["energy"] = energy(u, w).value;
  summary["el_residual_norm"] = interior_sup(el_residual(u, w));
  summary["sup_norm"] = sup_in_domain(u);

  if (spec.compare) {
    const auto t1 = Clock::now();
    const auto res = minimize(w, AdmissibleSet::from_boundary(bd, spec.bound), nullptr, spec.solver);
    run.timings["minimize_seconds"] = seconds_since(t1);
    double d = 0.0;
    for (std::size_t p : grid->interior_nodes()) d = std::max(d, std::abs(res.solution(p, 0) - u(p, 0)));
    summary["compare"] = report_json(res.report);
    summary["compare"]["sup_difference"] = d;
    ok = ok && res.report.converged;
  }
  summary["outputs"] = json{{"field", spec.field_path}};
  write_field(u, out(run, spec.field_path));
  std::cout << "oracle: " << (ok ? "converged" : "not converged") << "\n";
  return ok ? kConverged : kNotConverged;
}

json chart_json(const SphereMapResult& r) {
  json j{{"pole", r.pole}, {"bound", r.bound}};
  merge(j, report_json(r.report));
  j["chart_energy"] = r.chart_energy;
  j["dirichlet_energy"] = r.dirichlet_energy;
  j["harmonic_residual"] = r.residual;
  return j;
}

int run_sphere(Run& run, json& summary) {
  const ProblemSpec& spec = run.spec;
  const GridPtr grid = build_spec_grid(spec);
  BoundaryData bd = sample_spec_boundary(spec, grid);
  const std::size_t m = bd.components;
  for (std::size_t s = 0; s < grid->boundary_nodes().size(); ++s) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) n2 += bd.values[s * m + i] * bd.values[s * m + i];
    const double n = std::sqrt(n2);
    if (spec.normalize && n > 0.0) {
      for (std::size_t i = 0; i < m; ++i) bd.values[s * m + i] /= n;
    } else if (std::abs(n - 1.0) > 1e-12) {
      throw SpecError({{spec.boundary.front().line, 0,
                        "boundary data is not on the unit sphere (|phi| = " + format_double(n) +
                            " at boundary node " + std::to_string(s) +
                            "); set normalize = true in [sphere] to project it"}});
    }
  }
  summary["grid"] = grid_json(*grid);
  summary["weight"] = "sphere_chart(2)";

  const auto t0 = Clock::now();
  const HarmonicPair pair = spec.pole ? solve_harmonic_pair(bd, ChartPole(*spec.pole), spec.solver)
                                      : solve_harmonic_pair(bd, spec.solver, spec.candidates);
  run.timings["solve_seconds"] = seconds_since(t0);

  summary["pole"] = pair.first.pole;
  summary["margin"] = pair.margin;
  summary["warnings"] = pair.warnings;
  summary["energies"] = {pair.first.dirichlet_energy, pair.second.dirichlet_energy};
  summary["sup_distance"] = pair.sup_distance;
  summary["first"] = chart_json(pair.first);
  summary["second"] = chart_json(pair.second);
  const auto history2 = with_suffix(spec.history_path, "_second");
  summary["outputs"] = json{{"field", spec.field_path},
                            {"field_second", spec.field_second_path},
                            {"history", spec.history_path},
                            {"history_second", history2.string()}};

  write_field(pair.first.map, out(run, spec.field_path));
  write_field(pair.second.map, out(run, spec.field_second_path));
  write_text(out(run, spec.history_path), format_history(pair.first.report));
  write_text(out(run, history2), format_history(pair.second.report));
  for (const auto& w : pair.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "sphere: energies " << format_double(pair.first.dirichlet_energy) << " and "
            << format_double(pair.second.dirichlet_energy) << ", sup distance "
            << format_double(pair.sup_distance) << "\n";
  const bool ok = pair.first.report.converged && pair.second.report.converged;
  summary["converged"] = ok;
  return ok ? kConverged : kNotConverged;
}

int run_halfspace(Run& run, json& summary) {
  const ProblemSpec& spec = run.spec;
  const Weight w = spec_weight(spec);
  const std::size_t n = spec.halfspace_dim;
  auto exprs = spec.boundary;
  VectorFunction phi = [exprs](std::span<const double> x) {
    std::vector<double> v;
    for (const auto& e : exprs) v.push_back(e.expr(x));
    return v;
  };
  for (const auto& e : exprs)
    if (e.expr.max_variable() > n)
      throw SpecError({{e.line, 0, e.key + " uses a coordinate beyond x" + std::to_string(n)}});

  const auto t0 = Clock::now();
  ExhaustionReport rep;
  try {
    rep = solve_exhaustion(phi, n, w, spec.radii, spec.spacing, spec.window, spec.solver);
  } catch (const std::domain_error& e) {
    throw SpecError({{spec.boundary.front().line, 0, std::string("boundary: ") + e.what()}});
  }
  run.timings["solve_seconds"] = seconds_since(t0);

  summary["dim"] = n;
  summary["weight"] = w.label();
  summary["spacing"] = spec.spacing;
  json win = json::array();
  for (const auto& iv : rep.window) win.push_back({iv.lo, iv.hi});
  summary["window"] = win;
  summary["bound"] = rep.bound;
  summary["uniform_bound"] = rep.uniform_bound;
  json per = json::array();
  json outputs{{"field", spec.field_path}, {"history", json::array()}};
  bool ok = true;
  for (std::size_t k = 0; k < rep.per_radius.size(); ++k) {
    const auto& r = rep.per_radius[k];
    json j{{"radius", r.radius}, {"interior_nodes", r.interior_nodes}};
    merge(j, report_json(r.solve));
    j["sup_norm"] = r.sup_norm;
    j["energy"] = r.energy;
    j["competitor_energy"] = r.competitor_energy;
    j["window_energy"] = r.window_energy;
    j["window_difference"] = r.window_difference ? json(*r.window_difference) : json(nullptr);
    per.push_back(j);
    const auto hist = with_suffix(spec.history_path, "_" + std::to_string(k + 1));
    outputs["history"].push_back(hist.string());
    write_text(out(run, hist), format_history(r.solve));
    ok = ok && r.solve.converged;
  }
  summary["per_radius"] = per;
  summary["converged"] = ok;
  summary["outputs"] = outputs;
  write_field(*rep.window_limit, out(run, spec.field_path));
  std::cout << "halfspace: " << rep.per_radius.size() << " radii, uniform bound "
            << (rep.uniform_bound ? "holds" : "violated") << "\n";
  return ok ? kConverged : kNotConverged;
}

int run_gradcheck(Run& run, json& summary) {
  const ProblemSpec& spec = run.spec;
  const GridPtr grid = build_spec_grid(spec);
  const BoundaryData bd = sample_spec_boundary(spec, grid);
  const Weight w = spec_weight(spec);
  const CoefficientTensor A = spec_tensor(spec);
  const CoefficientTensor* Ap = spec.tensor_diagonal ? &A : nullptr;
  const auto adm = AdmissibleSet::from_boundary(bd, spec.bound);

  std::mt19937_64 rng(run.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Field U = field_from_boundary(bd);
  for (std::size_t p : grid->interior_nodes())
    for (std::size_t a = 0; a < bd.components; ++a) U(p, a) = adm.bound[a] * unit(rng);

  const double err = gradient_check(U, w, Ap, spec.fd_step);
  const bool ok = err <= spec.gradcheck_tolerance;
  summary["grid"] = grid_json(*grid);
  summary["weight"] = w.label();
  summary["tensor"] = Ap ? "diagonal" : "identity";
  summary["step"] = spec.fd_step;
  summary["max_relative_error"] = err;
  summary["tolerance"] = spec.gradcheck_tolerance;
  summary["passed"] = ok;
  std::cout << "max relative error: " << format_double(err) << "\n";
  return ok ? kConverged : kNotConverged;
}

int dispatch(Run& run, json& summary) {
  switch (run.spec.mode) {
    case Mode::solve: return run_solve(run, summary);
    case Mode::oracle: return run_oracle(run, summary);
    case Mode::sphere: return run_sphere(run, summary);
    case Mode::halfspace: return run_halfspace(run, summary);
    case Mode::gradcheck: return run_gradcheck(run, summary);
  }
  return kSpecError;
}

int execute(Mode mode, const fs::path& spec_path, const fs::path& out_dir, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Run run;
  run.out_dir = out_dir;
  run.seed = seed;
  try {
    run.spec = parse_problem(read_text(spec_path), mode);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const SpecError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << spec_path.string() << ": " << d.str() << "\n";
    return kSpecError;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << out_dir.string() << ": " << ec.message() << "\n";
    return kIoError;
  }

  json summary{{"mode", std::string(to_string(mode))}, {"seed", seed}};
  int code = kNotConverged;
  try {
    code = dispatch(run, summary);
  } catch (const SpecError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << spec_path.string() << ": " << d.str() << "\n";
    return kSpecError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    summary["converged"] = false;
    summary["status"] = std::string("error: ") + e.what();
    code = kNotConverged;
  }

  run.timings["total_seconds"] = seconds_since(t0);
  try {
    write_json(out(run, run.spec.summary_path), summary);
    write_json(out(run, run.spec.timings_path), run.timings);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded solutions of weighted quasi-linear elliptic systems"};
  app.require_subcommand(1);

  std::string spec_path, out_dir = ".";
  std::uint64_t seed = 0;
  const std::pair<Mode, const char*> modes[] = {
      {Mode::solve, "minimize the discrete energy over the admissible set"},
      {Mode::oracle, "scalar transform oracle (exact, or Picard with a source)"},
      {Mode::sphere, "two harmonic maps into a sphere from antipodal charts"},
      {Mode::halfspace, "half-ball exhaustion of the half-space problem"},
      {Mode::gradcheck, "analytic gradient against central differences"}};
  for (const auto& [mode, help] : modes) {
    auto* sub = app.add_subcommand(std::string(to_string(mode)), help);
    sub->add_option("--spec", spec_path, "problem spec file")->required();
    sub->add_option("--out-dir", out_dir, "directory for outputs (created if missing)");
    sub->add_option("--seed", seed, "seed for randomized inputs");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kSpecError;
  }

  Mode mode = Mode::solve;
  for (const auto& [m, help] : modes)
    if (app.got_subcommand(std::string(to_string(m)))) mode = m;
  return execute(mode, spec_path, out_dir, seed);
}
