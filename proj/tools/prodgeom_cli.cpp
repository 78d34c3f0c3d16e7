// prodgeom: verification suites, sinh-Gordon solves and parallel sweeps.
//
// Exit codes: 0 pass, 1 check failure, 2 usage, 3 solver nonconvergence, 4 focal point.

#include "prodgeom/parallel.hpp"
#include "prodgeom/report.hpp"
#include "prodgeom/sinhgordon.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace prodgeom;

namespace {

enum Exit { kPass = 0, kCheckFail = 1, kUsage = 2, kNonconvergence = 3, kFocal = 4 };

struct FamilyOptions {
  std::string family = "hat-mab";
  double t = 0.3;
  double C = 0.3;
  std::vector<double> a, b;
  std::string curve1, curve2;
};

struct RunOptions {
  std::size_t n = 30;
  std::uint64_t seed = 1;
  double fd_step = 1e-4;
  std::string out;
  std::string format = "json";
};

void add_family_options(CLI::App* app, FamilyOptions& f) {
  app->add_option("--family", f.family, "mt, mab, hat-mab or prop61")
      ->check(CLI::IsMember({"mt", "mab", "hat-mab", "prop61"}));
  app->add_option("--t", f.t, "M_t parameter <p,q> = t");
  app->add_option("--C", f.C, "product angle of the prop61 family");
  app->add_option("--a", f.a, "axis a of M_{a,b} (three numbers)")->expected(3);
  app->add_option("--b", f.b, "axis b of M_{a,b} (three numbers)")->expected(3);
  app->add_option("--curve1", f.curve1, "prop61 first curve, CSV s,x,y,z");
  app->add_option("--curve2", f.curve2, "prop61 second curve, CSV s,x,y,z");
}

void add_run_options(CLI::App* app, RunOptions& r, bool with_fd = true) {
  app->add_option("--n", r.n, "samples")->check(CLI::PositiveNumber);
  app->add_option("--seed", r.seed, "random seed");
  if (with_fd) app->add_option("--fd-step", r.fd_step, "finite-difference step")->check(CLI::Range(1e-8, 1e-2));
  app->add_option("--out", r.out, "output file (stdout when omitted)");
  app->add_option("--format", r.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

Immersion make_family(const FamilyOptions& f, double fd_step) {
  Immersion im = [&] {
    if (f.family == "mt") return family_Mt(f.t);
    if (f.family == "mab" || f.family == "hat-mab") {
      const bool custom = !f.a.empty() || !f.b.empty();
      if (custom && (f.a.size() != 3 || f.b.size() != 3)) throw UsageError("--a and --b go together");
      const Vec3 a = custom ? Vec3(f.a[0], f.a[1], f.a[2]) : Vec3::UnitZ();
      const Vec3 b = custom ? Vec3(f.b[0], f.b[1], f.b[2]) : Vec3(-Vec3::UnitZ());
      if (!(a.norm() > 0.0 && b.norm() > 0.0)) throw UsageError("--a and --b must be nonzero");
      return f.family == "mab" ? family_Mab(a, b) : family_hatMab(a, b);
    }
    const CurveOnSphere g1 = f.curve1.empty() ? CurveOnSphere::latitude(1.2) : CurveOnSphere::from_csv(f.curve1);
    const CurveOnSphere g2 = f.curve2.empty() ? CurveOnSphere::latitude(1.4) : CurveOnSphere::from_csv(f.curve2);
    return family_prop61(f.C, g1, g2);
  }();
  return im.with_fd_step(fd_step);
}

VerifyParams make_params(const RunOptions& r) {
  VerifyParams p;
  p.n_samples = r.n;
  p.seed = r.seed;
  return p;
}

ReportConfig base_config(const std::string& command, const FamilyOptions* f, const RunOptions& r) {
  ReportConfig c;
  c.emplace_back("command", json_string(command));
  if (f) {
    c.emplace_back("family", json_string(f->family));
    if (f->family == "mt") c.emplace_back("t", json_number(f->t));
    if (f->family == "prop61") c.emplace_back("C", json_number(f->C));
  }
  c.emplace_back("n_samples", fmt::format("{}", r.n));
  c.emplace_back("seed", fmt::format("{}", r.seed));
  c.emplace_back("fd_step", json_number(r.fd_step));
  return c;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

void summarize(const std::vector<CheckReport>& checks) {
  for (const CheckReport& c : checks) {
    std::cerr << fmt::format("{:<5} {:<32} {:.3e} (tol {:.1e}, n={})\n", c.pass ? "PASS" : "FAIL", c.name,
                             c.max_residual, c.tolerance, c.samples);
  }
}

int emit_checks(const std::vector<CheckReport>& checks, const ReportConfig& config, const RunOptions& r) {
  emit(r.format == "csv" ? reports_to_csv(checks) : reports_to_json(config, checks), r.out);
  summarize(checks);
  return all_pass(checks) ? kPass : kCheckFail;
}

BoundaryFn boundary_from_archive(const GridSolution& src) {
  return [src](double u, double v) {
    const int i = static_cast<int>(std::lround((u - src.u0) / src.du));
    const int j = static_cast<int>(std::lround((v - src.v0) / src.dv));
    return src.at(std::clamp(i, 0, src.nu - 1), std::clamp(j, 0, src.nv - 1));
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypersurfaces of S^2 x S^2: structure-equation checks, sinh-Gordon data, parallel hypersurfaces"};
  app.require_subcommand(1);

  FamilyOptions fam;
  RunOptions run;

  auto* verify = app.add_subcommand("verify", "run the verification suite on a family");
  add_family_options(verify, fam);
  add_run_options(verify, run);

  auto* sg = app.add_subcommand("sg", "sinh-Gordon solve / check");
  sg->require_subcommand(1);
  int grid = 128;
  std::string bc = "soliton";
  std::string sg_in;
  SolverOptions solver;
  auto* sg_solve = sg->add_subcommand("solve", "solve on [0,1]^2 and write an archive");
  sg_solve->add_option("--grid", grid, "nodes per side")->check(CLI::Range(16, 4096));
  sg_solve->add_option("--bc", bc, "zero, soliton, or an archive whose boundary nodes are used");
  sg_solve->add_option("--tol", solver.tol, "max residual target");
  sg_solve->add_option("--max-iter", solver.max_iter, "Newton iterations");
  sg_solve->add_option("--omega", solver.omega, "SOR factor (1 = Gauss-Seidel, 0 = automatic)");
  sg_solve->add_option("--out", run.out, "archive stem")->required();
  auto* sg_check = sg->add_subcommand("check", "integrability residuals on an archive");
  sg_check->add_option("--in", sg_in, "archive (stem, .json or .csv)")->required();
  add_run_options(sg_check, run, false);

  auto* par = app.add_subcommand("parallel", "parallel hypersurfaces");
  par->require_subcommand(1);
  double r_min = 0.0, r_max = 1.2, r_at = kMinimalDistance;
  int steps = 25;
  auto* par_sweep = par->add_subcommand("sweep", "H and C along the normal flow");
  add_family_options(par_sweep, fam);
  add_run_options(par_sweep, run);
  par_sweep->add_option("--r-min", r_min);
  par_sweep->add_option("--r-max", r_max);
  par_sweep->add_option("--steps", steps)->check(CLI::PositiveNumber);
  auto* par_46 = par->add_subcommand("check46", "minimality of the parallel at pi/(2 sqrt 2)");
  add_family_options(par_46, fam);
  add_run_options(par_46, run);
  par_46->add_option("--r", r_at, "distance (default pi/(2 sqrt 2))");
  auto* par_mem = par->add_subcommand("membership", "parallel of M_{a,b} lies on \\hat M_{a,b}");
  add_family_options(par_mem, fam);
  add_run_options(par_mem, run);
  par_mem->add_option("--r", r_at, "distance (default pi/(2 sqrt 2))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*verify) {
      const Immersion im = make_family(fam, run.fd_step);
      const VerifyParams p = make_params(run);
      auto config = base_config("verify", &fam, run);
      return emit_checks(verify_suite(im, p), config, run);
    }
    if (*sg_solve) {
      BoundaryFn boundary;
      std::vector<double> init;
      if (bc == "zero") {
        boundary = zero_boundary();
      } else if (bc == "soliton") {
        boundary = soliton_boundary();
      } else {
        const GridSolution src = load_archive(bc);
        if (src.nu != grid || src.nv != grid) throw UsageError("--bc archive must match --grid");
        boundary = boundary_from_archive(src);
        init = src.h;
      }
      const GridSolution gs =
          solve_sinh_gordon(Domain{}, grid, grid, boundary, init.empty() ? nullptr : &init, solver, bc);
      save_archive(gs, run.out);
      std::cerr << fmt::format("solved {}x{} ({}), residual {:.3e}\n", grid, grid, bc, gs.residual);
      return kPass;
    }
    if (*sg_check) {
      const GridSolution gs = load_archive(sg_in);
      const VerifyParams p = make_params(run);
      auto checks = intrinsic_checks(gs, p.n_samples, p.seed);
      checks.push_back(coordinate_solution_check(gs, p.n_samples, p.seed));
      ReportConfig config;
      config.emplace_back("command", json_string("sg check"));
      config.emplace_back("boundary", json_string(gs.boundary));
      config.emplace_back("grid", fmt::format("[{}, {}]", gs.nu, gs.nv));
      config.emplace_back("n_samples", fmt::format("{}", run.n));
      config.emplace_back("seed", fmt::format("{}", run.seed));
      return emit_checks(checks, config, run);
    }
    if (*par_sweep) {
      const Immersion im = make_family(fam, run.fd_step);
      const auto rows = sweep(im, r_min, r_max, steps, make_params(run));
      auto config = base_config("parallel sweep", &fam, run);
      config.emplace_back("r_min", json_number(r_min));
      config.emplace_back("r_max", json_number(r_max));
      config.emplace_back("steps", fmt::format("{}", steps));
      // CSV is the plot interface, so it is the default here.
      const bool json = par_sweep->count("--format") && run.format == "json";
      emit(json ? sweep_to_json(config, rows) : sweep_to_csv(rows), run.out);
      return kPass;
    }
    if (*par_46) {
      const Immersion im = make_family(fam, run.fd_step);
      auto config = base_config("parallel check46", &fam, run);
      config.emplace_back("r", json_number(r_at));
      try {
        return emit_checks(theorem46_check(im, make_params(run), r_at), config, run);
      } catch (const ContractError& e) {
        std::cerr << "precondition failed: " << e.what() << "\n";
        return kCheckFail;
      }
    }
    if (*par_mem) {
      const Immersion im = make_family(fam, run.fd_step);
      auto config = base_config("parallel membership", &fam, run);
      config.emplace_back("r", json_number(r_at));
      return emit_checks({membership_check(im, r_at, make_params(run))}, config, run);
    }
  } catch (const NonconvergenceError& e) {
    std::cerr << "error: " << e.what() << "\nresidual trace:";
    for (double r : e.residual_trace()) std::cerr << fmt::format(" {:.3e}", r);
    std::cerr << "\n";
    return kNonconvergence;
  } catch (const FocalPointError& e) {
    std::cerr << fmt::format("error: {} (r = {:.17g})\n", e.what(), e.r());
    return kFocal;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFail;
  }
  return kUsage;
}
