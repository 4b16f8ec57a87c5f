#include "conereg/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "conereg/facered.hpp"
#include "conereg/feasibility.hpp"
#include "conereg/io.hpp"
#include "conereg/ipmprobe.hpp"
#include "conereg/regularity.hpp"
#include "conereg/report.hpp"

namespace conereg {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitUndetermined = 2;

struct CommonArgs {
  std::string file;
  double tol_rank = TolerancePolicy{}.rank_rel_tol;
  double tol_psd = TolerancePolicy{}.psd_tol;
  std::string format = "json";
  std::string out;
  unsigned seed = 1;
};

void add_common(CLI::App* cmd, CommonArgs* c) {
  cmd->add_option("file", c->file, "problem file (.dat-s or .json)")->required();
  cmd->add_option("--tol-rank", c->tol_rank, "relative rank decision tolerance");
  cmd->add_option("--tol-psd", c->tol_psd, "dual-membership / eigenvalue tolerance");
  cmd->add_option("--format", c->format, "report format: json or text")
      ->check(CLI::IsMember({"json", "text"}));
  cmd->add_option("--out", c->out, "write the report to this path instead of stdout");
  cmd->add_option("--seed", c->seed, "seed for randomized search phases");
}

TolerancePolicy tol_of(const CommonArgs& c) {
  TolerancePolicy tol;
  tol.rank_rel_tol = c.tol_rank;
  tol.psd_tol = c.tol_psd;
  return tol;
}

AuxOptions aux_of(const CommonArgs& c, const ParsedProblem& p) {
  AuxOptions aux;
  aux.tol = tol_of(c);
  aux.seed = c.seed;
  aux.candidates = p.candidates;
  return aux;
}

int emit(const ReportBuilder& report, const CommonArgs& c, int code) {
  const std::string body = c.format == "text" ? report.text() : report.json_string();
  if (c.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(c.out, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << c.out << "'\n";
      return kExitInputError;
    }
    out << body;
  }
  return code;
}

// Strict-feasibility certificate of the unreduced system, or the terminal
// witness when Slater holds; shared by ipm-probe and perturb.
SlaterVerdict full_cone_verdict(const ParsedProblem& p, const CommonArgs& c) {
  return solve_auto(p.system, aux_of(c, p));
}

int cmd_check_slater(const ParsedProblem& p, const CommonArgs& c) {
  const SlaterVerdict v = full_cone_verdict(p, c);
  ReportBuilder report(p.system, p.format, c.seed, tol_of(c));
  report.add_slater(v);
  return emit(report, c,
              v.status == SlaterStatus::Undetermined ? kExitUndetermined : kExitOk);
}

int cmd_reduce(const ParsedProblem& p, const CommonArgs& c, const std::string& strategy) {
  FrOptions opt;
  opt.strategy = strategy == "minimal-drop" ? Strategy::MinimalDrop : Strategy::Greedy;
  opt.seed = c.seed;
  opt.aux = aux_of(c, p);
  const ReductionTrace t = run_fr(p.system, opt);
  ReportBuilder report(p.system, p.format, c.seed, tol_of(c));
  report.add_reduction(t);
  return emit(report, c,
              t.terminal_status == TerminalStatus::Undetermined ? kExitUndetermined
                                                                : kExitOk);
}

int cmd_singularity(const ParsedProblem& p, const CommonArgs& c) {
  FrOptions opt;
  opt.seed = c.seed;
  opt.aux = aux_of(c, p);
  ReductionTrace greedy;
  const SingularityDiagnostics diag = diagnose(p.system, opt, &greedy);
  ReportBuilder report(p.system, p.format, c.seed, tol_of(c));
  report.add_reduction(greedy);
  report.add_singularity(diag);
  return emit(report, c, diag.sd_upper ? kExitOk : kExitUndetermined);
}

int cmd_degeneracy(const ParsedProblem& p, const CommonArgs& c,
                   const std::string& points_path) {
  const TolerancePolicy tol = tol_of(c);
  std::vector<Point> points;
  std::string source;
  if (!points_path.empty()) {
    std::ifstream in(points_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open points file '" << points_path << "'\n";
      return kExitInputError;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    points = parse_points_json(buf.str(), p.system.cone);
    source = "points_file";
  } else if (!p.points.empty()) {
    points = p.points;
    source = "problem_file";
  } else {
    points = sample_feasible(p.system, 10, c.seed, tol);
    source = "sampled";
  }

  ReportBuilder report(p.system, p.format, c.seed, tol);
  if (points.empty()) {
    report.add_note("degeneracy_note",
                    "no feasible points supplied and sampling found none");
    return emit(report, c, kExitUndetermined);
  }
  std::vector<DegeneracyVerdict> verdicts;
  std::vector<std::string> errors;
  for (const Point& pt : points) {
    try {
      verdicts.push_back(check_degenerate(p.system, pt, tol));
    } catch (const std::invalid_argument& e) {
      errors.emplace_back(e.what());
    }
  }
  report.add_degeneracy(verdicts, errors, source);
  if (verdicts.empty()) {
    std::cerr << "error: every supplied point was rejected as infeasible\n";
    return kExitInputError;
  }
  return emit(report, c, kExitOk);
}

int cmd_ipm_probe(const ParsedProblem& p, const CommonArgs& c,
                  const std::string& path_file) {
  const TolerancePolicy tol = tol_of(c);
  ReportBuilder report(p.system, p.format, c.seed, tol);

  const bool single_class =
      p.system.cone.pure(ConeClass::Orthant) || p.system.cone.pure(ConeClass::Psd);
  if (!single_class) {
    report.add_ipm_probe(false,
                         "normal matrices are defined here for single-class orthant or "
                         "semidefinite cones only",
                         std::nullopt, {}, {});
    return emit(report, c, kExitOk);
  }

  const SlaterVerdict v = full_cone_verdict(p, c);
  if (v.status == SlaterStatus::StrictlyFeasible) {
    std::vector<double> conds;
    if (v.witness) conds = condition_trajectory(p.system, {*v.witness}, tol);
    report.add_ipm_probe(false, "strict feasibility holds; no limiting singularity",
                         std::nullopt, conds, {});
    return emit(report, c, kExitOk);
  }
  if (v.status == SlaterStatus::Undetermined || !v.certificate) {
    report.add_ipm_probe(false, "strict-feasibility verdict is undetermined: " + v.diagnostic,
                         std::nullopt, {}, {});
    return emit(report, c, kExitUndetermined);
  }

  // Boundary point of the limit: a feasible point on the terminal face.
  FrOptions fopt;
  fopt.seed = c.seed;
  fopt.aux = aux_of(c, p);
  const ReductionTrace trace = run_fr(p.system, fopt);
  std::optional<Point> x_star = trace.witness;
  if (!x_star) {
    const std::vector<Point> pts = sample_feasible(p.system, 1, c.seed, tol);
    if (!pts.empty()) x_star = pts.front();
  }
  if (!x_star) {
    report.add_ipm_probe(false, "no feasible point found to anchor the limit probe",
                         std::nullopt, {}, {});
    return emit(report, c, kExitUndetermined);
  }

  const LimitSingularity lim = verify_limit_singularity(p.system, *x_star, *v.certificate, tol);

  std::vector<Point> path;
  if (!path_file.empty()) {
    std::ifstream in(path_file, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot open path file '" << path_file << "'\n";
      return kExitInputError;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    path = parse_points_json(buf.str(), p.system.cone);
  } else {
    // Interior points sliding toward the boundary anchor.
    const Vector xs = point_to_ambient(p.system.cone, *x_star);
    const Vector d = point_to_ambient(p.system.cone, interior_direction(p.system.cone));
    for (double t : {1.0, 0.1, 0.01, 0.001})
      path.push_back(point_from_ambient(p.system.cone, Vector(xs + t * d)));
    path.push_back(*x_star);
  }
  const std::vector<double> conds = condition_trajectory(p.system, path, tol);

  std::vector<double> embed;
  if (p.system.cone.pure(ConeClass::Psd)) {
    Point s_star = interior_direction(p.system.cone);  // identity in each block
    embed.push_back(embedding_column_singularity(p.system, *x_star, s_star, *v.certificate, tol));
  }
  report.add_ipm_probe(true, "", lim, conds, embed);
  return emit(report, c, kExitOk);
}

int cmd_perturb(const ParsedProblem& p, const CommonArgs& c, double eps) {
  const TolerancePolicy tol = tol_of(c);
  ReportBuilder report(p.system, p.format, c.seed, tol);
  const SlaterVerdict v = full_cone_verdict(p, c);
  if (v.status == SlaterStatus::StrictlyFeasible) {
    report.add_slater(v);
    report.add_note("perturbation_note",
                    "system is strictly feasible; no exposing multiplier to perturb with");
    return emit(report, c, kExitOk);
  }
  if (v.status == SlaterStatus::Undetermined || !v.certificate) {
    report.add_slater(v);
    return emit(report, c, kExitUndetermined);
  }
  const PerturbationCertificate pc = perturbation_infeasibility(p.system, *v.certificate, eps, tol);
  report.add_perturbation(pc);
  return emit(report, c, pc.consistent ? kExitOk : kExitUndetermined);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"conic-system regularity toolkit: strict-feasibility certificates, "
               "facial reduction, singularity and degeneracy diagnostics"};
  app.require_subcommand(1);

  CommonArgs c_slater, c_reduce, c_sing, c_degen, c_probe, c_perturb;
  std::string strategy = "greedy";
  std::string points_path, path_file;
  double eps = 0.0;

  CLI::App* slater = app.add_subcommand("check-slater", "decide strict feasibility");
  add_common(slater, &c_slater);

  CLI::App* reduce = app.add_subcommand("reduce", "run the facial-reduction loop");
  add_common(reduce, &c_reduce);
  reduce->add_option("--strategy", strategy, "greedy or minimal-drop")
      ->check(CLI::IsMember({"greedy", "minimal-drop"}));

  CLI::App* sing = app.add_subcommand("singularity", "reduction plus singularity diagnostics");
  add_common(sing, &c_sing);

  CLI::App* degen = app.add_subcommand("degeneracy", "degeneracy verdicts for feasible points");
  add_common(degen, &c_degen);
  degen->add_option("--points", points_path, "JSON file with points to check");

  CLI::App* probe = app.add_subcommand("ipm-probe", "normal-matrix limiting-singularity probe");
  add_common(probe, &c_probe);
  probe->add_option("--path", path_file, "JSON file with a path of points");

  CLI::App* perturb = app.add_subcommand("perturb", "perturbation infeasibility certificate");
  add_common(perturb, &c_perturb);
  perturb->add_option("--eps", eps, "perturbation size (positive)")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (slater->parsed()) return cmd_check_slater(load_problem(c_slater.file), c_slater);
    if (reduce->parsed()) return cmd_reduce(load_problem(c_reduce.file), c_reduce, strategy);
    if (sing->parsed()) return cmd_singularity(load_problem(c_sing.file), c_sing);
    if (degen->parsed()) return cmd_degeneracy(load_problem(c_degen.file), c_degen, points_path);
    if (probe->parsed()) return cmd_ipm_probe(load_problem(c_probe.file), c_probe, path_file);
    if (perturb->parsed()) {
      if (!(eps > 0.0)) {
        std::cerr << "error: --eps must be positive\n";
        return kExitInputError;
      }
      return cmd_perturb(load_problem(c_perturb.file), c_perturb, eps);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace conereg
