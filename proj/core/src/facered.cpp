#include "conereg/facered.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <variant>

namespace conereg {

namespace {

constexpr double kInfResid = std::numeric_limits<double>::infinity();

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Row scaling used for the private solver copy: d_i = 1 / ||row_i||_2.
Vector row_scales(const Matrix& A) {
  Vector d(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    const double n = A.row(i).norm();
    d(i) = n > 1e-14 ? 1.0 / n : 1.0;
  }
  return d;
}

ConicSystem scaled_copy(const ConicSystem& sys, const Vector& d) {
  ConicSystem s = sys;
  s.A = d.asDiagonal() * sys.A;
  s.b = d.asDiagonal() * sys.b;
  return s;
}

std::optional<ExposingCertificate> try_verify(const ConicSystem& sys, const Vector& y,
                                              const TolerancePolicy& tol) {
  try {
    return verify_certificate(sys, y, tol);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

// Re-validates a witness point against the original-scale equalities.
bool witness_ok(const ConicSystem& sys, const Point& w, const TolerancePolicy& tol) {
  const Vector x = point_to_ambient(sys.cone, w);
  const Vector resid = sys.A * x - sys.b;
  if (sup_norm(resid) > 1e-8 * std::max(1.0, sup_norm(sys.b))) return false;
  const ConeSpec rspec = restricted_cone_spec(sys.cone, sys.current_face);
  if (rspec.ambient_dim() == 0) return sup_norm(x) <= 1e2 * tol.zero_tol;
  const Matrix basis = face_span_basis(sys.cone, sys.current_face);
  const Vector xres = basis.transpose() * x;
  if ((x - basis * xres).norm() > 1e-7 * std::max(1.0, x.norm())) return false;
  return in_relative_interior(rspec, point_from_ambient(rspec, xres), tol);
}

// Zeroes the near-dead part of a restricted-cone vector: orthant entries and
// psd eigenvalues below `cut` become exactly zero, everything else stays.
// Blocks of other classes pass through unchanged.
Vector structure_project(const ConeSpec& spec, const Vector& w, double cut) {
  Vector out = w;
  for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
    const ConeBlock& blk = spec.blocks[bi];
    const int off = spec.block_offset(static_cast<int>(bi));
    if (blk.kind == ConeClass::Orthant) {
      for (int j = 0; j < blk.n; ++j)
        if (out(off + j) < cut) out(off + j) = 0.0;
    } else if (blk.kind == ConeClass::Psd) {
      const int d = blk.ambient_dim();
      Eigen::SelfAdjointEigenSolver<Matrix> es(smat(Vector(w.segment(off, d))));
      Vector lam = es.eigenvalues();
      for (int j = 0; j < lam.size(); ++j)
        if (lam(j) < cut) lam(j) = 0.0;
      out.segment(off, d) =
          svec(Matrix(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose()));
    }
  }
  return out;
}

// Solver multipliers carry the auxiliary problem's accuracy (about 1e-7
// relative). Cutting a face with such a multiplier leaves the restricted
// system inconsistent at the same scale, which poisons every later step and
// blocks witness validation on the terminal face. Alternating between the
// multiplier range (orthogonal to b) and the exposing structure (dead block
// entries exactly zero) drives a well-separated certificate to machine
// accuracy. The polished multiplier is adopted only if it re-verifies without
// losing its span.
ExposingCertificate polish_certificate(const ConicSystem& sys, ExposingCertificate cert,
                                       const TolerancePolicy& tol) {
  const Matrix basis = face_span_basis(sys.cone, sys.current_face);
  if (basis.cols() == 0) return cert;
  const ConeSpec rspec = restricted_cone_spec(sys.cone, sys.current_face);
  const Matrix ares_t = basis.transpose() * sys.A.transpose();
  const double bnorm = sys.b.norm();
  const Matrix nb = bnorm > 0.0
                        ? orthonormal_nullspace_ref(Matrix(sys.b.transpose()), bnorm, 1e-12)
                        : Matrix(Matrix::Identity(sys.m(), sys.m()));
  if (nb.cols() == 0) return cert;

  Vector y = cert.y;
  const double scale0 = sup_norm(Vector(ares_t * y));
  if (scale0 <= 0.0) return cert;
  // The live/dead split is fixed from the incoming multiplier: live entries
  // sit within a couple of decades of the top, dead ones at solver noise.
  const double cut = 1e-4 * scale0;
  Eigen::JacobiSVD<Matrix> svd(Matrix(ares_t * nb),
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int it = 0; it < 40; ++it) {
    const Vector wres = ares_t * y;
    const Vector wp = structure_project(rspec, wres, cut);
    if (sup_norm(Vector(wres - wp)) <= 1e-13 * scale0) break;
    y = nb * svd.solve(wp);
  }

  auto pol = try_verify(sys, y, tol);
  if (pol && pol->span_component >= 0.5 * cert.span_component) return *pol;
  return cert;
}

// A face cut with a multiplier of accuracy delta leaves psd-block bases
// rotated by about delta, and the equalities restricted to such a face are
// inconsistent at the same scale. Later steps then cut a healthy face to
// nothing: the certificates they find are sound for the perturbed face, just
// not for the true one. When the restricted system is a near-miss, refine
// the psd-block bases by Gauss-Newton on the consistency residual
// min_{rotation, z} ||A(face(rotation)) z - b||. The rotation is capped, so
// a face on which the system is genuinely inconsistent is left alone, and
// the refined face is adopted only when the residual reaches solution scale.
FaceRep refine_face(const ConicSystem& sys, FaceRep f, const TolerancePolicy& tol) {
  const double bscale = std::max(1.0, sup_norm(sys.b));
  int tdofs = 0;
  for (const BlockFace& bf : f.blocks)
    if (const auto* pf = std::get_if<PsdFace>(&bf)) {
      const int n = static_cast<int>(pf->basis.rows());
      const int k = static_cast<int>(pf->basis.cols());
      if (k > 0 && k < n) tdofs += (n - k) * k;
    }
  if (tdofs == 0) return f;

  auto residual = [&](const FaceRep& g, Vector* zout) {
    const Matrix av = sys.A * face_span_basis(sys.cone, g);
    if (av.cols() == 0) return kInfResid;
    Eigen::JacobiSVD<Matrix> svd(av, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector z = svd.solve(sys.b);
    if (zout) *zout = z;
    return sup_norm(Vector(av * z - sys.b));
  };

  Vector z;
  const double r0 = residual(f, &z);
  if (r0 <= 1e-12 * bscale || r0 > 1e-2 * bscale) return f;

  const ConeSpec rspec = restricted_cone_spec(sys.cone, f);
  FaceRep work = f;
  double rot_total = 0.0;
  double best_resid = r0;
  FaceRep best = f;
  for (int it = 0; it < 25; ++it) {
    const Matrix basis = face_span_basis(sys.cone, work);
    const Matrix av = sys.A * basis;
    Eigen::JacobiSVD<Matrix> zsvd(av, Eigen::ComputeThinU | Eigen::ComputeThinV);
    z = zsvd.solve(sys.b);
    const Vector r = av * z - sys.b;
    if (sup_norm(r) < best_resid) {
      best_resid = sup_norm(r);
      best = work;
    }
    if (sup_norm(r) <= 1e-12 * bscale) break;

    // Jacobian in the rotation directions of every proper psd-block basis,
    // evaluated at the current point z of the restricted system.
    Matrix jac(sys.m(), tdofs + static_cast<int>(z.size()));
    int col = 0;
    std::vector<std::pair<int, Matrix>> complements;  // block index, U
    for (std::size_t bi = 0; bi < work.blocks.size(); ++bi) {
      const auto* pf = std::get_if<PsdFace>(&work.blocks[bi]);
      if (!pf) continue;
      const int n = static_cast<int>(pf->basis.rows());
      const int k = static_cast<int>(pf->basis.cols());
      if (k == 0 || k >= n) continue;
      const Matrix u = orthonormal_nullspace_ref(Matrix(pf->basis.transpose()), 1.0, 1e-12);
      complements.emplace_back(static_cast<int>(bi), u);
      const int ib = static_cast<int>(bi);
      const Matrix zb = smat(Vector(z.segment(rspec.block_offset(ib), svec_dim(k))));
      const int amb_off = sys.cone.block_offset(ib);
      const int amb_dim = sys.cone.blocks[bi].ambient_dim();
      for (int q = 0; q < k; ++q) {
        const Vector s = pf->basis * zb.col(q);
        for (int p = 0; p < n - k; ++p) {
          Matrix dx = u.col(p) * s.transpose();
          dx += Matrix(dx.transpose());
          jac.col(col++) = sys.A.middleCols(amb_off, amb_dim) * svec(dx);
        }
      }
    }
    jac.rightCols(z.size()) = av;

    Eigen::JacobiSVD<Matrix> jsvd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // The rotation/point Jacobian is rank-deficient along directions that
    // leave the residual unchanged; truncate them so the step stays local.
    jsvd.setThreshold(1e-7);
    const Vector step = jsvd.solve(Vector(-r));
    const Vector tstep = step.head(tdofs);
    if (tstep.norm() <= 1e-12) break;  // Gauss-Newton fixed point
    rot_total += tstep.norm();
    if (rot_total > 3e-2) break;  // rotating further would be curve fitting

    int pos = 0;
    for (const auto& [ib, u] : complements) {
      auto& pf = std::get<PsdFace>(work.blocks[ib]);
      const int n = static_cast<int>(pf.basis.rows());
      const int k = static_cast<int>(pf.basis.cols());
      Matrix t(n - k, k);
      for (int q = 0; q < k; ++q)
        for (int p = 0; p < n - k; ++p) t(p, q) = tstep(pos++);
      const Matrix vnew = pf.basis + u * t;
      Eigen::HouseholderQR<Matrix> qr(vnew);
      pf.basis = qr.householderQ() * Matrix::Identity(n, k);
    }
  }

  const double rfin = residual(best, nullptr);
  if (rfin <= 1e-10 * bscale && rfin < r0) return best;
  return f;
}

int greedy_rank_complement(const Matrix& B, double sigma_ref,
                           std::vector<int>* redundant) {
  // Ascending-row greedy pivoting: a row joins the independent set iff its
  // component outside the span of the rows already chosen is non-negligible.
  // Rows of a face-restricted operator can be annihilated only to certificate
  // accuracy, far above machine roundoff, so independence is judged against
  // the parent operator's scale (sigma_ref), never against B's own largest
  // entry.
  const int m = static_cast<int>(B.rows());
  redundant->clear();
  if (B.cols() == 0) {
    for (int i = 0; i < m; ++i) redundant->push_back(i + 1);
    return 0;
  }
  const double cutoff = kFaceRankRelTol * std::max(sigma_ref, 1e-300);
  Matrix Q(B.cols(), 0);
  int rank = 0;
  for (int i = 0; i < m; ++i) {
    Vector r = B.row(i).transpose();
    r -= Q * (Q.transpose() * r);
    r -= Q * (Q.transpose() * r);  // second pass for orthogonality at scale
    if (r.norm() > cutoff) {
      Q.conservativeResize(Eigen::NoChange, rank + 1);
      Q.col(rank) = r / r.norm();
      ++rank;
    } else {
      redundant->push_back(i + 1);
    }
  }
  return rank;
}

}  // namespace

// --- public operations --------------------------------------------------------

ConicSystem restrict_system(const ConicSystem& sys, const FaceRep& f) {
  ConicSystem out;
  out.cone = restricted_cone_spec(sys.cone, f);
  out.A = sys.A * face_span_basis(sys.cone, f);
  out.b = sys.b;
  out.current_face = full_face(out.cone);
  out.surjective =
      out.A.cols() > 0 &&
      numerical_rank_ref(out.A, spectral_norm(sys.A), kFaceRankRelTol) ==
          static_cast<int>(out.A.rows());
  out.name = sys.name;
  return out;
}

ReductionTrace run_fr(const ConicSystem& sys, const FrOptions& opt) {
  if (opt.max_iters < 1) throw std::invalid_argument("run_fr: max_iters must be >= 1");
  const TolerancePolicy& tol = opt.aux.tol;
  tol.validate();

  ReductionTrace trace;
  ConicSystem cur = sys;
  const Vector d = row_scales(sys.A);

  const int start_dim = face_dimension(cur.current_face);
  const int cap = std::min(opt.max_iters, start_dim + 1);

  for (int k = 1;; ++k) {
    if (k > cap) {
      trace.iteration_capped = true;
      trace.diagnostic = "iteration cap reached before a decided terminal face";
      break;
    }

    // User-supplied candidates first, verbatim against the original scaling.
    std::optional<ExposingCertificate> cert;
    for (const Vector& cand : opt.aux.candidates) {
      if (cand.size() != cur.m()) continue;
      cert = try_verify(cur, cand, tol);
      if (cert) break;
    }

    std::optional<Point> witness;
    std::string note;
    if (!cert) {
      // Solvers run on a row-normalized copy; multipliers map back via y = D*y_n.
      ConicSystem norm = scaled_copy(cur, d);
      AuxOptions aux = opt.aux;
      aux.seed = opt.seed + 97u * static_cast<unsigned>(k);

      if (opt.strategy == Strategy::MinimalDrop) {
        std::vector<ExposingCertificate> pool = certificate_pool(norm, aux);
        int best_drop = -1;
        for (const ExposingCertificate& c : pool) {
          auto mapped = try_verify(cur, d.asDiagonal() * c.y, tol);
          if (!mapped) continue;
          const Vector wamb = cur.A.transpose() * mapped->y;
          FaceRep after;
          try {
            after = intersect_with_exposed(cur.cone, cur.current_face,
                                           point_from_ambient(cur.cone, wamb), tol);
          } catch (const std::invalid_argument&) {
            continue;
          }
          const int drop = face_dimension(cur.current_face) - face_dimension(after);
          if (drop >= 1 && (best_drop < 0 || drop < best_drop)) {
            best_drop = drop;
            cert = std::move(mapped);
          }
        }
      }
      if (!cert) {
        SlaterVerdict v = solve_auto(norm, aux);
        if (v.status == SlaterStatus::Fails && v.certificate) {
          cert = try_verify(cur, d.asDiagonal() * v.certificate->y, tol);
        } else if (v.status == SlaterStatus::StrictlyFeasible && v.witness &&
                   witness_ok(cur, *v.witness, tol)) {
          witness = std::move(v.witness);
        } else if (v.status == SlaterStatus::Undetermined) {
          note = v.diagnostic;
        }

        if (!cert && !witness) {
          // Rescaling renormalizes the multiplier and can flip a verdict that
          // sat within a hair of the tolerance; one direct solve on the
          // unscaled system settles those edges.
          SlaterVerdict u = solve_auto(cur, aux);
          if (u.status == SlaterStatus::Fails && u.certificate) {
            cert = std::move(u.certificate);
          } else if (u.status == SlaterStatus::StrictlyFeasible && u.witness) {
            if (witness_ok(cur, *u.witness, tol))
              witness = std::move(u.witness);
            else
              note = "solver witness failed re-validation at original scale";
          } else if (note.empty()) {
            note = u.diagnostic;
          }
        }
      }
    }

    if (witness) {
      trace.terminal_status = TerminalStatus::StrictlyFeasibleOnFace;
      trace.witness = std::move(witness);
      break;
    }
    if (!cert) {
      trace.terminal_status = TerminalStatus::Undetermined;
      trace.diagnostic = note.empty() ? "auxiliary solver returned no verdict" : note;
      break;
    }

    *cert = polish_certificate(cur, std::move(*cert), tol);
    const Vector wamb = cur.A.transpose() * cert->y;
    FaceRep after;
    try {
      after = intersect_with_exposed(cur.cone, cur.current_face,
                                     point_from_ambient(cur.cone, wamb), tol);
    } catch (const std::invalid_argument& e) {
      trace.terminal_status = TerminalStatus::Undetermined;
      trace.diagnostic = std::string("face intersection rejected a verified multiplier: ") +
                         e.what();
      break;
    }
    const int drop = face_dimension(cur.current_face) - face_dimension(after);
    if (drop < 1) {
      trace.terminal_status = TerminalStatus::Undetermined;
      trace.diagnostic = "verified multiplier produced no dimension drop";
      break;
    }
    if (face_dimension(after) > 0) after = refine_face(cur, std::move(after), tol);

    ReductionStep step;
    step.index = k;
    step.certificate = *cert;
    step.face_before = cur.current_face;
    step.face_after = after;
    step.dim_drop = drop;
    trace.steps.push_back(std::move(step));
    trace.multipliers.push_back(cert->y);
    cur.current_face = after;

    if (face_dimension(after) == 0) {
      // Zero face: the only candidate point is the origin; decide directly.
      if (sup_norm(sys.b) <= tol.zero_tol * std::max(1.0, sup_norm(sys.b))) {
        trace.terminal_status = TerminalStatus::StrictlyFeasibleOnFace;
        trace.witness = zero_point(sys.cone);
      } else {
        trace.terminal_status = TerminalStatus::Undetermined;
        trace.diagnostic = "reduction reached the zero face with a nonzero right-hand side";
      }
      break;
    }
  }

  trace.terminal_face = cur.current_face;
  return trace;
}

ReductionTrace run_fr(const ConicSystem& sys, Strategy strategy, unsigned seed,
                      int max_iters) {
  FrOptions opt;
  opt.strategy = strategy;
  opt.seed = seed;
  opt.max_iters = max_iters;
  return run_fr(sys, opt);
}

std::optional<int> singularity_degree_upper(const ReductionTrace& trace) {
  if (trace.terminal_status != TerminalStatus::StrictlyFeasibleOnFace) return std::nullopt;
  return static_cast<int>(trace.steps.size());
}

int maxsd_estimate(const ConicSystem& sys, unsigned seed, const AuxOptions& aux) {
  int best = 0;
  for (unsigned s = 0; s < 4; ++s) {
    FrOptions opt;
    opt.strategy = Strategy::MinimalDrop;
    opt.seed = seed + s;
    opt.aux = aux;
    const ReductionTrace t = run_fr(sys, opt);
    best = std::max(best, static_cast<int>(t.steps.size()));
  }
  return best;
}

IpsResult compute_ips(const ConicSystem& sys, const FaceRep& terminal_face) {
  const Matrix B = sys.A * face_span_basis(sys.cone, terminal_face);
  IpsResult r;
  const int rank = greedy_rank_complement(B, spectral_norm(sys.A), &r.redundant_indices);
  r.ips = sys.m() - rank;
  return r;
}

IpsResult compute_ips(const ConicSystem& sys, const ReductionTrace& trace) {
  return compute_ips(sys, trace.terminal_face);
}

TraceCheck verify_trace(const ConicSystem& sys, const ReductionTrace& trace,
                        const std::vector<Point>& feasible_samples) {
  TraceCheck chk;
  const TolerancePolicy tol;
  std::ostringstream detail;

  const int k = static_cast<int>(trace.steps.size());
  if (k > 0) {
    Matrix Y(k, sys.m());
    for (int i = 0; i < k; ++i) Y.row(i) = trace.multipliers[i].transpose();
    if (numerical_rank(Y, tol) != k) {
      chk.multipliers_independent = false;
      detail << "multiplier matrix rank " << numerical_rank(Y, tol) << " < " << k << "; ";
    }
  }

  ConicSystem cur = sys;
  for (const ReductionStep& step : trace.steps) {
    cur.current_face = step.face_before;
    if (!try_verify(cur, step.certificate.y, tol)) {
      chk.certificates_valid = false;
      detail << "step " << step.index << " certificate failed re-verification; ";
    }
    if (face_dimension(step.face_after) >= face_dimension(step.face_before)) {
      chk.certificates_valid = false;
      detail << "step " << step.index << " face dimension did not drop; ";
    }
    cur.current_face = step.face_after;
  }

  const Matrix B = sys.A * face_span_basis(sys.cone, trace.terminal_face);
  const int rank =
      B.cols() > 0 ? numerical_rank_ref(B, spectral_norm(sys.A), kFaceRankRelTol) : 0;
  if (rank > sys.m() - k) {
    chk.image_shrinkage = false;
    detail << "terminal image rank " << rank << " > m - steps = " << sys.m() - k << "; ";
  }

  for (size_t pi = 0; pi < feasible_samples.size(); ++pi) {
    const Vector x = point_to_ambient(sys.cone, feasible_samples[pi]);
    const double xs = std::max(1.0, x.norm());
    for (const ReductionStep& step : trace.steps) {
      const Vector w = sys.A.transpose() * step.certificate.y;
      if (std::abs(w.dot(x)) > 1e-6 * xs * std::max(1.0, w.norm())) {
        chk.points_preserved = false;
        detail << "sample " << pi << " pairs " << w.dot(x) << " with step "
               << step.index << " multiplier; ";
        break;
      }
    }
    if (!face_contains(sys.cone, trace.terminal_face, feasible_samples[pi], tol)) {
      chk.points_preserved = false;
      detail << "sample " << pi << " left the terminal face; ";
    }
    if (!chk.points_preserved) break;
  }

  chk.detail = detail.str();
  return chk;
}

SingularityDiagnostics diagnose(const ConicSystem& sys, const FrOptions& opt,
                                ReductionTrace* greedy_out) {
  SingularityDiagnostics diag;

  FrOptions gopt = opt;
  gopt.strategy = Strategy::Greedy;
  ReductionTrace greedy = run_fr(sys, gopt);
  diag.sd_upper = singularity_degree_upper(greedy);
  if (sys.cone.pure(ConeClass::Orthant) && diag.sd_upper)
    diag.sd_exact_lp = std::min(1, *diag.sd_upper);

  int longest = static_cast<int>(greedy.steps.size());
  IpsResult best_ips = compute_ips(sys, greedy.terminal_face);
  auto fold_face = [&](const FaceRep& f) {
    const IpsResult r = compute_ips(sys, f);
    if (r.ips > best_ips.ips) best_ips = r;
  };

  for (unsigned s = 0; s < 4; ++s) {
    FrOptions mopt = opt;
    mopt.strategy = Strategy::MinimalDrop;
    mopt.seed = opt.seed + s;
    const ReductionTrace t = run_fr(sys, mopt);
    longest = std::max(longest, static_cast<int>(t.steps.size()));
    fold_face(t.terminal_face);
  }

  diag.maxsd_estimate = longest;
  diag.ips = best_ips.ips;
  diag.redundant_indices = best_ips.redundant_indices;
  if (greedy_out) *greedy_out = std::move(greedy);
  return diag;
}

}  // namespace conereg
