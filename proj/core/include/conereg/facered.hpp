#pragma once

// Facial-reduction driver: iterate auxiliary certificate solves, intersect
// the cone with (A*y)^perp, and restrict the equalities to the shrinking
// face until strict feasibility holds there (or the solver cannot decide).
// Also derives the singularity diagnostics: an upper bound on the minimum
// reduction length, a lower-bound estimate of the maximum length, and the
// count of equalities that become redundant on the terminal face span.

#include <optional>
#include <string>
#include <vector>

#include "conereg/auxcert.hpp"
#include "conereg/cones.hpp"
#include "conereg/numkernel.hpp"

namespace conereg {

// One accepted reduction: the verified multiplier and the face shrink it
// caused. dim_drop >= 1 always (a trivial step is never recorded).
struct ReductionStep {
  int index = 0;  // 1-based step number
  ExposingCertificate certificate;
  FaceRep face_before;
  FaceRep face_after;
  int dim_drop = 0;
};

enum class TerminalStatus { StrictlyFeasibleOnFace, Undetermined };

struct ReductionTrace {
  std::vector<ReductionStep> steps;
  FaceRep terminal_face;
  TerminalStatus terminal_status = TerminalStatus::Undetermined;
  std::vector<Vector> multipliers;   // y of each step, in order
  std::optional<Point> witness;      // relint point of the terminal face (if found)
  bool iteration_capped = false;
  std::string diagnostic;            // why the loop stopped without a witness
};

// Greedy takes each solver certificate as-is; MinimalDrop picks, from a pool
// of verified multipliers, one whose exposed intersection shrinks the face
// dimension the least, lengthening the chain toward its maximum.
enum class Strategy { Greedy, MinimalDrop };

struct FrOptions {
  Strategy strategy = Strategy::Greedy;
  unsigned seed = 1;
  int max_iters = 64;
  AuxOptions aux;  // tolerances, solver knobs, user-supplied candidates
};

// The reduction loop. Candidates from opt.aux are tried verbatim before any
// solver at every step. Internally the equalities are row-normalized for the
// solvers; every certificate is mapped back and re-verified against the
// original scaling before it is accepted into the trace.
ReductionTrace run_fr(const ConicSystem& sys, const FrOptions& opt = {});
ReductionTrace run_fr(const ConicSystem& sys, Strategy strategy, unsigned seed,
                      int max_iters = 64);

// System with the equalities re-expressed on an orthonormal basis of the
// face span and the cone replaced by the face-restricted classes; b is kept.
ConicSystem restrict_system(const ConicSystem& sys, const FaceRep& f);

// Number of steps of a decided trace; an upper bound on the minimum
// reduction length. No value when the trace ended Undetermined.
std::optional<int> singularity_degree_upper(const ReductionTrace& trace);

// Maximum trace length over MinimalDrop runs with several derived seeds;
// a lower bound on the maximum nontrivial reduction length.
int maxsd_estimate(const ConicSystem& sys, unsigned seed, const AuxOptions& aux = {});

// Equality-redundancy count on the terminal face: m minus the numerical rank
// of A restricted to the face span, plus the 1-based indices of the rows
// outside a greedy (ascending row order) maximal independent subset.
struct IpsResult {
  int ips = 0;
  std::vector<int> redundant_indices;
};
IpsResult compute_ips(const ConicSystem& sys, const ReductionTrace& trace);
IpsResult compute_ips(const ConicSystem& sys, const FaceRep& terminal_face);

// Post-hoc audit of a trace against the system it came from: multiplier
// independence, certificate re-verification, image shrinkage on the terminal
// span, and preservation of supplied feasible points across every step.
struct TraceCheck {
  bool multipliers_independent = true;
  bool certificates_valid = true;
  bool image_shrinkage = true;  // rank(A * terminal span basis) <= m - steps
  bool points_preserved = true;
  std::string detail;  // first failed check, with its measured residual

  bool ok() const {
    return multipliers_independent && certificates_valid && image_shrinkage &&
           points_preserved;
  }
};
TraceCheck verify_trace(const ConicSystem& sys, const ReductionTrace& trace,
                        const std::vector<Point>& feasible_samples = {});

// Aggregated singularity diagnostics for reports.
struct SingularityDiagnostics {
  std::optional<int> sd_upper;     // greedy trace length; absent if Undetermined
  std::optional<int> sd_exact_lp;  // pure-orthant systems: min(1, sd_upper)
  int maxsd_estimate = 0;          // max trace length over all runs
  int ips = 0;                     // max redundancy count over reached faces
  std::vector<int> redundant_indices;  // 1-based, from the face attaining ips
};

// Runs a greedy trace plus multi-seed MinimalDrop traces and aggregates.
// ips is maximized over every terminal face reached, which keeps the chain
// ips >= maxsd_estimate >= sd indicator intact even when some runs stall.
SingularityDiagnostics diagnose(const ConicSystem& sys, const FrOptions& opt = {},
                                ReductionTrace* greedy_out = nullptr);

}  // namespace conereg
