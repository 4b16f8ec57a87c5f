#include "conereg/report.hpp"

#include <sstream>

#include <json.hpp>

#include "conereg/version.hpp"

namespace conereg {

namespace {

using nlohmann::ordered_json;

ordered_json vec_to_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

const char* cone_class_name(ConeClass k) {
  switch (k) {
    case ConeClass::Orthant: return "orthant";
    case ConeClass::Psd: return "psd";
    case ConeClass::SecondOrder: return "soc";
    case ConeClass::Exponential: return "exp";
  }
  return "orthant";
}

ordered_json face_to_json(const FaceRep& f) {
  ordered_json out;
  out["dim"] = face_dimension(f);
  ordered_json blocks = ordered_json::array();
  for (const BlockFace& bf : f.blocks) {
    ordered_json b;
    if (const auto* of = std::get_if<OrthantFace>(&bf)) {
      b["class"] = "orthant";
      b["alive"] = of->alive;
    } else if (const auto* pf = std::get_if<PsdFace>(&bf)) {
      b["class"] = "psd";
      b["rank"] = static_cast<int>(pf->basis.cols());
    } else if (const auto* sf = std::get_if<SocFace>(&bf)) {
      b["class"] = "soc";
      b["kind"] = sf->kind == SocFace::Kind::Full   ? "full"
                  : sf->kind == SocFace::Kind::Ray ? "ray"
                                                   : "zero";
      if (sf->kind == SocFace::Kind::Ray) b["dir"] = vec_to_json(sf->dir);
    } else if (const auto* ef = std::get_if<ExpFace>(&bf)) {
      b["class"] = "exp";
      b["kind"] = ef->kind == ExpFace::Kind::Full        ? "full"
                  : ef->kind == ExpFace::Kind::Halfplane ? "halfplane"
                  : ef->kind == ExpFace::Kind::Ray       ? "ray"
                                                         : "zero";
      if (ef->kind == ExpFace::Kind::Ray) b["dir"] = vec_to_json(ef->dir);
    }
    blocks.push_back(b);
  }
  out["blocks"] = blocks;
  return out;
}

ordered_json cert_to_json(const ExposingCertificate& c) {
  ordered_json out;
  out["y"] = vec_to_json(c.y);
  out["min_dual_eig_or_slack"] = c.min_dual_eig_or_slack;
  out["b_pairing"] = c.b_pairing;
  out["span_component"] = c.span_component;
  out["nontrivial"] = c.nontrivial;
  return out;
}

ordered_json point_to_json(const ConeSpec& spec, const Point& p) {
  return vec_to_json(point_to_ambient(spec, p));
}

}  // namespace

struct ReportBuilder::Impl {
  ordered_json j;
  ConeSpec spec;
};

ReportBuilder::ReportBuilder(const ConicSystem& sys, ProblemFormat format, unsigned seed,
                             const TolerancePolicy& tol)
    : impl_(new Impl) {
  impl_->spec = sys.cone;
  ordered_json& j = impl_->j;
  j["tool"] = {{"name", "conereg"}, {"version", kVersion}};
  ordered_json prob;
  prob["name"] = sys.name;
  prob["format"] = to_string(format);
  prob["m"] = sys.m();
  prob["dim"] = sys.dim();
  ordered_json cones = ordered_json::array();
  for (const ConeBlock& blk : sys.cone.blocks)
    cones.push_back({{"type", cone_class_name(blk.kind)}, {"n", blk.n}});
  prob["cones"] = cones;
  prob["surjective"] = sys.surjective;
  j["problem"] = prob;
  j["seed"] = seed;
  j["tolerances"] = {{"rank_rel_tol", tol.rank_rel_tol},
                     {"psd_tol", tol.psd_tol},
                     {"zero_tol", tol.zero_tol}};
}

ReportBuilder::~ReportBuilder() = default;
ReportBuilder::ReportBuilder(ReportBuilder&&) noexcept = default;
ReportBuilder& ReportBuilder::operator=(ReportBuilder&&) noexcept = default;

void ReportBuilder::add_slater(const SlaterVerdict& v) {
  ordered_json s;
  s["status"] = to_string(v.status);
  if (v.certificate) s["certificate"] = cert_to_json(*v.certificate);
  if (v.witness) s["witness"] = point_to_json(impl_->spec, *v.witness);
  if (!v.diagnostic.empty()) s["diagnostic"] = v.diagnostic;
  impl_->j["slater"] = s;
}

void ReportBuilder::add_reduction(const ReductionTrace& t) {
  ordered_json r;
  r["num_steps"] = static_cast<int>(t.steps.size());
  ordered_json steps = ordered_json::array();
  for (const ReductionStep& st : t.steps) {
    ordered_json s;
    s["index"] = st.index;
    s["certificate"] = cert_to_json(st.certificate);
    s["dim_before"] = face_dimension(st.face_before);
    s["dim_after"] = face_dimension(st.face_after);
    s["dim_drop"] = st.dim_drop;
    steps.push_back(s);
  }
  r["steps"] = steps;
  r["terminal_face"] = face_to_json(t.terminal_face);
  r["terminal_status"] = t.terminal_status == TerminalStatus::StrictlyFeasibleOnFace
                             ? "strictly_feasible_on_face"
                             : "undetermined";
  if (t.witness) r["witness"] = point_to_json(impl_->spec, *t.witness);
  r["iteration_capped"] = t.iteration_capped;
  if (!t.diagnostic.empty()) r["diagnostic"] = t.diagnostic;
  impl_->j["reduction"] = r;
}

void ReportBuilder::add_singularity(const SingularityDiagnostics& d) {
  ordered_json s;
  if (d.sd_upper)
    s["sd_upper"] = *d.sd_upper;
  else
    s["sd_upper"] = nullptr;
  if (d.sd_exact_lp)
    s["sd_exact_lp"] = *d.sd_exact_lp;
  else
    s["sd_exact_lp"] = nullptr;
  s["maxsd_estimate"] = d.maxsd_estimate;
  s["ips"] = d.ips;
  s["redundant_indices"] = d.redundant_indices;
  impl_->j["singularity"] = s;
}

void ReportBuilder::add_degeneracy(const std::vector<DegeneracyVerdict>& verdicts,
                                   const std::vector<std::string>& point_errors,
                                   const std::string& point_source) {
  ordered_json d;
  d["point_source"] = point_source;
  ordered_json pts = ordered_json::array();
  for (const DegeneracyVerdict& v : verdicts) {
    ordered_json p;
    p["point"] = point_to_json(impl_->spec, v.point);
    p["degenerate"] = v.degenerate;
    p["method"] = to_string(v.method);
    if (v.witness) p["witness"] = point_to_json(impl_->spec, *v.witness);
    if (v.witness_multiplier) p["witness_multiplier"] = vec_to_json(*v.witness_multiplier);
    p["pairing"] = v.pairing;
    p["conservative"] = v.conservative;
    pts.push_back(p);
  }
  d["points"] = pts;
  if (!point_errors.empty()) d["rejected_points"] = point_errors;
  impl_->j["degeneracy"] = d;
}

void ReportBuilder::add_ipm_probe(bool applicable, const std::string& note,
                                  const std::optional<LimitSingularity>& limit,
                                  const std::vector<double>& condition_path,
                                  const std::vector<double>& embedding_residuals) {
  ordered_json p;
  p["applicable"] = applicable;
  if (!note.empty()) p["note"] = note;
  if (limit) {
    p["limit_singularity"] = {{"residual", limit->residual},
                              {"singular", limit->singular},
                              {"premise_residual", limit->premise_residual},
                              {"premise_ok", limit->premise_ok}};
  }
  if (!condition_path.empty()) p["condition_trajectory"] = condition_path;
  if (!embedding_residuals.empty()) p["embedding_residuals"] = embedding_residuals;
  impl_->j["ipm_probe"] = p;
}

void ReportBuilder::add_perturbation(const PerturbationCertificate& pc) {
  ordered_json p;
  p["y"] = vec_to_json(pc.y);
  p["epsilon"] = pc.epsilon;
  p["pairing"] = pc.pairing;
  p["oracle"] = to_string(pc.oracle);
  p["consistent"] = pc.consistent;
  if (!pc.detail.empty()) p["detail"] = pc.detail;
  impl_->j["perturbation"] = p;
}

void ReportBuilder::add_note(const std::string& key, const std::string& text) {
  impl_->j[key] = text;
}

std::string ReportBuilder::json_string() const { return impl_->j.dump(2) + "\n"; }

namespace {

void render(std::ostream& os, const ordered_json& j, int indent) {
  const std::string pad(indent, ' ');
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object() || value.is_array()) {
        os << pad << key << ":\n";
        render(os, value, indent + 2);
      } else {
        os << pad << key << ": " << value.dump() << "\n";
      }
    }
  } else if (j.is_array()) {
    // Flat numeric arrays print on one line; structured arrays item by item.
    const bool flat = std::all_of(j.begin(), j.end(),
                                  [](const ordered_json& v) { return !v.is_structured(); });
    if (flat) {
      os << pad << j.dump() << "\n";
    } else {
      int idx = 0;
      for (const ordered_json& v : j) {
        os << pad << "- [" << idx++ << "]\n";
        render(os, v, indent + 2);
      }
    }
  } else {
    os << pad << j.dump() << "\n";
  }
}

}  // namespace

std::string ReportBuilder::text() const {
  std::ostringstream os;
  render(os, impl_->j, 0);
  return os.str();
}

}  // namespace conereg
