#pragma once

// Report assembly: collects verdicts, traces, and probe results into a
// machine-readable JSON document with a stable field order (identical
// inputs, seed, and version produce identical bytes) and a plain-text
// rendering of the same content.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conereg/auxcert.hpp"
#include "conereg/facered.hpp"
#include "conereg/io.hpp"
#include "conereg/ipmprobe.hpp"
#include "conereg/regularity.hpp"

namespace conereg {

class ReportBuilder {
 public:
  ReportBuilder(const ConicSystem& sys, ProblemFormat format, unsigned seed,
                const TolerancePolicy& tol);
  ~ReportBuilder();
  ReportBuilder(ReportBuilder&&) noexcept;
  ReportBuilder& operator=(ReportBuilder&&) noexcept;

  void add_slater(const SlaterVerdict& v);
  void add_reduction(const ReductionTrace& t);
  void add_singularity(const SingularityDiagnostics& d);
  void add_degeneracy(const std::vector<DegeneracyVerdict>& verdicts,
                      const std::vector<std::string>& point_errors,
                      const std::string& point_source);
  void add_ipm_probe(bool applicable, const std::string& note,
                     const std::optional<LimitSingularity>& limit,
                     const std::vector<double>& condition_path,
                     const std::vector<double>& embedding_residuals);
  void add_perturbation(const PerturbationCertificate& pc);
  void add_note(const std::string& key, const std::string& text);

  std::string json_string() const;
  std::string text() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace conereg
