#pragma once

#include <string>
#include <vector>

#include "rbflow/eigensolver.hpp"
#include "rbflow/error.hpp"
#include "rbflow/families.hpp"
#include "rbflow/flow.hpp"

namespace rbflow {

// Flat "key = value" run description; '#' starts a comment.
//
//   family            einstein_sphere | conformal_torus | conformal_sphere | su2   (required)
//   n                 dimension                                                   (required)
//   rho               flow parameter                                              (required)
//   c                 coupling of -Delta + cR (default 0)
//   resolution        torus grid size / icosphere subdivision
//   preset            zero | constant | cos_x | cos_xy | random_band
//   amplitude, seed   preset parameters
//   s0                Einstein scale;  su2_a, su2_b, su2_c  SU(2) triple
//   dt, dt_policy (fixed | cfl_adaptive), t_max, blowup_threshold, sample_interval, min_dt
//   eigenpairs        comma list of lambda0, lambda1 (or none)
//   lemma32, fd       booleans
//   tol, max_iter     eigensolver controls
//   a                 constant of the lambda1 hypotheses
//   audits            comma list of audit names, or all
//   stride            monitor every stride-th sample
//   divergence_bound  lambda1 level that must be exceeded at blow-up
//   out, formats      output directory; comma list of csv, json, plot
struct RunConfig {
  FamilySpec family;
  FlowParams flow;
  SolverOptions solver;
  bool lambda0 = true;
  bool lambda1 = true;
  bool lemma32 = true;
  bool finite_differences = false;
  double a = 0.0;
  std::vector<std::string> audits;
  int stride = 1;
  double divergence_bound = 1e3;
  std::string out_dir;
  std::vector<std::string> formats{"csv", "json"};

  bool operator==(const RunConfig&) const = default;
};

struct ConfigIssue {
  int line;  // 0 when the problem is not tied to one line
  std::string message;
};

class ConfigParseError : public ConfigError {
 public:
  explicit ConfigParseError(std::vector<ConfigIssue> issues);
  [[nodiscard]] const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// Validates every key before returning; throws ConfigParseError with all issues.
RunConfig parse_config(const std::string& text);
// Inverse of parse_config; numbers carry 17 significant digits.
std::string render_config(const RunConfig& config);

// Replaces (or appends) one key in config text.
std::string override_key(const std::string& text, const std::string& key, const std::string& value);

std::string format_number(double x);

}  // namespace rbflow
