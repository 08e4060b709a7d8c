#include "rbflow/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rbflow/error.hpp"

namespace rbflow {

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(10);
  s << x;
  return s.str();
}

bool at_least(double value, double threshold) {
  return value >= threshold - 1e-12 * std::max(1.0, std::abs(threshold));
}

double dof_distance(const MetricDof& a, const MetricDof& b) {
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, EinsteinScale>) {
          return std::abs(x.s - y.s) / std::max(1.0, std::abs(x.s));
        } else if constexpr (std::is_same_v<T, Su2Triple>) {
          return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c)});
        } else {
          return (x.u - y.u).cwiseAbs().maxCoeff();
        }
      },
      a);
}

struct Series {
  std::vector<double> t;
  std::vector<double> v;
};

// Successive values must increase by more than 1e-10 (1 + |value|).
AuditVerdict strictly_increasing(const std::string& name, const Series& s, bool all_static) {
  AuditVerdict out{name, Verdict::Skipped, ""};
  if (s.v.size() < 2) {
    out.detail = "fewer than two values";
    return out;
  }
  if (all_static) {
    out.verdict = Verdict::Static;
    out.detail = "metric unchanged along the run";
    return out;
  }
  for (std::size_t k = 1; k < s.v.size(); ++k) {
    const double step = s.v[k] - s.v[k - 1];
    if (!(step > 1e-10 * (1.0 + std::abs(s.v[k - 1])))) {
      out.verdict = Verdict::Fail;
      out.detail = "not strictly increasing between t=" + fmt(s.t[k - 1]) + " and t=" + fmt(s.t[k]) +
                   " (" + fmt(s.v[k - 1]) + " -> " + fmt(s.v[k]) + ")";
      return out;
    }
  }
  out.verdict = Verdict::Pass;
  out.detail = std::to_string(s.v.size()) + " samples strictly increasing";
  return out;
}

bool all_static(const std::vector<MonitorRecord>& records) {
  return std::all_of(records.begin(), records.end(), [](const MonitorRecord& r) {
    auto it = r.flags.find("static");
    return it != r.flags.end() && it->second;
  });
}

const Sample& sample_at_or_before(const Trajectory& traj, double t) {
  const auto& samples = traj.samples;
  const double tiny = 1e-13 * std::max(1.0, std::abs(t));
  auto it = std::upper_bound(samples.begin(), samples.end(), t + tiny,
                             [](double value, const Sample& s) { return value < s.t; });
  if (it == samples.begin()) throw DomainError("time precedes trajectory");
  return *std::prev(it);
}

// Central second differences on the periodic grid.
struct GridDerivatives {
  double x, y, xx, yy, xy;
};

GridDerivatives grid_derivatives(const BaseGeometry& geo, const Eigen::VectorXd& q, int ix, int iy) {
  const double h = geo.spacing;
  auto at = [&](int dx, int dy) { return q[geo.grid_index(ix + dx, iy + dy)]; };
  GridDerivatives d{};
  d.x = (at(1, 0) - at(-1, 0)) / (2.0 * h);
  d.y = (at(0, 1) - at(0, -1)) / (2.0 * h);
  d.xx = (at(1, 0) - 2.0 * at(0, 0) + at(-1, 0)) / (h * h);
  d.yy = (at(0, 1) - 2.0 * at(0, 0) + at(0, -1)) / (h * h);
  d.xy = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
  return d;
}

}  // namespace

RescaleParams rescale_params(double rho, double c, int n, double R0_max) {
  if (!(rho < 1.0)) throw DomainError("rescale_params: rho must be < 1");
  if (!(R0_max > 0.0)) throw DomainError("rescale_params: max R(0) must be > 0");
  RescaleParams rp{};
  rp.eps_max_R0 = R0_max;
  rp.T_prime = 1.0 / (2.0 * (1.0 - rho) * R0_max);
  rp.alpha = (2.0 * c * (1.0 - 2.0 * (n - 1) * rho) + n * rho - 1.0) / (2.0 * (1.0 - rho));
  return rp;
}

double rescaled_quantity(double lambda0, double t, const RescaleParams& rp) {
  if (!(t < rp.T_prime)) throw DomainError("rescaled_quantity: t must be < T'");
  return std::pow(rp.T_prime - t, -rp.alpha) * lambda0;
}

double lemma31_A(int n, double rho, double c) {
  return -1.0 + n * rho + 2.0 * c * (1.0 - 2.0 * (n - 1) * rho);
}

double lemma32_k(int n, double rho) {
  const double m = (n - 1) * rho;
  if (1.0 - m == 0.0) throw DomainError("lemma32: 1 - (n-1) rho vanishes");
  return (1.0 - 2.0 * m) / (1.0 - m);
}

double lemma32_weight(int n, double rho) {
  const double m = (n - 1) * rho;
  if (2.0 - 4.0 * m == 0.0) throw DomainError("lemma32: 2 - 4(n-1) rho vanishes");
  return (1.0 - m) * (1.0 - m) / (2.0 - 4.0 * m);
}

EigenMoments eigen_moments(const MetricState& state, const CurvatureReport& report,
                           const SpectralResult& eig) {
  EigenMoments m;
  const int n = state.family.n;
  if (!state.discretized()) {
    if (!std::holds_alternative<EinsteinScale>(state.dof)) {
      throw UnsupportedFamily("eigen moments need an Einstein or conformal state");
    }
    const double R = report.R[0];
    m.f2 = eig.f.size() == 1 ? eig.f[0] * eig.f[0] * volume(state) : 1.0;
    m.Rf2 = R * m.f2;
    m.R2f2 = R * R * m.f2;
    m.Ric2f2 = report.ric_norm_sq[0] * m.f2;
    if (eig.f.size() == 0) {
      // Closed-form spherical harmonic: int |grad f|^2 = lambda for -Delta.
      m.grad2 = eig.lambda;
      m.R_grad2 = R * m.grad2;
      m.Ric_grad = (R / n) * m.grad2;
    }
    return m;
  }
  const auto& geo = state.base();
  const Eigen::VectorXd w = volume_weights(state);
  const Eigen::VectorXd f2 = eig.f.cwiseProduct(eig.f);
  const Eigen::VectorXd& R = report.R;
  m.f2 = w.dot(f2);
  m.Rf2 = w.dot(R.cwiseProduct(f2));
  m.R2f2 = w.dot(R.cwiseProduct(R).cwiseProduct(f2));
  m.Ric2f2 = w.dot(report.ric_norm_sq.cwiseProduct(f2));
  m.grad2 = geo.dirichlet_form(eig.f, eig.f);
  // |grad f|_g^2 dv_g is conformally invariant in 2-D, so the base edge form applies.
  m.R_grad2 = geo.weighted_dirichlet_energy(R, eig.f);
  m.Ric_grad = 0.5 * m.R_grad2;
  return m;
}

double hessian_square_term(const MetricState& state, const CurvatureReport& report,
                           const SpectralResult& eig, double k) {
  if (std::holds_alternative<EinsteinScale>(state.dof)) {
    if (eig.f.size() != 1) throw UnsupportedFamily("Einstein Hessian term needs a constant eigenfunction");
    return report.ric_norm_sq[0] * eig.f[0] * eig.f[0] * volume(state);
  }
  if (state.family.kind != FamilyKind::ConformalTorus2D) {
    throw UnsupportedFamily("Hessian of log f is only available on Einstein states and torus grids");
  }
  if ((eig.f.array() <= 0.0).any()) throw NumericError("Hessian term needs a positive eigenfunction");
  const auto& geo = state.base();
  const auto& u = std::get<ConformalFactor>(state.dof).u;
  const Eigen::VectorXd phi = eig.f.array().log().matrix();
  const Eigen::VectorXd w = volume_weights(state);
  double acc = 0.0;
  for (int iy = 0; iy < geo.grid_n; ++iy) {
    for (int ix = 0; ix < geo.grid_n; ++ix) {
      const int v = geo.grid_index(ix, iy);
      const auto dp = grid_derivatives(geo, phi, ix, iy);
      const auto du = grid_derivatives(geo, u, ix, iy);
      // Hessian of g = e^{2u} g0 in base coordinates:
      // phi_ij - u_i phi_j - u_j phi_i + delta_ij <du, dphi>.
      const double cross = du.x * dp.x + du.y * dp.y;
      const double hxx = dp.xx - 2.0 * du.x * dp.x + cross;
      const double hyy = dp.yy - 2.0 * du.y * dp.y + cross;
      const double hxy = dp.xy - du.x * dp.y - du.y * dp.x;
      const double e2u = std::exp(2.0 * u[v]);
      const double ric = 0.5 * report.R[v] * e2u;
      const double txx = ric - 2.0 * k * hxx;
      const double tyy = ric - 2.0 * k * hyy;
      const double txy = -2.0 * k * hxy;
      const double norm_sq = (txx * txx + tyy * tyy + 2.0 * txy * txy) / (e2u * e2u);
      acc += w[v] * norm_sq * eig.f[v] * eig.f[v];
    }
  }
  return acc;
}

namespace {

void require_converged(const SpectralResult& eig, Constraint expected, const char* who) {
  if (!eig.converged) throw NumericError(std::string(who) + ": eigenpair not converged");
  if (eig.constraint != expected) throw DomainError(std::string(who) + ": wrong eigenpair kind");
}

}  // namespace

double lemma31_rhs(const MetricState& state, const SpectralResult& eig, const FlowParams& params) {
  require_converged(eig, Constraint::Lowest, "lemma31_rhs");
  const int n = state.family.n;
  const double rho = params.rho;
  const double c = params.c;
  const auto rep = curvature_report(state);
  const auto m = eigen_moments(state, rep, eig);
  const double A = lemma31_A(n, rho, c);
  return (A - 2.0 * rho) * c * m.R2f2 + (A - 2.0 * rho) * m.R_grad2 - A * eig.lambda * m.Rf2 +
         2.0 * m.Ric_grad + 2.0 * c * m.Ric2f2;
}

double lemma32_rhs(const MetricState& state, const SpectralResult& eig, const FlowParams& params) {
  require_converged(eig, Constraint::Lowest, "lemma32_rhs");
  const int n = state.family.n;
  const double rho = params.rho;
  const double c = params.c;
  const auto rep = curvature_report(state);
  const auto m = eigen_moments(state, rep, eig);
  const double weight = lemma32_weight(n, rho);
  const double square = hessian_square_term(state, rep, eig, lemma32_k(n, rho));
  return weight * square + (2.0 * c - weight) * m.Ric2f2 - rho * eig.lambda * m.Rf2 -
         rho * c * m.R2f2 - rho * m.R_grad2;
}

double lemma41_rhs(const MetricState& state, const SpectralResult& eig, const FlowParams& params) {
  require_converged(eig, Constraint::FirstNonzeroMeanZero, "lemma41_rhs");
  const int n = state.family.n;
  const double rho = params.rho;
  const auto rep = curvature_report(state);
  const auto m = eigen_moments(state, rep, eig);
  return 2.0 * m.Ric_grad + (1.0 - n * rho) * eig.lambda * m.Rf2 -
         ((2 - n) * rho + 1.0) * m.R_grad2;
}

double eigenvalue_at(const Trajectory& traj, EigenTarget which, double t, const SolverOptions& opts) {
  const Sample& base = sample_at_or_before(traj, t);
  const MetricState state =
      std::abs(base.t - t) <= 1e-13 * std::max(1.0, std::abs(t)) ? base.state
                                                                    : advance(base.state, traj.params, t);
  if (which == EigenTarget::Lambda0) {
    return lowest_eigenpair(build_operators(state, traj.params.c), opts).lambda;
  }
  return first_nonzero_eigenpair(state, opts).lambda;
}

double default_fd_step(const Trajectory& traj, double t) {
  return std::min(1e-4, (traj.t_stop - t) / 10.0);
}

double fd_eigen_derivative(const Trajectory& traj, EigenTarget which, double t, double h,
                           const SolverOptions& opts) {
  if (traj.samples.empty()) throw DomainError("fd_eigen_derivative: empty trajectory");
  if (!(h > 0.0)) throw DomainError("fd_eigen_derivative: h must be > 0");
  if (t + h >= traj.t_stop) throw DomainError("fd_eigen_derivative: t + h beyond t_stop");
  const double t0 = traj.samples.front().t;
  if (t - h < t0) {
    return (eigenvalue_at(traj, which, t + h, opts) - eigenvalue_at(traj, which, t, opts)) / h;
  }
  return (eigenvalue_at(traj, which, t + h, opts) - eigenvalue_at(traj, which, t - h, opts)) /
         (2.0 * h);
}

bool nonnegative_curvature_operator(const MetricState& state, const CurvatureReport& report) {
  if (std::holds_alternative<EinsteinScale>(state.dof)) return true;
  if (const auto* m = std::get_if<Su2Triple>(&state.dof)) {
    const auto K = milnor_sectional_curvatures(*m);
    return K[0] >= 0.0 && K[1] >= 0.0 && K[2] >= 0.0;
  }
  // Dimension 2: the curvature operator is multiplication by R/2.
  return report.R_min >= 0.0;
}

HypothesisReport hypothesis_check(const FlowParams& params, const MetricState& state0, double a) {
  HypothesisReport h;
  const int n = state0.family.n;
  const double rho = params.rho;
  const double c = params.c;
  h.n = n;
  h.rho = rho;
  h.c = c;
  h.a = a;
  const double limit = rho_limit(n);
  h.prop_admissibility = rho < limit;
  h.rho_within_limit = rho <= limit;

  const auto rep = curvature_report(state0);
  h.R0_min = rep.R_min;
  h.R0_max = rep.R_max;
  h.pinch0 = rep.pinch;
  h.nonneg_curvature_operator = nonnegative_curvature_operator(state0, rep);
  h.nonneg_ricci = rep.ric_min_eigen.minCoeff() >= 0.0;
  h.positive_ricci = rep.ric_min_eigen.minCoeff() > 0.0;

  const double m = (n - 1) * rho;
  h.thm12_case1.threshold = (1.0 - m) * (1.0 - m) / (4.0 - 8.0 * m);
  h.thm12_case1.holds = rho <= 0.0 && at_least(c, h.thm12_case1.threshold) && rep.R_min >= 0.0;

  const double denom2 = 2.0 * (1.0 - 2.0 * m);
  h.thm12_case2.threshold =
      denom2 > 0.0 ? (1.0 - (n - 2) * rho) / denom2 : std::numeric_limits<double>::infinity();
  const bool curvature_ok = h.nonneg_curvature_operator || (n == 3 && h.nonneg_ricci);
  h.thm12_case2.holds = rho > 0.0 && rho <= limit && at_least(c, h.thm12_case2.threshold) &&
                        std::isfinite(h.thm12_case2.threshold) && curvature_ok;
  if (h.thm12_case2.holds && !h.nonneg_curvature_operator) {
    h.notes.push_back("positive-rho conditions certified through nonnegative Ricci in dimension 3");
  }

  if (rho < 1.0 && rep.R_max > 0.0) {
    h.rescale = rescale_params(rho, c, n, rep.R_max);
    if (h.thm12_case2.holds && h.rescale->alpha < -1e-12) {
      h.notes.push_back("alpha < 0 although the positive-rho thresholds hold");
    }
  }

  h.thm13_deficit = einstein_pinching_deficit(rep, rho, a, n);
  const double one_minus = 1.0 - n * rho;
  h.thm13_R_bound = one_minus > 0.0 ? 2.0 * a / one_minus : std::numeric_limits<double>::infinity();
  h.thm13 = a >= 0.0 && h.rho_within_limit && h.thm13_deficit >= -1e-12 && one_minus > 0.0 &&
            rep.R_min >= h.thm13_R_bound - 1e-12 * std::max(1.0, h.thm13_R_bound);
  if (a < 0.0) h.notes.push_back("negative a makes the lambda1 hypotheses vacuous");

  h.thm14 = n == 3 && rho < 0.25 && h.positive_ricci;
  if (std::holds_alternative<Su2Triple>(state0.dof)) {
    h.notes.push_back("SU(2): spectral audits not offered; curvature operator certified iff all "
                      "Milnor sectional curvatures are nonnegative");
  }
  if (!h.prop_admissibility) h.notes.push_back("rho >= 1/(2(n-1)): short-time existence not guaranteed");
  return h;
}

std::vector<MonitorRecord> monitor_trajectory(const Trajectory& traj, const HypothesisReport& hyp,
                                              const MonitorOptions& opts) {
  if (traj.samples.empty()) throw DomainError("monitor_trajectory: empty trajectory");
  const int stride = std::max(1, opts.stride);
  const auto& first = traj.samples.front();
  const bool spectral = !std::holds_alternative<Su2Triple>(first.state.dof);
  std::vector<MonitorRecord> records;

  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    if (i % stride != 0 && i + 1 != traj.samples.size()) continue;
    const auto& sample = traj.samples[i];
    const auto& rep = sample.curvature;
    MonitorRecord rec;
    rec.t = sample.t;
    rec.R_min = rep.R_min;
    rec.R_max = rep.R_max;
    rec.pinch = rep.pinch;
    rec.deficit = einstein_pinching_deficit(rep, traj.params.rho, hyp.a, hyp.n);
    rec.flags["static"] = dof_distance(sample.state.dof, first.state.dof) <= 1e-14;
    rec.flags["curvature_lower_bound"] = rec.deficit >= -1e-12;

    if (hyp.rescale && sample.t < hyp.rescale->T_prime) {
      rec.sigma = sigma_bound(hyp.rescale->eps_max_R0, traj.params.rho, sample.t);
    }

    if (spectral) {
      if (opts.lambda0) {
        const auto eig = lowest_eigenpair(build_operators(sample.state, traj.params.c), opts.solver);
        rec.lambda0 = eig.lambda;
        rec.rhs31 = lemma31_rhs(sample.state, eig, traj.params);
        if (opts.lemma32) {
          try {
            rec.rhs32 = lemma32_rhs(sample.state, eig, traj.params);
          } catch (const UnsupportedFamily&) {
          } catch (const DomainError&) {
          }
        }
        if (hyp.rescale && sample.t < hyp.rescale->T_prime) {
          rec.Q = rescaled_quantity(eig.lambda, sample.t, *hyp.rescale);
        }
      }
      if (opts.lambda1) {
        const auto eig = first_nonzero_eigenpair(sample.state, opts.solver);
        rec.lambda1 = eig.lambda;
        rec.rhs41 = lemma41_rhs(sample.state, eig, traj.params);
      }
      if (opts.finite_differences) {
        const double h = default_fd_step(traj, sample.t);
        if (h > 0.0) {
          if (opts.lambda0) rec.fd0 = fd_eigen_derivative(traj, EigenTarget::Lambda0, sample.t, h, opts.solver);
          if (opts.lambda1) rec.fd1 = fd_eigen_derivative(traj, EigenTarget::Lambda1, sample.t, h, opts.solver);
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Static:
      return "static";
    case Verdict::HypothesisNotMet:
      return "hypothesis-not-met";
    case Verdict::Skipped:
      return "skipped";
  }
  return "unknown";
}

bool AuditReport::any_failed() const {
  return std::any_of(verdicts.begin(), verdicts.end(),
                     [](const AuditVerdict& v) { return v.verdict == Verdict::Fail; });
}

const AuditVerdict* AuditReport::find(const std::string& name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

namespace {

AuditVerdict audit_lambda0(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                           bool is_static) {
  if (!hyp.thm12_case1.holds) return {"lambda0_increasing", Verdict::HypothesisNotMet, "needs rho <= 0, R(0) >= 0 and c at or above the nonpositive-rho threshold"};
  Series s;
  for (const auto& r : records) {
    if (r.lambda0) {
      s.t.push_back(r.t);
      s.v.push_back(*r.lambda0);
    }
  }
  return strictly_increasing("lambda0_increasing", s, is_static);
}

AuditVerdict audit_q(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                     bool is_static) {
  if (!hyp.thm12_case2.holds) return {"q_increasing", Verdict::HypothesisNotMet, "needs 0 < rho <= 1/(2(n-1)), nonnegative curvature and c at or above the positive-rho threshold"};
  Series s;
  for (const auto& r : records) {
    if (r.Q) {
      s.t.push_back(r.t);
      s.v.push_back(*r.Q);
    }
  }
  return strictly_increasing("q_increasing", s, is_static);
}

AuditVerdict audit_lambda1(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                           bool is_static) {
  if (!hyp.thm13) return {"lambda1_increasing", Verdict::HypothesisNotMet, "Ricci lower bound or scalar curvature floor not met at t=0"};
  Series s;
  std::optional<double> lost_at;
  for (const auto& r : records) {
    if (!r.flags.at("curvature_lower_bound")) {
      lost_at = r.t;
      break;
    }
    if (r.lambda1) {
      s.t.push_back(r.t);
      s.v.push_back(*r.lambda1);
    }
  }
  auto verdict = strictly_increasing("lambda1_increasing", s, is_static);
  if (lost_at && verdict.verdict != Verdict::Fail) {
    verdict.verdict = Verdict::HypothesisNotMet;
    verdict.detail = "hypothesis lost at t=" + fmt(*lost_at) + "; prefix: " + verdict.detail;
  }
  return verdict;
}

AuditVerdict audit_divergence(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                              const RunContext& ctx) {
  AuditVerdict out{"lambda1_divergence", Verdict::HypothesisNotMet, "needs n=3, rho<1/4, Ric>0"};
  if (!hyp.thm14 || !hyp.pinch0) return out;
  const double floor = std::min(*hyp.pinch0, 1.0 / 3.0);
  std::optional<double> last;
  for (const auto& r : records) {
    if (!r.lambda1) continue;
    const double bound = 1.5 * floor * r.R_min;
    if (*r.lambda1 < bound * (1.0 - 1e-9) - 1e-12) {
      out.verdict = Verdict::Fail;
      out.detail = "lambda1=" + fmt(*r.lambda1) + " below (3/2) eps R_min=" + fmt(bound) + " at t=" + fmt(r.t);
      return out;
    }
    last = *r.lambda1;
  }
  if (!last) {
    out.verdict = Verdict::Skipped;
    out.detail = "lambda1 not monitored";
    return out;
  }
  if (ctx.stop_reason == StopReason::Blowup && !(*last > ctx.divergence_bound)) {
    out.verdict = Verdict::Fail;
    out.detail = "lambda1=" + fmt(*last) + " at blow-up does not exceed " + fmt(ctx.divergence_bound);
    return out;
  }
  out.verdict = Verdict::Pass;
  out.detail = "lower bound holds; final lambda1=" + fmt(*last);
  return out;
}

AuditVerdict audit_max_r(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                         bool is_static) {
  if (!hyp.rho_within_limit) return {"max_r_above_initial", Verdict::HypothesisNotMet, "rho > 1/(2(n-1))"};
  if (is_static) return {"max_r_above_initial", Verdict::Static, "metric unchanged along the run"};
  const double beta = hyp.R0_min;
  for (const auto& r : records) {
    if (r.t <= records.front().t) continue;
    if (!(r.R_max > beta + 1e-10 * (1.0 + std::abs(beta)))) {
      return {"max_r_above_initial", Verdict::Fail, "max R=" + fmt(r.R_max) + " <= min R(0)=" + fmt(beta) + " at t=" + fmt(r.t)};
    }
  }
  return {"max_r_above_initial", Verdict::Pass, "max R(t) > min R(0) for t > 0"};
}

AuditVerdict audit_rmin(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp) {
  if (!hyp.rho_within_limit) return {"r_min_nondecreasing", Verdict::HypothesisNotMet, "rho > 1/(2(n-1))"};
  for (std::size_t k = 1; k < records.size(); ++k) {
    const double prev = records[k - 1].R_min;
    if (records[k].R_min < prev - 1e-8 * (1.0 + std::abs(prev))) {
      return {"r_min_nondecreasing", Verdict::Fail,
              "R_min decreased from " + fmt(prev) + " to " + fmt(records[k].R_min) + " at t=" + fmt(records[k].t)};
    }
  }
  return {"r_min_nondecreasing", Verdict::Pass, "R_min nondecreasing over " + std::to_string(records.size()) + " samples"};
}

AuditVerdict audit_sigma(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp) {
  if (!hyp.nonneg_curvature_operator || !hyp.rescale || !hyp.rho_within_limit) {
    return {"sigma_bound", Verdict::HypothesisNotMet, "needs nonnegative curvature operator and max R(0) > 0"};
  }
  std::size_t checked = 0;
  for (const auto& r : records) {
    if (!r.sigma) continue;
    ++checked;
    if (r.R_max > *r.sigma * (1.0 + 1e-6)) {
      return {"sigma_bound", Verdict::Fail, "R_max=" + fmt(r.R_max) + " > sigma=" + fmt(*r.sigma) + " at t=" + fmt(r.t)};
    }
  }
  return {"sigma_bound", Verdict::Pass, "R_max <= sigma on " + std::to_string(checked) + " samples"};
}

AuditVerdict audit_blowup_time(const HypothesisReport& hyp, const RunContext& ctx) {
  const double one_minus = 1.0 - hyp.n * hyp.rho;
  if (!(hyp.R0_min > 0.0) || !(one_minus > 0.0) || !hyp.rho_within_limit) {
    return {"blowup_time_bound", Verdict::HypothesisNotMet, "needs R(0) > 0 and 1 - n rho > 0"};
  }
  const double bound = blowup_time_bound(hyp.n, hyp.rho, hyp.R0_min);
  if (ctx.t_stop <= bound * (1.0 + 1e-3)) {
    return {"blowup_time_bound", Verdict::Pass, "t_stop=" + fmt(ctx.t_stop) + " <= " + fmt(bound)};
  }
  return {"blowup_time_bound", Verdict::Fail, "t_stop=" + fmt(ctx.t_stop) + " exceeds " + fmt(bound)};
}

AuditVerdict audit_pinching(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp) {
  if (!(hyp.n == 3 && hyp.rho < 0.25 && hyp.pinch0 && *hyp.pinch0 >= 0.0)) {
    return {"pinching_preserved", Verdict::HypothesisNotMet, "needs n=3, rho<1/4, pinch(0) >= 0"};
  }
  for (const auto& r : records) {
    if (!r.pinch || *r.pinch < *hyp.pinch0 - 1e-8) {
      return {"pinching_preserved", Verdict::Fail,
              "pinch " + (r.pinch ? fmt(*r.pinch) : std::string("undefined")) + " below " + fmt(*hyp.pinch0) + " at t=" + fmt(r.t)};
    }
  }
  return {"pinching_preserved", Verdict::Pass, "pinch(t) >= pinch(0)=" + fmt(*hyp.pinch0)};
}

AuditVerdict audit_tprime(const HypothesisReport& hyp, const RunContext& ctx) {
  if (!hyp.nonneg_curvature_operator || !hyp.rescale) {
    return {"horizon_before_blowup", Verdict::HypothesisNotMet, "needs nonnegative curvature operator"};
  }
  if (ctx.stop_reason != StopReason::Blowup) {
    return {"horizon_before_blowup", Verdict::Skipped, "run ended before blow-up"};
  }
  if (hyp.rescale->T_prime <= ctx.t_stop * (1.0 + 1e-3)) {
    return {"horizon_before_blowup", Verdict::Pass, "T'=" + fmt(hyp.rescale->T_prime) + " <= t_stop=" + fmt(ctx.t_stop)};
  }
  return {"horizon_before_blowup", Verdict::Fail, "T'=" + fmt(hyp.rescale->T_prime) + " > t_stop=" + fmt(ctx.t_stop)};
}

AuditVerdict audit_derivatives(const std::vector<MonitorRecord>& records, const RunContext& ctx) {
  const double tol = ctx.closed_form ? 1e-2 : 5e-2;
  std::size_t checked = 0;
  for (const auto& r : records) {
    const std::pair<const std::optional<double>*, const std::optional<double>*> pairs[] = {
        {&r.fd0, &r.rhs31}, {&r.fd1, &r.rhs41}};
    for (const auto& [fd, rhs] : pairs) {
      if (!*fd || !*rhs) continue;
      ++checked;
      if (std::abs(**fd - **rhs) > tol * std::abs(**rhs) + 1e-8) {
        return {"derivative_match", Verdict::Fail,
                "finite difference " + fmt(**fd) + " vs formula " + fmt(**rhs) + " at t=" + fmt(r.t)};
      }
    }
  }
  if (checked == 0) return {"derivative_match", Verdict::Skipped, "no finite differences recorded"};
  return {"derivative_match", Verdict::Pass, std::to_string(checked) + " derivative pairs within " + fmt(tol)};
}

AuditVerdict audit_identity(const std::vector<MonitorRecord>& records, const RunContext& ctx) {
  std::size_t checked = 0;
  for (const auto& r : records) {
    if (!r.rhs31 || !r.rhs32) continue;
    ++checked;
    const double scale = std::max(std::abs(*r.rhs31), std::abs(*r.rhs32));
    const double tol = ctx.closed_form ? 1e-10 * scale + 1e-12 : 5e-2 * scale + 1e-8;
    if (std::abs(*r.rhs31 - *r.rhs32) > tol) {
      return {"rhs_identity", Verdict::Fail, "rhs31=" + fmt(*r.rhs31) + " rhs32=" + fmt(*r.rhs32) + " at t=" + fmt(r.t)};
    }
  }
  if (checked == 0) return {"rhs_identity", Verdict::Skipped, "lemma32 not evaluable"};
  return {"rhs_identity", Verdict::Pass, std::to_string(checked) + " samples agree"};
}

}  // namespace

AuditReport monotonicity_audit(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                               const RunContext& ctx) {
  if (records.size() < 3) throw DomainError("monotonicity_audit needs at least 3 records");
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (!(records[k].t > records[k - 1].t)) throw DomainError("monotonicity_audit: records not sorted");
  }
  const bool is_static = all_static(records);
  AuditReport report;
  report.verdicts.push_back(audit_lambda0(records, hyp, is_static));
  report.verdicts.push_back(audit_q(records, hyp, is_static));
  report.verdicts.push_back(audit_lambda1(records, hyp, is_static));
  report.verdicts.push_back(audit_divergence(records, hyp, ctx));
  report.verdicts.push_back(audit_max_r(records, hyp, is_static));
  return report;
}

AuditReport flow_audit(const std::vector<MonitorRecord>& records, const HypothesisReport& hyp,
                       const RunContext& ctx) {
  AuditReport report;
  report.verdicts.push_back(audit_rmin(records, hyp));
  report.verdicts.push_back(audit_sigma(records, hyp));
  report.verdicts.push_back(audit_blowup_time(hyp, ctx));
  report.verdicts.push_back(audit_pinching(records, hyp));
  report.verdicts.push_back(audit_tprime(hyp, ctx));
  report.verdicts.push_back(audit_derivatives(records, ctx));
  report.verdicts.push_back(audit_identity(records, ctx));
  return report;
}

const std::vector<std::string>& audit_names() {
  static const std::vector<std::string> names = {
      "lambda0_increasing",   "q_increasing",         "lambda1_increasing",      "lambda1_divergence",
      "max_r_above_initial",   "r_min_nondecreasing",     "sigma_bound",        "blowup_time_bound",
      "pinching_preserved", "horizon_before_blowup",  "derivative_match",   "rhs_identity"};
  return names;
}

AuditReport run_audits(const std::vector<std::string>& names, const std::vector<MonitorRecord>& records,
                       const HypothesisReport& hyp, const RunContext& ctx) {
  AuditReport all = flow_audit(records, hyp, ctx);
  if (records.size() >= 3) {
    const auto mono = monotonicity_audit(records, hyp, ctx);
    all.verdicts.insert(all.verdicts.end(), mono.verdicts.begin(), mono.verdicts.end());
  }
  AuditReport out;
  for (const auto& name : names) {
    if (const auto* v = all.find(name)) {
      out.verdicts.push_back(*v);
    } else {
      out.verdicts.push_back({name, Verdict::Skipped, "needs at least 3 monitor records"});
    }
  }
  return out;
}

}  // namespace rbflow
