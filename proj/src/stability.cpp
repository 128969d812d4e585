#include "chemostab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "chemostab/csv.hpp"

namespace chemostab {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::config:
      return "config";
    case Provenance::convex_formula:
      return "convex-formula";
    case Provenance::measured:
      return "measured";
  }
  return "?";
}

const char* to_string(Status s) {
  switch (s) {
    case Status::holds:
      return "holds";
    case Status::fails:
      return "fails";
    case Status::inconclusive:
      return "inconclusive";
  }
  return "?";
}

const char* to_string(Conclusion c) {
  switch (c) {
    case Conclusion::criterion_holds:
      return "criterion_holds";
    case Conclusion::criterion_fails:
      return "criterion_fails";
    case Conclusion::inconclusive:
      return "inconclusive";
  }
  return "?";
}

void KnownConstants::validate() const {
  auto positive = [](const std::optional<KnownConstant>& c, const char* key) {
    if (c && !(c->value > 0.0 && std::isfinite(c->value))) {
      throw ValidationError(std::string("constants.") + key, "must be positive");
    }
  };
  positive(M1, "M1");
  positive(M2, "M2");
  positive(eta, "eta");
  positive(C3_tilde, "C3_tilde");
  for (const auto& pair : cq1) {
    if (!(pair.c > 0.0) || !(pair.q > 1.0)) {
      throw ValidationError("constants.Cq1", "pairs need q > 1 and C > 0");
    }
  }
  if (M2 && eta && M2->value < eta->value) {
    throw ValidationError("constants.M2", "must be at least eta");
  }
}

namespace {

Status combine(const std::vector<Clause>& clauses) {
  bool all_hold = true;
  for (const auto& c : clauses) {
    if (c.status == Status::fails) return Status::fails;
    if (c.status != Status::holds) all_hold = false;
  }
  return all_hold ? Status::holds : Status::inconclusive;
}

Clause strict_clause(std::string name, double margin) {
  return {std::move(name), margin > 0.0 ? Status::holds : Status::fails, margin, {}};
}

const KnownConstant& require(const std::optional<KnownConstant>& c, const char* key) {
  if (!c) throw ValidationError(std::string("constants.") + key, "required but not known");
  return *c;
}

}  // namespace

double mass_competition_margin(const CoefficientSet& coeffs, const TimeSampling& sampling) {
  const CoefficientSpec* specs[] = {&coeffs.a1, &coeffs.a2};
  const double volume = coeffs.grid().volume();
  double margin = std::numeric_limits<double>::infinity();
  for (double t : envelope_sample_times(specs, sampling.window, sampling.n_samples)) {
    margin = std::min(margin, envelope(coeffs.a1, t).inf -
                                  volume * negative_part(envelope(coeffs.a2, t).inf));
  }
  return margin;
}

ConvexConstants compute_M2_convex(const CoefficientSet& coeffs, const ModelParams& params, int n,
                                  const TimeSampling& sampling) {
  const double volume = coeffs.grid().volume();
  const double a0_sup = global_envelope(coeffs.a0, sampling.window, sampling.n_samples).sup;
  const double a1_inf = global_envelope(coeffs.a1, sampling.window, sampling.n_samples).inf;

  const double amplitude_denominator = a1_inf - n * params.mu * params.chi / 4.0;
  if (!(amplitude_denominator > 0.0)) {
    throw HypothesisFailure("a1_inf > n*mu*chi/4",
                            "convex-domain M2 needs a1_inf > n mu chi / 4 (margin " +
                                std::to_string(amplitude_denominator) + ")");
  }
  const double mass_denominator = mass_competition_margin(coeffs, sampling);
  if (!(mass_denominator > 0.0)) {
    throw HypothesisFailure("inf_t(a1_inf(t) - |Omega|(a2_inf(t))_-) > 0",
                            "convex-domain M2 needs a positive mass competition margin (margin " +
                                std::to_string(mass_denominator) + ")");
  }

  const CoefficientSpec* a2_only[] = {&coeffs.a2};
  double sup_negative_a2 = 0.0;
  for (double t : envelope_sample_times(a2_only, sampling.window, sampling.n_samples)) {
    sup_negative_a2 = std::max(sup_negative_a2, negative_part(envelope(coeffs.a2, t).inf));
  }

  ConvexConstants out{};
  out.M0 = 1.5 * volume * a0_sup / mass_denominator;
  out.M0ai = a0_sup + 2.0 * params.lambda + sup_negative_a2 * out.M0;
  out.M2 = out.M0ai * out.M0ai / (4.0 * amplitude_denominator);
  return out;
}

Verdict check_H1(const CoefficientSet& coeffs, const ModelParams& params,
                 const KnownConstants& constants, const TimeSampling& sampling) {
  const int n = coeffs.grid().dim();
  const double a1_inf = global_envelope(coeffs.a1, sampling.window, sampling.n_samples).inf;
  const std::string first = "a1_inf > inf_q((q-1)/q C_{q+1}^{1/(q+1)} mu^{1/(q+1)}) |chi|";

  Verdict verdict;
  if (params.chi == 0.0) {
    verdict.clauses.push_back(strict_clause(first, a1_inf));
  } else {
    const double q_min = std::max(1.0, n / 2.0);
    double threshold = std::numeric_limits<double>::infinity();
    for (const auto& pair : constants.cq1) {
      if (!(pair.q > q_min)) continue;
      const double e = 1.0 / (pair.q + 1.0);
      threshold = std::min(threshold, (pair.q - 1.0) / pair.q * std::pow(pair.c, e) *
                                          std::pow(params.mu, e) * std::abs(params.chi));
    }
    if (!std::isfinite(threshold)) {
      verdict.clauses.push_back({first, Status::inconclusive, std::nullopt,
                                 "no admissible (q, C_{q+1}) pair supplied"});
    } else {
      const double margin = a1_inf - threshold;
      verdict.clauses.push_back(
          {first, margin > 0.0 ? Status::holds : Status::inconclusive, margin,
           "minimum over supplied q is an upper bound of the infimum"});
    }
  }
  verdict.clauses.push_back(strict_clause("inf_t(a1_inf(t) - |Omega|(a2_inf(t))_-) > 0",
                                          mass_competition_margin(coeffs, sampling)));
  verdict.status = combine(verdict.clauses);
  return verdict;
}

Verdict check_H2(const CoefficientSet& coeffs, const ModelParams& params, int n,
                 bool domain_is_rectangle, const TimeSampling& sampling) {
  const double a1_inf = global_envelope(coeffs.a1, sampling.window, sampling.n_samples).inf;
  Verdict verdict;
  verdict.clauses.push_back({"Omega convex", domain_is_rectangle ? Status::holds : Status::inconclusive,
                             std::nullopt, domain_is_rectangle ? "rectangle" : "unknown geometry"});
  verdict.clauses.push_back({"tau = 1", params.tau == 1.0 ? Status::holds : Status::fails,
                             0.0 - std::abs(params.tau - 1.0), {}});
  verdict.clauses.push_back(strict_clause("chi > 0", params.chi));
  verdict.clauses.push_back(
      strict_clause("a1_inf > n*mu*chi/4", a1_inf - n * params.mu * params.chi / 4.0));
  verdict.clauses.push_back(strict_clause("inf_t(a1_inf(t) - |Omega|(a2_inf(t))_-) > 0",
                                          mass_competition_margin(coeffs, sampling)));
  verdict.status = combine(verdict.clauses);
  return verdict;
}

Verdict check_H3(const ModelParams& params, const KnownConstants& constants) {
  Verdict verdict;
  const std::string first = "chi*M2 <= 1";
  if (constants.M2) {
    const double margin = 1.0 - params.chi * constants.M2->value;
    verdict.clauses.push_back({first, margin >= 0.0 ? Status::holds : Status::fails, margin, {}});
  } else {
    verdict.clauses.push_back({first, Status::inconclusive, std::nullopt, "M2 unknown"});
  }
  const double tau_margin = std::min(params.tau, 1.0 - params.tau);
  verdict.clauses.push_back({"0 < tau <= 1",
                             params.tau > 0.0 && params.tau <= 1.0 ? Status::holds : Status::fails,
                             tau_margin,
                             {}});
  verdict.status = combine(verdict.clauses);
  return verdict;
}

double compute_L1(double t, const CoefficientSet& coeffs, const KnownConstants& constants) {
  const double eta = require(constants.eta, "eta").value;
  const double volume = coeffs.grid().volume();
  return 2.0 * eta * (envelope(coeffs.a1, t).inf + volume * positive_part(envelope(coeffs.a2, t).inf));
}

double compute_L2(double t, const CoefficientSet& coeffs, const ModelParams& params,
                  const KnownConstants& constants) {
  const double eta = require(constants.eta, "eta").value;
  const double m2 = require(constants.M2, "M2").value;
  const double c3 = require(constants.C3_tilde, "C3_tilde").value;
  const double volume = coeffs.grid().volume();
  const Envelope a2 = envelope(coeffs.a2, t);
  return envelope(coeffs.a0, t).sup +
         volume * m2 * (positive_part(a2.sup) + 2.0 * negative_part(a2.inf)) +
         params.mu * params.mu / (2.0 * params.lambda * params.tau) +
         std::abs(params.chi) / 2.0 * c3 - volume * eta * negative_part(a2.sup);
}

double decay_integrand(double t, const CoefficientSet& coeffs, const ModelParams& params,
                       const KnownConstants& constants) {
  return std::max(-params.lambda / (2.0 * params.tau),
                  compute_L2(t, coeffs, params, constants) - compute_L1(t, coeffs, constants));
}

double perturbation_K(double t, double eps, const CoefficientSet& coeffs) {
  const double volume = coeffs.grid().volume();
  const Envelope a2 = envelope(coeffs.a2, t);
  const double a1_inf = envelope(coeffs.a1, t).inf;
  return eps * (2.0 * a1_inf + volume * positive_part(a2.inf) + volume * negative_part(a2.inf)) +
         eps * volume *
             (positive_part(a2.sup) + negative_part(a2.sup) + positive_part(a2.inf) +
              negative_part(a2.inf));
}

namespace {

double trapezoid_mean(const std::vector<IntegrandSample>& s, std::size_t stride) {
  double integral = 0.0;
  std::size_t prev = 0;
  for (std::size_t k = stride;; k += stride) {
    const std::size_t cur = std::min(k, s.size() - 1);
    integral += 0.5 * (s[prev].h + s[cur].h) * (s[cur].t - s[prev].t);
    prev = cur;
    if (cur == s.size() - 1) break;
  }
  return integral / (s.back().t - s.front().t);
}

}  // namespace

StabilityReport estimate_theta(const CoefficientSet& coeffs, const ModelParams& params,
                               const KnownConstants& constants, const Window& window,
                               int n_samples) {
  if (!(window.end > window.start)) throw RangeError("theta window must have positive length");
  if (n_samples < 2) throw RangeError("theta needs at least 2 samples");

  StabilityReport report;
  report.window = window;
  report.constants = constants;
  const TimeSampling sampling{window, std::max(n_samples, 2)};
  const int n = coeffs.grid().dim();
  report.h1 = check_H1(coeffs, params, constants, sampling);
  report.h2 = check_H2(coeffs, params, n, true, sampling);
  report.h3 = check_H3(params, constants);

  if (coeffs.any_only_lipschitz()) {
    report.notes.push_back("tabulated coefficients are only Lipschitz in time");
  }
  if (!coeffs.all_autonomous()) {
    const auto period = coeffs.period();
    const double periods = period ? window.length() / *period : 0.0;
    if (period && std::abs(periods - std::round(periods)) < 1e-9 * std::max(1.0, periods) &&
        std::round(periods) >= 1.0) {
      report.notes.push_back("window spans whole periods: average equals the long-time limit");
    } else {
      report.notes.push_back("finite-window estimate");
    }
  }
  for (const auto* c : {&constants.eta, &constants.M2, &constants.C3_tilde}) {
    if (*c && (*c)->source == Provenance::measured) {
      report.notes.push_back(
          "measured constants are surrogates; a larger valid eta can only lower theta");
      break;
    }
  }

  if (!constants.eta || !constants.M2 || !constants.C3_tilde) {
    report.notes.push_back("theta not computed: eta, M2 and C3_tilde are required");
    report.conclusion = Conclusion::inconclusive;
    return report;
  }

  const double floor = -params.lambda / (2.0 * params.tau);
  report.series.reserve(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    const double t =
        k == n_samples - 1 ? window.end : window.start + window.length() * k / (n_samples - 1);
    const double l1 = compute_L1(t, coeffs, constants);
    const double l2 = compute_L2(t, coeffs, params, constants);
    const double h = std::max(floor, l2 - l1);
    if (h < floor) throw Error("integrand below its clamp");
    report.series.push_back({t, l1, l2, h});
  }

  const double theta = trapezoid_mean(report.series, 1);
  report.theta = theta;
  report.quadrature_error =
      report.series.size() >= 3 ? std::abs(theta - trapezoid_mean(report.series, 2)) : 0.0;
  if (theta < -report.quadrature_error) {
    report.conclusion = Conclusion::criterion_holds;
    report.eps = std::min(-theta, constants.eta->value) / 10.0;
  } else if (theta > report.quadrature_error) {
    report.conclusion = Conclusion::criterion_fails;
  } else {
    report.conclusion = Conclusion::inconclusive;
  }
  return report;
}

namespace {

void write_verdict(CsvWriter& csv, const std::string& name, const Verdict& v) {
  csv.meta(name, to_string(v.status));
  for (const auto& c : v.clauses) {
    std::string value = to_string(c.status);
    if (c.margin) value += " margin=" + format_double(*c.margin);
    if (!c.note.empty()) value += " (" + c.note + ")";
    csv.meta(name + " [" + c.name + "]", value);
  }
}

}  // namespace

void write_report(std::ostream& os, const StabilityReport& report) {
  CsvWriter csv(os);
  csv.meta("conclusion", to_string(report.conclusion));
  csv.meta("theta", report.theta ? format_double(*report.theta) : "NA");
  csv.meta("theta_quadrature_error", report.quadrature_error);
  csv.meta("window", format_double(report.window.start) + " " + format_double(report.window.end));
  if (report.eps) csv.meta("eps", *report.eps);
  auto constant = [&](const char* name, const std::optional<KnownConstant>& c) {
    csv.meta(std::string("constant ") + name,
             c ? format_double(c->value) + " (" + to_string(c->source) + ")" : "unknown");
  };
  constant("M1", report.constants.M1);
  constant("M2", report.constants.M2);
  constant("eta", report.constants.eta);
  constant("C3_tilde", report.constants.C3_tilde);
  if (report.constants.M0) csv.meta("constant M0", *report.constants.M0);
  if (report.constants.M0ai) csv.meta("constant M0ai", *report.constants.M0ai);
  write_verdict(csv, "H1", report.h1);
  write_verdict(csv, "H2", report.h2);
  write_verdict(csv, "H3", report.h3);
  for (const auto& note : report.notes) csv.meta("note", note);
  csv.header({"t", "L1", "L2", "h"});
  for (const auto& s : report.series) csv.row({s.t, s.L1, s.L2, s.h});
}

}  // namespace chemostab
