#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chemostab/coefficients.hpp"
#include "chemostab/model.hpp"

namespace chemostab {

enum class Provenance { config, convex_formula, measured };
const char* to_string(Provenance p);

struct KnownConstant {
  double value;
  Provenance source;
};

/// A pair (q, C_{q+1}) for the first inequality of (H1). C_{q+1} comes from
/// outside this library and is taken as given.
struct CqPair {
  double q;
  double c;
};

/// The eventual bounds entering the stability criterion. Any of them may be
/// unknown; operations needing a missing entry report "inconclusive".
struct KnownConstants {
  std::optional<KnownConstant> M1;
  std::optional<KnownConstant> M2;
  std::optional<KnownConstant> eta;
  std::optional<KnownConstant> C3_tilde;
  std::vector<CqPair> cq1;
  /// Intermediate quantities of the convex-domain formula, when used.
  std::optional<double> M0;
  std::optional<double> M0ai;

  /// Entries must be positive; M2 >= eta when both are present.
  void validate() const;
};

enum class Status { holds, fails, inconclusive };
const char* to_string(Status s);

struct Clause {
  std::string name;
  Status status;
  std::optional<double> margin;  ///< positive when the inequality holds
  std::string note;
};

struct Verdict {
  Status status = Status::inconclusive;
  std::vector<Clause> clauses;
};

/// Time sampling for quantities defined by inf/sup over all t.
struct TimeSampling {
  Window window{0.0, 1.0};
  int n_samples = 1000;
};

struct ConvexConstants {
  double M0;
  double M0ai;
  double M2;
};

/// M2 for convex domains with tau = 1, chi > 0:
///   M2   = M0ai^2 / (4 (a1_inf - n mu chi / 4))
///   M0ai = a0_sup + 2 lambda + sup_t (a2_inf(t))_- M0
///   M0   = 3/2 |Omega| a0_sup / inf_t (a1_inf(t) - |Omega| (a2_inf(t))_-)
/// Throws HypothesisFailure when either denominator is not positive.
ConvexConstants compute_M2_convex(const CoefficientSet& coeffs, const ModelParams& params, int n,
                                  const TimeSampling& sampling = {});

/// inf_t (a1_inf(t) - |Omega| (a2_inf(t))_-), shared by (H1) and (H2).
double mass_competition_margin(const CoefficientSet& coeffs, const TimeSampling& sampling);

/// (H1). The infimum over q is replaced by the minimum over the supplied
/// pairs, an upper bound of the true infimum: the clause can be confirmed but
/// never refuted from the list, so a non-positive margin is "inconclusive".
Verdict check_H1(const CoefficientSet& coeffs, const ModelParams& params,
                 const KnownConstants& constants, const TimeSampling& sampling = {});

/// (H2): convex domain, tau = 1, chi > 0, a1_inf > n mu chi / 4 and the mass
/// competition margin.
Verdict check_H2(const CoefficientSet& coeffs, const ModelParams& params, int n,
                 bool domain_is_rectangle, const TimeSampling& sampling = {});

/// (H3): chi M2 <= 1 and 0 < tau <= 1.
Verdict check_H3(const ModelParams& params, const KnownConstants& constants);

/// L1(t) = 2 eta (a1_inf(t) + |Omega| (a2_inf(t))_+)
double compute_L1(double t, const CoefficientSet& coeffs, const KnownConstants& constants);

/// L2(t) = a0_sup(t) + |Omega| M2 ((a2_sup(t))_+ + 2 (a2_inf(t))_-)
///         + mu^2 / (2 lambda tau) + |chi| / 2 C3 - |Omega| eta (a2_sup(t))_-
double compute_L2(double t, const CoefficientSet& coeffs, const ModelParams& params,
                  const KnownConstants& constants);

/// h(t) = max(-lambda / (2 tau), L2(t) - L1(t))
double decay_integrand(double t, const CoefficientSet& coeffs, const ModelParams& params,
                       const KnownConstants& constants);

/// Perturbation K(t, eps) of the energy inequality once solutions sit in the
/// band [eta - eps, M2 + eps].
double perturbation_K(double t, double eps, const CoefficientSet& coeffs);

enum class Conclusion { criterion_holds, criterion_fails, inconclusive };
const char* to_string(Conclusion c);

struct IntegrandSample {
  double t;
  double L1;
  double L2;
  double h;
};

struct StabilityReport {
  Verdict h1;
  Verdict h2;
  Verdict h3;
  std::vector<IntegrandSample> series;
  std::optional<double> theta;
  /// |trapezoid on all samples - trapezoid on every other sample| / length
  double quadrature_error = 0.0;
  Window window;
  KnownConstants constants;
  Conclusion conclusion = Conclusion::inconclusive;
  /// Default band width min(-theta, eta) / 10 when theta < 0.
  std::optional<double> eps;
  std::vector<std::string> notes;
};

/// Samples h on n uniform points of the window and averages it with the
/// trapezoid rule. The verdicts use the grid dimension and a rectangular
/// (hence convex) domain.
StabilityReport estimate_theta(const CoefficientSet& coeffs, const ModelParams& params,
                               const KnownConstants& constants, const Window& window,
                               int n_samples);

/// Header block of '#' lines followed by t,L1,L2,h rows.
void write_report(std::ostream& os, const StabilityReport& report);

}  // namespace chemostab
