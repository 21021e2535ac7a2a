#pragma once

#include <span>

namespace besra {

// Selects one member of the Beta family of proper scoring rules.
// The family is defined for alpha, beta > -1; logarithmic score is (0, 0),
// Brier score is (1, 1).
struct ScoreParams {
  double alpha;
  double beta;

  ScoreParams(double alpha, double beta);

  bool operator==(const ScoreParams&) const = default;
};

inline constexpr double kDefaultProbabilityFloor = 1e-12;

// I_x(a, b), the regularized incomplete beta function. Continued fraction
// with the I_x(a,b) = 1 - I_{1-x}(b,a) reduction above (a+1)/(a+b+2).
// Throws std::domain_error for x outside [0,1] or a, b <= 0.
double regularized_incomplete_beta(double x, double a, double b);

// A scoring rule with its gamma-function constants precomputed. Scores are
// rewards: always <= 0, and 0 only for a perfect forecast.
//
//   y = 0:  S(p, 0) = -int_0^p c^alpha (1-c)^(beta-1) dc
//   y = 1:  S(p, 1) = -int_p^1 c^(alpha-1) (1-c)^beta dc
//
// For alpha, beta > 0 these are incomplete beta integrals. When alpha or
// beta is 0 the score uses closed forms (log score, power forms) or adaptive
// Gauss-Kronrod quadrature on the divergence-subtracted integrand. Divergent
// cases (e.g. log score at p = 0 with y = 1) return -infinity.
class BetaScoringRule {
 public:
  // Throws NotImplementedError when alpha or beta is negative.
  explicit BetaScoringRule(ScoreParams params);

  const ScoreParams& params() const noexcept { return params_; }

  // Throws std::domain_error for p outside [0,1] and std::invalid_argument
  // for y outside {0,1}.
  double score(double p, int y) const;

  // Same as score() with p clamped into [floor, 1 - floor]; always finite.
  double floored_score(double p, int y, double floor = kDefaultProbabilityFloor) const;

  // q * S(p_report, 1) + (1 - q) * S(p_report, 0); zero-weight terms are
  // dropped so divergent scores do not produce NaN.
  double expected(double p_report, double q_true) const;

  // expected(q, q) - expected(p, q), the integral between p and q of
  // c^(alpha-1) (1-c)^(beta-1) |q - c|. For p and q inside (0,1) it is
  // integrated directly and keeps full relative precision even where the two
  // expected scores round to the same double. +infinity when the report
  // scores -infinity.
  double divergence(double p_report, double q_true) const;

 private:
  double score_negative(double p) const;
  double score_positive(double p) const;

  ScoreParams params_;
  double complete_negative_ = 0.0;  // B(alpha + 1, beta)
  double complete_positive_ = 0.0;  // B(beta + 1, alpha)
};

double beta_score(ScoreParams params, double p, int y);

double expected_score(ScoreParams params, double p_report, double q_true);

// Binary-relevance score: the sum of per-label Beta scores.
double br_score(ScoreParams params, std::span<const double> probs, std::span<const int> labels);

}  // namespace besra
