#include "besra/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "besra/errors.hpp"

namespace besra {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

// x^a (1-x)^b / a * CF, the lower tail of the unregularized integral, with
// 1-x supplied separately so callers near x = 1 keep full precision.
double lower_tail(double x, double xc, double a, double b) {
  return std::exp(a * std::log(x) + b * std::log(xc)) * beta_continued_fraction(x, a, b) / a;
}

// B_x(a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt, given complete = B(a, b).
double incomplete_beta(double x, double xc, double a, double b, double complete) {
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return complete;
  if (x < (a + 1.0) / (a + b + 2.0)) return lower_tail(x, xc, a, b);
  return complete - lower_tail(xc, x, b, a);
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Adaptive 15-point Gauss-Kronrod with 7-point Gauss error estimate.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
double kronrod15(const F& f, double lo, double hi, double& error) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  error = std::fabs((kronrod - gauss) * half);
  return kronrod * half;
}

template <typename F>
double integrate(const F& f, double lo, double hi, double tol, int depth = 0) {
  double error = 0.0;
  const double value = kronrod15(f, lo, hi, error);
  if (error <= tol || depth >= 48) return value;
  const double mid = 0.5 * (lo + hi);
  return integrate(f, lo, mid, 0.5 * tol, depth + 1) + integrate(f, mid, hi, 0.5 * tol, depth + 1);
}

constexpr double kQuadratureTolerance = 1e-10;

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("probability outside [0,1]: " + std::to_string(p));
  }
}

}  // namespace

ScoreParams::ScoreParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
  if (!(alpha > -1.0) || !(beta > -1.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::domain_error("Beta family requires alpha, beta > -1");
  }
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete beta: x outside [0,1]");
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete beta: a and b must be > 0");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lb = log_beta(a, b);
  const double xc = 1.0 - x;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(a * std::log(x) + b * std::log1p(-x) - lb) * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log(xc) + a * std::log(x) - lb) * beta_continued_fraction(xc, b, a) / b;
}

BetaScoringRule::BetaScoringRule(ScoreParams params) : params_(params) {
  if (params_.alpha < 0.0 || params_.beta < 0.0) {
    throw NotImplementedError("Beta scores with negative alpha or beta are not implemented");
  }
  if (params_.alpha > 0.0 && params_.beta > 0.0) {
    complete_negative_ = std::exp(log_beta(params_.alpha + 1.0, params_.beta));
    complete_positive_ = std::exp(log_beta(params_.beta + 1.0, params_.alpha));
  }
}

double BetaScoringRule::score(double p, int y) const {
  check_probability(p);
  if (y == 0) return score_negative(p);
  if (y == 1) return score_positive(p);
  throw std::invalid_argument("label must be 0 or 1");
}

double BetaScoringRule::floored_score(double p, int y, double floor) const {
  check_probability(p);
  return score(std::clamp(p, floor, 1.0 - floor), y);
}

double BetaScoringRule::expected(double p_report, double q_true) const {
  check_probability(p_report);
  check_probability(q_true);
  double total = 0.0;
  if (q_true > 0.0) total += q_true * score_positive(p_report);
  if (q_true < 1.0) total += (1.0 - q_true) * score_negative(p_report);
  return total;
}

double BetaScoringRule::divergence(double p_report, double q_true) const {
  check_probability(p_report);
  check_probability(q_true);
  if (p_report == q_true) return 0.0;
  const double lo = std::min(p_report, q_true);
  const double hi = std::max(p_report, q_true);
  if (lo == 0.0 || hi == 1.0) {
    const double reported = expected(p_report, q_true);
    if (!std::isfinite(reported)) return std::numeric_limits<double>::infinity();
    return std::max(0.0, expected(q_true, q_true) - reported);
  }
  const double a = params_.alpha - 1.0;
  const double b = params_.beta - 1.0;
  const auto f = [=](double c) { return std::exp(a * std::log(c) + b * std::log1p(-c)) * std::fabs(q_true - c); };
  double error = 0.0;
  const double estimate = kronrod15(f, lo, hi, error);
  return integrate(f, lo, hi, 1e-13 * estimate);
}

double BetaScoringRule::score_negative(double p) const {
  const double a = params_.alpha;
  const double b = params_.beta;
  if (p == 0.0) return 0.0;
  if (a > 0.0 && b > 0.0) return -incomplete_beta(p, 1.0 - p, a + 1.0, b, complete_negative_);
  if (a == 0.0 && b == 0.0) return std::log1p(-p);
  if (a == 0.0) return std::expm1(b * std::log1p(-p)) / b;
  // b == 0: c^a/(1-c) = 1/(1-c) - (1-c^a)/(1-c); the remainder is bounded.
  if (p == 1.0) return -kInf;
  const auto remainder = [a](double c) { return -std::expm1(a * std::log(c)) / (1.0 - c); };
  return std::log1p(-p) + integrate(remainder, 0.0, p, kQuadratureTolerance);
}

double BetaScoringRule::score_positive(double p) const {
  const double a = params_.alpha;
  const double b = params_.beta;
  if (p == 1.0) return 0.0;
  if (a > 0.0 && b > 0.0) return -incomplete_beta(1.0 - p, p, b + 1.0, a, complete_positive_);
  if (a == 0.0 && b == 0.0) return std::log(p);
  if (b == 0.0) return std::expm1(a * std::log(p)) / a;
  // a == 0: (1-c)^b/c = 1/c - (1-(1-c)^b)/c.
  if (p == 0.0) return -kInf;
  const auto remainder = [b](double c) { return -std::expm1(b * std::log1p(-c)) / c; };
  return std::log(p) + integrate(remainder, p, 1.0, kQuadratureTolerance);
}

double beta_score(ScoreParams params, double p, int y) { return BetaScoringRule(params).score(p, y); }

double expected_score(ScoreParams params, double p_report, double q_true) {
  return BetaScoringRule(params).expected(p_report, q_true);
}

double br_score(ScoreParams params, std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) throw std::invalid_argument("br_score: length mismatch");
  if (probs.empty()) throw std::invalid_argument("br_score: no labels");
  const BetaScoringRule rule(params);
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) total += rule.score(probs[k], labels[k]);
  return total;
}

}  // namespace besra
