#include <cmath>
#include <limits>
#include <vector>

#include "besra/errors.hpp"
#include "besra/scoring.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace besra;

namespace {

double log_score(double p, int y) { return y == 1 ? std::log(p) : std::log1p(-p); }
double brier_score(double p, int y) { return y == 1 ? -0.5 * (1 - p) * (1 - p) : -0.5 * p * p; }

// Width of the p-interval over which the normalized positive score rises
// from 5% to 95% of its range.
double transition_width(ScoreParams params) {
  const BetaScoringRule rule(params);
  const double floor_score = rule.score(0.0, 1);
  double lo = -1, hi = -1;
  for (int i = 0; i <= 10000; ++i) {
    const double p = i / 10000.0;
    const double rise = 1.0 - rule.score(p, 1) / floor_score;
    if (lo < 0 && rise >= 0.05) lo = p;
    if (hi < 0 && rise >= 0.95) hi = p;
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("incomplete beta hand values") {
  CHECK(regularized_incomplete_beta(0.5, 1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::fabs(regularized_incomplete_beta(0.25, 1, 2) - 0.4375) < 1e-14);
  CHECK(regularized_incomplete_beta(0.0, 2.3, 4.1) == 0.0);
  CHECK(regularized_incomplete_beta(1.0, 2.3, 4.1) == 1.0);
}

TEST_CASE("incomplete beta rejects invalid parameters") {
  CHECK_THROWS_AS(regularized_incomplete_beta(0.5, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.5, 1.0, -0.5), std::domain_error);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.5, 1.0, 1.0), std::domain_error);
}

TEST_CASE("incomplete beta is monotone in x") {
  for (double a : {0.1, 1.0, 4.0, 11.0}) {
    for (double b : {0.1, 1.1, 10.0}) {
      double prev = 0.0;
      for (int i = 0; i <= 200; ++i) {
        const double v = regularized_incomplete_beta(i / 200.0, a, b);
        CHECK(v >= prev - 1e-15);
        prev = v;
      }
    }
  }
}

TEST_CASE("beta score examples") {
  CHECK(std::fabs(beta_score({1, 1}, 0.5, 1) + 0.125) < 1e-15);
  CHECK(std::fabs(beta_score({0, 0}, 0.5, 1) - std::log(0.5)) < 1e-15);
  for (auto params : {ScoreParams{0, 0}, ScoreParams{1, 1}, ScoreParams{0.1, 3},
                      ScoreParams{0, 2.5}, ScoreParams{1.5, 0}}) {
    CHECK(beta_score(params, 1.0, 1) == 0.0);
    CHECK(beta_score(params, 0.0, 0) == 0.0);
  }
  // mpmath quad, 30 digits: -int_0^0.7 c^0.1 (1-c)^2 dc
  CHECK(std::fabs(beta_score({0.1, 3}, 0.7, 0) - (-0.270519249725720911277)) < 1e-12);
}

TEST_CASE("beta score errors and divergences") {
  CHECK_THROWS_AS(beta_score({1, 1}, 1.2, 0), std::domain_error);
  CHECK_THROWS_AS(beta_score({1, 1}, -0.1, 1), std::domain_error);
  CHECK_THROWS_AS(beta_score({1, 1}, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(BetaScoringRule({-0.5, 1}), NotImplementedError);
  CHECK_THROWS_AS(ScoreParams(-1.0, 1.0), std::domain_error);

  const double inf = std::numeric_limits<double>::infinity();
  CHECK(beta_score({0, 0}, 0.0, 1) == -inf);
  CHECK(beta_score({0, 0}, 1.0, 0) == -inf);
  CHECK(beta_score({0, 3}, 0.0, 1) == -inf);
  CHECK(beta_score({2, 0}, 1.0, 0) == -inf);

  const BetaScoringRule log_rule({0, 0});
  CHECK(std::isfinite(log_rule.floored_score(0.0, 1)));
  CHECK(log_rule.floored_score(0.0, 1) == doctest::Approx(std::log(1e-12)));
}

TEST_CASE("zero-parameter closed forms") {
  // alpha = 0, y = 0: -(1 - (1-p)^beta)/beta; beta = 0, y = 1: -(1 - p^alpha)/alpha.
  for (double p : {0.01, 0.3, 0.5, 0.9, 0.999}) {
    CHECK(std::fabs(beta_score({0, 2.5}, p, 0) + (1 - std::pow(1 - p, 2.5)) / 2.5) < 1e-14);
    CHECK(std::fabs(beta_score({1.5, 0}, p, 1) + (1 - std::pow(p, 1.5)) / 1.5) < 1e-14);
  }
}

TEST_CASE("zero-parameter quadrature path matches integer-case closed forms") {
  // beta = 0, alpha = 1: -int_0^p c/(1-c) dc = p + ln(1-p).
  // alpha = 0, beta = 1: -int_p^1 (1-c)/c dc = ln p + (1 - p).
  for (double p : {1e-9, 0.05, 0.5, 0.95, 1 - 1e-9}) {
    CHECK(std::fabs(beta_score({1, 0}, p, 0) - (p + std::log1p(-p))) < 1e-10);
    CHECK(std::fabs(beta_score({0, 1}, p, 1) - (std::log(p) + 1 - p)) < 1e-10);
  }
  // beta = 0, alpha = 2: -int_0^p c^2/(1-c) dc = p + p^2/2 + ln(1-p).
  for (double p : {0.1, 0.6, 0.99}) {
    CHECK(std::fabs(beta_score({2, 0}, p, 0) - (p + p * p / 2 + std::log1p(-p))) < 1e-10);
  }
}

TEST_CASE("log and Brier special cases over the grid") {
  double log_err = 0.0, brier_err = 0.0;
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    for (int y = 0; y <= 1; ++y) {
      log_err = std::max(log_err, std::fabs(beta_score({0, 0}, p, y) - log_score(p, y)));
      brier_err = std::max(brier_err, std::fabs(beta_score({1, 1}, p, y) - brier_score(p, y)));
    }
  }
  CHECK(log_err <= 1e-8);
  CHECK(brier_err <= 1e-8);
}

TEST_CASE("reflection symmetry") {
  for (auto [a, b] : std::vector<std::pair<double, double>>{
           {0.1, 3}, {1, 0.1}, {0, 0}, {0, 2}, {2, 0}, {10, 0.5}, {1, 1}}) {
    for (int i = 0; i <= 50; ++i) {
      const double p = i / 50.0;
      const double lhs = beta_score({a, b}, p, 1);
      const double rhs = beta_score({b, a}, 1 - p, 0);
      if (std::isinf(lhs)) {
        CHECK(lhs == rhs);
      } else {
        CHECK(std::fabs(lhs - rhs) < 1e-10);
      }
    }
  }
}

TEST_CASE("monotonicity in p") {
  for (auto params : {ScoreParams{0, 0}, ScoreParams{0.1, 3}, ScoreParams{1, 0.1}, ScoreParams{0, 4}}) {
    const BetaScoringRule rule(params);
    for (int i = 1; i <= 100; ++i) {
      const double p0 = (i - 1) / 100.0, p1 = i / 100.0;
      CHECK(rule.score(p1, 1) >= rule.score(p0, 1));
      CHECK(rule.score(p1, 0) <= rule.score(p0, 0));
    }
  }
}

TEST_CASE("quadrature oracle equivalence") {
  const double grid[] = {0.1, 0.5, 1, 3, 10};
  double worst = 0.0;
  for (double a : grid) {
    for (double b : grid) {
      for (int i = 0; i <= 20; ++i) {
        const double p = i / 20.0;
        for (int y = 0; y <= 1; ++y) {
          worst = std::max(worst, std::fabs(beta_score({a, b}, p, y) - oracle::beta_score(a, b, p, y)));
        }
      }
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("expected score") {
  CHECK(std::fabs(expected_score({1, 1}, 0.5, 0.5) + 0.125) < 1e-15);
  // mpmath quad: 0.8 S(0.2, 1) + 0.2 S(0.2, 0) for (0.1, 3).
  CHECK(std::fabs(expected_score({0.1, 3}, 0.2, 0.8) - (-0.251498874864641492248)) < 1e-12);
  // A degenerate truth never multiplies an infinite score.
  CHECK(expected_score({0, 0}, 0.0, 0.0) == 0.0);
}

TEST_CASE("strict propriety on the ablation grid") {
  for (auto params : {ScoreParams{0, 0}, ScoreParams{1, 1}, ScoreParams{0.1, 3}, ScoreParams{1, 0.1},
                      ScoreParams{0.1, 10}}) {
    const BetaScoringRule rule(params);
    for (int qi = 1; qi <= 99; ++qi) {
      const double q = qi / 100.0;
      double best_p = 0.0, best = -std::numeric_limits<double>::infinity();
      for (int pi = 1; pi <= 99; ++pi) {
        const double v = rule.expected(pi / 100.0, q);
        if (v > best) best = v, best_p = pi / 100.0;
      }
      CHECK(std::fabs(best_p - q) <= 0.01 + 1e-12);
    }
  }
}

TEST_CASE("large symmetric parameters approach a step") {
  CHECK(transition_width({100, 100}) < transition_width({10, 10}));
  CHECK(transition_width({10, 10}) < transition_width({1, 1}));
  const BetaScoringRule rule({100, 100});
  const double floor_score = rule.score(0.0, 1);
  CHECK(1.0 - rule.score(0.4, 1) / floor_score < 0.01);
  CHECK(1.0 - rule.score(0.6, 1) / floor_score > 0.99);
}

TEST_CASE("binary relevance score") {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<int> y{1, 0};
  CHECK(std::fabs(br_score({1, 1}, p, y) + 0.25) < 1e-15);
  const std::vector<double> single{0.3};
  const std::vector<int> single_y{1};
  CHECK(br_score({0.1, 3}, single, single_y) == beta_score({0.1, 3}, 0.3, 1));
  const std::vector<double> perfect{1.0, 0.0, 1.0};
  const std::vector<int> perfect_y{1, 0, 1};
  CHECK(br_score({0, 0}, perfect, perfect_y) == 0.0);
  CHECK_THROWS_AS(br_score({1, 1}, p, single_y), std::invalid_argument);
}

TEST_CASE("divergence") {
  const BetaScoringRule heavy({0.1, 10});
  // Reference values from 40-digit quadrature.
  CHECK(heavy.divergence(0.975, 0.99) == doctest::Approx(1.2395411466419442659e-19).epsilon(1e-9));
  CHECK(heavy.divergence(0.985, 0.99) == doctest::Approx(2.1329696625637309753e-22).epsilon(1e-9));
  CHECK(BetaScoringRule({0.1, 3}).divergence(0.2, 0.7) == doctest::Approx(0.15265425326359408001).epsilon(1e-12));
  CHECK(BetaScoringRule({0, 0}).divergence(0.3, 0.6) == doctest::Approx(0.19204199316179811114).epsilon(1e-12));

  const BetaScoringRule log_rule({0, 0});
  CHECK(log_rule.divergence(0.0, 0.5) == INFINITY);
  CHECK(log_rule.divergence(0.4, 0.4) == 0.0);
  CHECK(BetaScoringRule({1, 1}).divergence(1.0, 0.25) == doctest::Approx(0.5 * 0.75 * 0.75).epsilon(1e-14));

  for (ScoreParams params : {ScoreParams{0.1, 3}, ScoreParams{1, 0.1}, ScoreParams{2, 5}}) {
    const BetaScoringRule rule(params);
    for (int i = 1; i < 20; ++i) {
      for (int j = 1; j < 20; ++j) {
        const double p = i / 20.0, q = j / 20.0;
        const double d = rule.divergence(p, q);
        if (i == j) {
          CHECK(d == 0.0);
          continue;
        }
        CHECK(d > 0.0);
        CHECK(d == doctest::Approx(rule.expected(q, q) - rule.expected(p, q)).epsilon(1e-7));
      }
    }
  }
}
