#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "spacerloss/errors.hpp"
#include "spacerloss/likelihood.hpp"

using namespace spacerloss;

TEST_CASE("pair die") {
  const double rho = std::log(2.0);
  const auto p = die_probs_pair(rho, 1.0);
  for (double x : p) CHECK(x == doctest::Approx(0.25));
  const auto zero = die_probs_pair(0.0, 1.0);
  CHECK(zero[3] == 1.0);
  CHECK(zero[0] == 0.0);
  const auto q = die_probs_pair(0.37, 1.9);
  CHECK(q[3] / (q[0] + q[3]) == doctest::Approx(std::exp(-0.37 * 1.9)));
}

TEST_CASE("pair gap pmf at exp(-rho T) = 1/2") {
  const double rho = std::log(2.0);
  CHECK(pair_gap_pmf(0, 0, rho, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(pair_gap_pmf(1, 1, rho, 1.0) == doctest::Approx(2.0 / 27.0).epsilon(1e-14));
}

TEST_CASE("pair gap pmf matches the die-roll series") {
  for (double e : {0.1, 0.5, 0.9}) {
    const double rho = -std::log(e) / 1.4;
    for (std::size_t a = 0; a <= 8; ++a)
      for (std::size_t b = 0; b <= 8; ++b)
        CHECK(pair_gap_pmf(a, b, rho, 1.4) == doctest::Approx(oracle::pair_gap(a, b, rho, 1.4)).epsilon(1e-11));
  }
}

TEST_CASE("pair gap marginal is geometric") {
  const double rho = 0.8, t = 0.9, e = std::exp(-rho * t);
  for (std::size_t a = 0; a < 6; ++a) {
    double m = 0.0;
    for (std::size_t b = 0; b < 2000; ++b) m += pair_gap_pmf(a, b, rho, t);
    CHECK(m == doctest::Approx(e * std::pow(1 - e, a)).epsilon(1e-12));
  }
}

TEST_CASE("pair sampling law") {
  const double rho = std::log(2.0), t = 1.0, theta = rho;  // theta / rho = 1
  const std::vector<std::size_t> one{1};
  CHECK(std::exp(pair_sampling_logpmf(one, one, theta, rho, t)) ==
        doctest::Approx(std::exp(-1.0) / 3.0).epsilon(1e-13));

  const std::vector<std::size_t> v{3, 5}, w{2, 6}, v1{3}, w1{2};
  CHECK(pair_sampling_logpmf(v, w, theta, rho, t) ==
        doctest::Approx(pair_sampling_logpmf(v1, w1, theta, rho, t) + std::log(pair_gap_pmf(1, 3, rho, t)))
            .epsilon(1e-12));

  double mass = 0.0;
  for (std::size_t a = 1; a <= 51; ++a)
    for (std::size_t b = 1; b <= 51; ++b) {
      const std::vector<std::size_t> va{a}, wb{b};
      mass += std::exp(pair_sampling_logpmf(va, wb, theta, rho, t));
    }
  CHECK(mass >= 1 - 1e-10);
  CHECK(mass <= 1 + 1e-12);

  const std::vector<std::size_t> bad{2, 2};
  CHECK_THROWS_AS(pair_sampling_logpmf(bad, bad, theta, rho, t), InvalidArgument);
  const std::vector<std::size_t> zero{0};
  CHECK_THROWS_AS(pair_sampling_logpmf(zero, zero, theta, rho, t), InvalidArgument);
}

TEST_CASE("triple die") {
  const double rho = std::log(2.0);
  const auto q = die_probs_triple(rho, 1.0, 1.0);
  CHECK(q[7] == doctest::Approx(0.125));
  CHECK(q[6] == doctest::Approx(0.125));
  CHECK(q[4] == q[5]);
  double sum = 0.0;
  for (double x : q) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  const auto faces = oracle::triple_faces(0.9, 1.3, 0.4);
  const auto r = die_probs_triple(0.9, 1.3, 0.4);
  for (std::size_t i = 0; i < 8; ++i) CHECK(r[i] == doctest::Approx(faces[i]).epsilon(1e-14));
  const auto lim = die_probs_triple(0.0, 1.0, 0.5);
  CHECK(lim[7] == 1.0);
  CHECK_THROWS_AS(die_probs_triple(1.0, 0.5, 1.0), InvalidArgument);
}

TEST_CASE("triple gap pmf") {
  const double rho = std::log(2.0);
  CHECK(triple_gap_pmf({0, 0, 0, 0, 0, 0}, rho, 1.0, 1.0) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  CHECK(TripleGapLaw(rho, 1.0, 0.5).r() == doctest::Approx(3 - std::exp(-rho * 0.5) -
                                                           0.5 * (2 - std::exp(-rho * 0.5))));

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> count(0, 4);
  for (auto [t, tp] : {std::pair{1.0, 0.5}, {2.0, 0.3}, {0.7, 0.7}}) {
    for (int k = 0; k < 40; ++k) {
      TripleCounts c{count(rng), count(rng), count(rng), count(rng), count(rng), count(rng)};
      CHECK(triple_gap_pmf(c, 0.8, t, tp) == doctest::Approx(oracle::triple_gap(c, 0.8, t, tp)).epsilon(1e-10));
    }
  }
}

TEST_CASE("general gap law reduces to the pair and triple laws") {
  const auto cherry = parse_newick("(A:1.1,B:1.1);");
  const GeneralGapLaw g2(cherry, 0.6);
  for (std::size_t a = 0; a <= 10; ++a)
    for (std::size_t b = 0; b <= 10; ++b) {
      const std::map<LeafSet, std::size_t> counts{{LeafSet::single(0), a}, {LeafSet::single(1), b}};
      CHECK(g2.log_pmf(counts) == doctest::Approx(std::log(pair_gap_pmf(a, b, 0.6, 1.1))).epsilon(1e-12));
    }

  const auto fig = parse_newick("((A:0.4,B:0.4):0.6,C:1.0);");
  const GeneralGapLaw g3(fig, 0.9);
  const TripleGapLaw law(0.9, 1.0, 0.4);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> count(0, 5);
  for (int k = 0; k < 100; ++k) {
    TripleCounts c{count(rng), count(rng), count(rng), count(rng), count(rng), count(rng)};
    std::vector<std::size_t> dense(8, 0);
    dense[0b001] = c[0];
    dense[0b010] = c[1];
    dense[0b100] = c[2];
    dense[0b011] = c[3];
    dense[0b101] = c[4];
    dense[0b110] = c[5];
    CHECK(g3.log_pmf(dense) == doctest::Approx(law.log_pmf(c)).epsilon(1e-12));
  }
  std::vector<std::size_t> empty(8, 0);
  CHECK(g3.log_pmf(empty) == doctest::Approx(g3.log_p_all() - std::log(g3.p_root())));
}

TEST_CASE("general gap law on four leaves matches the die-roll series") {
  const auto tree = sample_coalescent(4, 21);
  const double rho = 0.7;
  const auto fates = oracle::edge_fates(tree, rho, tree.root());
  const GeneralGapLaw law(tree, rho);
  std::vector<double> faces;
  std::vector<std::uint64_t> masks;
  for (std::uint64_t m = 1; m < 15; ++m) {
    faces.push_back(fates.count(m) ? fates.at(m) : 0.0);
    masks.push_back(m);
  }
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> count(0, 2);
  for (int k = 0; k < 30; ++k) {
    std::vector<std::size_t> counts(14);
    std::vector<std::size_t> dense(16, 0);
    for (std::size_t i = 0; i < 14; ++i) dense[masks[i]] = counts[i] = faces[i] > 0 ? count(rng) : 0;
    const double expected = oracle::die_series(faces, counts, fates.at(0), fates.at(15));
    CHECK(std::exp(law.log_pmf(dense)) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("pair conditional log-likelihood") {
  const double rho = std::log(2.0) / 2;
  CHECK(pair_conditional_loglik(3, 4, rho, 2.0) == doctest::Approx(6 * std::log(1.0 / 3.0)).epsilon(1e-14));
  // D = 0: decreasing in rho.
  CHECK(pair_conditional_loglik(5, 0, 0.1, 1.0) > pair_conditional_loglik(5, 0, 0.2, 1.0));
  CHECK(pair_conditional_loglik(5, 0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(pair_conditional_loglik(1, 0, 0.1, 1.0), InvalidArgument);

  // Sum of per-gap log pmfs minus the binomial coefficients.
  const std::vector<std::pair<std::size_t, std::size_t>> gaps{{1, 0}, {2, 3}, {0, 0}};
  double sum = 0.0;
  for (auto [a, b] : gaps) sum += std::log(pair_gap_pmf(a, b, 0.4, 1.5)) - log_binomial(a + b, a);
  CHECK(pair_conditional_loglik(4, 6, 0.4, 1.5) == doctest::Approx(sum).epsilon(1e-13));
}

TEST_CASE("triple conditional log-likelihood") {
  const double t = 1.2, tp = 0.5;
  CHECK(triple_conditional_loglik(4, {0, 0, 0, 0}, 0.1, t, tp) >
        triple_conditional_loglik(4, {0, 0, 0, 0}, 0.2, t, tp));

  const std::vector<TripleCounts> gaps{{1, 0, 2, 1, 0, 1}, {0, 3, 0, 0, 2, 0}, {0, 0, 0, 0, 0, 0}};
  const TripleGapLaw law(0.7, t, tp);
  double sum = 0.0;
  std::array<std::size_t, 4> d{};
  for (const auto& c : gaps) {
    sum += law.log_pmf(c) - log_multinomial(c);
    d[0] += c[0] + c[1];
    d[1] += c[2];
    d[2] += c[3];
    d[3] += c[4] + c[5];
  }
  CHECK(triple_conditional_loglik(gaps.size() + 1, d, 0.7, t, tp) == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("extreme loss rates stay finite or become -inf, never NaN") {
  CHECK(std::isinf(PairGapLaw(1e4, 1.0).log_pmf(0, 0)));
  CHECK_FALSE(std::isnan(pair_conditional_loglik(3, 4, 1e-12, 1.0)));
  CHECK_FALSE(std::isnan(triple_conditional_loglik(3, {1, 1, 1, 1}, 1e-12, 1.0, 0.5)));
  CHECK(std::isinf(triple_conditional_loglik(3, {1, 1, 1, 1}, 1e4, 1.0, 0.5)));
  CHECK_THROWS_AS(PairGapLaw(-1.0, 1.0), InvalidArgument);
}
