#include <cmath>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "clickcount/errors.hpp"
#include "clickcount/photon_states.hpp"

using namespace clickcount;

TEST_CASE("fock states are delta distributions") {
  auto vac = fock_pnd(0);
  CHECK(vac.probs == std::vector<double>{1.0});
  CHECK(vac.tail_bound == 0.0);

  auto f8 = fock_pnd(8);
  CHECK(f8.n_max() == 8);
  CHECK(f8.probs[8] == 1.0);
  for (int n = 0; n < 8; ++n) CHECK(f8.probs[std::size_t(n)] == 0.0);

  auto f9 = fock_pnd(9);
  CHECK(f9.probs[9] == 1.0);

  CHECK_THROWS_AS(fock_pnd(-1), std::domain_error);
}

TEST_CASE("coherent state is Poisson") {
  auto vac = coherent_pnd(0.0);
  CHECK(vac.probs == std::vector<double>{1.0});

  auto c1 = coherent_pnd(1.0);
  CHECK(c1.probs[0] == doctest::Approx(0.36787944117144233).epsilon(1e-14));

  auto c20 = coherent_pnd(20.0);
  // e^{-20} 20^20 / 20!, frozen from 40-digit evaluation
  CHECK(c20.probs[20] == doctest::Approx(0.08883531739208522).epsilon(1e-13));

  CHECK_THROWS_AS(coherent_pnd(-0.5), std::domain_error);
}

TEST_CASE("coherent mean matches alpha2") {
  for (double alpha2 : {0.3, 1.0, 5.0, 20.0, 80.0}) {
    auto pnd = coherent_pnd(alpha2, 1e-14);
    CHECK(std::abs(pnd.mean() - alpha2) <= 1e-9 * (1.0 + alpha2));
  }
}

TEST_CASE("squeezed vacuum has even support") {
  auto vac = squeezed_vacuum_pnd(0.0);
  CHECK(vac.probs == std::vector<double>{1.0});

  auto sq = squeezed_vacuum_pnd(1.0);
  CHECK(sq.probs[0] == doctest::Approx(0.6480542736638854).epsilon(1e-14));
  CHECK(sq.probs[2] == doctest::Approx(0.18794405337586963).epsilon(1e-13));
  double even_sum = 0.0;
  for (int n = 0; n <= sq.n_max(); ++n) {
    if (n % 2 == 1) CHECK(sq.probs[std::size_t(n)] == 0.0);
    else even_sum += sq.probs[std::size_t(n)];
  }
  CHECK(even_sum >= 1.0 - sq.tail_bound - kNormEps);
}

TEST_CASE("odd coherent state has odd support") {
  CHECK_THROWS_AS(odd_coherent_pnd(0.0), std::domain_error);

  auto tiny = odd_coherent_pnd(1e-8);
  CHECK(tiny.probs[1] == doctest::Approx(1.0).epsilon(1e-7));

  auto odd4 = odd_coherent_pnd(4.0);
  double nsq = 1.0 / (2.0 * (1.0 - std::exp(-8.0)));
  CHECK(odd4.probs[1] ==
        doctest::Approx(4.0 * nsq * 4.0 * std::exp(-4.0)).epsilon(1e-14));
  double sum = 0.0;
  for (int n = 0; n <= odd4.n_max(); ++n) {
    if (n % 2 == 0) CHECK(odd4.probs[std::size_t(n)] == 0.0);
    sum += odd4.probs[std::size_t(n)];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("constructors satisfy the normalization invariant") {
  auto check = [](const PhotonNumberDistribution& pnd) {
    double sum = 0.0;
    for (double p : pnd.probs) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= pnd.tail_bound + kNormEps);
  };
  for (double x : {0.1, 0.7, 2.0, 9.5, 33.0}) {
    check(coherent_pnd(x));
    check(odd_coherent_pnd(x));
  }
  for (double xi : {0.03, 0.21, 0.6, 1.7, 2.9}) check(squeezed_vacuum_pnd(xi));
  check(fock_pnd(17));
}

TEST_CASE("runaway truncation is refused") {
  // tanh(xi) -> 1 makes the photon-number tail nearly flat; demanding a tiny
  // tail bound would need millions of entries, which must fail loudly.
  CHECK_THROWS_AS(squeezed_vacuum_pnd(9.9), ResourceError);
}

TEST_CASE("shrinking trunc_tol only extends the distribution") {
  auto coarse = coherent_pnd(6.0, 1e-8);
  auto fine = coherent_pnd(6.0, 1e-14);
  REQUIRE(fine.probs.size() >= coarse.probs.size());
  for (std::size_t n = 0; n < coarse.probs.size(); ++n)
    CHECK(fine.probs[n] == coarse.probs[n]);

  auto sq_coarse = squeezed_vacuum_pnd(1.3, 1e-8);
  auto sq_fine = squeezed_vacuum_pnd(1.3, 1e-14);
  for (std::size_t n = 0; n < sq_coarse.probs.size(); ++n)
    CHECK(sq_fine.probs[n] == sq_coarse.probs[n]);
}

TEST_CASE("load_pnd validates its document") {
  using nlohmann::json;
  auto vac = load_pnd(json{{"probabilities", {1.0}}});
  CHECK(vac.probs == std::vector<double>{1.0});
  CHECK(vac.tail_bound == 0.0);

  auto two = load_pnd(json{{"probabilities", {0.5, 0.5}}});
  CHECK(two.probs.size() == 2);

  CHECK_THROWS_WITH_AS(load_pnd(json{{"probabilities", {0.5, 0.6}}}),
                       doctest::Contains("deviating from 1"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(load_pnd(json{{"probabilities", {-0.1, 1.1}}}),
                       doctest::Contains("index 0"), std::invalid_argument);
  CHECK_THROWS_AS(load_pnd(json{{"probabilities", json::array()}}),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_pnd(json{{"probabilities", {1.0}}, {"extra", 1}}),
      doctest::Contains("unknown field"), std::invalid_argument);

  // declared tail mass is honored
  auto tailed = load_pnd(json{{"probabilities", {0.6, 0.3999999}},
                              {"tail_bound", 1e-7}}, 1e-6);
  CHECK(tailed.tail_bound == 1e-7);
}

TEST_CASE("round trip through to_json") {
  auto pnd = coherent_pnd(3.0);
  auto back = load_pnd(to_json(pnd), 1e-6);
  CHECK(back.probs == pnd.probs);
}
