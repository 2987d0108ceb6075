#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rmsim/demand.hpp"
#include "rmsim/errors.hpp"
#include "rmsim/json_io.hpp"
#include "rmsim/rng.hpp"

using namespace rmsim;

TEST_SUITE("demand") {
  TEST_CASE("reference instance maps prices onto the demand interval") {
    const auto m = DemandModel::linear_bernoulli(0.75, 0.5);
    CHECK(m.interval().d_lo == doctest::Approx(0.25));
    CHECK(m.interval().d_hi == doctest::Approx(0.75));
    CHECK(m.unconstrained_optimum() == doctest::Approx(0.375));
    CHECK(m.demand_at(0.5) == doctest::Approx(0.5));
    CHECK(m.inverse_demand(0.3125) == doctest::Approx(0.875));
    CHECK(m.revenue_rate(0.3125) == doctest::Approx(35.0 / 128.0));
    CHECK(m.revenue_second_derivative() == doctest::Approx(-4.0));
  }

  TEST_CASE("revenue derivative agrees with finite differences") {
    const auto m = DemandModel::linear_bernoulli(0.9, 0.7, 0.1, 1.1);
    for (double d = m.interval().d_lo + 0.01; d < m.interval().d_hi - 0.01; d += 0.05) {
      const double h = 1e-6;
      const double fd = (m.revenue_rate(d + h) - m.revenue_rate(d - h)) / (2 * h);
      CHECK(m.revenue_derivative(d) == doctest::Approx(fd).epsilon(1e-7));
    }
  }

  TEST_CASE("unconstrained optimum is clamped into the demand interval") {
    // alpha / 2 = 0.4 lies above d_hi = 0.8 - 0.5 * 1 = 0.3
    const auto m = DemandModel::linear_bernoulli(0.8, 0.5, 1.0, 1.5);
    CHECK(m.unconstrained_optimum() == doctest::Approx(m.interval().d_hi));
  }

  TEST_CASE("construction rejects structural violations") {
    CHECK_THROWS_AS(DemandModel::linear_bernoulli(0.75, -0.5), ValidationError);
    CHECK_THROWS_AS(DemandModel::linear_bernoulli(0.75, 0.5, 1.0, 0.5), ValidationError);
    // purchase probability reaches 1 at p = 0
    CHECK_THROWS_AS(DemandModel::linear_bernoulli(1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(DemandModel::linear_additive(0.75, 0.5, 0.0, 1.0, 0.3), ValidationError);
    try {
      DemandModel::linear_bernoulli(2.0, -1.0, 1.0, 0.0);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.violations().size() >= 2);
    }
  }

  TEST_CASE("out-of-domain arguments raise DomainError") {
    const auto m = DemandModel::linear_bernoulli(0.75, 0.5);
    CHECK_THROWS_AS(m.demand_at(1.5), DomainError);
    CHECK_THROWS_AS(m.inverse_demand(0.1), DomainError);
    CHECK_THROWS_AS(m.revenue_rate(std::nan("")), DomainError);
  }

  TEST_CASE("Bernoulli noise has mean zero and the binomial variance") {
    const auto m = DemandModel::linear_bernoulli(0.75, 0.5);
    for (double p : {0.0, 0.3, 0.875, 1.0}) {
      const auto n = m.bernoulli_noise(p);
      const double q = m.demand_at(p);
      CHECK(n.p_high == doctest::Approx(q));
      CHECK(n.p_high * n.high + (1 - n.p_high) * n.low == doctest::Approx(0.0));
      CHECK(m.noise_variance(p) == doctest::Approx(q * (1 - q)));
    }
  }

  TEST_CASE("noise_from_uniform realizes a sale iff u < f(p)") {
    const auto m = DemandModel::linear_bernoulli(0.75, 0.5);
    CHECK(m.noise_from_uniform(0.5, 0.49) == doctest::Approx(0.5));
    CHECK(m.noise_from_uniform(0.5, 0.51) == doctest::Approx(-0.5));
    const auto a = DemandModel::linear_additive(0.75, 0.5, 0.0, 1.0, 0.1);
    CHECK(a.noise_from_uniform(0.5, 0.0) == doctest::Approx(-0.1));
    CHECK(a.noise_from_uniform(0.5, 0.75) == doctest::Approx(0.05));
    CHECK(a.noise_variance(0.2) == doctest::Approx(0.01 / 3));
  }

  TEST_CASE("sample noise has the right empirical mean") {
    const auto m = DemandModel::linear_bernoulli(0.75, 0.5);
    CounterRng rng(42);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += m.sample_noise(0.4, rng);
    // sd of the mean is sqrt(0.55 * 0.45 / n) ~ 0.0011
    CHECK(std::abs(sum / n) < 0.006);
  }

  TEST_CASE("Wasserstein distance between two-point laws") {
    // Bernoulli(q) shifted by -q vs Bernoulli(q'), both centred: brute force
    // over the quantile function.
    auto centred = [](double q) {
      return std::pair<std::vector<double>, std::vector<double>>{{-q, 1 - q}, {1 - q, q}};
    };
    for (auto [q1, q2] : {std::pair{0.3, 0.5}, std::pair{0.25, 0.75}, std::pair{0.6, 0.6}}) {
      const auto [a, pa] = centred(q1);
      const auto [b, pb] = centred(q2);
      double brute = 0;
      const int n = 100000;
      for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        const double xa = u < 1 - q1 ? -q1 : 1 - q1;
        const double xb = u < 1 - q2 ? -q2 : 1 - q2;
        brute += (xa - xb) * (xa - xb) / n;
      }
      CHECK(wasserstein2_sq(a, pa, b, pb) == doctest::Approx(brute).epsilon(1e-4));
    }
  }

  TEST_CASE("assumption constants of the reference instance") {
    const auto c = assumption_constants(DemandModel::linear_bernoulli(0.75, 0.5));
    CHECK(c.m == doctest::Approx(4.0));
    CHECK(c.M == 0.0);
    CHECK(c.C == doctest::Approx(1.5));  // |r'(d)| = |0.75 - 2d| / 0.5 at d = 0.75
    CHECK(c.B_xi == 1.0);
    CHECK(c.sigma_sq == doctest::Approx(3.0 / 16.0));
    // W2 / |dp| = sqrt(delta (1 - delta)) / |dp| with delta = beta |dp|, largest
    // at the finest grid step: sqrt(5e-4 * (1 - 5e-4)) / 1e-3.
    CHECK(c.L == doctest::Approx(std::sqrt(5e-4 * (1 - 5e-4)) / 1e-3).epsilon(1e-6));
    const auto a = assumption_constants(DemandModel::linear_additive(0.75, 0.5, 0.0, 1.0, 0.1));
    CHECK(a.L == 0.0);
    CHECK(a.B_xi == doctest::Approx(0.1));
  }
}

TEST_SUITE("rng") {
  TEST_CASE("counter stream is a pure function of key and counter") {
    CounterRng a(7), b(7), c(8);
    for (std::uint64_t i = 0; i < 100; ++i) {
      CHECK(a.uniform_at(i) == b.uniform_at(i));
      CHECK(a.uniform_at(i) != c.uniform_at(i));
    }
    const double u5 = a.uniform_at(5);
    a.seek(5);
    CHECK(a.uniform() == u5);
    CHECK(a.counter() == 6);
  }

  TEST_CASE("uniforms lie in [0, 1) with roughly uniform moments") {
    CounterRng r(3);
    double s = 0, s2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      s += u;
      s2 += u * u;
    }
    CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(s2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
  }

  TEST_CASE("replication seeds are distinct") {
    CHECK(replication_seed(1, 0) != replication_seed(1, 1));
    CHECK(replication_seed(1, 5) != replication_seed(2, 5));
  }
}

TEST_SUITE("json") {
  TEST_CASE("model round trip") {
    const auto m = DemandModel::linear_additive(0.75, 0.5, 0.1, 0.9, 0.05);
    CHECK(demand_model_from_json(to_json(m)) == m);
    const auto b = DemandModel::linear_bernoulli(0.75, 0.5);
    CHECK(demand_model_from_json(to_json(b)) == b);
  }

  TEST_CASE("price interval defaults to [0, 1]") {
    const auto m = demand_model_from_json(json::parse(R"({"kind":"linear-bernoulli","alpha":0.75,"beta":0.5})"));
    CHECK(m == DemandModel::linear_bernoulli(0.75, 0.5));
  }

  TEST_CASE("malformed model JSON is a configuration error") {
    CHECK_THROWS_AS(demand_model_from_json(json::parse(R"({"kind":"cubic","alpha":1,"beta":1})")),
                    ConfigError);
    CHECK_THROWS_AS(demand_model_from_json(json::parse(R"({"kind":"linear-bernoulli","beta":1})")),
                    ConfigError);
    CHECK_THROWS_AS(multi_model_from_json(json::parse(R"({"kind":"quadratic-bernoulli","g":[1,1],"H":[[1]],"box_hi":[1,1]})")),
                    ConfigError);
    CHECK_THROWS_AS(read_json_file("/nonexistent/model.json"), ConfigError);
  }

  TEST_CASE("multi-product model round trip") {
    MultiDemandModel<double> m;
    m.g = Eigen::Vector2d(1, 1);
    m.H.resize(2, 2);
    m.H << -2, -0.5, -0.5, -2;
    m.box_hi = Eigen::Vector2d(0.5, 0.5);
    const auto back = multi_model_from_json(to_json(m));
    CHECK(back.g == m.g);
    CHECK(back.H == m.H);
    CHECK(back.box_hi == m.box_hi);
    CHECK(std::holds_alternative<MultiDemandModel<double>>(any_model_from_json(to_json(m))));
  }
}
