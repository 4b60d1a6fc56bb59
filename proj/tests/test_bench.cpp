#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mongoose/bench.hpp"
#include "mongoose/policy.hpp"
#include "mongoose/rng.hpp"

using namespace mongoose;

namespace {

BenchmarkFn bench(const std::string& name, int d, std::uint64_t seed = 1,
                  int probes = 20000) {
  RngStream rng(seed);
  return make_benchmark(name, d, rng, probes);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

}  // namespace

TEST_CASE("registry and lookup errors") {
  auto names = benchmark_registry();
  for (const char* expected :
       {"sphere", "rastrigin", "rosenbrock", "ackley", "branin", "hartmann3",
        "hartmann6"})
    CHECK(std::count(names.begin(), names.end(), expected) == 1);

  RngStream rng(1);
  CHECK_THROWS_WITH_AS(make_benchmark("nope", 2, rng),
                       doctest::Contains("registry"), std::invalid_argument);
  CHECK_THROWS(make_benchmark("branin", 3, rng));
  CHECK_THROWS(make_benchmark("hartmann6", 2, rng));
  CHECK_THROWS(make_benchmark("rosenbrock", 1, rng));
}

TEST_CASE("raw functions hit their known minima") {
  CHECK(bench("sphere", 3).raw(vec({0.5, 0.5, 0.5})) == 0.0);
  CHECK(bench("rastrigin", 2).raw(vec({0.5, 0.5})) ==
        doctest::Approx(0.0).epsilon(1e-10));
  // native minimiser x = (1, 1) mapped into the unit cube
  const double u1 = (1.0 + 2.048) / 4.096;
  CHECK(bench("rosenbrock", 2).raw(vec({u1, u1})) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bench("ackley", 2).raw(vec({0.5, 0.5})) ==
        doctest::Approx(0.0).epsilon(1e-10));
  // branin keeps its nonzero native minimum value
  CHECK(bench("branin", 2).raw(vec({(M_PI + 5.0) / 15.0, 2.275 / 15.0})) ==
        doctest::Approx(0.39788735772973816).epsilon(1e-8));
  CHECK(bench("branin", 2).raw_min ==
        doctest::Approx(0.39788735772973816));
  // the hartmanns are shifted so the minimum sits at zero
  CHECK(bench("hartmann3", 3).raw(vec({0.114614, 0.555649, 0.852547})) ==
        doctest::Approx(0.0).epsilon(1e-4));
  CHECK(bench("hartmann6", 6)
            .raw(vec({0.20169, 0.150011, 0.476874, 0.275332, 0.311652,
                      0.6573})) == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("nonnegativity of raw values on random probes") {
  RngStream rng(8);
  for (const char* name : {"sphere", "rastrigin", "ackley", "hartmann3"}) {
    const int d = std::string(name) == "hartmann3" ? 3 : 2;
    BenchmarkFn fn = bench(name, d);
    for (int i = 0; i < 200; ++i) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x[j] = rng.uniform();
      CHECK(fn.raw(x) >= 0.0);
    }
  }
}

TEST_CASE("normalisation formula and value range") {
  BenchmarkFn fn = bench("rastrigin", 2, 4);
  CHECK(fn.f_opt >= 0.0);
  CHECK(fn.f_opt <= 1.0);
  CHECK(fn.max_estimate > 0.0);

  Eigen::VectorXd x = vec({0.21, 0.78});
  CHECK(fn.normalized(x) ==
        doctest::Approx(fn.raw(x) / fn.max_estimate * 6.0 - 3.0 + fn.f_opt));
  CHECK(fn.optimum() == doctest::Approx(-3.0 + fn.f_opt));

  RngStream rng(5);
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd p(2);
    p << rng.uniform(), rng.uniform();
    const double v = fn.normalized(p);
    CHECK(v >= fn.optimum());
    CHECK(v <= 3.0 + fn.f_opt + 0.5);  // max_estimate is a sampled bound
  }
}

TEST_CASE("make_benchmark is deterministic per seed") {
  BenchmarkFn a = bench("ackley", 2, 42);
  BenchmarkFn b = bench("ackley", 2, 42);
  CHECK(a.f_opt == b.f_opt);
  CHECK(a.max_estimate == b.max_estimate);
  BenchmarkFn c = bench("ackley", 2, 43);
  CHECK(a.f_opt != c.f_opt);
}

TEST_CASE("benchmark objectives refuse gradient requests") {
  BenchmarkFn fn = bench("sphere", 2);
  Objective obj = fn.objective(0.25);
  CHECK(obj.dimension == 2);
  CHECK(obj.noise_variance == 0.25);
  Eigen::VectorXd g;
  CHECK_THROWS_AS(obj.f(vec({0.5, 0.5}), &g), std::logic_error);
  CHECK(obj.f(vec({0.5, 0.5}), nullptr) == fn.normalized(vec({0.5, 0.5})));
}

TEST_CASE("percentile follows linear interpolation") {
  const std::vector<double> v = {3.0, 1.0, 4.0, 2.0};
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 100.0) == 4.0);
  CHECK(percentile(v, 50.0) == 2.5);
  CHECK(percentile(v, 25.0) == 1.75);
  CHECK(percentile({7.0}, 95.0) == 7.0);
  CHECK_THROWS(percentile({}, 50.0));
}

TEST_CASE("run_eval series semantics for a policy actor") {
  BenchmarkFn fn = bench("sphere", 2, 10);
  Actor actor;
  actor.kind = Actor::Kind::Policy;
  actor.label = "policy";
  RngStream init(2);
  actor.params = init_params(2, 8, init);

  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  EvalReport rep = run_eval(actor, fn, 10, seeds);
  CHECK(rep.seeds.size() == 4);
  for (const auto& s : rep.seeds) {
    CHECK(s.regret.size() == 11);
    CHECK(s.cum_cost[0] == 0.0);
    for (int t = 1; t <= 10; ++t) {
      CHECK(s.regret[t] <= s.regret[t - 1]);  // running best
      CHECK(s.regret[t] >= 0.0);
      CHECK(s.cum_cost[t] >= s.cum_cost[t - 1]);
    }
    CHECK(s.cum_cost[1] > 0.0);  // the origin hop is charged
  }

  EvalReport rep3 = run_eval(actor, fn, 10, seeds, 0.0, CostNorm::L2, 3);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    CHECK(rep3.seeds[i].regret == rep.seeds[i].regret);
    CHECK(rep3.seeds[i].cum_cost == rep.seeds[i].cum_cost);
  }
}

TEST_CASE("run_eval rejects mismatched checkpoint dimensions") {
  BenchmarkFn fn = bench("hartmann3", 3);
  Actor actor;
  actor.kind = Actor::Kind::Policy;
  RngStream init(2);
  actor.params = init_params(2, 4, init);
  CHECK_THROWS_WITH_AS(run_eval(actor, fn, 5, {1}),
                       doctest::Contains("dimension"), std::invalid_argument);
}

TEST_CASE("aggregate_report on a hand-built pair of actors") {
  auto series = [](std::initializer_list<double> regret,
                   std::initializer_list<double> cost) {
    SeedSeries s;
    s.regret = Eigen::VectorXd(3);
    s.cum_cost = Eigen::VectorXd(3);
    int i = 0;
    for (double v : regret) s.regret[i++] = v;
    i = 0;
    for (double v : cost) s.cum_cost[i++] = v;
    return s;
  };

  EvalReport a;
  a.actor = "good";
  a.horizon = 2;
  a.seeds = {series({3, 2, 1}, {0, 1, 2}), series({3, 1, 1}, {0, 2, 4})};
  EvalReport b;
  b.actor = "stuck";
  b.horizon = 2;
  b.seeds = {series({3, 3, 3}, {0, 1, 2}), series({3, 3, 3}, {0, 1, 2})};

  AggregateReport agg = aggregate_report({a, b});
  CHECK(agg.horizon == 2);
  REQUIRE(agg.actors.size() == 2);
  const ActorSummary& good =
      agg.actors[agg.actors[0].actor == "good" ? 0 : 1];
  CHECK(good.regret[0].mean == 3.0);
  CHECK(good.regret[1].mean == 1.5);
  CHECK(good.regret[2].mean == 1.0);
  CHECK(good.cum_cost[2].mean == 3.0);
  CHECK(good.regret[1].p5 == doctest::Approx(1.05));
  CHECK(good.regret[1].p95 == doctest::Approx(1.95));

  REQUIRE(agg.regret_levels.size() == 8);
  CHECK(agg.regret_levels.front() == doctest::Approx(3.0));
  CHECK(agg.regret_levels.back() == doctest::Approx(1.0));
  CHECK(agg.cost_budgets.back() == doctest::Approx(3.0));

  // the easy level is reached at the origin for free
  CHECK(agg.cost_at_regret.at("good").front() == 0.0);
  // the tight level costs each good seed 2 units
  CHECK(agg.cost_at_regret.at("good").back() == doctest::Approx(2.0));
  // the stuck actor never reaches it
  CHECK(std::isnan(agg.cost_at_regret.at("stuck").back()));
  CHECK(agg.regret_at_cost.at("good").front() == doctest::Approx(3.0));
  CHECK(agg.regret_at_cost.at("good").back() == doctest::Approx(1.0));
  CHECK(agg.regret_at_cost.at("stuck").back() == doctest::Approx(3.0));

  b.horizon = 3;
  CHECK_THROWS(aggregate_report({a, b}));
  CHECK_THROWS(aggregate_report({}));
}
