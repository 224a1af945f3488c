#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <atomic>
#include <thread>

#include "dca/error.hpp"
#include "dca/estimate.hpp"
#include "dca/oracle.hpp"
#include "dca/rng.hpp"
#include "published_data.hpp"

using namespace dca;

namespace {

class FixedOracle final : public Oracle {
 public:
  explicit FixedOracle(FitnessEstimate e) : e_(e) {}
  FitnessEstimate evaluate(const Assignment &, std::uint64_t, std::uint64_t) override {
    ++calls;
    return e_;
  }
  std::string identity() const override { return "fixed"; }
  int calls = 0;

 private:
  FitnessEstimate e_;
};

// Two-pass reference in long double.
std::pair<long double, long double> reference_stats(const std::vector<double> &xs) {
  long double sum = 0;
  for (double x : xs) sum += x;
  const long double mean = sum / xs.size();
  long double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const long double se = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1)) / std::sqrt((long double)xs.size()) : 0;
  return {mean, se};
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

SubprocessOracle::Options sh(const std::string &script, int timeout_ms = 5000,
                             std::size_t workers = 1) {
  SubprocessOracle::Options o;
  o.command = {"/bin/sh", "-c", script};
  o.timeout = std::chrono::milliseconds(timeout_ms);
  o.max_children = workers;
  return o;
}

Landscape target_landscape(std::vector<int> target, double sigma = 0.0) {
  Landscape l;
  l.target = std::move(target);
  l.sigma = sigma;
  return l;
}

}  // namespace

TEST_CASE("aggregate examples") {
  const std::vector<double> a{1, 2, 3};
  auto e = aggregate(a);
  CHECK(e.mean == doctest::Approx(2.0));
  CHECK(e.se == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(e.n_games == 3);
  CHECK_FALSE(e.single_game);

  const std::vector<double> flat{5, 5, 5, 5};
  e = aggregate(flat);
  CHECK(e.mean == 5.0);
  CHECK(e.se == 0.0);

  const std::vector<double> one{-2.5};
  e = aggregate(one);
  CHECK(e.mean == -2.5);
  CHECK(e.se == 0.0);
  CHECK(e.single_game);

  try {
    aggregate(std::vector<double>{});
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::empty_batch);
  }
}

TEST_CASE("aggregate of 2000 calibrated draws") {
  Rng rng(17);
  std::vector<double> xs(2000);
  for (auto &x : xs) x = -4.17 + 2.03 * rng.gaussian();
  const auto e = aggregate(xs);
  const double expect = 2.03 / std::sqrt(2000.0);
  CHECK(std::abs(e.se - expect) < 0.1 * expect);
}

TEST_CASE("aggregate matches two-pass reference to 1e-12 relative") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(5000);
    const double offset = (rng.uniform() - 0.5) * 1e4;
    std::vector<double> xs(n);
    for (auto &x : xs) x = offset + (1 + rng.below(50)) * rng.gaussian();
    const auto e = aggregate(xs);
    const auto [m, s] = reference_stats(xs);
    CHECK(std::abs(e.mean - (double)m) <= 1e-12 * std::abs((double)m) + 1e-300);
    CHECK(std::abs(e.se - (double)s) <= 1e-12 * (double)s);
  }
}

TEST_CASE("significance gate") {
  const FitnessEstimate t3{-3.89289, 0.061798, 1000, false};
  const FitnessEstimate t5{-3.96985, 0.064817, 1000, false};
  CHECK(significant_difference(t3, t5));
  CHECK(gate_threshold(t3, t5, 1.0) == 0.064817);
  const FitnessEstimate t17{-3.69539, 0.058036, 1000, false};
  const FitnessEstimate t18{-3.72417, 0.059761, 1000, false};
  CHECK_FALSE(significant_difference(t17, t18));
  CHECK_FALSE(significant_difference(t3, t3));
  // Quadrature would have blocked tests 3 vs 5.
  CHECK(std::abs(t3.mean - t5.mean) < std::hypot(t3.se, t5.se));
  CHECK_THROWS_AS(significant_difference(t3, t5, 0.0), Error);
  CHECK_THROWS_AS(significant_difference(t3, t5, -1.0), Error);

  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const FitnessEstimate a{rng.gaussian(), rng.uniform(), 1, false};
    const FitnessEstimate b{rng.gaussian(), rng.uniform(), 1, false};
    CHECK(significant_difference(a, b) == significant_difference(b, a));
    const double tau = 0.1 + 3 * rng.uniform();
    if (significant_difference(a, b, tau)) CHECK(significant_difference(a, b, tau * 0.5));
  }
}

TEST_CASE("landscape and exact oracle") {
  const auto l = target_landscape({3, 1, 2});
  CHECK(evaluate_exact(l, Assignment({3, 1, 2})).mean == 0.0);
  CHECK(evaluate_exact(l, Assignment({1, 3, 2})).mean == -2.0);
  const auto e = evaluate_exact(l, Assignment({2, 1, 3}));
  CHECK(e.se == 0.0);
  CHECK(e.n_games == 1);
  CHECK(e.mean == evaluate_exact(l, Assignment({2, 1, 3})).mean);
  CHECK_THROWS_AS(evaluate_exact(l, Assignment({1, 2})), Error);

  // Generic weights on n=4: exactly one maximiser.
  auto w = target_landscape({3, 1, 4, 2});
  w.weights = {{3, 1.0}, {1, 2.0}, {4, 0.5}, {2, 1.5}};
  std::vector<int> v{1, 2, 3, 4};
  double best = -1e9;
  int at_best = 0;
  do {
    const double f = evaluate_exact(w, Assignment(v)).mean;
    if (f > best + 1e-12) {
      best = f;
      at_best = 1;
    } else if (std::abs(f - best) <= 1e-12) {
      ++at_best;
    }
  } while (std::next_permutation(v.begin(), v.end()));
  CHECK(at_best == 1);
  CHECK(best == 0.0);
}

TEST_CASE("landscape documents") {
  const auto l = parse_landscape(
      R"({"kind":"target","target":[3,1,4,2],"weights":[1,2,0.5,1.5],"sigma":1.9})");
  CHECK(l.target == std::vector<int>{3, 1, 4, 2});
  CHECK(l.weight(1) == 2.0);
  CHECK(l.sigma == 1.9);
  const auto back = parse_landscape(landscape_to_json(l));
  CHECK(back.target == l.target);
  CHECK(back.weights == l.weights);
  CHECK(parse_landscape(R"({"target":[2,1]})").weight(2) == 1.0);
  CHECK_THROWS_AS(parse_landscape(R"({"target":[2,1],"colour":1})"), Error);
  CHECK_THROWS_AS(parse_landscape(R"({"target":[2,1],"weights":[1]})"), Error);
  CHECK_THROWS_AS(parse_landscape(R"({"kind":"bumpy","target":[2,1]})"), Error);
  CHECK_THROWS_AS(parse_landscape(R"({"target":[2,1],"sigma":-1})"), Error);
}

TEST_CASE("synthetic oracle") {
  SyntheticOracle zero(target_landscape({5, 4, 2, 3}));
  auto e = zero.evaluate(Assignment({5, 4, 2, 3}), 100, 1);
  CHECK(e.mean == 0.0);
  CHECK(e.se == 0.0);
  CHECK(zero.evaluate(Assignment({4, 5, 2, 3}), 100, 1).mean == -2.0);

  SyntheticOracle noisy(target_landscape({5, 4, 2, 3}, 2.03));
  const Assignment x({4, 5, 2, 3});
  const auto a = noisy.evaluate(x, 1000, 9);
  const auto b = noisy.evaluate(x, 1000, 9);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
  CHECK(noisy.evaluate(x, 1000, 10).mean != a.mean);
  CHECK_THROWS_AS(noisy.evaluate(x, 0, 1), Error);

  // Spread of means over 100 seeds concentrates at sigma / sqrt(n).
  std::vector<double> means;
  for (std::uint64_t s = 0; s < 100; ++s) means.push_back(noisy.evaluate(x, 400, s).mean);
  const auto spread = aggregate(means);
  const double sd = spread.se * std::sqrt(100.0);
  const double expect = 2.03 / std::sqrt(400.0);
  CHECK(std::abs(sd - expect) < 0.2 * expect);
  CHECK(std::abs(a.se - 2.03 / std::sqrt(1000.0)) < 0.1 * 2.03 / std::sqrt(1000.0));
}

TEST_CASE("pool oracle") {
  auto m1 = std::make_shared<FixedOracle>(FitnessEstimate{-1.0, 0.1, 10, false});
  auto m3 = std::make_shared<FixedOracle>(FitnessEstimate{-3.0, 0.2, 10, false});
  PoolOracle pool({{m1, 1.0}, {m3, 3.0}});
  const Assignment x({1, 2});
  const auto e = pool.evaluate(x, 10, 0);
  CHECK(e.mean == doctest::Approx(-2.5));
  CHECK(e.se == doctest::Approx(std::sqrt(0.25 * 0.25 * 0.01 + 0.75 * 0.75 * 0.04)));

  PoolOracle single({{m3, 2.0}});
  const auto s = single.evaluate(x, 10, 0);
  CHECK(s.mean == -3.0);
  CHECK(s.se == 0.2);

  const auto four = combine_pool({{{-0.03, 0.1, 1000, false}, 1.0},
                                  {{-0.017, 0.1, 1000, false}, 1.0},
                                  {{-1.014, 0.1, 1000, false}, 1.0},
                                  {{-2.395, 0.1, 1000, false}, 1.0}});
  CHECK(four.mean == doctest::Approx(-0.864).epsilon(1e-3));
  // Equal weights over identical members: se scales by 1/sqrt(k).
  CHECK(four.se == doctest::Approx(0.1 / 2.0));

  try {
    PoolOracle empty({});
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::config);
  }
  CHECK_THROWS_AS(PoolOracle({{m1, 0.0}}), Error);
  CHECK_THROWS_AS(PoolOracle({{m1, -1.0}}), Error);
}

TEST_CASE("replay fixture parsing") {
  const auto recs = parse_replay_fixture("# dca-replay v1\n# note\n\n1 2 | -1.5 | 0.25 | 10\n");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].estimate.mean == -1.5);
  CHECK(recs[0].estimate.n_games == 10);
  CHECK_THROWS_AS(parse_replay_fixture(""), Error);
  CHECK_THROWS_AS(parse_replay_fixture("# dca-replay v1\n"), Error);
  CHECK_THROWS_AS(parse_replay_fixture("1 2 | -1 | 0.1 | 10\n"), Error);
  CHECK_THROWS_AS(parse_replay_fixture("# dca-replay v1\n1 2 | -1 | 0.1\n"), Error);
  CHECK_THROWS_AS(parse_replay_fixture("# dca-replay v1\n1 2 | x | 0.1 | 10\n"), Error);
  CHECK_THROWS_AS(load_replay_fixture("/nonexistent/file.replay"), Error);
}

TEST_CASE("replay oracle over the published fixtures") {
  auto p1 = load_replay_fixture(testdata::kFixtures / "table1_2.replay");
  auto p2 = load_replay_fixture(testdata::kFixtures / "table3.replay");
  CHECK(p1.size() == 36);
  CHECK(p2.size() == 11);
  std::vector<ReplayRecord> all = p1;
  all.insert(all.end(), p2.begin(), p2.end());
  ReplayOracle oracle(all);

  auto e = oracle.evaluate(Assignment::parse("2 3 10 11 9 6 4 5 7 8"), 1000, 0);
  CHECK(e.mean == -3.89289);
  CHECK(e.se == 0.061798);
  e = oracle.evaluate(Assignment::parse("5 4 2 3 7 6 8 10 11 9"), 16000, 0);
  CHECK(e.mean == -2.95471);
  CHECK(e.se == 0.013678);
  // X34 appears at both budgets.
  CHECK(oracle.evaluate(Assignment(testdata::kX34), 1000, 0).mean == -3.12261);
  CHECK(oracle.evaluate(Assignment(testdata::kX34), 16000, 0).mean == -3.14496);

  try {
    oracle.evaluate(Assignment::parse("1 2 3"), 1000, 0);
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::replay_miss);
    CHECK(std::string(err.what()).find("1 2 3") != std::string::npos);
  }

  // Every fixture value comes back unchanged at 6 significant digits.
  for (const char *name : {"table1_2.replay", "table3.replay"}) {
    std::istringstream in(slurp(testdata::kFixtures / name));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> f;
      std::istringstream fs(line);
      std::string part;
      while (std::getline(fs, part, '|')) {
        part.erase(0, part.find_first_not_of(' '));
        part.erase(part.find_last_not_of(' ') + 1);
        f.push_back(part);
      }
      REQUIRE(f.size() == 4);
      const auto got = oracle.evaluate(Assignment::parse(f[0]), std::stoull(f[3]), 0);
      CHECK(g6(got.mean) == g6(std::stod(f[1])));
      CHECK(g6(got.se) == g6(std::stod(f[2])));
    }
  }
}

TEST_CASE("fixture checksums") {
  CHECK(fnv1a64(slurp(testdata::kFixtures / "table1_2.replay")) == 0xd4279f28d8b635acULL);
  CHECK(fnv1a64(slurp(testdata::kFixtures / "table3.replay")) == 0x84c2338387616aabULL);
  CHECK(fnv1a64(slurp(testdata::kFixtures / "table3.moves")) == 0x20e764093a6fb740ULL);
}

TEST_CASE("subprocess wire format") {
  CHECK(make_request_line(Assignment({2, 1}), 10, 7) ==
        R"({"assignment":[2,1],"games":10,"seed":7})");
  const auto e = parse_response_line(R"({"mean":-3.89289,"se":0.061798,"n":1000,"extra":1})");
  CHECK(e.mean == -3.89289);
  CHECK(e.se == 0.061798);
  CHECK(e.n_games == 1000);
  try {
    parse_response_line(R"({"mean":-1.0,"n":5})");
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::oracle_io);
    CHECK(std::string(err.what()).find(R"({"mean":-1.0,"n":5})") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_response_line("not json"), Error);
  CHECK_THROWS_AS(parse_response_line(R"({"mean":"x","se":1,"n":1})"), Error);
}

TEST_CASE("subprocess oracle loopback") {
  SubprocessOracle echo(sh(R"(while read l; do echo '{"mean":-1.0,"se":0.05,"n":1000}'; done)"));
  for (int i = 0; i < 3; ++i) {
    const auto e = echo.evaluate(Assignment({2, 1}), 1000, static_cast<std::uint64_t>(i));
    CHECK(e.mean == -1.0);
    CHECK(e.se == 0.05);
    CHECK(e.n_games == 1000);
  }

  // The child sees the exact request line.
  SubprocessOracle mirror(sh(
      R"(while read l; do case "$l" in '{"assignment":[2,1],"games":10,"seed":7}') echo '{"mean":1,"se":0,"n":10}';; *) echo bad;; esac; done)"));
  CHECK(mirror.evaluate(Assignment({2, 1}), 10, 7).mean == 1.0);
}

TEST_CASE("subprocess oracle failures") {
  SubprocessOracle garbage(sh("while read l; do echo garbage; done"));
  try {
    garbage.evaluate(Assignment({1, 2}), 1, 1);
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::oracle_io);
    CHECK(std::string(err.what()).find("garbage") != std::string::npos);
  }

  SubprocessOracle dies(sh("read l; exit 3"));
  CHECK_THROWS_AS(dies.evaluate(Assignment({1, 2}), 1, 1), Error);

  SubprocessOracle slow(sh("read l; sleep 5", 200));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    slow.evaluate(Assignment({1, 2}), 1, 1);
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::oracle_io);
  }
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(3));

  SubprocessOracle::Options o;
  o.command = {"/nonexistent/evaluator"};
  SubprocessOracle absent(o);
  CHECK_THROWS_AS(absent.evaluate(Assignment({1, 2}), 1, 1), Error);
}

TEST_CASE("subprocess oracle serves concurrent callers") {
  SubprocessOracle echo(
      sh(R"(while read l; do echo '{"mean":-2.0,"se":0.1,"n":5}'; done)", 5000, 2));
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 5; ++i)
        if (echo.evaluate(Assignment({1, 2, 3}), 5, 0).mean == -2.0) ++ok;
    });
  }
  for (auto &t : threads) t.join();
  CHECK(ok == 30);
}

TEST_CASE("cached oracle") {
  auto inner = std::make_shared<FixedOracle>(FitnessEstimate{-1.0, 0.1, 10, false});
  CachedOracle cache(inner);
  const Assignment x({1, 2, 3});
  CHECK_FALSE(cache.contains(x, 10));
  cache.evaluate(x, 10, 1);
  cache.evaluate(x, 10, 2);
  CHECK(cache.contains(x, 10));
  CHECK_FALSE(cache.contains(x, 20));
  cache.evaluate(x, 20, 1);
  CHECK(inner->calls == 2);
  CHECK(cache.hits() == 1);
  CHECK(cache.misses() == 2);
  CHECK(cache.identity() == "fixed");
}

TEST_CASE("oracle specs") {
  auto exact = make_oracle(R"({"kind":"exact","landscape":{"target":[2,1]}})", ".");
  CHECK(exact->evaluate(Assignment({2, 1}), 1, 0).mean == 0.0);
  auto from_file = make_oracle(R"({"kind":"exact","landscape_file":"landscape4.json"})",
                               testdata::kConfigs);
  CHECK(from_file->evaluate(Assignment({3, 1, 4, 2}), 1, 0).mean == 0.0);
  auto replay = make_oracle(R"({"kind":"replay","fixtures":["table3.replay"]})",
                            testdata::kFixtures);
  CHECK(replay->evaluate(Assignment(testdata::kX44), 16000, 0).mean == -2.95471);
  auto pool = make_oracle(
      R"({"kind":"pool","members":[
           {"weight":1,"oracle":{"kind":"exact","landscape":{"target":[1,2]}}},
           {"weight":3,"oracle":{"kind":"exact","landscape":{"target":[2,1]}}}]})",
      ".");
  CHECK(pool->evaluate(Assignment({1, 2}), 1, 0).mean == doctest::Approx(-1.5));
  auto sub = make_oracle(
      R"({"kind":"subprocess","command":["/bin/sh","-c","while read l; do echo '{\"mean\":3,\"se\":0,\"n\":1}'; done"],"timeout_ms":2000})",
      ".");
  CHECK(sub->evaluate(Assignment({1, 2}), 1, 0).mean == 3.0);

  for (const char *bad : {R"({"kind":"oracle9"})", R"({"kind":"exact"})",
                          R"({"kind":"exact","landscape":{"target":[2,1]},"extra":1})",
                          R"({"kind":"pool","members":[]})", R"({"kind":"replay","fixtures":[]})",
                          R"({"kind":"subprocess","command":[]})", "[1,2]", "{"}) {
    try {
      make_oracle(bad, ".");
      FAIL("accepted " << bad);
    } catch (const Error &err) {
      CHECK(err.code() == Errc::config);
    }
  }
}
