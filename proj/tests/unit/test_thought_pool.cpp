#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <limits>

#include "tsearch/errors.hpp"
#include "tsearch/rng.hpp"
#include "tsearch/thought_pool.hpp"

using namespace tsearch;
using big = boost::multiprecision::cpp_dec_float_50;

namespace {

MetaThought initial(std::string id, std::string mindset, std::string strategy) {
  return {std::move(id), std::move(mindset), std::move(strategy), 0, OriginKind::self_composed, {}};
}

// 50-digit recomputation of mu + beta * sqrt(ln t / N).
double ucb_oracle(double mu, long n, long t, double beta) {
  big v = big(mu) + big(beta) * sqrt(log(big(t)) / big(n));
  return v.convert_to<double>();
}

ArmState arm_with(std::initializer_list<double> rewards) {
  ArmState a;
  for (double r : rewards) a.record(r);
  return a;
}

}  // namespace

TEST_CASE("add: empty pool accepts a thought") {
  ThoughtPool pool;
  CHECK(pool.add(initial("a", "a chemist", "balance the equation")));
  CHECK(pool.size() == 1);
}

TEST_CASE("add: casing and whitespace variants are duplicates") {
  ThoughtPool pool;
  pool.add(initial("a", "A Chemist", "balance  the equation"));
  CHECK_FALSE(pool.add(initial("b", "  a chemist", "Balance the\n equation ")));
  CHECK(pool.size() == 1);
  CHECK_FALSE(pool.contains("b"));
}

TEST_CASE("add: distinct thought is appended in order") {
  ThoughtPool pool;
  pool.add(initial("a", "a chemist", "balance the equation"));
  CHECK(pool.add(initial("b", "a physicist", "draw a free body diagram")));
  REQUIRE(pool.size() == 2);
  CHECK(pool.entries()[1].thought.id == "b");
}

TEST_CASE("add: invariant violations are rejected") {
  ThoughtPool pool;
  pool.add(initial("a", "m", "s"));
  CHECK_THROWS_AS(pool.add(initial("a", "other", "text")), Error);
  CHECK_THROWS_AS(pool.add(initial("c", "  ", "s")), Error);
  CHECK_THROWS_AS(pool.add(initial("c", "m2", "")), Error);
  MetaThought orphan{"e1.1", "m3", "s3", 1, OriginKind::evolved, {"missing"}};
  CHECK_THROWS_AS(pool.add(orphan), Error);
  MetaThought no_parents{"e1.2", "m4", "s4", 1, OriginKind::evolved, {}};
  CHECK_THROWS_AS(pool.add(no_parents), Error);
  MetaThought wrong_gen{"x", "m5", "s5", 1, OriginKind::self_composed, {}};
  CHECK_THROWS_AS(pool.add(wrong_gen), Error);
  MetaThought child{"e1.3", "m6", "s6", 1, OriginKind::evolved, {"a"}};
  CHECK(pool.add(child));
}

TEST_CASE("record_reward: running mean") {
  ArmState fresh;
  CHECK_FALSE(fresh.mean_reward().has_value());
  fresh.record(0.7);
  CHECK(fresh.pull_count() == 1);
  CHECK(*fresh.mean_reward() == doctest::Approx(0.7));

  ArmState a = arm_with({0.4, 0.6});  // mu 0.5, N 2
  a.record(0.8);
  CHECK(a.pull_count() == 3);
  CHECK(*a.mean_reward() == doctest::Approx((0.5 * 2 + 0.8) / 3).epsilon(1e-15));

  ArmState b = arm_with({0.6, 0.6, 0.6});
  b.record(0.6);
  CHECK(b.pull_count() == 4);
  CHECK(*b.mean_reward() == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("record_reward: unknown id") {
  ThoughtPool pool;
  pool.add(initial("a", "m", "s"));
  CHECK_THROWS_AS(pool.record_reward("zzz", 1.0), Error);
}

TEST_CASE("ucb_score: oracle values") {
  ArmState unplayed;
  CHECK(std::isinf(ucb_score(unplayed, 7, 0.3)));
  CHECK(ucb_score(unplayed, 7, 0.3) > 0);

  ArmState a = arm_with({0.9, 0.9, 0.9, 0.9, 0.9});
  CHECK(ucb_score(a, 10, 0.5) == doctest::Approx(ucb_oracle(0.9, 5, 10, 0.5)).epsilon(1e-12));
  CHECK(ucb_score(a, 10, 0.5) == doctest::Approx(1.2393).epsilon(1e-4));

  ArmState b = arm_with({0.5});
  CHECK(ucb_score(b, 51, 2.0) == doctest::Approx(ucb_oracle(0.5, 1, 51, 2.0)).epsilon(1e-12));
  CHECK(ucb_score(b, 51, 2.0) == doctest::Approx(4.46577).epsilon(1e-5));
}

TEST_CASE("select: examples") {
  ThoughtPool single;
  single.add(initial("only", "m", "s"));
  CHECK(single.select(1, 1.0) == "only");

  ThoughtPool pool;
  pool.add(initial("A", "ma", "sa"));
  pool.add(initial("B", "mb", "sb"));
  CHECK(pool.select(1, 1.0) == "A");  // both unplayed: first inserted

  for (int i = 0; i < 50; ++i) pool.record_reward("A", 0.6);
  pool.record_reward("B", 0.5);
  CHECK(ucb_score(pool.at("A").arm, 51, 2.0) == doctest::Approx(ucb_oracle(0.6, 50, 51, 2.0)));
  CHECK(ucb_oracle(0.6, 50, 51, 2.0) == doctest::Approx(1.16084).epsilon(1e-5));
  CHECK(pool.select(51, 2.0) == "B");
}

TEST_CASE("select: errors") {
  ThoughtPool pool;
  CHECK_THROWS_AS(pool.select(1, 1.0), Error);
  pool.add(initial("a", "m", "s"));
  CHECK_THROWS_AS(pool.select(0, 1.0), Error);
}

TEST_CASE("top_by_ucb: examples") {
  ThoughtPool two;
  two.add(initial("x", "mx", "sx"));
  two.add(initial("y", "my", "sy"));
  two.record_reward("x", 0.2);
  two.record_reward("y", 0.9);
  CHECK(two.top_by_ucb(3, 1.0, 4) == std::vector<std::string>{"y", "x"});

  // Means chosen so the t=2, beta=0 scores are 1.24, 0.54, 0.91.
  ThoughtPool three;
  three.add(initial("p", "mp", "sp"));
  three.add(initial("q", "mq", "sq"));
  three.add(initial("r", "mr", "sr"));
  three.record_reward("p", 1.24);
  three.record_reward("q", 0.54);
  three.record_reward("r", 0.91);
  CHECK(three.top_by_ucb(2, 0.0, 2) == std::vector<std::string>{"p", "r"});

  ThoughtPool fresh;
  fresh.add(initial("f1", "m1", "s1"));
  fresh.add(initial("f2", "m2", "s2"));
  CHECK(fresh.top_by_ucb(1, 1.0, 1) == std::vector<std::string>{"f1"});
}

TEST_CASE("top_by_ucb: unplayed arms are skipped once enough arms are played") {
  ThoughtPool pool;
  pool.add(initial("a", "ma", "sa"));
  pool.add(initial("b", "mb", "sb"));
  pool.add(initial("c", "mc", "sc"));
  pool.record_reward("a", 0.1);
  pool.record_reward("b", 0.3);
  CHECK(pool.top_by_ucb(3, 1.0, 2) == std::vector<std::string>{"b", "a"});
  CHECK(pool.top_by_ucb(3, 1.0, 3) == std::vector<std::string>{"c", "b", "a"});
  CHECK_THROWS_AS(pool.top_by_ucb(3, 1.0, 0), Error);
}

TEST_CASE("property: select and top_by_ucb agree with brute force") {
  Rng rng(12345);
  for (int trial = 0; trial < 300; ++trial) {
    ThoughtPool pool;
    const auto n = 1 + rng.uniform_index(8);
    std::vector<std::pair<long, double>> stats(n, {0, 0.0});
    for (std::size_t i = 0; i < n; ++i) pool.add(initial("t" + std::to_string(i), "m" + std::to_string(i), "s"));
    const auto pulls = rng.uniform_index(30);
    for (std::size_t k = 0; k < pulls; ++k) {
      const auto i = rng.uniform_index(n);
      const double r = std::round(rng.uniform01() * 4) / 4;  // coarse grid forces ties
      pool.record_reward("t" + std::to_string(i), r);
      stats[i].first += 1;
      stats[i].second += r;
    }
    const long t = 1 + static_cast<long>(rng.uniform_index(100));
    const double beta = std::round(rng.uniform01() * 4) / 2;

    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      score[i] = stats[i].first == 0 ? std::numeric_limits<double>::infinity()
                                      : stats[i].second / stats[i].first +
                                            beta * std::sqrt(std::log(static_cast<double>(t)) / stats[i].first);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (score[i] > score[best]) best = i;
    CHECK(pool.select(t, beta) == "t" + std::to_string(best));

    const std::size_t p = 1 + rng.uniform_index(n);
    std::vector<std::size_t> cand;
    std::size_t played = 0;
    for (auto& s : stats) played += s.first > 0;
    for (std::size_t i = 0; i < n; ++i)
      if (played < p || stats[i].first > 0) cand.push_back(i);
    std::vector<std::string> expect;
    std::vector<bool> used(n, false);
    for (std::size_t round = 0; round < std::min(p, cand.size()); ++round) {
      std::size_t pick = n;
      for (auto i : cand)
        if (!used[i] && (pick == n || score[i] > score[pick])) pick = i;
      used[pick] = true;
      expect.push_back("t" + std::to_string(pick));
    }
    CHECK(pool.top_by_ucb(t, beta, p) == expect);
  }
}

TEST_CASE("property: ucb is non-increasing in pulls at a fixed mean") {
  for (long n = 1; n < 40; ++n) {
    ArmState a, b;
    for (long i = 0; i < n; ++i) a.record(0.5);
    for (long i = 0; i < n + 1; ++i) b.record(0.5);
    CHECK(ucb_score(b, 100, 1.0) <= ucb_score(a, 100, 1.0));
  }
}

TEST_CASE("property: equal rewards make selection round-robin") {
  ThoughtPool pool;
  for (int i = 0; i < 5; ++i) pool.add(initial("t" + std::to_string(i), "m" + std::to_string(i), "s"));
  for (int t = 1; t <= 15; ++t) {
    const std::string id = pool.select(t, 1.0);
    CHECK(id == "t" + std::to_string((t - 1) % 5));
    pool.record_reward(id, 0.5);
  }
}
