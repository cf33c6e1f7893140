#include "doctest.h"

#include <set>

#include "rbhom/config.hpp"
#include "rbhom/errors.hpp"

using namespace rbhom;

TEST_SUITE("config") {
  TEST_CASE("defaults follow the reference experiment") {
    const RunConfig c;
    CHECK(c.n_per_side == 12);
    CHECK(c.delta == 0.1);
    CHECK(c.theta0 == 0.99);
    CHECK(c.p == 50);
    CHECK(c.n_max == 40);
    CHECK(c.rel_tol == 1e-8);
    CHECK(c.epsilon == 0.02);
    CHECK(c.h_hom == doctest::Approx(1.5 * c.epsilon));
    CHECK_NOTHROW(validate(c));
  }

  TEST_CASE("parsing with comments and whitespace") {
    const RunConfig c = parse_config("# comment\n n_per_side = 16\ndelta=0.2  # inline\n\nseed=18446744073709551615\n");
    CHECK(c.n_per_side == 16);
    CHECK(c.delta == 0.2);
    CHECK(c.seed == 18446744073709551615ULL);
  }

  TEST_CASE("bad input names the field") {
    try {
      parse_config("delta=abc\n");
      FAIL("expected error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("delta") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("bogus=1\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("p=12x\n"), ValidationError);

    RunConfig c;
    c.n_per_side = 10;
    try {
      validate(c);
      FAIL("expected error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("n_per_side") != std::string::npos);
    }
    c = RunConfig{};
    c.theta0 = 1.0;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = RunConfig{};
    c.n_max = 101;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = RunConfig{};
    c.field = "spiral";
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = RunConfig{};
    c.bench_repetitions = 3;
    CHECK_THROWS_AS(validate(c), ValidationError);
  }

  TEST_CASE("echo parses back to the same configuration") {
    RunConfig c;
    c.delta = 0.123456789012345;
    c.seed = 42;
    c.field = "centered";
    std::string text;
    for (const auto& line : echo_config(c)) text += line + "\n";
    const RunConfig back = parse_config(text);
    CHECK(echo_config(back) == echo_config(c));
    CHECK(back.delta == c.delta);
  }

  TEST_CASE("counter generator is deterministic and uniform on [0,1)") {
    const CounterRng a(7);
    const CounterRng b(7);
    const CounterRng other(8);
    double sum = 0.0;
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      CHECK(a.bits(i) == b.bits(i));
      CHECK(a.bits(i) != other.bits(i));
      const double u = a.uniform(i);
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      sum += u;
      seen.insert(a.bits(i));
    }
    CHECK(seen.size() == 10000);
    CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("samples fill the box and differ between streams") {
    const ParamBox box{0.1, 0.99};
    const auto train = sample_box(box, 200, 2024);
    const auto again = sample_box(box, 200, 2024);
    const auto test = sample_box(box, 200, 2025);
    CHECK(train == again);
    CHECK(train != test);
    double lo = 1.0;
    double hi = -1.0;
    for (const auto& p : train) {
      CHECK(box.contains(p, 0.0));
      CHECK_NOTHROW(validate(p));
      lo = std::min(lo, p.theta);
      hi = std::max(hi, p.theta);
    }
    CHECK(lo < -0.9);
    CHECK(hi > -0.1);
    // a prefix of a longer draw is the shorter draw
    const auto prefix = sample_box(box, 10, 2024);
    CHECK(std::equal(prefix.begin(), prefix.end(), train.begin()));
    RunConfig c;
    CHECK(training_sample(c) == sample_box(c.box(), c.p, c.seed));
    CHECK(test_sample(c) == sample_box(c.box(), c.p, c.seed + 1));
  }
}
