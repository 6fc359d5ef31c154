#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "lstmscope/cell.hpp"
#include "lstmscope/errors.hpp"
#include "lstmscope/signal.hpp"

using namespace lstmscope;

TEST_CASE("extraction sums input columns and picks the self column") {
  SECTION("row sum over input columns") {
    LstmParams p;
    p.n = 1;
    p.m = 3;
    p.W = Matrix(4, 4, 0.0);
    p.W(0, 0) = 0.5;
    p.W(0, 1) = -0.2;
    p.W(0, 2) = 0.1;
    p.b.assign(4, 0.0);
    const CellSubsystem sub = extract_cell_subsystem(p, 0);
    REQUIRE(sub.w_in[0] == Approx(0.4).margin(1e-15));
  }
  SECTION("manual index map on a labeled 8x5 matrix") {
    // n=2, m=3: gate rows for u=1 are {1,3,5,7}, self column is m+u = 4.
    LstmParams p;
    p.n = 2;
    p.m = 3;
    p.W = Matrix(8, 5);
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 5; ++c)
        p.W(r, c) = static_cast<double>(100 * r + c);
    p.b = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
    const CellSubsystem sub = extract_cell_subsystem(p, 1);
    REQUIRE(sub.w_rec[0] == 104.0);
    REQUIRE(sub.w_rec[1] == 304.0);
    REQUIRE(sub.w_rec[2] == 504.0);
    REQUIRE(sub.w_rec[3] == 704.0);
    REQUIRE(sub.b[0] == 1.0);
    REQUIRE(sub.b[1] == 3.0);
    REQUIRE(sub.b[2] == 5.0);
    REQUIRE(sub.b[3] == 7.0);
    // Input weights are the row sums over columns 0..2.
    REQUIRE(sub.w_in[0] == 100.0 + 101.0 + 102.0);
    REQUIRE(sub.w_in[3] == 700.0 + 701.0 + 702.0);
  }
  SECTION("per-channel probe mode picks one column") {
    LstmParams p;
    p.n = 1;
    p.m = 3;
    p.W = Matrix(4, 4, 0.0);
    p.W(0, 0) = 0.5;
    p.W(0, 1) = -0.2;
    p.W(0, 2) = 0.1;
    p.b.assign(4, 0.0);
    REQUIRE(extract_cell_subsystem(p, 0, 1).w_in[0] == -0.2);
  }
  SECTION("out-of-range indices are rejected") {
    std::mt19937_64 rng(3);
    const LstmParams p = testutil::random_params(rng, 2, 3);
    REQUIRE_THROWS_AS(extract_cell_subsystem(p, 2), InputError);
    REQUIRE_THROWS_AS(extract_cell_subsystem(p, 0, 3), InputError);
  }
}

TEST_CASE("extraction ignores other cells' weights") {
  std::mt19937_64 rng(5);
  const LstmParams p = testutil::random_params(rng, 4, 2);
  const CellSubsystem before = extract_cell_subsystem(p, 1);
  LstmParams q = p;
  // Scribble over every row belonging to cells != 1 and every recurrent
  // column != m+1 of cell 1's rows.
  for (std::size_t g = 0; g < 4; ++g)
    for (std::size_t u = 0; u < 4; ++u) {
      if (u == 1) continue;
      for (std::size_t c = 0; c < q.W.cols; ++c) q.W(g * 4 + u, c) += 9.0;
      q.b[g * 4 + u] -= 3.0;
    }
  for (std::size_t g = 0; g < 4; ++g)
    for (std::size_t k = 0; k < 4; ++k)
      if (k != 1) q.W(g * 4 + 1, q.m + k) *= -2.0;
  const CellSubsystem after = extract_cell_subsystem(q, 1);
  REQUIRE(before.w_in == after.w_in);
  REQUIRE(before.w_rec == after.w_rec);
  REQUIRE(before.b == after.b);
}

TEST_CASE("single-cell subsystem reproduces the full cell") {
  SECTION("n=1, m=1: nothing to drop") {
    std::mt19937_64 rng(7);
    const LstmParams p = testutil::random_params(rng, 1, 1);
    const Signal probe = make_sine(50, 0.1, 1.0);
    const ResponseTrace trace = subsystem_rollout(extract_cell_subsystem(p, 0), probe);
    std::vector<Vec> xs;
    for (double v : probe.samples) xs.push_back({v});
    const auto states = lstm_rollout(p, xs, zero_state(1));
    for (std::size_t t = 0; t < probe.length(); ++t) {
      REQUIRE(trace.y[t] == Approx(states[t].y[0]).margin(1e-12));
      REQUIRE(trace.c[t] == Approx(states[t].c[0]).margin(1e-12));
    }
  }
  SECTION("n=1 with one active input channel: exact match") {
    std::mt19937_64 rng(11);
    LstmParams p = testutil::random_params(rng, 1, 3);
    for (std::size_t g = 0; g < 4; ++g) {
      p.W(g, 0) = 0.0;
      p.W(g, 2) = 0.0;  // only channel 1 is wired
    }
    const Signal probe = make_step(40, 1.0);
    const ResponseTrace trace =
        subsystem_rollout(extract_cell_subsystem(p, 0, 1), probe);
    std::vector<Vec> xs;
    for (double v : probe.samples) xs.push_back({0.0, v, 0.0});
    const auto states = lstm_rollout(p, xs, zero_state(1));
    for (std::size_t t = 0; t < probe.length(); ++t) {
      REQUIRE(trace.y[t] == states[t].y[0]);
      REQUIRE(trace.c[t] == states[t].c[0]);
    }
  }
}

TEST_CASE("subsystem rollout follows the scalar recurrence") {
  SECTION("all-zero subsystem stays at rest") {
    CellSubsystem sub;
    const ResponseTrace trace = subsystem_rollout(sub, make_sine(30, 0.1, 1.0));
    for (double v : trace.y) REQUIRE(v == 0.0);
    for (double v : trace.c) REQUIRE(v == 0.0);
  }
  SECTION("saturated gates reach the fixed point") {
    CellSubsystem sub;
    sub.w_in = {1.0, 10.0, -10.0, 10.0};
    Signal constant;  // constant drive x = 1, built by hand on purpose
    constant.kind = SignalKind::Step;
    constant.t_step = 2;
    constant.amplitude = 1.0;
    constant.samples.assign(400, 1.0);
    const ResponseTrace trace = subsystem_rollout(sub, constant);
    // Fixed-point oracle iterated to convergence:
    // c = tanh(1) sigma(10) + sigma(-10) c.
    auto sigma = [](double a) { return 1.0 / (1.0 + std::exp(-a)); };
    double c_star = 0.0;
    for (int i = 0; i < 300; ++i)
      c_star = std::tanh(1.0) * sigma(10.0) + sigma(-10.0) * c_star;
    const double y_star = sigma(10.0) * std::tanh(c_star);
    REQUIRE(trace.c.back() == Approx(c_star).margin(1e-12));
    REQUIRE(trace.y.back() == Approx(y_star).margin(1e-12));
    REQUIRE(y_star == Approx(0.64198584589968744).margin(1e-12));
  }
  SECTION("trace length equals signal length") {
    std::mt19937_64 rng(13);
    const LstmParams p = testutil::random_params(rng, 3, 2);
    for (const std::size_t T : {std::size_t(2), std::size_t(7), std::size_t(100)}) {
      const ResponseTrace trace =
          subsystem_rollout(extract_cell_subsystem(p, 1), make_step(T, 1.0));
      REQUIRE(trace.length() == T);
      REQUIRE(trace.c.size() == T);
      REQUIRE(trace.signal.samples.size() == T);
    }
  }
  SECTION("non-finite signal is rejected") {
    CellSubsystem sub;
    Signal bad = make_step(10, 1.0);
    bad.samples[3] = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(subsystem_rollout(sub, bad), NumericError);
  }
}

TEST_CASE("subsystem output stays bounded", "[property]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    CellSubsystem sub;
    for (std::size_t g = 0; g < 4; ++g) {
      sub.w_in[g] = dist(rng);
      sub.w_rec[g] = dist(rng);
      sub.b[g] = dist(rng);
    }
    const ResponseTrace trace = subsystem_rollout(sub, make_sine(60, 0.05, 2.0));
    for (double v : trace.y) REQUIRE(std::abs(v) < 1.0);
  }
}

TEST_CASE("extraction is deterministic") {
  std::mt19937_64 rng(19);
  const LstmParams p = testutil::random_params(rng, 5, 3);
  const CellSubsystem a = extract_cell_subsystem(p, 2);
  const CellSubsystem b = extract_cell_subsystem(p, 2);
  REQUIRE(a.w_in == b.w_in);
  REQUIRE(a.w_rec == b.w_rec);
  REQUIRE(a.b == b.b);
}
