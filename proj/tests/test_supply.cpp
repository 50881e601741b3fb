#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "secmarl/supply.h"

using namespace secmarl;
using namespace secmarl::supply;

namespace {

GameConfig default_cfg() { return GameConfig{}; }

}  // namespace

TEST_CASE("consumer demand pinned values") {
    const GameConfig cfg = default_cfg();
    CHECK(consumer_demand(2.0, 0.0, cfg) == 6.0);   // 10 - 4
    CHECK(consumer_demand(5.0, 0.0, cfg) == 0.0);   // clamped
    CHECK(consumer_demand(6.0, 0.0, cfg) == 0.0);   // would be negative
    CHECK(consumer_demand(0.0, 2.0, cfg) == doctest::Approx(10.1).epsilon(1e-12));
}

TEST_CASE("realized demand pinned values") {
    CHECK(realized_demand(5.0, 3.0) == 3.0);
    CHECK(realized_demand(0.0, 4.0) == 0.0);
    CHECK(realized_demand(2.0, 2.0) == 2.0);
}

TEST_CASE("reward expressions pinned values") {
    const GameConfig cfg = default_cfg();
    // r1 with p1=4, dc1=2, p0=1, d10=1.5, x1=3, Q(p1)=2
    CHECK(reward_player1(cfg, 4.0, 2.0, 1.0, 1.5, 3.0, 2.0) ==
          doctest::Approx(6.49).epsilon(1e-12));
    // all-zero activity
    CHECK(reward_player0(cfg, 0, 0, 0, 0, 0) == 0.0);
    CHECK(reward_player1(cfg, 0, 0, 0, 0, 0, 0) == 0.0);
    // r0 with q0=2, p0=3, d10=1, x0=1, q1=1
    CHECK(reward_player0(cfg, 2.0, 3.0, 1.0, 1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("forecast update") {
    ForecastSpec ema{0.5};
    CHECK(forecast_update({4.0, 4.0, 4.0}, ema) == 4.0);
    CHECK(forecast_update({2.0, 4.0}, ema) == 3.0);
    CHECK(forecast_update({7.5}, ema) == 7.5);
    CHECK_THROWS_AS(forecast_update({}, ema), EmptyHistory);
}

TEST_CASE("single step stock and pipeline update") {
    GameConfig cfg = default_cfg();
    // x=5, realized d=2, pipeline [1,3]: x' = 5-2+1 = 4, y' = [3, tail]
    PlayerState s0{0.5, 4.0, 5.0, {1.0, 3.0}};
    PlayerState s1{1.0, 3.0, 9.0, {2.0, 0.0}};
    std::vector<double> h0, h1;
    const auto out = step(s0, s1, {3.0, 2.0}, {2.0, 3.0}, 0.0, cfg, h0, h1);
    CHECK(out.d10 == 2.0);
    CHECK(out.next0.x == 4.0);
    CHECK(out.next0.y == std::vector<double>{3.0, 3.0});  // tail = q0
    CHECK(out.next1.y == std::vector<double>{0.0, 2.0});  // tail = d10
}

TEST_CASE("wastage is procured minus delivered") {
    GameConfig cfg = default_cfg();
    PlayerState s0{0.5, 4.0, 9.0, {0.0, 0.0}};
    PlayerState s1{1.0, 3.0, 5.0, {0.0, 0.0}};
    std::vector<double> h0, h1;
    // q0=3; dc1 = min(Q(4.05) = 10-8.1 = 1.9, x1=5) = 1.9
    const auto out = step(s0, s1, {3.0, 2.0}, {4.0, 4.05}, 0.0, cfg, h0, h1);
    CHECK(out.dc1 == doctest::Approx(1.9).epsilon(1e-12));
    CHECK(out.wastage == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("two-step scripted episode against the hand trace") {
    GameConfig cfg = default_cfg();
    PlayerState s0{0.5, 4.0, 5.0, {1.0, 3.0}};
    PlayerState s1{1.0, 3.0, 4.0, {2.0, 0.0}};
    std::vector<double> h0, h1;

    const auto out1 = step(s0, s1, {3.0, 2.0}, {4.0, 3.0}, 0.0, cfg, h0, h1);
    CHECK(out1.qp1 == 4.0);
    CHECK(out1.d10 == 4.0);
    CHECK(out1.dc1 == 4.0);
    CHECK(out1.r0 == doctest::Approx(6.49).epsilon(1e-12));
    CHECK(out1.r1 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(out1.wastage == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(out1.next0.x == 2.0);
    CHECK(out1.next0.y == std::vector<double>{3.0, 3.0});
    CHECK(out1.next0.c == 0.5);
    CHECK(out1.next0.mu == 4.0);
    CHECK(out1.next1.x == 2.0);
    CHECK(out1.next1.y == std::vector<double>{0.0, 4.0});
    CHECK(out1.next1.c == 2.0);
    CHECK(out1.next1.mu == 4.0);

    const auto out2 =
        step(out1.next0, out1.next1, {2.0, 1.5}, {3.0, 4.0}, 0.0, cfg, h0, h1);
    CHECK(out2.qp1 == 2.0);
    CHECK(out2.d10 == 2.0);
    CHECK(out2.dc1 == 2.0);
    CHECK(out2.r0 == doctest::Approx(1.9).epsilon(1e-12));
    CHECK(out2.r1 == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(out2.wastage == 0.0);
    CHECK(out2.next0.x == 3.0);
    CHECK(out2.next0.y == std::vector<double>{3.0, 2.0});
    CHECK(out2.next1.x == 0.0);
    CHECK(out2.next1.y == std::vector<double>{4.0, 2.0});
    CHECK(out2.next1.c == 1.5);
    CHECK(out2.next0.mu == doctest::Approx(0.3 * 3.0 + 0.7 * 4.0).epsilon(1e-12));
    CHECK(out2.next1.mu == doctest::Approx(0.3 * 2.0 + 0.7 * 4.0).epsilon(1e-12));
}

TEST_CASE("step rejects non-finite actions") {
    GameConfig cfg = default_cfg();
    PlayerState s0{0.5, 4.0, 5.0, {1.0, 3.0}};
    PlayerState s1{1.0, 3.0, 4.0, {2.0, 0.0}};
    std::vector<double> h0, h1;
    CHECK_THROWS_AS(step(s0, s1, {std::nan(""), 1.0}, {1.0, 1.0}, 0.0, cfg, h0, h1), NonFinite);
}

TEST_CASE("reset is a deterministic function of the seed") {
    const GameConfig cfg = default_cfg();
    Rng a(77), b(77);
    const auto [a0, a1] = reset(a, cfg);
    const auto [b0, b1] = reset(b, cfg);
    CHECK(a0.to_vec() == b0.to_vec());
    CHECK(a1.to_vec() == b1.to_vec());

    // different seeds give different states (probability ~1 over 100 pairs)
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
        Rng r1(1000 + i), r2(5000 + i);
        const auto [x0, x1] = reset(r1, cfg);
        const auto [y0, y1] = reset(r2, cfg);
        if (x0.to_vec() != y0.to_vec()) ++differing;
    }
    CHECK(differing == 100);
}

TEST_CASE("reset with collapsed ranges is constant") {
    GameConfig cfg = default_cfg();
    cfg.init_stock_lo = cfg.init_stock_hi = 4.0;
    cfg.init_pipe_lo = cfg.init_pipe_hi = 1.0;
    cfg.init_mu_lo = cfg.init_mu_hi = 3.0;
    cfg.init_c1_lo = cfg.init_c1_hi = 1.0;
    Rng rng(5);
    const auto [s0, s1] = reset(rng, cfg);
    CHECK(s0.to_vec() == std::vector<double>{0.5, 3.0, 4.0, 1.0, 1.0});
    CHECK(s1.to_vec() == std::vector<double>{1.0, 3.0, 4.0, 1.0, 1.0});
}

TEST_CASE("config validation") {
    GameConfig cfg = default_cfg();
    cfg.h0 = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = default_cfg();
    cfg.forecaster.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = default_cfg();
    cfg.init_stock_lo = 5.0;
    cfg.init_stock_hi = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("environment invariants over random steps") {
    const GameConfig cfg = default_cfg();
    Rng rng(123);
    Env env(cfg);
    Rng reset_rng(9);
    env.reset_episode(reset_rng);
    for (int i = 0; i < 10000; ++i) {
        if (i % 40 == 39) env.reset_episode(reset_rng);
        const PlayerState before0 = env.state(0);
        const PlayerState before1 = env.state(1);
        const PlayerAction a0{rng.next_range(0.0, cfg.q_max), rng.next_range(0.0, cfg.p_max0)};
        const PlayerAction a1{rng.next_range(0.0, cfg.q_max), rng.next_range(0.0, cfg.p_max1)};
        const double eps = rng.next_gauss();
        const auto out = env.advance(a0, a1, eps);

        // conservation: x' + d = x + y[0], to one ulp of reassociation
        CHECK(out.next0.x + out.d10 ==
              doctest::Approx(before0.x + before0.y.front()).epsilon(1e-12));
        CHECK(out.next1.x + out.dc1 ==
              doctest::Approx(before1.x + before1.y.front()).epsilon(1e-12));

        // demand caps
        CHECK(out.d10 <= before0.x);
        CHECK(out.d10 <= a1.q);
        CHECK(out.dc1 <= before1.x);
        CHECK(out.dc1 <= out.qp1);

        // reward decomposition recomputed from the outcome fields
        const double want_r0 = a0.p * out.d10 - cfg.raw_price * a0.q -
                               cfg.h0 * (before0.x - out.d10) - cfg.w0 * (a1.q - out.d10);
        const double want_r1 = a1.p * out.dc1 - a0.p * out.d10 -
                               cfg.h1 * (before1.x - out.dc1) - cfg.w1 * (out.qp1 - out.dc1);
        CHECK(out.r0 == doctest::Approx(want_r0).epsilon(1e-12));
        CHECK(out.r1 == doctest::Approx(want_r1).epsilon(1e-12));
    }
}

TEST_CASE("identical seed and action sequence give bit-identical trajectories") {
    const GameConfig cfg = default_cfg();
    auto run = [&] {
        Env env(cfg);
        Rng reset_rng(31);
        Rng act_rng(32);
        env.reset_episode(reset_rng);
        std::vector<double> samples;
        for (int i = 0; i < 200; ++i) {
            const PlayerAction a0{act_rng.next_range(0.0, 5.0), act_rng.next_range(0.0, 5.0)};
            const PlayerAction a1{act_rng.next_range(0.0, 5.0), act_rng.next_range(0.0, 5.0)};
            const auto out = env.advance(a0, a1, act_rng.next_gauss());
            samples.push_back(out.r0);
            samples.push_back(out.r1);
            samples.push_back(out.next1.x);
        }
        return samples;
    };
    CHECK(run() == run());
}
