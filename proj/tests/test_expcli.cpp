#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "secmarl/experiment.h"

using namespace secmarl;

TEST_CASE("minimal config gets all defaults") {
    const ExperimentConfig cfg = config_from_json_text(R"({"mode":"ede","seed":7})");
    CHECK(cfg.mode == "ede");
    CHECK(cfg.seed == 7);
    CHECK(cfg.hyper.hidden == 16);
    CHECK(cfg.hyper.batch == 16);
    CHECK(cfg.pretrain.epochs == 50);
    CHECK(cfg.pretrain.steps == 40);
    CHECK(cfg.golive.epochs == 5);
    CHECK(cfg.frac_bits == 24);
    CHECK(cfg.game.raw_price == 0.5);
    CHECK(cfg.game.demand_intercept == 10.0);
    CHECK(cfg.game.demand_slope == 2.0);
    CHECK(cfg.game.h0 == 0.01);
    CHECK(cfg.game.w0 == 0.1);
    CHECK(cfg.game.p_max0 == 10.0);
    CHECK(cfg.game.p_max1 == 18.0);
    CHECK(cfg.game.q_max == 20.0);
    CHECK(cfg.game.state_dim() == 5);
}

TEST_CASE("paper preset reproduces the published table") {
    const ExperimentConfig cfg = config_from_json_text(R"({"preset":"paper"})");
    CHECK(cfg.hyper.hidden == 128);
    CHECK(cfg.hyper.batch == 128);
    CHECK(cfg.hyper.lr_a == 1e-4);
    CHECK(cfg.hyper.lr_c == 1e-3);
    CHECK(cfg.pretrain.epochs == 9900);
    CHECK(cfg.pretrain.steps == 40);
    CHECK(cfg.golive.epochs == 20);
    CHECK(cfg.ma_window == 200);
}

TEST_CASE("invalid configs are rejected with ValidationError") {
    CHECK_THROWS_AS(config_from_json_text(R"({"game":{"h0":-0.5}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"mode":"spooky"})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"definitely_not_a_key":1})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"game":{"mystery":1}})"), ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"frac_bits":60,"int_bits":10})"),
                    ValidationError);
    CHECK_THROWS_AS(config_from_json_text(R"({"batch":64,"buffer_capacity":32})"),
                    ValidationError);
}

TEST_CASE("malformed json is a ParseError") {
    CHECK_THROWS_AS(config_from_json_text("{ nope"), ParseError);
}

TEST_CASE("config echo roundtrips") {
    const ExperimentConfig cfg = config_from_json_text(
        R"({"mode":"secure2pc","seed":123,"hidden":8,"game":{"p_max1":11.5}})");
    const std::string echoed = config_to_json(cfg);
    const ExperimentConfig back = config_from_json_text(echoed);
    CHECK(back.mode == cfg.mode);
    CHECK(back.seed == cfg.seed);
    CHECK(back.hyper.hidden == 8);
    CHECK(back.game.p_max1 == 11.5);
    CHECK(config_to_json(back) == echoed);
}

TEST_CASE("moving_average pinned values") {
    CHECK(moving_average({5, 5, 5}, 2) == std::vector<double>{5, 5, 5});
    CHECK(moving_average({1, 2, 3}, 1) == std::vector<double>{1, 2, 3});
    const auto ma = moving_average({1, 2, 3}, 2);
    CHECK(ma[0] == 1.0);
    CHECK(ma[1] == 1.5);
    CHECK(ma[2] == 2.5);
    CHECK_THROWS_AS(moving_average({}, 2), EmptySeries);
}

TEST_CASE("moving_average is linear") {
    Rng rng(3);
    std::vector<double> a(50), b(50);
    for (auto& x : a) x = rng.next_range(-5, 5);
    for (auto& x : b) x = rng.next_range(-5, 5);
    std::vector<double> sum(50);
    for (int i = 0; i < 50; ++i) sum[static_cast<std::size_t>(i)] =
        a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)];
    const auto ma = moving_average(sum, 7);
    const auto ma_a = moving_average(a, 7);
    const auto ma_b = moving_average(b, 7);
    for (std::size_t i = 0; i < 50; ++i)
        CHECK(ma[i] == doctest::Approx(ma_a[i] + ma_b[i]).epsilon(1e-12));
}

namespace {

ExperimentConfig tiny(const std::string& mode, const std::string& out) {
    ExperimentConfig cfg;
    cfg.mode = mode;
    cfg.seed = 3;
    cfg.hyper.hidden = 4;
    cfg.hyper.batch = 4;
    cfg.buffer_capacity = 64;
    cfg.pretrain = {1, 6};
    cfg.golive = {1, 6};
    cfg.out_dir = out;
    return cfg;
}

}  // namespace

TEST_CASE("reports are byte-identical given the same inputs") {
    run_experiment(tiny("ede", "expcli_scratch/rep/ede"));
    run_experiment(tiny("nds", "expcli_scratch/rep/nds"));
    const ExperimentConfig cfg = tiny("ede", "expcli_scratch/rep");
    const std::string a =
        build_report(cfg, "expcli_scratch/rep/ede", "expcli_scratch/rep/nds", "ede", "nds");
    const std::string b =
        build_report(cfg, "expcli_scratch/rep/ede", "expcli_scratch/rep/nds", "ede", "nds");
    CHECK(a == b);
    CHECK(a.find("\"benefit\"") != std::string::npos);
    CHECK(a.find("wastage_reduction_pct") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical run artifacts") {
    run_experiment(tiny("ede", "expcli_scratch/det/a"));
    run_experiment(tiny("ede", "expcli_scratch/det/b"));
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    CHECK(slurp("expcli_scratch/det/a/trajectory.csv") ==
          slurp("expcli_scratch/det/b/trajectory.csv"));
    CHECK(slurp("expcli_scratch/det/a/weights_critic1.bin") ==
          slurp("expcli_scratch/det/b/weights_critic1.bin"));
}

TEST_CASE("NDS runs open no channels") {
    run_experiment(tiny("nds", "expcli_scratch/ndsonly"));
    std::ifstream in("expcli_scratch/ndsonly/stats.csv");
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    // header only: zero channel rows, zero frames, zero bytes
    CHECK(ss.str() == "party,channel,metric,value\n");
}

TEST_CASE("mae and rmse pinned values") {
    CHECK(mae({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(rmse({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(mae({0, 0}, {1, 1}) == 1.0);
    CHECK(rmse({0, 0}, {1, 1}) == 1.0);
    CHECK(mae({0, 0}, {0, 2}) == 1.0);
    CHECK(rmse({0, 0}, {0, 2}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(mae({1}, {1, 2}), LengthMismatch);
    CHECK_THROWS_AS(rmse({}, {}), EmptySeries);
}
