#include "secmarl/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace secmarl {

using nlohmann::ordered_json;

void ExperimentConfig::validate() const {
    if (mode != "secure2pc" && mode != "ede" && mode != "nds")
        throw ValidationError("mode must be secure2pc, ede or nds");
    if (backend != "additive" && backend != "clear")
        throw ValidationError("backend must be additive or clear");
    if (hyper.hidden < 1 || hyper.batch < 1) throw ValidationError("hidden/batch must be >= 1");
    if (hyper.lr_a <= 0 || hyper.lr_c <= 0) throw ValidationError("learning rates must be > 0");
    if (hyper.gamma < 0 || hyper.gamma > 1) throw ValidationError("gamma must be in [0,1]");
    if (hyper.rho < 0 || hyper.rho > 1) throw ValidationError("rho must be in [0,1]");
    if (hyper.noise_start < 0 || hyper.noise_floor < 0 || hyper.noise_decay <= 0 ||
        hyper.noise_decay > 1)
        throw ValidationError("noise schedule out of range");
    if (buffer_capacity < hyper.batch) throw ValidationError("buffer smaller than batch");
    if (pretrain.epochs < 0 || pretrain.steps < 1 || golive.epochs < 1 || golive.steps < 1)
        throw ValidationError("phase lengths out of range");
    if (frac_bits < 4 || int_bits < 1 || frac_bits + int_bits + 1 > 64)
        throw ValidationError("fixed point layout must satisfy f + int + 1 <= 64");
    if (ma_window < 1) throw ValidationError("ma_window must be >= 1");
    if (golive_demand_intercept < 0 || golive_demand_slope < 0)
        throw ValidationError("go-live demand curve must be nonnegative");
    if (transport.kind != "loopback" && transport.kind != "tcp")
        throw ValidationError("transport kind must be loopback or tcp");
    game.validate();
    golive_game().validate();
}

namespace {

void reject_unknown(const ordered_json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    std::string bad;
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) bad += (bad.empty() ? "" : ", ") + it.key();
    if (!bad.empty()) throw ValidationError("unknown key(s) in " + where + ": " + bad);
}

template <typename T>
void take(const ordered_json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void apply_game(const ordered_json& g, supply::GameConfig& cfg) {
    reject_unknown(g, {"raw_price", "demand_intercept", "demand_slope", "demand_noise", "h0",
                       "h1", "w0", "w1", "lead", "p_max0", "p_max1", "q_max", "forecast_alpha",
                       "init_stock_lo", "init_stock_hi", "init_pipe_lo", "init_pipe_hi",
                       "init_mu_lo", "init_mu_hi", "init_c1_lo", "init_c1_hi"},
                   "game");
    take(g, "raw_price", cfg.raw_price);
    take(g, "demand_intercept", cfg.demand_intercept);
    take(g, "demand_slope", cfg.demand_slope);
    take(g, "demand_noise", cfg.demand_noise);
    take(g, "h0", cfg.h0);
    take(g, "h1", cfg.h1);
    take(g, "w0", cfg.w0);
    take(g, "w1", cfg.w1);
    if (g.contains("lead")) {
        cfg.lead0 = g.at("lead").get<int>();
        cfg.lead1 = cfg.lead0;
    }
    take(g, "p_max0", cfg.p_max0);
    take(g, "p_max1", cfg.p_max1);
    take(g, "q_max", cfg.q_max);
    take(g, "forecast_alpha", cfg.forecaster.alpha);
    take(g, "init_stock_lo", cfg.init_stock_lo);
    take(g, "init_stock_hi", cfg.init_stock_hi);
    take(g, "init_pipe_lo", cfg.init_pipe_lo);
    take(g, "init_pipe_hi", cfg.init_pipe_hi);
    take(g, "init_mu_lo", cfg.init_mu_lo);
    take(g, "init_mu_hi", cfg.init_mu_hi);
    take(g, "init_c1_lo", cfg.init_c1_lo);
    take(g, "init_c1_hi", cfg.init_c1_hi);
}

}  // namespace

ExperimentConfig preset_config(const std::string& preset) {
    ExperimentConfig cfg;
    if (preset == "desk") {
        // defaults above are the desk preset
    } else if (preset == "paper") {
        cfg.hyper.hidden = 128;
        cfg.hyper.batch = 128;
        cfg.hyper.lr_a = 1e-4;
        cfg.hyper.lr_c = 1e-3;
        cfg.pretrain = {9900, 40};
        cfg.golive = {20, 40};
        cfg.ma_window = 200;
        cfg.buffer_capacity = 500000;
    } else {
        throw ValidationError("unknown preset: " + preset);
    }
    return cfg;
}

ExperimentConfig config_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) throw ParseError("config root must be an object");

    reject_unknown(j, {"mode", "backend", "seed", "preset", "hidden", "batch", "lr_actor",
                       "lr_critic", "gamma", "rho", "noise_start", "noise_decay", "noise_floor",
                       "actor_head_bias", "buffer_capacity", "pretrain_epochs", "pretrain_steps", "golive_epochs",
                       "golive_steps", "frac_bits", "int_bits", "ma_window", "game",
                       "golive_demand_intercept", "golive_demand_slope", "transport", "out_dir"},
                   "config");

    ExperimentConfig cfg = preset_config(j.value("preset", std::string("desk")));
    take(j, "mode", cfg.mode);
    take(j, "backend", cfg.backend);
    take(j, "seed", cfg.seed);
    take(j, "hidden", cfg.hyper.hidden);
    take(j, "batch", cfg.hyper.batch);
    take(j, "lr_actor", cfg.hyper.lr_a);
    take(j, "lr_critic", cfg.hyper.lr_c);
    take(j, "gamma", cfg.hyper.gamma);
    take(j, "rho", cfg.hyper.rho);
    take(j, "noise_start", cfg.hyper.noise_start);
    take(j, "noise_decay", cfg.hyper.noise_decay);
    take(j, "noise_floor", cfg.hyper.noise_floor);
    take(j, "actor_head_bias", cfg.hyper.actor_head_bias);
    take(j, "buffer_capacity", cfg.buffer_capacity);
    take(j, "pretrain_epochs", cfg.pretrain.epochs);
    take(j, "pretrain_steps", cfg.pretrain.steps);
    take(j, "golive_epochs", cfg.golive.epochs);
    take(j, "golive_steps", cfg.golive.steps);
    take(j, "frac_bits", cfg.frac_bits);
    take(j, "int_bits", cfg.int_bits);
    take(j, "ma_window", cfg.ma_window);
    take(j, "golive_demand_intercept", cfg.golive_demand_intercept);
    take(j, "golive_demand_slope", cfg.golive_demand_slope);
    take(j, "out_dir", cfg.out_dir);
    if (j.contains("game")) apply_game(j.at("game"), cfg.game);
    if (j.contains("transport")) {
        const auto& t = j.at("transport");
        reject_unknown(t, {"kind", "driver_listen", "peer_listen", "dealer_listen"}, "transport");
        take(t, "kind", cfg.transport.kind);
        take(t, "driver_listen", cfg.transport.driver_listen);
        take(t, "peer_listen", cfg.transport.peer_listen);
        take(t, "dealer_listen", cfg.transport.dealer_listen);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["mode"] = cfg.mode;
    j["backend"] = cfg.backend;
    j["seed"] = cfg.seed;
    j["hidden"] = cfg.hyper.hidden;
    j["batch"] = cfg.hyper.batch;
    j["lr_actor"] = cfg.hyper.lr_a;
    j["lr_critic"] = cfg.hyper.lr_c;
    j["gamma"] = cfg.hyper.gamma;
    j["rho"] = cfg.hyper.rho;
    j["noise_start"] = cfg.hyper.noise_start;
    j["noise_decay"] = cfg.hyper.noise_decay;
    j["noise_floor"] = cfg.hyper.noise_floor;
    j["actor_head_bias"] = cfg.hyper.actor_head_bias;
    j["buffer_capacity"] = cfg.buffer_capacity;
    j["pretrain_epochs"] = cfg.pretrain.epochs;
    j["pretrain_steps"] = cfg.pretrain.steps;
    j["golive_epochs"] = cfg.golive.epochs;
    j["golive_steps"] = cfg.golive.steps;
    j["frac_bits"] = cfg.frac_bits;
    j["int_bits"] = cfg.int_bits;
    j["ma_window"] = cfg.ma_window;
    j["golive_demand_intercept"] = cfg.golive_demand_intercept;
    j["golive_demand_slope"] = cfg.golive_demand_slope;
    j["out_dir"] = cfg.out_dir;
    ordered_json g;
    g["raw_price"] = cfg.game.raw_price;
    g["demand_intercept"] = cfg.game.demand_intercept;
    g["demand_slope"] = cfg.game.demand_slope;
    g["demand_noise"] = cfg.game.demand_noise;
    g["h0"] = cfg.game.h0;
    g["h1"] = cfg.game.h1;
    g["w0"] = cfg.game.w0;
    g["w1"] = cfg.game.w1;
    g["lead"] = cfg.game.lead0;
    g["p_max0"] = cfg.game.p_max0;
    g["p_max1"] = cfg.game.p_max1;
    g["q_max"] = cfg.game.q_max;
    g["forecast_alpha"] = cfg.game.forecaster.alpha;
    g["init_stock_lo"] = cfg.game.init_stock_lo;
    g["init_stock_hi"] = cfg.game.init_stock_hi;
    g["init_pipe_lo"] = cfg.game.init_pipe_lo;
    g["init_pipe_hi"] = cfg.game.init_pipe_hi;
    g["init_mu_lo"] = cfg.game.init_mu_lo;
    g["init_mu_hi"] = cfg.game.init_mu_hi;
    g["init_c1_lo"] = cfg.game.init_c1_lo;
    g["init_c1_hi"] = cfg.game.init_c1_hi;
    j["game"] = g;
    ordered_json t;
    t["kind"] = cfg.transport.kind;
    t["driver_listen"] = cfg.transport.driver_listen;
    t["peer_listen"] = cfg.transport.peer_listen;
    t["dealer_listen"] = cfg.transport.dealer_listen;
    j["transport"] = t;
    return j.dump(2) + "\n";
}

}  // namespace secmarl
