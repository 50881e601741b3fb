#include "secmarl/supply.h"

#include <algorithm>
#include <cmath>

namespace secmarl::supply {

std::vector<double> PlayerState::to_vec() const {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(dim()));
    v.push_back(c);
    v.push_back(mu);
    v.push_back(x);
    v.insert(v.end(), y.begin(), y.end());
    return v;
}

void GameConfig::validate() const {
    if (raw_price < 0 || demand_intercept < 0 || demand_slope < 0 || demand_noise < 0 ||
        h0 < 0 || h1 < 0 || w0 < 0 || w1 < 0)
        throw ValidationError("game coefficients must be nonnegative");
    if (lead0 < 1 || lead1 < 1) throw ValidationError("lead times must be >= 1");
    if (lead0 != lead1) throw ValidationError("players must share a lead time");
    if (p_max0 <= 0 || p_max1 <= 0 || q_max <= 0) throw ValidationError("bounds must be positive");
    if (forecaster.alpha <= 0 || forecaster.alpha > 1)
        throw ValidationError("forecast alpha must lie in (0, 1]");
    if (init_stock_lo > init_stock_hi || init_pipe_lo > init_pipe_hi ||
        init_mu_lo > init_mu_hi || init_c1_lo > init_c1_hi)
        throw ValidationError("init ranges inverted");
    if (init_stock_lo < 0 || init_pipe_lo < 0 || init_mu_lo < 0 || init_c1_lo < 0)
        throw ValidationError("init ranges must be nonnegative");
}

double consumer_demand(double p1, double eps, const GameConfig& cfg) {
    return std::max(0.0, cfg.demand_intercept - cfg.demand_slope * p1 + cfg.demand_noise * eps);
}

double realized_demand(double ordered, double stock) { return std::min(ordered, stock); }

double reward_player0(const GameConfig& cfg, double q0, double p0, double d10, double x0,
                      double q1) {
    return p0 * d10 - cfg.raw_price * q0 - cfg.h0 * (x0 - d10) - cfg.w0 * (q1 - d10);
}

double reward_player1(const GameConfig& cfg, double p1, double dc1, double p0, double d10,
                      double x1, double qp1) {
    return p1 * dc1 - p0 * d10 - cfg.h1 * (x1 - dc1) - cfg.w1 * (qp1 - dc1);
}

double forecast_update(const std::vector<double>& history, const ForecastSpec& spec) {
    if (history.empty()) throw EmptyHistory("forecast_update");
    double mu = history.front();
    for (std::size_t i = 1; i < history.size(); ++i)
        mu = spec.alpha * history[i] + (1.0 - spec.alpha) * mu;
    return mu;
}

StepOutcome step(const PlayerState& s0, const PlayerState& s1, const PlayerAction& a0,
                 const PlayerAction& a1, double eps, const GameConfig& cfg,
                 std::vector<double>& demand_hist0, std::vector<double>& demand_hist1) {
    if (!std::isfinite(a0.q) || !std::isfinite(a0.p) || !std::isfinite(a1.q) ||
        !std::isfinite(a1.p))
        throw NonFinite("step actions");

    StepOutcome out;
    out.qp1 = consumer_demand(a1.p, eps, cfg);
    out.d10 = realized_demand(a1.q, s0.x);
    out.dc1 = realized_demand(out.qp1, s1.x);
    out.r0 = reward_player0(cfg, a0.q, a0.p, out.d10, s0.x, a1.q);
    out.r1 = reward_player1(cfg, a1.p, out.dc1, a0.p, out.d10, s1.x, out.qp1);
    out.wastage = a0.q - out.dc1;

    demand_hist0.push_back(a1.q);
    demand_hist1.push_back(out.qp1);

    // stock update and pipeline shift; tail = delivered supply
    auto advance_state = [](const PlayerState& s, double realized, double tail) {
        PlayerState n = s;
        n.x = s.x - realized + s.y.front();
        for (std::size_t k = 0; k + 1 < n.y.size(); ++k) n.y[k] = s.y[k + 1];
        n.y.back() = tail;
        return n;
    };
    out.next0 = advance_state(s0, out.d10, a0.q);
    out.next1 = advance_state(s1, out.dc1, out.d10);

    out.next0.c = cfg.raw_price;
    out.next1.c = a0.p;
    out.next0.mu = forecast_update(demand_hist0, cfg.forecaster);
    out.next1.mu = forecast_update(demand_hist1, cfg.forecaster);

    if (out.next0.x < 0 || out.next1.x < 0) throw NegativeState("stock went negative");
    return out;
}

std::pair<PlayerState, PlayerState> reset(Rng& state_rng, const GameConfig& cfg) {
    auto draw_player = [&](int lead) {
        PlayerState s;
        s.x = state_rng.next_range(cfg.init_stock_lo, cfg.init_stock_hi);
        s.y.resize(static_cast<std::size_t>(lead));
        for (auto& v : s.y) v = state_rng.next_range(cfg.init_pipe_lo, cfg.init_pipe_hi);
        s.mu = state_rng.next_range(cfg.init_mu_lo, cfg.init_mu_hi);
        return s;
    };
    PlayerState s0 = draw_player(cfg.lead0);
    PlayerState s1 = draw_player(cfg.lead1);
    s0.c = cfg.raw_price;
    s1.c = state_rng.next_range(cfg.init_c1_lo, cfg.init_c1_hi);
    return {std::move(s0), std::move(s1)};
}

void Env::reset_episode(Rng& state_rng) {
    auto [a, b] = reset(state_rng, cfg_);
    s0_ = std::move(a);
    s1_ = std::move(b);
    hist0_.clear();
    hist1_.clear();
}

StepOutcome Env::advance(const PlayerAction& a0, const PlayerAction& a1, double eps) {
    StepOutcome out = step(s0_, s1_, a0, a1, eps, cfg_, hist0_, hist1_);
    s0_ = out.next0;
    s1_ = out.next1;
    return out;
}

}  // namespace secmarl::supply
