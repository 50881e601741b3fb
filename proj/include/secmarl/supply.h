#pragma once

#include <vector>

#include "secmarl/mat.h"

namespace secmarl::supply {

// s_i = [c, mu, x, y_1..y_l]: purchase cost, anticipated demand, stock level,
// incoming replenishment pipeline.
struct PlayerState {
    double c = 0.0;
    double mu = 0.0;
    double x = 0.0;
    std::vector<double> y;

    int dim() const { return 3 + static_cast<int>(y.size()); }
    std::vector<double> to_vec() const;
};

// a_i = [q, p]: order quantity and price charged.
struct PlayerAction {
    double q = 0.0;
    double p = 0.0;
};

struct ForecastSpec {
    double alpha = 0.3;  // exponential moving average weight on the newest point
};

struct GameConfig {
    double raw_price = 0.5;  // P(q0), constant

    // consumer demand Q(p1) = intercept - slope*p1 + noise*eps, clamped at 0
    double demand_intercept = 10.0;
    double demand_slope = 2.0;
    double demand_noise = 0.05;

    double h0 = 0.01, h1 = 0.01;  // holding cost coefficients
    double w0 = 0.1, w1 = 0.1;    // loss-of-goodwill coefficients

    int lead0 = 2, lead1 = 2;

    double p_max0 = 10.0, p_max1 = 18.0, q_max = 20.0;

    ForecastSpec forecaster;

    // reset draw ranges
    double init_stock_lo = 2.0, init_stock_hi = 10.0;
    double init_pipe_lo = 0.0, init_pipe_hi = 3.0;
    double init_mu_lo = 2.0, init_mu_hi = 8.0;
    double init_c1_lo = 0.5, init_c1_hi = 2.0;

    int state_dim() const { return 3 + lead0; }  // symmetric leads
    void validate() const;
};

struct StepOutcome {
    double r0 = 0.0, r1 = 0.0;
    double d10 = 0.0, dc1 = 0.0;
    double qp1 = 0.0;  // consumer demand realization Q(p1)
    double wastage = 0.0;
    PlayerState next0, next1;
};

double consumer_demand(double p1, double eps, const GameConfig& cfg);
double realized_demand(double ordered, double stock);

double reward_player0(const GameConfig& cfg, double q0, double p0, double d10, double x0,
                      double q1);
double reward_player1(const GameConfig& cfg, double p1, double dc1, double p0, double d10,
                      double x1, double qp1);

// EMA over the full history, seeded with the first observation.
double forecast_update(const std::vector<double>& history, const ForecastSpec& spec);

// One transition of the game given both players' demand histories (appended
// with this step's realized orders before the forecast refresh).
StepOutcome step(const PlayerState& s0, const PlayerState& s1, const PlayerAction& a0,
                 const PlayerAction& a1, double eps, const GameConfig& cfg,
                 std::vector<double>& demand_hist0, std::vector<double>& demand_hist1);

// deterministic state initialization from the state stream
std::pair<PlayerState, PlayerState> reset(Rng& state_rng, const GameConfig& cfg);

// Environment wrapper holding the per-episode forecast histories.
class Env {
  public:
    explicit Env(GameConfig cfg) : cfg_(std::move(cfg)) {}

    void reset_episode(Rng& state_rng);
    StepOutcome advance(const PlayerAction& a0, const PlayerAction& a1, double eps);

    const PlayerState& state(int player) const { return player == 0 ? s0_ : s1_; }
    const GameConfig& config() const { return cfg_; }

  private:
    GameConfig cfg_;
    PlayerState s0_, s1_;
    std::vector<double> hist0_, hist1_;
};

}  // namespace secmarl::supply
