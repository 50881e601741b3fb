#pragma once

#include <memory>
#include <optional>

#include "secmarl/config.h"
#include "secmarl/metrics.h"

namespace secmarl {

struct TrajectoryRow {
    long iter = 0;
    int epoch = 0;
    int step = 0;
    double r0 = 0, r1 = 0, d10 = 0, dc1 = 0, wastage = 0, q0 = 0, p0 = 0, q1 = 0, p1 = 0;
};

std::string trajectory_header();
std::string trajectory_row_csv(const TrajectoryRow& r);
std::vector<TrajectoryRow> load_trajectory(const std::string& path);

// All mutable state of one simulated world: both players, the environment,
// and the named randomness streams.
struct World {
    std::unique_ptr<maddpg::PlayerCtx> p[2];
    std::unique_ptr<supply::Env> env;
    Rng state_rng{0}, demand_rng{0};
    long iter = 0;
    int epoch = 0;
};

World make_world(const ExperimentConfig& cfg);

maddpg::TrainView make_view(const ExperimentConfig& cfg, SecureBackend& be, World& w,
                            maddpg::Mode mode);

// In-process execution of one phase (used for pretraining in every mode and
// for the EDE/NDS/clear-composition runs end to end).
void run_phase(World& w, maddpg::TrainView& view, const ExperimentConfig& cfg,
               const PhaseSpec& phase, std::vector<TrajectoryRow>* log);

// Full experiment: pretrain (explicit exchange on simulated data), switch to
// the out-of-distribution go-live game, run go-live in the configured mode,
// write trajectory.csv, weight dumps, stats.csv and the config echo.
void run_experiment(const ExperimentConfig& cfg);

// process roles for the TCP deployment
void role_player(const ExperimentConfig& cfg, int party);
void role_dealer(const ExperimentConfig& cfg);
int role_driver(const ExperimentConfig& cfg, bool spawn_children, const std::string& self_exe);

struct GadgetCost {
    std::uint64_t bytes = 0;
    std::uint64_t frames = 0;
    std::uint64_t open_rounds = 0;
};

struct BenchResult {
    GadgetCost action_inference;
    GadgetCost critic_update;
    GadgetCost actor_update;
};

// Per-gadget communication costs over a loopback additive-backend session at
// the configured dimensions.
BenchResult run_bench(const ExperimentConfig& cfg);

// Comparison report over two finished run directories (see README for the
// JSON layout). When the directories hold an ede/nds pair the data-sharing
// benefit section is included.
std::string build_report(const ExperimentConfig& cfg, const std::string& dir_a,
                         const std::string& dir_b, const std::string& mode_a,
                         const std::string& mode_b);

double normalized_cumulative_revenue(const std::vector<TrajectoryRow>& golive_rows,
                                     double raw_price);

}  // namespace secmarl
