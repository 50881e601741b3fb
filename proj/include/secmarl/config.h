#pragma once

#include <cstdint>
#include <string>

#include "secmarl/maddpg.h"
#include "secmarl/supply.h"

namespace secmarl {

struct PhaseSpec {
    int epochs = 0;
    int steps = 0;
    long total() const { return static_cast<long>(epochs) * steps; }
};

struct TransportSpec {
    std::string kind = "loopback";  // loopback | tcp
    std::string driver_listen = "127.0.0.1:40551";
    std::string peer_listen = "127.0.0.1:40552";
    std::string dealer_listen = "127.0.0.1:40553";
};

struct ExperimentConfig {
    std::string mode = "ede";        // secure2pc | ede | nds
    std::string backend = "additive";  // secure2pc only: additive | clear
    std::uint64_t seed = 7;

    maddpg::Hyper hyper;
    int buffer_capacity = 4096;
    PhaseSpec pretrain{50, 40};
    PhaseSpec golive{5, 40};

    int frac_bits = 24;
    int int_bits = 20;
    int ma_window = 40;

    supply::GameConfig game;
    // go-live runs against a shifted demand curve (out-of-distribution data)
    double golive_demand_intercept = 9.0;
    double golive_demand_slope = 1.8;

    TransportSpec transport;
    std::string out_dir = "out";

    FixedPointConfig fixed() const { return FixedPointConfig{frac_bits, int_bits}; }
    supply::GameConfig golive_game() const {
        supply::GameConfig g = game;
        g.demand_intercept = golive_demand_intercept;
        g.demand_slope = golive_demand_slope;
        return g;
    }
    void validate() const;
};

// Applies a preset (desk | paper), then the file's keys, then validates.
// Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig preset_config(const std::string& preset);

// Bit-exact echo of the effective configuration.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace secmarl
