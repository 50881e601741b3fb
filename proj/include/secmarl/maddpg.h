#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "secmarl/gadgets.h"
#include "secmarl/supply.h"
#include "secmarl/transport.h"

namespace secmarl::maddpg {

using supply::PlayerAction;

enum class Mode { Secure2PC, EDE, NDS };

Mode mode_from_string(const std::string& s);
std::string mode_to_string(Mode m);

struct Transition {
    std::vector<double> s, a, s_next;
    double r = 0.0;
};

// Bounded FIFO ring; logical index 0 is the oldest stored transition. Both
// players push every step, so their buffers stay index-aligned.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return count_; }
    std::size_t capacity() const { return data_.size(); }
    const Transition& at(std::size_t logical) const;

  private:
    std::vector<Transition> data_;
    std::size_t insert_ = 0;
    std::size_t count_ = 0;
};

struct Hyper {
    int hidden = 16;
    int batch = 16;
    double lr_a = 3e-4;
    double lr_c = 2e-3;
    double gamma = 0.95;
    double rho = 0.99;
    double noise_start = 0.15;
    double noise_decay = 0.9995;
    double noise_floor = 0.05;
    // initial bias of the actor's bounded-sigmoid head; negative starts the
    // policies low in the action box instead of at the midpoint
    double actor_head_bias = -1.2;
};

// actor pi, critic Q and their targets, with optimizer state
struct AgentNets {
    MlpParams actor, critic, actor_target, critic_target;
    AdamState actor_opt, critic_opt;

    static AgentNets create(int state_dim, int action_dim, int hidden,
                            const std::vector<double>& a_lo, const std::vector<double>& a_hi,
                            Rng& weight_rng, double actor_head_bias = -1.2);
};

// theta' <- rho*theta' + (1-rho)*theta
void soft_update(MlpParams& target, const MlpParams& online, double rho);

// with replacement; BufferTooSmall when the filled region is shorter than the batch
std::vector<std::uint32_t> sample_index_set(Rng& rng, std::size_t buffer_len, int batch);

// wire: 4-byte big-endian count, then little-endian u32 indices (sent in the
// clear, as the algorithm prescribes)
void send_index_set(const std::vector<std::uint32_t>& idx, Channel& ch);
std::vector<std::uint32_t> recv_index_set(Channel& ch);

struct Batches {
    Mat s, a, r, sp, v;  // v = s ][ a
};

Batches build_batches(const ReplayBuffer& buf, const std::vector<std::uint32_t>& idx);

// raw actor output + scaled Gaussian noise, clipped into [lo, hi] per column
PlayerAction postprocess_action(const Mat& raw, Rng& noise_stream, double noise_scale,
                                const std::vector<double>& lo, const std::vector<double>& hi);

double noise_schedule(const Hyper& h, long iteration);

// Everything one player owns during a run.
struct PlayerCtx {
    int id = 0;
    AgentNets nets;
    ReplayBuffer buffer;
    Rng noise_stream;
    Rng batch_stream;
    PreprocessCounter counter;
    Mat current_state;  // 1 x state_dim
    PlayerAction last_action;

    PlayerCtx(int player, AgentNets n, std::size_t cap, Rng noise, Rng batch)
        : id(player), nets(std::move(n)), buffer(cap), noise_stream(noise),
          batch_stream(batch) {}
};

// One execution view of the two-player protocol. The in-process modes hold
// both players and no channel; a protocol party holds its own player plus the
// peer channel. The same script drives both, so the gadget call sequences
// cannot drift apart.
struct TrainView {
    SecureBackend* backend = nullptr;
    PlayerCtx* players[2] = {nullptr, nullptr};
    Channel* peer = nullptr;
    Mode mode = Mode::EDE;
    int state_dim = 0;
    int action_dim = 0;
    Hyper hyper;
    std::vector<double> a_lo[2], a_hi[2];

    // fixed per-column scales that bring network inputs to O(1); the raw
    // game units (prices to 10, quantities to 20) would saturate the
    // bounded-sigmoid heads straight from initialization
    std::vector<double> state_scale;      // length state_dim
    std::vector<double> action_scale[2];  // length action_dim

    // shape-only parameter blocks standing in for the counterparty's private
    // networks (dims and activations are public configuration)
    MlpParams absent_actor[2], absent_critic[2];

    void init_absent_shapes();
    const MlpParams& actor_of(int j) const;
    const MlpParams& critic_of(int j) const;
    const MlpParams& actor_target_of(int j) const;
    const MlpParams& critic_target_of(int j) const;
};

// Both players' action inferences for the current states (Algorithm lines
// 1-6 without the environment transition). Fills last_action for players
// present in this view.
void act_all(TrainView& v, double noise_scale);

// One player's update phase: index-set exchange, batch assembly and
// pre-processing, next-action and target forwards, loss-seeded critic
// backward, policy-gradient actor backward, Adam steps at the owner.
void train_phase(TrainView& v, int i);

// Full Algorithm-1 training part: both phases plus target soft updates.
// No-op until the buffers can fill a batch.
void train_iteration(TrainView& v);

}  // namespace secmarl::maddpg
