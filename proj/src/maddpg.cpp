#include "secmarl/maddpg.h"

#include <algorithm>
#include <cmath>

namespace secmarl::maddpg {

Mode mode_from_string(const std::string& s) {
    if (s == "secure2pc") return Mode::Secure2PC;
    if (s == "ede") return Mode::EDE;
    if (s == "nds") return Mode::NDS;
    throw ValidationError("unknown mode: " + s);
}

std::string mode_to_string(Mode m) {
    switch (m) {
        case Mode::Secure2PC: return "secure2pc";
        case Mode::EDE: return "ede";
        case Mode::NDS: return "nds";
    }
    return "?";
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
    if (capacity == 0) throw ValidationError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    data_[insert_] = std::move(t);
    insert_ = (insert_ + 1) % data_.size();
    if (count_ < data_.size()) ++count_;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
    if (logical >= count_) throw IndexOutOfRange("replay buffer index");
    // logical 0 = oldest
    const std::size_t oldest = count_ == data_.size() ? insert_ : 0;
    return data_[(oldest + logical) % data_.size()];
}

AgentNets AgentNets::create(int state_dim, int action_dim, int hidden,
                            const std::vector<double>& a_lo, const std::vector<double>& a_hi,
                            Rng& weight_rng, double actor_head_bias) {
    AgentNets n;
    n.actor = MlpParams::create(2 * state_dim, hidden, action_dim,
                                ActivationSpec::bounded_sigmoid(a_lo, a_hi), weight_rng);
    for (auto& b : n.actor.b3.a) b += actor_head_bias;
    n.critic = MlpParams::create(2 * (state_dim + action_dim), hidden, 1,
                                 ActivationSpec::identity(), weight_rng);
    n.actor_target = n.actor;
    n.critic_target = n.critic;
    n.actor_opt = AdamState::for_params(n.actor);
    n.critic_opt = AdamState::for_params(n.critic);
    return n;
}

void soft_update(MlpParams& target, const MlpParams& online, double rho) {
    if (rho < 0.0 || rho > 1.0) throw ValidationError("rho must be in [0,1]");
    auto blend = [rho](Mat& t, const Mat& o) {
        if (!t.same_shape(o)) throw ShapeMismatch("soft_update");
        for (std::size_t i = 0; i < t.a.size(); ++i)
            t.a[i] = rho * t.a[i] + (1.0 - rho) * o.a[i];
    };
    blend(target.w1, online.w1);
    blend(target.b1, online.b1);
    blend(target.w2, online.w2);
    blend(target.b2, online.b2);
    blend(target.w3, online.w3);
    blend(target.b3, online.b3);
}

std::vector<std::uint32_t> sample_index_set(Rng& rng, std::size_t buffer_len, int batch) {
    if (buffer_len < static_cast<std::size_t>(batch))
        throw BufferTooSmall("buffer shorter than batch");
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(batch));
    for (auto& k : idx) k = static_cast<std::uint32_t>(rng.next_below(buffer_len));
    return idx;
}

void send_index_set(const std::vector<std::uint32_t>& idx, Channel& ch) {
    std::vector<std::uint8_t> payload;
    payload.reserve(4 + idx.size() * 4);
    put_u32be(payload, static_cast<std::uint32_t>(idx.size()));
    for (std::uint32_t k : idx)
        for (int i = 0; i < 4; ++i)
            payload.push_back(static_cast<std::uint8_t>(k >> (8 * i)));
    ch.send(MsgType::IndexSet, std::move(payload));
}

std::vector<std::uint32_t> recv_index_set(Channel& ch) {
    const Frame f = ch.expect(MsgType::IndexSet);
    std::size_t pos = 0;
    const std::uint32_t count = get_u32be(f.payload, pos);
    if (f.payload.size() != 4 + static_cast<std::size_t>(count) * 4)
        throw DimHeaderMismatch("index set payload");
    std::vector<std::uint32_t> idx(count);
    for (auto& k : idx) {
        k = 0;
        for (int i = 0; i < 4; ++i)
            k |= static_cast<std::uint32_t>(f.payload[pos++]) << (8 * i);
    }
    return idx;
}

Batches build_batches(const ReplayBuffer& buf, const std::vector<std::uint32_t>& idx) {
    if (idx.empty()) throw BufferTooSmall("empty index set");
    const Transition& first = buf.at(idx.front());
    const int sd = static_cast<int>(first.s.size());
    const int ad = static_cast<int>(first.a.size());
    const int b = static_cast<int>(idx.size());
    Batches out;
    out.s = Mat(b, sd);
    out.a = Mat(b, ad);
    out.r = Mat(b, 1);
    out.sp = Mat(b, sd);
    for (int k = 0; k < b; ++k) {
        const Transition& t = buf.at(idx[static_cast<std::size_t>(k)]);
        for (int j = 0; j < sd; ++j) out.s.at(k, j) = t.s[static_cast<std::size_t>(j)];
        for (int j = 0; j < ad; ++j) out.a.at(k, j) = t.a[static_cast<std::size_t>(j)];
        out.r.at(k, 0) = t.r;
        for (int j = 0; j < sd; ++j) out.sp.at(k, j) = t.s_next[static_cast<std::size_t>(j)];
    }
    out.v = hcat(out.s, out.a);
    return out;
}

PlayerAction postprocess_action(const Mat& raw, Rng& noise_stream, double noise_scale,
                                const std::vector<double>& lo, const std::vector<double>& hi) {
    if (raw.rows != 1 || raw.cols != static_cast<int>(lo.size()) || lo.size() != hi.size())
        throw DimMismatch("postprocess_action");
    std::vector<double> vals(lo.size());
    for (std::size_t j = 0; j < vals.size(); ++j) {
        const double eps = noise_stream.next_gauss();
        double v = raw.at(0, static_cast<int>(j)) + eps * noise_scale * (hi[j] - lo[j]);
        vals[j] = std::clamp(v, lo[j], hi[j]);
    }
    return PlayerAction{vals[0], vals[1]};
}

double noise_schedule(const Hyper& h, long iteration) {
    return std::max(h.noise_floor,
                    h.noise_start * std::pow(h.noise_decay, static_cast<double>(iteration)));
}

void TrainView::init_absent_shapes() {
    Rng dummy(0);
    for (int j = 0; j < 2; ++j) {
        absent_actor[j] = MlpParams::create(2 * state_dim, hyper.hidden, action_dim,
                                            ActivationSpec::bounded_sigmoid(a_lo[j], a_hi[j]),
                                            dummy);
        absent_critic[j] = MlpParams::create(2 * (state_dim + action_dim), hyper.hidden, 1,
                                             ActivationSpec::identity(), dummy);
        // only shapes and activations matter; zero out to make that plain
        for (Mat* m : {&absent_actor[j].w1, &absent_actor[j].b1, &absent_actor[j].w2,
                       &absent_actor[j].b2, &absent_actor[j].w3, &absent_actor[j].b3,
                       &absent_critic[j].w1, &absent_critic[j].b1, &absent_critic[j].w2,
                       &absent_critic[j].b2, &absent_critic[j].w3, &absent_critic[j].b3})
            std::fill(m->a.begin(), m->a.end(), 0.0);
    }
}

const MlpParams& TrainView::actor_of(int j) const {
    return players[j] ? players[j]->nets.actor : absent_actor[j];
}
const MlpParams& TrainView::critic_of(int j) const {
    return players[j] ? players[j]->nets.critic : absent_critic[j];
}
const MlpParams& TrainView::actor_target_of(int j) const {
    return players[j] ? players[j]->nets.actor_target : absent_actor[j];
}
const MlpParams& TrainView::critic_target_of(int j) const {
    return players[j] ? players[j]->nets.critic_target : absent_critic[j];
}

namespace {

Mat scale_cols(const Mat& m, const std::vector<double>& divisor) {
    if (m.cols != static_cast<int>(divisor.size())) throw DimMismatch("scale_cols");
    Mat out = m;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out.at(i, j) /= divisor[static_cast<std::size_t>(j)];
    return out;
}

std::vector<double> concat_scales(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Padded half of player j's matrix for a gadget updating/serving player
// `focal`. NDS isolates the focal player: the counterparty half is a zero
// matrix and no counter is touched.
PaddedInput padded_half(TrainView& v, int j, int focal, const Mat& data, int rows,
                        int half_cols, const std::string& tag, bool count) {
    if (v.mode == Mode::NDS && j != focal)
        return preprocess(Mat::zeros(rows, half_cols), j, tag, nullptr);
    if (!v.players[j]) return absent_padded(rows, 2 * half_cols, j);
    return preprocess(data, j, tag, count ? &v.players[j]->counter : nullptr);
}

Mat state_row(const PlayerCtx& p) { return p.current_state; }

}  // namespace

void act_all(TrainView& v, double noise_scale) {
    SecureBackend& be = *v.backend;
    const int sd = v.state_dim;
    for (int i = 0; i < 2; ++i) {
        if (v.mode == Mode::NDS && !v.players[i]) continue;
        be.set_tag("action");
        PaddedInput s0 = padded_half(
            v, 0, i,
            v.players[0] ? scale_cols(state_row(*v.players[0]), v.state_scale) : Mat(), 1, sd,
            "action", true);
        PaddedInput s1 = padded_half(
            v, 1, i,
            v.players[1] ? scale_cols(state_row(*v.players[1]), v.state_scale) : Mat(), 1, sd,
            "action", true);
        const Mat raw = f_secfloat(be, s0, s1, v.actor_of(i), i);
        if (v.players[i])
            v.players[i]->last_action = postprocess_action(
                raw, v.players[i]->noise_stream, noise_scale, v.a_lo[i], v.a_hi[i]);
    }
}

void train_phase(TrainView& v, int i) {
    SecureBackend& be = *v.backend;
    const int B = v.hyper.batch;
    const int sd = v.state_dim;
    const int ad = v.action_dim;

    // line 9: the sampler draws the index set and sends it explicitly
    std::vector<std::uint32_t> idx;
    if (v.players[i]) {
        idx = sample_index_set(v.players[i]->batch_stream, v.players[i]->buffer.size(), B);
        if (v.peer) send_index_set(idx, *v.peer);
    } else {
        idx = recv_index_set(*v.peer);
    }

    // lines 11-16: batch assembly and pre-processing (network inputs carry
    // the fixed feature scaling)
    Batches bt[2];
    PaddedInput S[2], V[2], Sp[2], Vp[2];
    for (int j = 0; j < 2; ++j) {
        const bool mine = v.players[j] != nullptr;
        const bool active = v.mode != Mode::NDS || j == i;
        const std::vector<double> v_scale = concat_scales(v.state_scale, v.action_scale[j]);
        Mat s_n, v_n, sp_n;
        if (mine && active) {
            bt[j] = build_batches(v.players[j]->buffer, idx);
            s_n = scale_cols(bt[j].s, v.state_scale);
            v_n = scale_cols(bt[j].v, v_scale);
            sp_n = scale_cols(bt[j].sp, v.state_scale);
        }
        S[j] = padded_half(v, j, i, s_n, B, sd, "S", true);
        V[j] = padded_half(v, j, i, v_n, B, sd + ad, "V", true);
        Sp[j] = padded_half(v, j, i, sp_n, B, sd, "Sp", true);
    }

    // lines 19-22: estimated next actions and the next state-action batches
    for (int j = 0; j < 2; ++j) {
        if (v.mode == Mode::NDS && j != i) {
            Vp[j] = preprocess(Mat::zeros(B, sd + ad), j, "Vp", nullptr);
            continue;
        }
        be.set_tag("next_action");
        const Mat ap = f_secfloat(be, Sp[0], Sp[1], v.actor_target_of(j), j);
        if (v.players[j]) {
            const Mat vp = hcat(scale_cols(bt[j].sp, v.state_scale),
                                scale_cols(ap, v.action_scale[j]));
            Vp[j] = preprocess(vp, j, "Vp", &v.players[j]->counter);
        } else {
            Vp[j] = absent_padded(B, 2 * (sd + ad), j);
        }
    }

    // line 24: Q_targ = R + gamma * target-critic forward
    be.set_tag("critic_update");
    const Mat qt_out = f_secfloat(be, Vp[0], Vp[1], v.critic_target_of(i), i);
    Mat q_targ;
    if (v.players[i]) q_targ = bt[i].r + qt_out * v.hyper.gamma;

    // line 25: loss-seeded critic backward
    const GradSet critic_grads = bl_secfloat_w(be, V[0], V[1], v.critic_of(i), q_targ, i);

    // lines 27-28: dQ/da sliced from the input gradient, then the actor
    // backward seeded with it; the slice is w.r.t. the scaled action columns,
    // so the seed divides by the same scales to be a gradient in raw units
    be.set_tag("actor_update");
    const Mat dvq = b_secfloat_x(be, V[0], V[1], v.critic_of(i), i);
    Mat daq;
    if (v.players[i]) {
        daq = slice_cols(dvq, (sd + ad) * i + sd, (sd + ad) * i + sd + ad);
        daq = scale_cols(daq, v.action_scale[i]);
    }
    const GradSet actor_grads = b_secfloat_w(be, S[0], S[1], v.actor_of(i), i, &daq);

    // lines 29-30: ascend the actor, descend the critic
    if (v.players[i]) {
        PlayerCtx& p = *v.players[i];
        adam_step(p.nets.actor, actor_grads, p.nets.actor_opt, v.hyper.lr_a, true);
        adam_step(p.nets.critic, critic_grads, p.nets.critic_opt, v.hyper.lr_c, false);
    }
    be.set_tag("untagged");
}

void train_iteration(TrainView& v) {
    // both buffers advance in lockstep, so either one knows the fill level
    std::size_t len = 0;
    for (int j = 0; j < 2; ++j)
        if (v.players[j]) len = v.players[j]->buffer.size();
    if (len < static_cast<std::size_t>(v.hyper.batch)) return;

    train_phase(v, 0);
    train_phase(v, 1);

    for (int j = 0; j < 2; ++j) {
        if (!v.players[j]) continue;
        soft_update(v.players[j]->nets.actor_target, v.players[j]->nets.actor, v.hyper.rho);
        soft_update(v.players[j]->nets.critic_target, v.players[j]->nets.critic, v.hyper.rho);
    }
}

}  // namespace secmarl::maddpg
