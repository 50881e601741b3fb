#include "secmarl/experiment.h"

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "secmarl/additive.h"
#include "secmarl/dealer.h"

namespace secmarl {

using maddpg::Mode;
using maddpg::TrainView;

namespace {

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Mat row_from_vec(const std::vector<double>& v) {
    Mat m(1, static_cast<int>(v.size()));
    m.a = v;
    return m;
}

std::vector<double> vec_from_row(const Mat& m) { return m.a; }

void ensure_dir(const std::string& dir) {
    std::string path;
    for (std::size_t i = 0; i < dir.size(); ++i) {
        path += dir[i];
        if (dir[i] == '/' || i + 1 == dir.size())
            ::mkdir(path.c_str(), 0755);  // fine if it already exists
    }
}

}  // namespace

std::string trajectory_header() {
    return "iter,epoch,step,r0,r1,d10,dc1,wastage,q0,p0,q1,p1";
}

std::string trajectory_row_csv(const TrajectoryRow& r) {
    std::string s = std::to_string(r.iter) + "," + std::to_string(r.epoch) + "," +
                    std::to_string(r.step);
    for (double v : {r.r0, r.r1, r.d10, r.dc1, r.wastage, r.q0, r.p0, r.q1, r.p1})
        s += "," + fmt_g17(v);
    return s;
}

std::vector<TrajectoryRow> load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trajectory file");
    if (line != trajectory_header()) throw ParseError("unexpected trajectory header");
    std::vector<TrajectoryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 12) throw ParseError("bad trajectory row: " + line);
        TrajectoryRow r;
        r.iter = std::stol(cells[0]);
        r.epoch = std::stoi(cells[1]);
        r.step = std::stoi(cells[2]);
        double* fields[] = {&r.r0, &r.r1, &r.d10, &r.dc1, &r.wastage,
                            &r.q0, &r.p0, &r.q1, &r.p1};
        for (int i = 0; i < 9; ++i) *fields[i] = std::stod(cells[static_cast<std::size_t>(i) + 3]);
        rows.push_back(r);
    }
    return rows;
}

World make_world(const ExperimentConfig& cfg) {
    World w;
    w.state_rng = named_stream(cfg.seed, "state-init");
    w.demand_rng = named_stream(cfg.seed, "demand");
    Rng weight_rng = named_stream(cfg.seed, "weights");

    const int sd = cfg.game.state_dim();
    const std::vector<double> lo = {0.0, 0.0};
    const std::vector<double> hi0 = {cfg.game.q_max, cfg.game.p_max0};
    const std::vector<double> hi1 = {cfg.game.q_max, cfg.game.p_max1};

    auto nets0 = maddpg::AgentNets::create(sd, 2, cfg.hyper.hidden, lo, hi0, weight_rng,
                                            cfg.hyper.actor_head_bias);
    auto nets1 = maddpg::AgentNets::create(sd, 2, cfg.hyper.hidden, lo, hi1, weight_rng,
                                            cfg.hyper.actor_head_bias);
    w.p[0] = std::make_unique<maddpg::PlayerCtx>(
        0, std::move(nets0), static_cast<std::size_t>(cfg.buffer_capacity),
        named_stream(cfg.seed, "noise0"), named_stream(cfg.seed, "batch0"));
    w.p[1] = std::make_unique<maddpg::PlayerCtx>(
        1, std::move(nets1), static_cast<std::size_t>(cfg.buffer_capacity),
        named_stream(cfg.seed, "noise1"), named_stream(cfg.seed, "batch1"));
    w.env = std::make_unique<supply::Env>(cfg.game);
    return w;
}

TrainView make_view(const ExperimentConfig& cfg, SecureBackend& be, World& w, Mode mode) {
    TrainView v;
    v.backend = &be;
    v.players[0] = w.p[0] ? w.p[0].get() : nullptr;
    v.players[1] = w.p[1] ? w.p[1].get() : nullptr;
    v.peer = nullptr;
    v.mode = mode;
    v.state_dim = cfg.game.state_dim();
    v.action_dim = 2;
    v.hyper = cfg.hyper;
    v.a_lo[0] = {0.0, 0.0};
    v.a_lo[1] = {0.0, 0.0};
    v.a_hi[0] = {cfg.game.q_max, cfg.game.p_max0};
    v.a_hi[1] = {cfg.game.q_max, cfg.game.p_max1};
    v.state_scale.assign(static_cast<std::size_t>(v.state_dim), cfg.game.q_max);
    v.state_scale[0] = cfg.game.p_max0;  // the cost column carries a price
    v.action_scale[0] = {cfg.game.q_max, cfg.game.p_max0};
    v.action_scale[1] = {cfg.game.q_max, cfg.game.p_max1};
    v.init_absent_shapes();
    return v;
}

void run_phase(World& w, TrainView& view, const ExperimentConfig& cfg, const PhaseSpec& phase,
               std::vector<TrajectoryRow>* log) {
    for (int e = 0; e < phase.epochs; ++e, ++w.epoch) {
        w.env->reset_episode(w.state_rng);
        for (int j = 0; j < 2; ++j)
            w.p[j]->current_state = row_from_vec(w.env->state(j).to_vec());
        for (int s = 0; s < phase.steps; ++s) {
            const double scale = maddpg::noise_schedule(cfg.hyper, w.iter);
            maddpg::act_all(view, scale);
            const double eps = w.demand_rng.next_gauss();
            const auto a0 = w.p[0]->last_action;
            const auto a1 = w.p[1]->last_action;
            const auto out = w.env->advance(a0, a1, eps);

            w.p[0]->buffer.push({vec_from_row(w.p[0]->current_state), {a0.q, a0.p},
                                 out.next0.to_vec(), out.r0});
            w.p[1]->buffer.push({vec_from_row(w.p[1]->current_state), {a1.q, a1.p},
                                 out.next1.to_vec(), out.r1});
            w.p[0]->current_state = row_from_vec(out.next0.to_vec());
            w.p[1]->current_state = row_from_vec(out.next1.to_vec());

            if (log)
                log->push_back({w.iter, w.epoch, s, out.r0, out.r1, out.d10, out.dc1,
                                out.wastage, a0.q, a0.p, a1.q, a1.p});

            maddpg::train_iteration(view);
            ++w.iter;
        }
    }
}

namespace {

void write_trajectory(const std::string& path, const std::vector<TrajectoryRow>& rows) {
    std::ofstream out(path);
    out << trajectory_header() << "\n";
    for (const auto& r : rows) out << trajectory_row_csv(r) << "\n";
}

void dump_weights(const std::string& dir, int player, const maddpg::AgentNets& nets) {
    const std::string suffix = std::to_string(player) + ".bin";
    save_mlp(dir + "/weights_actor" + suffix, nets.actor);
    save_mlp(dir + "/weights_critic" + suffix, nets.critic);
    save_mlp(dir + "/weights_actor_target" + suffix, nets.actor_target);
    save_mlp(dir + "/weights_critic_target" + suffix, nets.critic_target);
}

std::string stats_csv_lines(int party, const std::string& channel, const ChannelStats& st) {
    std::string s;
    auto line = [&](const std::string& metric, std::uint64_t v) {
        s += std::to_string(party) + "," + channel + "," + metric + "," + std::to_string(v) +
             "\n";
    };
    line("bytes_sent", st.bytes_sent);
    line("bytes_recv", st.bytes_recv);
    line("frames_sent", st.frames_sent);
    line("frames_recv", st.frames_recv);
    line("open_rounds", st.open_rounds);
    line("opened_matrices", st.opened_matrices);
    for (const auto& [tag, bytes] : st.tag_bytes) line("tag_bytes." + tag, bytes);
    return s;
}

constexpr const char* kStatsHeader = "party,channel,metric,value";

void write_player_stats(const std::string& dir, int party, Channel* peer, Channel* dealer) {
    std::ofstream out(dir + "/stats_player" + std::to_string(party) + ".csv");
    out << kStatsHeader << "\n";
    if (peer) out << stats_csv_lines(party, "peer", peer->stats_snapshot());
    if (dealer) out << stats_csv_lines(party, "dealer", dealer->stats_snapshot());
}

void merge_stats(const std::string& dir, bool have_players) {
    std::ofstream out(dir + "/stats.csv");
    out << kStatsHeader << "\n";
    if (!have_players) return;
    for (int p = 0; p < 2; ++p) {
        std::ifstream in(dir + "/stats_player" + std::to_string(p) + ".csv");
        if (!in) continue;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line))
            if (!line.empty()) out << line << "\n";
    }
}

void write_echo(const ExperimentConfig& cfg) {
    std::ofstream out(cfg.out_dir + "/config_echo.json");
    out << config_to_json(cfg);
}

void switch_to_golive(World& w, const ExperimentConfig& cfg) {
    w.env = std::make_unique<supply::Env>(cfg.golive_game());
}

void run_clear_experiment(const ExperimentConfig& cfg, Mode golive_mode) {
    World w = make_world(cfg);
    ClearBackend be(cfg.fixed());
    std::vector<TrajectoryRow> log;

    TrainView pre = make_view(cfg, be, w, Mode::EDE);
    run_phase(w, pre, cfg, cfg.pretrain, &log);

    switch_to_golive(w, cfg);
    TrainView live = make_view(cfg, be, w, golive_mode);
    run_phase(w, live, cfg, cfg.golive, &log);

    ensure_dir(cfg.out_dir);
    write_trajectory(cfg.out_dir + "/trajectory.csv", log);
    dump_weights(cfg.out_dir, 0, w.p[0]->nets);
    dump_weights(cfg.out_dir, 1, w.p[1]->nets);
    merge_stats(cfg.out_dir, false);
    write_echo(cfg);
}

// go-live loop of one protocol party; states and rewards arrive from the
// driver, learning traffic flows over the peer and dealer channels
void party_golive(const ExperimentConfig& cfg, int party, Channel& peer, Channel& dealer,
                  Channel& driver) {
    World w = make_world(cfg);
    ClearBackend cb(cfg.fixed());
    TrainView pre = make_view(cfg, cb, w, Mode::EDE);
    run_phase(w, pre, cfg, cfg.pretrain, nullptr);

    AdditiveBackend ab(party, &peer, &dealer, cfg.fixed(),
                       named_stream(cfg.seed, "nonlin-mask").next_u64());
    TrainView v = make_view(cfg, ab, w, Mode::Secure2PC);
    v.players[party] = w.p[party].get();
    v.players[1 - party] = nullptr;
    v.peer = &peer;

    maddpg::PlayerCtx& self = *w.p[party];
    const int sd = cfg.game.state_dim();
    for (int e = 0; e < cfg.golive.epochs; ++e) {
        self.current_state = recv_mat(driver);
        for (int s = 0; s < cfg.golive.steps; ++s) {
            const double scale = maddpg::noise_schedule(cfg.hyper, w.iter);
            maddpg::act_all(v, scale);
            Mat act(1, 2);
            act.at(0, 0) = self.last_action.q;
            act.at(0, 1) = self.last_action.p;
            send_mat(act, driver);
            const Mat rs = recv_mat(driver);  // [r | s']
            if (rs.cols != 1 + sd) throw DimHeaderMismatch("driver step reply");
            const double r = rs.at(0, 0);
            const Mat s_next = slice_cols(rs, 1, rs.cols);
            self.buffer.push({vec_from_row(self.current_state),
                              {self.last_action.q, self.last_action.p},
                              vec_from_row(s_next), r});
            self.current_state = s_next;
            maddpg::train_iteration(v);
            ++w.iter;
        }
    }

    ensure_dir(cfg.out_dir);
    dump_weights(cfg.out_dir, party, self.nets);
    write_player_stats(cfg.out_dir, party, &peer, &dealer);
    driver.bye();
    peer.bye();
    dealer.bye();
}

// environment owner and logger for the secure mode
void driver_golive(const ExperimentConfig& cfg, Channel& ch0, Channel& ch1) {
    World w = make_world(cfg);
    ClearBackend cb(cfg.fixed());
    std::vector<TrajectoryRow> log;
    TrainView pre = make_view(cfg, cb, w, Mode::EDE);
    run_phase(w, pre, cfg, cfg.pretrain, &log);
    switch_to_golive(w, cfg);

    Channel* chans[2] = {&ch0, &ch1};
    for (int e = 0; e < cfg.golive.epochs; ++e, ++w.epoch) {
        w.env->reset_episode(w.state_rng);
        for (int j = 0; j < 2; ++j)
            send_mat(row_from_vec(w.env->state(j).to_vec()), *chans[j]);
        for (int s = 0; s < cfg.golive.steps; ++s) {
            const Mat a0m = recv_mat(ch0);
            const Mat a1m = recv_mat(ch1);
            const supply::PlayerAction a0{a0m.at(0, 0), a0m.at(0, 1)};
            const supply::PlayerAction a1{a1m.at(0, 0), a1m.at(0, 1)};
            const double eps = w.demand_rng.next_gauss();
            const auto out = w.env->advance(a0, a1, eps);
            Mat rs0 = hcat(Mat::full(1, 1, out.r0), row_from_vec(out.next0.to_vec()));
            Mat rs1 = hcat(Mat::full(1, 1, out.r1), row_from_vec(out.next1.to_vec()));
            send_mat(rs0, ch0);
            send_mat(rs1, ch1);
            log.push_back({w.iter, w.epoch, s, out.r0, out.r1, out.d10, out.dc1, out.wastage,
                           a0.q, a0.p, a1.q, a1.p});
            ++w.iter;
        }
    }
    // closing handshake, then collect artifacts
    for (Channel* c : chans) {
        c->expect(MsgType::Bye);
        c->send(MsgType::Bye, {});
    }
    ensure_dir(cfg.out_dir);
    write_trajectory(cfg.out_dir + "/trajectory.csv", log);
    write_echo(cfg);
}

void run_secure_loopback(const ExperimentConfig& cfg) {
    ensure_dir(cfg.out_dir);
    auto [peer0, peer1] = loopback_pair();
    auto [dealer_c0, dealer_s0] = loopback_pair();
    auto [dealer_c1, dealer_s1] = loopback_pair();
    auto [driver_c0, driver_s0] = loopback_pair();
    auto [driver_c1, driver_s1] = loopback_pair();

    std::exception_ptr err;
    std::mutex err_mu;
    auto guard = [&](auto fn) {
        return [&, fn] {
            try {
                fn();
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        };
    };

    std::thread dealer(guard([&] {
        dealer_s0->accept_hello();
        dealer_s1->accept_hello();
        serve_dealer(*dealer_s0, *dealer_s1, cfg.fixed(),
                     named_stream(cfg.seed, "dealer"));
    }));
    std::thread p0(guard([&] {
        peer0->hello();
        dealer_c0->hello({0});
        driver_c0->hello({0});
        party_golive(cfg, 0, *peer0, *dealer_c0, *driver_c0);
    }));
    std::thread p1(guard([&] {
        peer1->hello();
        dealer_c1->hello({1});
        driver_c1->hello({1});
        party_golive(cfg, 1, *peer1, *dealer_c1, *driver_c1);
    }));
    std::thread drv(guard([&] {
        driver_s0->accept_hello();
        driver_s1->accept_hello();
        driver_golive(cfg, *driver_s0, *driver_s1);
    }));

    dealer.join();
    p0.join();
    p1.join();
    drv.join();
    if (err) std::rethrow_exception(err);
    merge_stats(cfg.out_dir, true);
}

}  // namespace

void role_player(const ExperimentConfig& cfg, int party) {
    std::unique_ptr<Channel> peer;
    if (party == 0) {
        TcpListener peer_l(cfg.transport.peer_listen);
        peer = peer_l.accept_one();
        peer->accept_hello();
    } else {
        peer = tcp_connect(cfg.transport.peer_listen);
        peer->hello({1});
    }
    auto dealer = tcp_connect(cfg.transport.dealer_listen);
    dealer->hello({static_cast<std::uint8_t>(party)});
    auto driver = tcp_connect(cfg.transport.driver_listen);
    driver->hello({static_cast<std::uint8_t>(party)});
    party_golive(cfg, party, *peer, *dealer, *driver);
}

void role_dealer(const ExperimentConfig& cfg) {
    TcpListener l(cfg.transport.dealer_listen);
    auto a = l.accept_one();
    auto role_a = a->accept_hello();
    auto b = l.accept_one();
    auto role_b = b->accept_hello();
    if (role_a.size() != 1 || role_b.size() != 1 || role_a[0] == role_b[0])
        throw ChannelDesync("dealer needs one connection per party");
    Channel& ch0 = role_a[0] == 0 ? *a : *b;
    Channel& ch1 = role_a[0] == 0 ? *b : *a;
    serve_dealer(ch0, ch1, cfg.fixed(), named_stream(cfg.seed, "dealer"));
}

int role_driver(const ExperimentConfig& cfg, bool spawn_children, const std::string& self_exe) {
    ensure_dir(cfg.out_dir);
    write_echo(cfg);
    std::vector<pid_t> kids;
    if (spawn_children) {
        const std::string conf = cfg.out_dir + "/config_echo.json";
        const char* roles[3] = {"dealer", "player0", "player1"};
        for (const char* role : roles) {
            const pid_t pid = ::fork();
            if (pid < 0) throw ChannelDesync("fork failed");
            if (pid == 0) {
                ::execl(self_exe.c_str(), self_exe.c_str(), "run", "--config", conf.c_str(),
                        "--role", role, static_cast<char*>(nullptr));
                _exit(127);
            }
            kids.push_back(pid);
        }
    }
    TcpListener l(cfg.transport.driver_listen);
    auto a = l.accept_one();
    auto role_a = a->accept_hello();
    auto b = l.accept_one();
    auto role_b = b->accept_hello();
    if (role_a.size() != 1 || role_b.size() != 1 || role_a[0] == role_b[0])
        throw ChannelDesync("driver needs one connection per party");
    Channel& ch0 = role_a[0] == 0 ? *a : *b;
    Channel& ch1 = role_a[0] == 0 ? *b : *a;
    driver_golive(cfg, ch0, ch1);
    int rc = 0;
    for (pid_t pid : kids) {
        int status = 0;
        ::waitpid(pid, &status, 0);
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) rc = 1;
    }
    merge_stats(cfg.out_dir, true);
    return rc;
}

void run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Mode mode = maddpg::mode_from_string(cfg.mode);
    if (mode != Mode::Secure2PC || cfg.backend == "clear") {
        run_clear_experiment(cfg, mode);
        return;
    }
    if (cfg.transport.kind == "loopback") {
        run_secure_loopback(cfg);
        return;
    }
    throw ValidationError("tcp secure runs go through role_driver (CLI `run --role driver`)");
}

double normalized_cumulative_revenue(const std::vector<TrajectoryRow>& rows, double raw_price) {
    if (rows.empty()) throw EmptySeries("normalized_cumulative_revenue");
    std::vector<double> r0, r1, w;
    for (const auto& x : rows) {
        r0.push_back(x.r0);
        r1.push_back(x.r1);
        w.push_back(x.wastage);
    }
    return mean(r0) + mean(r1) - mean(w) * raw_price;
}

namespace {

std::vector<TrajectoryRow> golive_rows(const std::vector<TrajectoryRow>& rows, long start_iter) {
    std::vector<TrajectoryRow> out;
    for (const auto& r : rows)
        if (r.iter >= start_iter) out.push_back(r);
    return out;
}

nlohmann::ordered_json series_compare(const std::vector<TrajectoryRow>& a,
                                      const std::vector<TrajectoryRow>& b, int window) {
    auto col = [](const std::vector<TrajectoryRow>& rows, auto getter) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(getter(r));
        return v;
    };
    nlohmann::ordered_json out, mae_j, rmse_j;
    const std::pair<const char*, double TrajectoryRow::*> cols[] = {
        {"r0", &TrajectoryRow::r0},
        {"r1", &TrajectoryRow::r1},
        {"d10", &TrajectoryRow::d10},
        {"dc1", &TrajectoryRow::dc1},
    };
    for (const auto& [name, member] : cols) {
        auto va = moving_average(col(a, [&](const TrajectoryRow& r) { return r.*member; }), window);
        auto vb = moving_average(col(b, [&](const TrajectoryRow& r) { return r.*member; }), window);
        mae_j[name] = mae(va, vb);
        rmse_j[name] = rmse(va, vb);
    }
    out["window"] = window;
    out["mae"] = mae_j;
    out["rmse"] = rmse_j;
    return out;
}

nlohmann::ordered_json averages_json(const std::vector<TrajectoryRow>& rows) {
    auto avg = [&](auto getter) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(getter(r));
        return mean(v);
    };
    nlohmann::ordered_json j;
    j["r0"] = avg([](const TrajectoryRow& r) { return r.r0; });
    j["r1"] = avg([](const TrajectoryRow& r) { return r.r1; });
    j["d10"] = avg([](const TrajectoryRow& r) { return r.d10; });
    j["dc1"] = avg([](const TrajectoryRow& r) { return r.dc1; });
    j["wastage"] = avg([](const TrajectoryRow& r) { return r.wastage; });
    return j;
}

std::pair<double, double> weight_mae_rmse(const MlpParams& a, const MlpParams& b) {
    std::vector<double> va, vb;
    for (const Mat* m : {&a.w1, &a.b1, &a.w2, &a.b2, &a.w3, &a.b3})
        va.insert(va.end(), m->a.begin(), m->a.end());
    for (const Mat* m : {&b.w1, &b.b1, &b.w2, &b.b2, &b.w3, &b.b3})
        vb.insert(vb.end(), m->a.begin(), m->a.end());
    return {mae(va, vb), rmse(va, vb)};
}

nlohmann::ordered_json stats_json(const std::string& dir) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    std::ifstream in(dir + "/stats.csv");
    if (!in) return j;
    std::string line;
    std::getline(in, line);
    std::uint64_t total_bytes = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string party, channel, metric, value;
        std::getline(ss, party, ',');
        std::getline(ss, channel, ',');
        std::getline(ss, metric, ',');
        std::getline(ss, value, ',');
        j["player" + party + "." + channel + "." + metric] = std::stoull(value);
        if (metric == "bytes_sent") total_bytes += std::stoull(value);
    }
    j["total_bytes_sent"] = total_bytes;
    return j;
}

}  // namespace

std::string build_report(const ExperimentConfig& cfg, const std::string& dir_a,
                         const std::string& dir_b, const std::string& mode_a,
                         const std::string& mode_b) {
    const long golive_start = cfg.pretrain.total();
    const auto rows_a = golive_rows(load_trajectory(dir_a + "/trajectory.csv"), golive_start);
    const auto rows_b = golive_rows(load_trajectory(dir_b + "/trajectory.csv"), golive_start);

    nlohmann::ordered_json j;
    j["modes"] = {mode_a, mode_b};
    j["golive_iterations"] = rows_a.size();
    j["averages"][mode_a] = averages_json(rows_a);
    j["averages"][mode_b] = averages_json(rows_b);
    j["trajectory_ma"] = series_compare(rows_a, rows_b, cfg.ma_window);

    nlohmann::ordered_json wj;
    const char* names[] = {"actor0", "critic0", "actor_target0", "critic_target0",
                           "actor1", "critic1", "actor_target1", "critic_target1"};
    const char* files[] = {"weights_actor0.bin", "weights_critic0.bin",
                           "weights_actor_target0.bin", "weights_critic_target0.bin",
                           "weights_actor1.bin", "weights_critic1.bin",
                           "weights_actor_target1.bin", "weights_critic_target1.bin"};
    for (int i = 0; i < 8; ++i) {
        const MlpParams pa = load_mlp(dir_a + "/" + files[i]);
        const MlpParams pb = load_mlp(dir_b + "/" + files[i]);
        const auto [m, r] = weight_mae_rmse(pa, pb);
        wj[names[i]]["mae"] = m;
        wj[names[i]]["rmse"] = r;
    }
    j["weights"] = wj;

    j["stats"][mode_a] = stats_json(dir_a);
    j["stats"][mode_b] = stats_json(dir_b);

    const double ncr_a = normalized_cumulative_revenue(rows_a, cfg.game.raw_price);
    const double ncr_b = normalized_cumulative_revenue(rows_b, cfg.game.raw_price);
    auto wastage_of = [](const std::vector<TrajectoryRow>& rows) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.wastage);
        return mean(v);
    };
    const double w_a = wastage_of(rows_a);
    const double w_b = wastage_of(rows_b);
    nlohmann::ordered_json benefit;
    benefit["ncr"][mode_a] = ncr_a;
    benefit["ncr"][mode_b] = ncr_b;
    benefit["mean_wastage"][mode_a] = w_a;
    benefit["mean_wastage"][mode_b] = w_b;
    // deltas of the first mode relative to the second
    if (w_b != 0.0) benefit["wastage_reduction_pct"] = (w_b - w_a) / std::abs(w_b) * 100.0;
    if (ncr_b != 0.0) benefit["ncr_improvement_pct"] = (ncr_a - ncr_b) / std::abs(ncr_b) * 100.0;
    j["benefit"] = benefit;
    return j.dump(2) + "\n";
}

BenchResult run_bench(const ExperimentConfig& cfg) {
    auto [peer0, peer1] = loopback_pair();
    auto [dealer_c0, dealer_s0] = loopback_pair();
    auto [dealer_c1, dealer_s1] = loopback_pair();

    const int sd = cfg.game.state_dim();
    const int ad = 2;
    const int B = cfg.hyper.batch;

    BenchResult result;
    std::exception_ptr err;
    std::mutex err_mu;
    auto guard = [&](auto fn) {
        return [&, fn] {
            try {
                fn();
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
            }
        };
    };

    auto party_script = [&](int party, Channel& peer, Channel& dealer) {
        Rng wrng = named_stream(cfg.seed, "weights");
        const std::vector<double> lo = {0.0, 0.0};
        const std::vector<double> hi = {cfg.game.q_max, party == 0 ? cfg.game.p_max0
                                                                   : cfg.game.p_max1};
        MlpParams actor = MlpParams::create(2 * sd, cfg.hyper.hidden, ad,
                                            ActivationSpec::bounded_sigmoid(lo, hi), wrng);
        MlpParams critic = MlpParams::create(2 * (sd + ad), cfg.hyper.hidden, 1,
                                             ActivationSpec::identity(), wrng);
        AdditiveBackend be(party, &peer, &dealer, cfg.fixed(),
                           named_stream(cfg.seed, "nonlin-mask").next_u64());
        Rng data = named_stream(cfg.seed, "bench-data");

        auto snapshot = [&] {
            const auto ps = peer.stats_snapshot();
            const auto ds = dealer.stats_snapshot();
            GadgetCost c;
            c.bytes = ps.bytes_sent + ps.bytes_recv + ds.bytes_sent + ds.bytes_recv;
            c.frames = ps.frames_sent + ps.frames_recv + ds.frames_sent + ds.frames_recv;
            c.open_rounds = ps.open_rounds;
            return c;
        };
        auto delta = [](const GadgetCost& b, const GadgetCost& a) {
            return GadgetCost{a.bytes - b.bytes, a.frames - b.frames,
                              a.open_rounds - b.open_rounds};
        };

        // action inference: batch-1 actor forward
        const Mat s_own = Mat::random_uniform(1, sd, 0.0, 5.0, data);
        PaddedInput arow0 = party == 0 ? preprocess(s_own, 0, "action", nullptr)
                                       : absent_padded(1, 2 * sd, 0);
        PaddedInput arow1 = party == 1 ? preprocess(s_own, 1, "action", nullptr)
                                       : absent_padded(1, 2 * sd, 1);
        GadgetCost before = snapshot();
        f_secfloat(be, arow0, arow1, actor, 0);
        const GadgetCost action_cost = delta(before, snapshot());

        // shared batch-level inputs
        const Mat v_own = Mat::random_uniform(B, sd + ad, 0.0, 5.0, data);
        const Mat vp_own = Mat::random_uniform(B, sd + ad, 0.0, 5.0, data);
        const Mat s_batch = Mat::random_uniform(B, sd, 0.0, 5.0, data);
        auto pad = [&](const Mat& m, int side) {
            return party == side ? preprocess(m, side, "bench", nullptr)
                                 : absent_padded(B, 2 * m.cols, side);
        };
        PaddedInput V[2] = {pad(v_own, 0), pad(v_own, 1)};
        PaddedInput Vp[2] = {pad(vp_own, 0), pad(vp_own, 1)};
        PaddedInput S[2] = {pad(s_batch, 0), pad(s_batch, 1)};

        // critic gradient update: target forward + loss-seeded backward
        before = snapshot();
        const Mat qt = f_secfloat(be, Vp[0], Vp[1], critic, 0);
        Mat target;
        if (party == 0) target = qt * cfg.hyper.gamma;
        bl_secfloat_w(be, V[0], V[1], critic, target, 0);
        const GadgetCost critic_cost = delta(before, snapshot());

        // actor gradient update: dQ/da then the seeded actor backward
        before = snapshot();
        const Mat dvq = b_secfloat_x(be, V[0], V[1], critic, 0);
        Mat daq;
        if (party == 0) daq = slice_cols(dvq, sd, sd + ad);
        b_secfloat_w(be, S[0], S[1], actor, 0, &daq);
        const GadgetCost actor_cost = delta(before, snapshot());

        if (party == 0) {
            result.action_inference = action_cost;
            result.critic_update = critic_cost;
            result.actor_update = actor_cost;
        }
        peer.bye();
        dealer.bye();
    };

    std::thread dealer(guard([&] {
        dealer_s0->accept_hello();
        dealer_s1->accept_hello();
        serve_dealer(*dealer_s0, *dealer_s1, cfg.fixed(), named_stream(cfg.seed, "dealer"));
    }));
    std::thread t0(guard([&] {
        peer0->hello();
        dealer_c0->hello({0});
        party_script(0, *peer0, *dealer_c0);
    }));
    std::thread t1(guard([&] {
        peer1->hello();
        dealer_c1->hello({1});
        party_script(1, *peer1, *dealer_c1);
    }));
    dealer.join();
    t0.join();
    t1.join();
    if (err) std::rethrow_exception(err);
    return result;
}

}  // namespace secmarl
