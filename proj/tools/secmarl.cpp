#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "secmarl/experiment.h"

namespace {

using namespace secmarl;

struct CommonOpts {
    std::string config_path;
    std::string preset = "desk";
    std::string mode;
    std::string backend;
    std::string role;
    std::string transport;
    std::string listen;
    std::string connect;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--preset", o.preset, "desk or paper (when no --config)");
    cmd->add_option("--seed", o.seed, "master seed")->each([&](const std::string&) {
        o.seed_set = true;
    });
    cmd->add_option("--out", o.out, "output directory");
}

ExperimentConfig build_config(const CommonOpts& o) {
    ExperimentConfig cfg =
        o.config_path.empty() ? preset_config(o.preset) : parse_config(o.config_path);
    if (!o.mode.empty()) cfg.mode = o.mode;
    if (!o.backend.empty()) cfg.backend = o.backend;
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (!o.transport.empty()) cfg.transport.kind = o.transport;
    if (!o.listen.empty()) {
        if (o.role == "dealer") cfg.transport.dealer_listen = o.listen;
        else if (o.role == "driver" || o.role.empty()) cfg.transport.driver_listen = o.listen;
        else if (o.role == "player0") cfg.transport.peer_listen = o.listen;
    }
    if (!o.connect.empty() && o.role == "player1") cfg.transport.peer_listen = o.connect;
    cfg.validate();
    return cfg;
}

int cmd_run(const CommonOpts& o, const std::string& self_exe) {
    ExperimentConfig cfg = build_config(o);
    if (o.role == "dealer") {
        role_dealer(cfg);
        return 0;
    }
    if (o.role == "player0" || o.role == "player1") {
        role_player(cfg, o.role == "player0" ? 0 : 1);
        return 0;
    }
    if (o.role == "driver" ||
        (cfg.mode == "secure2pc" && cfg.backend == "additive" && cfg.transport.kind == "tcp")) {
        return role_driver(cfg, o.role != "driver", self_exe);
    }
    run_experiment(cfg);
    std::cout << "run complete: " << cfg.out_dir << "/trajectory.csv\n";
    return 0;
}

int cmd_compare(const CommonOpts& o, const std::string& modes_csv) {
    const auto comma = modes_csv.find(',');
    if (comma == std::string::npos)
        throw ValidationError("--modes wants two comma-separated modes");
    const std::string mode_a = modes_csv.substr(0, comma);
    const std::string mode_b = modes_csv.substr(comma + 1);

    ExperimentConfig base = build_config(o);
    const std::string root = base.out_dir;

    for (const std::string& m : {mode_a, mode_b}) {
        ExperimentConfig cfg = base;
        cfg.mode = m;
        cfg.out_dir = root + "/" + m;
        cfg.validate();
        run_experiment(cfg);
    }
    const std::string report =
        build_report(base, root + "/" + mode_a, root + "/" + mode_b, mode_a, mode_b);
    std::ofstream out(root + "/report.json");
    out << report;
    std::cout << report;
    return 0;
}

int cmd_bench(const CommonOpts& o) {
    ExperimentConfig cfg = build_config(o);
    const BenchResult r = run_bench(cfg);
    auto line = [](const char* name, const GadgetCost& c) {
        std::printf("%-22s %12llu bytes %8llu frames %6llu open rounds\n", name,
                    static_cast<unsigned long long>(c.bytes),
                    static_cast<unsigned long long>(c.frames),
                    static_cast<unsigned long long>(c.open_rounds));
    };
    std::printf("per-gadget communication, hidden=%d batch=%d f=%d\n", cfg.hyper.hidden,
                cfg.hyper.batch, cfg.frac_bits);
    line("actor grad update", r.actor_update);
    line("critic grad update", r.critic_update);
    line("action inference", r.action_inference);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-party secure MADDPG supply-chain experiments"};
    app.require_subcommand(1);

    CommonOpts run_o, cmp_o, bench_o, dealer_o;
    std::string modes_csv = "secure2pc,ede";

    CLI::App* run = app.add_subcommand("run", "run one experiment mode");
    add_common(run, run_o);
    run->add_option("--mode", run_o.mode, "secure2pc | ede | nds");
    run->add_option("--backend", run_o.backend, "additive | clear (secure2pc)");
    run->add_option("--role", run_o.role, "driver | player0 | player1 | dealer");
    run->add_option("--transport", run_o.transport, "loopback | tcp");
    run->add_option("--listen", run_o.listen, "listen address for this role");
    run->add_option("--connect", run_o.connect, "peer address (player1)");

    CLI::App* cmp = app.add_subcommand("compare", "run two modes with shared seeds and report");
    add_common(cmp, cmp_o);
    cmp->add_option("--modes", modes_csv, "two comma-separated modes");
    cmp->add_option("--backend", cmp_o.backend, "additive | clear (secure2pc)");

    CLI::App* bench = app.add_subcommand("bench", "per-gadget communication table");
    add_common(bench, bench_o);

    CLI::App* dealer = app.add_subcommand("serve-dealer", "run the dealer service (tcp)");
    add_common(dealer, dealer_o);
    dealer->add_option("--listen", dealer_o.listen, "dealer listen address");

    try {
        app.parse(argc, argv);
        const std::string self_exe = "/proc/self/exe";
        if (run->parsed()) return cmd_run(run_o, self_exe);
        if (cmp->parsed()) return cmd_compare(cmp_o, modes_csv);
        if (bench->parsed()) return cmd_bench(bench_o);
        if (dealer->parsed()) {
            dealer_o.role = "dealer";
            ExperimentConfig cfg = build_config(dealer_o);
            role_dealer(cfg);
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
