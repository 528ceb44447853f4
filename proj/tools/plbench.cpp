#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "physlink/bench/scenarios.hpp"

using namespace physlink::bench;

namespace {

void add_link_flags(CLI::App* cmd, physlink::transport::SimulatedNetwork::LinkParams& link) {
    cmd->add_option("--latency", link.latency, "one-way link latency, seconds");
    cmd->add_option("--jitter", link.jitter, "per-datagram jitter bound, seconds");
    cmd->add_option("--loss", link.loss, "datagram loss probability");
}

int run_multiobject_cmd(std::vector<int> objects, MultiObjectConfig base, const std::string& csv_path) {
    if (objects.empty()) objects = {500, 1000, 2000, 5000, 7500, 10000};
    std::printf("%8s %12s %12s %10s %12s %10s %10s\n", "objects", "out Mb/s", "ref Mb/s", "upd/s",
                "records", "step ms", "max ms");
    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        csv << "objects,outbound_mbit_s,reference_mbit_s,client_bytes_s,updates_s,records_sent,"
               "unknown_records,mean_step_ms,max_step_ms\n";
    }
    for (int n : objects) {
        MultiObjectConfig cfg = base;
        cfg.objects = n;
        const auto r = run_multiobject(cfg);
        std::printf("%8d %12.3f %12.2f %10.1f %12llu %10.3f %10.3f\n", r.objects, r.outbound_mbit_s,
                    r.reference_mbit_s, r.updates_s, (unsigned long long)r.records_sent,
                    r.mean_step_ms, r.max_step_ms);
        if (csv.is_open())
            csv << r.objects << ',' << r.outbound_mbit_s << ',' << r.reference_mbit_s << ','
                << r.client_bytes_s << ',' << r.updates_s << ',' << r.records_sent << ','
                << r.unknown_records << ',' << r.mean_step_ms << ',' << r.max_step_ms << '\n';
        if (r.unknown_records > 0)
            std::printf("  warning: %llu records referenced unknown entities\n",
                        (unsigned long long)r.unknown_records);
    }
    return 0;
}

int run_softbody_cmd(std::vector<int> particles, SoftbodyConfig base, const std::string& csv_path) {
    if (particles.empty()) particles = {500, 1500};
    std::printf("%10s %8s %12s %12s %12s %9s %10s\n", "particles", "springs", "stream Mb/s",
                "model Mb/s", "ref Mb/s", "settles", "step ms");
    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        csv << "particles,springs,stream_mbit_s,model_mbit_s,reference_mbit_s,energy_monotone,"
               "settled_energy,mean_step_ms,max_step_ms\n";
    }
    for (int p : particles) {
        SoftbodyConfig cfg = base;
        cfg.particles = p;
        const auto r = run_softbody(cfg);
        std::printf("%10d %8d %12.3f %12.3f %12.2f %9s %10.3f\n", r.particles, r.springs,
                    r.particle_stream_mbit_s, r.model_mbit_s, r.reference_mbit_s,
                    r.energy_monotone_after_settle ? "yes" : "NO", r.mean_step_ms);
        if (csv.is_open())
            csv << r.particles << ',' << r.springs << ',' << r.particle_stream_mbit_s << ','
                << r.model_mbit_s << ',' << r.reference_mbit_s << ','
                << (r.energy_monotone_after_settle ? 1 : 0) << ',' << r.settled_energy << ','
                << r.mean_step_ms << ',' << r.max_step_ms << '\n';
    }
    return 0;
}

int run_ccu_cmd(const CcuConfig& cfg, const std::string& csv_path) {
    const auto r = run_ccu(cfg);
    std::printf("users:               %d\n", r.users);
    std::printf("physics objects:     %d (capacity at 4/user: %d users)\n", r.physics_objects,
                r.capacity_users);
    std::printf("steady outbound:     %.1f KB/s (band %.1f%%)\n", r.steady_mean_kb_s,
                r.steady_band * 100.0);
    std::printf("join curve rising:   %s\n", r.curve_monotone_during_joins ? "yes" : "NO");
    std::printf("max divergence:      %.3f m (bound %.3f m)\n", r.max_divergence_m,
                r.divergence_bound_m);
    std::printf("unknown records:     %llu\n", (unsigned long long)r.unknown_records);
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        csv << "second,outbound_kb_s\n";
        for (std::size_t k = 0; k < r.outbound_kb_s.size(); ++k)
            csv << (k + 1) << ',' << r.outbound_kb_s[k] << '\n';
        std::printf("wrote %zu curve rows to %s\n", r.outbound_kb_s.size(), csv_path.c_str());
    }
    return 0;
}

int run_relay_cmd(std::vector<int> objects, RelayRunConfig base, const std::string& csv_path) {
    if (objects.empty()) objects = {32, 64, 128, 256, 512};
    std::printf("%8s %14s %12s %12s %10s %10s\n", "objects", "KB/s per sub", "ref KB/s",
                "ref-alt KB/s", "savings", "staleness");
    std::ofstream csv;
    if (!csv_path.empty()) {
        csv.open(csv_path);
        csv << "objects,per_subscriber_kb_s,reference_kb_s,reference_alt_kb_s,grouping_savings,"
               "max_staleness_intervals,rejected_updates\n";
    }
    for (int n : objects) {
        RelayRunConfig cfg = base;
        cfg.objects = n;
        const auto r = run_relay(cfg);
        std::printf("%8d %14.2f %12.2f %12.2f %9.1f%% %10.2f\n", r.objects, r.per_subscriber_kb_s,
                    r.reference_kb_s, r.reference_alt_kb_s, r.grouping_savings * 100.0,
                    r.max_staleness_intervals);
        if (csv.is_open())
            csv << r.objects << ',' << r.per_subscriber_kb_s << ',' << r.reference_kb_s << ','
                << r.reference_alt_kb_s << ',' << r.grouping_savings << ','
                << r.max_staleness_intervals << ',' << r.rejected_updates << '\n';
    }
    return 0;
}

int run_latency_cmd(const LatencyConfig& cfg, bool analytic_only) {
    const LatencyBreakdown b = analytic_breakdown(cfg);
    std::printf("%-22s %10s\n", "component", "ms");
    std::printf("%-22s %10.2f\n", "render (commander)", b.render_b * 1e3);
    std::printf("%-22s %10.2f\n", "uplink", b.net_b * 1e3);
    std::printf("%-22s %10.2f\n", "send interval (mean)", b.interval * 1e3);
    std::printf("%-22s %10.2f\n", "physics step", b.phys * 1e3);
    std::printf("%-22s %10.2f\n", "downlink", b.net_a * 1e3);
    std::printf("%-22s %10.2f\n", "render (observer)", b.render_a * 1e3);
    std::printf("%-22s %10.2f\n", "analytic total", b.total() * 1e3);
    if (!analytic_only) {
        const auto r = run_latency(cfg);
        std::printf("%-22s %10.2f  (%d trials)\n", "measured total", r.measured_total_s * 1e3,
                    r.trials);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"plbench: streaming and simulation scenario runner"};
    app.require_subcommand(1);

    std::vector<int> mo_objects;
    MultiObjectConfig mo;
    std::string mo_csv;
    auto* mo_cmd = app.add_subcommand("multiobject", "N falling bodies streamed to one client");
    mo_cmd->add_option("--objects", mo_objects, "object counts to run (repeatable; default ladder)");
    mo_cmd->add_option("--duration", mo.duration, "simulated seconds");
    mo_cmd->add_option("--measure-from", mo.measure_from, "measurement window start, s");
    mo_cmd->add_option("--measure-to", mo.measure_to, "measurement window end, s");
    mo_cmd->add_option("--seed", mo.seed, "simulation seed");
    mo_cmd->add_option("--csv", mo_csv, "write results CSV here");
    add_link_flags(mo_cmd, mo.link);

    std::vector<int> sb_particles;
    SoftbodyConfig sb;
    std::string sb_csv;
    auto* sb_cmd = app.add_subcommand("softbody", "particle shell streamed while poked");
    sb_cmd->add_option("--particles", sb_particles, "particle counts to run (repeatable)");
    sb_cmd->add_option("--duration", sb.duration, "simulated seconds");
    sb_cmd->add_flag("--no-poke", [&sb](std::int64_t) { sb.poke = false; }, "skip the scripted press");
    sb_cmd->add_option("--seed", sb.seed, "simulation seed");
    sb_cmd->add_option("--csv", sb_csv, "write results CSV here");

    CcuConfig ccu;
    std::string ccu_csv;
    auto* ccu_cmd = app.add_subcommand("ccu", "bot session ramp: joins then steady state");
    ccu_cmd->add_option("--users", ccu.users, "bot count");
    ccu_cmd->add_option("--join-interval", ccu.join_interval, "seconds between joins");
    ccu_cmd->add_option("--steady", ccu.steady_duration, "seconds to hold after the last join");
    ccu_cmd->add_option("--measured", ccu.measured_clients, "bots running the full client");
    ccu_cmd->add_option("--seed", ccu.seed, "simulation seed");
    ccu_cmd->add_option("--csv", ccu_csv, "write the per-second outbound curve here");
    add_link_flags(ccu_cmd, ccu.link);

    std::vector<int> relay_objects;
    RelayRunConfig relay;
    std::string relay_csv;
    auto* relay_cmd = app.add_subcommand("relay", "host-authoritative relay fanout");
    relay_cmd->add_option("--objects", relay_objects, "object counts to run (repeatable; default ladder)");
    relay_cmd->add_option("--subscribers", relay.subscribers, "subscriber connections");
    relay_cmd->add_option("--duration", relay.duration, "simulated seconds");
    relay_cmd->add_option("--rate", relay.send_rate, "relay fanout rate, Hz");
    relay_cmd->add_option("--seed", relay.seed, "simulation seed");
    relay_cmd->add_option("--csv", relay_csv, "write results CSV here");
    add_link_flags(relay_cmd, relay.link);

    LatencyConfig lat;
    bool lat_analytic_only = false;
    auto* lat_cmd = app.add_subcommand("latency", "motion-to-photon breakdown");
    lat_cmd->add_option("--render-a", lat.render_a, "observer frame time, s");
    lat_cmd->add_option("--render-b", lat.render_b, "commander frame time, s");
    lat_cmd->add_option("--net-a", lat.net_a, "downlink latency, s");
    lat_cmd->add_option("--net-b", lat.net_b, "uplink latency, s");
    lat_cmd->add_option("--phys", lat.phys, "per-tick compute cost, s");
    lat_cmd->add_option("--trials", lat.trials, "measured trials");
    lat_cmd->add_option("--seed", lat.seed, "simulation seed");
    lat_cmd->add_flag("--analytic-only", lat_analytic_only, "skip the simulated measurement");

    CLI11_PARSE(app, argc, argv);

    if (mo_cmd->parsed()) return run_multiobject_cmd(mo_objects, mo, mo_csv);
    if (sb_cmd->parsed()) return run_softbody_cmd(sb_particles, sb, sb_csv);
    if (ccu_cmd->parsed()) return run_ccu_cmd(ccu, ccu_csv);
    if (relay_cmd->parsed()) return run_relay_cmd(relay_objects, relay, relay_csv);
    if (lat_cmd->parsed()) return run_latency_cmd(lat, lat_analytic_only);
    return 0;
}
