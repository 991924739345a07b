// Brute-force long-run simulation of the full hybrid system (with resets)
// for orbit diagrams, attractor classification, and independent confirmation
// of MPS stability windows.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "graze/config.hpp"
#include "graze/errors.hpp"
#include "graze/maps.hpp"
#include "graze/model.hpp"

namespace graze {

/// Sampling and recording controls for brute-force scans.
struct ScanConfig {
    int n_initial = 8;        ///< random initial states per parameter point
    int n_transient = 500;    ///< discarded section returns
    int n_record = 100;       ///< recorded section returns
    std::uint64_t seed = 0x5EED;
    double box_x_lo = -2.0, box_x_hi = 0.0; ///< sampling box, x <= 0
    double box_y_lo = -1.0, box_y_hi = 1.0;
    int period_cap = 64;      ///< largest candidate period (section returns)
    double period_tol = 1e-6; ///< match tolerance on (x, z) at the section
    int threads = 1;

    void validate() const {
        if (n_initial <= 0 || n_transient < 0 || n_record <= 0 || period_cap <= 0)
            throw ConfigError("ScanConfig: counts must be positive");
        if (box_x_hi > 0.0) throw ConfigError("ScanConfig: sampling box must satisfy x <= 0");
    }
};

/// One recorded section value. Impacting loops record the virtual maximum
/// (the x-value the extended flow would reach), so impacted records carry
/// x > 0 exactly as in overlay bifurcation diagrams.
struct SectionRecord {
    double t = 0.0; ///< time of the event
    double x = 0.0; ///< section value (virtual maximum when impacted)
    double z = 0.0; ///< phase, wrapped
    bool impacted = false;
};

/// Attractor classification of one trajectory's recorded window.
struct AttractorSummary {
    bool periodic = false;
    int period_q = 0;          ///< period in forcing periods
    int records_per_cycle = 0; ///< section records per cycle
    int impacts_per_cycle = 0;
    std::vector<SectionRecord> window; ///< the recorded section values
};

/// Full trajectory summary from simulate_hybrid.
struct TrajectorySummary {
    std::vector<SectionRecord> records; ///< events after the transient
    long n_impacts = 0;                 ///< impacts over the whole run
    long n_grazing_events = 0;          ///< zero-velocity arrivals (no reset)
    State final_state;
};

/// Integrate the full hybrid system from s0 for `n_periods` forcing periods,
/// applying the reset at every transversal arrival at x = 0 with y > 0.
/// Section crossings and impacts after `record_from` periods are recorded;
/// impacting loops record the virtual maximum via the extended flow when
/// `virtual_maxima` is set.
inline TrajectorySummary simulate_hybrid(const State& s0, double n_periods,
                                         const HybridSystemDef& sys, const ParamPoint& pp,
                                         const IntegratorConfig& cfg, double record_from = 0.0,
                                         bool virtual_maxima = true) {
    if (s0.x > 0.0) throw Error("simulate_hybrid: initial state must satisfy x <= 0");
    const double omega = sys.omega_of(pp);
    const double period = two_pi / omega;
    const double dt = std::min(cfg.max_step, period / 64.0);
    const double t_end = n_periods * period;
    const double t_rec = record_from * period;

    TrajectorySummary out;
    State s = s0;
    double t = 0.0;
    long impacts_this_period = 0;
    long period_idx = 0;

    auto eval = [&](const State& anchor, double tau) { return advance(sys, pp, anchor, tau, cfg); };

    while (t < t_end - 1e-12) {
        const double step = std::min(dt, t_end - t);
        const State s1 = eval(s, step);

        // candidate events inside (t, t+step]: wall upcrossing and section
        // downcrossing; keep the earlier one
        double tau_wall = -1.0, tau_sec = -1.0;
        if (s.x < 0.0 && s1.x > 0.0) {
            double lo = 0.0, hi = step;
            for (int it = 0; it < 60 && (hi - lo) > cfg.event_tol * 1e-3; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (eval(s, mid).x > 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            tau_wall = hi;
        }
        if (s.y > 0.0 && s1.y < 0.0) {
            double lo = 0.0, hi = step;
            for (int it = 0; it < 60 && (hi - lo) > cfg.event_tol * 1e-3; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (eval(s, mid).y < 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            tau_sec = hi;
        }

        if (tau_wall < 0.0 && tau_sec < 0.0) {
            t += step;
            s = s1;
            if (static_cast<long>(t / period) != period_idx) {
                period_idx = static_cast<long>(t / period);
                impacts_this_period = 0;
            }
            continue;
        }

        const bool wall_first = tau_wall >= 0.0 && (tau_sec < 0.0 || tau_wall < tau_sec);
        const double tau = wall_first ? tau_wall : tau_sec;
        State se = eval(s, tau);

        if (wall_first) {
            se.x = 0.0;
            if (std::abs(se.y) < cfg.event_tol) {
                // zero-velocity arrival: grazing event, no reset
                ++out.n_grazing_events;
                if (t + tau >= t_rec)
                    out.records.push_back({t + tau, 0.0, wrap_phase(se.z), false});
                s = se;
                t += tau;
                // nudge past the tangency to avoid re-detection
                s = eval(s, 1e-3 * dt);
                t += 1e-3 * dt;
                continue;
            }
            ++out.n_impacts;
            if (++impacts_this_period > 10000)
                throw ChatterStall("simulate_hybrid: more than 1e4 impacts in one forcing period");
            if (t + tau >= t_rec) {
                double xrec = 0.0;
                if (virtual_maxima) {
                    const SectionPoint hat = virtual_map(ImpactPoint{se.y, se.z}, sys, pp, cfg);
                    xrec = hat.x;
                }
                out.records.push_back({t + tau, xrec, wrap_phase(se.z), true});
            }
            auto [yr, zr] = reset_unwrapped(se.y, se.z, sys, pp);
            s = State{0.0, yr, zr};
            t += tau;
        } else {
            // a maximum touching the wall is a zero-velocity arrival:
            // record it as a grazing event, never apply the reset
            if (std::abs(se.x) < 1e-12) ++out.n_grazing_events;
            if (t + tau >= t_rec)
                out.records.push_back({t + tau, se.x, wrap_phase(se.z), false});
            se.y = 0.0;
            s = se;
            t += tau;
            // step off the section so the crossing is not re-detected
            s = eval(s, 1e-6 * dt);
            t += 1e-6 * dt;
        }
        if (static_cast<long>(t / period) != period_idx) {
            period_idx = static_cast<long>(t / period);
            impacts_this_period = 0;
        }
    }
    out.final_state = s.wrapped();
    return out;
}

/// Classify a recorded window as periodic (smallest matching cycle) or
/// aperiodic. Matching compares section x, wrapped phase, and impact flags.
inline AttractorSummary classify_window(const std::vector<SectionRecord>& recs, double omega,
                                        int period_cap, double tol) {
    AttractorSummary a;
    a.window = recs;
    const int n = static_cast<int>(recs.size());
    const double period = two_pi / omega;
    for (int c = 1; c <= period_cap && 2 * c <= n; ++c) {
        bool match = true;
        for (int i = 0; i + c < n && match; ++i) {
            const auto& u = recs[i];
            const auto& v = recs[i + c];
            if (u.impacted != v.impacted) match = false;
            if (std::abs(u.x - v.x) > tol) match = false;
            double dz = std::fmod(u.z - v.z, two_pi);
            if (dz > M_PI) dz -= two_pi;
            if (dz < -M_PI) dz += two_pi;
            if (std::abs(dz) > tol * 10.0) match = false;
        }
        if (match) {
            a.periodic = true;
            a.records_per_cycle = c;
            a.period_q = static_cast<int>(std::lround((recs[c].t - recs[0].t) / period));
            a.impacts_per_cycle = 0;
            for (int i = 0; i < c; ++i)
                if (recs[i].impacted) ++a.impacts_per_cycle;
            return a;
        }
    }
    return a;
}

/// One parameter point of an orbit diagram.
struct OrbitDiagramRow {
    ParamPoint params;
    double amp = 0.0, omega = 0.0;
    std::vector<SectionRecord> records;       ///< recorded values, all initial states
    std::vector<AttractorSummary> attractors; ///< one per initial state
};

/// Brute-force orbit diagram over a grid of mu values at fixed eta.
/// Deterministic given the seed: initial conditions are drawn sequentially
/// from one engine, then trajectories run in parallel as pure tasks.
inline std::vector<OrbitDiagramRow> orbit_diagram(const HybridSystemDef& sys, double eta,
                                                  const std::vector<double>& mu_grid,
                                                  const ScanConfig& sc,
                                                  const IntegratorConfig& cfg) {
    sc.validate();
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> ux(sc.box_x_lo, sc.box_x_hi);
    std::uniform_real_distribution<double> uy(sc.box_y_lo, sc.box_y_hi);
    std::uniform_real_distribution<double> uz(0.0, two_pi);

    struct Task {
        std::size_t row;
        State s0;
    };
    std::vector<Task> tasks;
    for (std::size_t r = 0; r < mu_grid.size(); ++r)
        for (int i = 0; i < sc.n_initial; ++i) {
            const double x = ux(rng), y = uy(rng), z = uz(rng);
            tasks.push_back({r, State{x, y, z}});
        }

    const double horizon = sc.n_transient + sc.n_record;
    std::vector<TrajectorySummary> results(tasks.size());
    const int workers = std::max(1, sc.threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) return;
            const ParamPoint pp{mu_grid[tasks[k].row], eta};
            results[k] =
                simulate_hybrid(tasks[k].s0, horizon, sys, pp, cfg, sc.n_transient, true);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<OrbitDiagramRow> out(mu_grid.size());
    for (std::size_t r = 0; r < mu_grid.size(); ++r) {
        out[r].params = {mu_grid[r], eta};
        out[r].omega = sys.omega_of(out[r].params);
        out[r].amp = sys.has_closed_form() ? sys.osc(out[r].params).amp : mu_grid[r];
    }
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        auto& row = out[tasks[k].row];
        const auto& rec = results[k].records;
        // cap the recorded window at n_record events per initial state
        const std::size_t take = std::min<std::size_t>(rec.size(), sc.n_record);
        row.records.insert(row.records.end(), rec.begin(), rec.begin() + take);
        row.attractors.push_back(classify_window(
            std::vector<SectionRecord>(rec.begin(), rec.begin() + take), row.omega,
            sc.period_cap, sc.period_tol));
    }
    return out;
}

} // namespace graze
