#include "ringqc/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ringqc/constants.hpp"
#include "ringqc/errors.hpp"
#include "ringqc/gates.hpp"
#include "ringqc/io.hpp"
#include "ringqc/tracking.hpp"

namespace ringqc::scenario {

namespace {

using nlohmann::json;
constexpr double two_pi = 2.0 * constants::pi;

std::vector<double> parse_numbers(const std::string& text) {
    std::istringstream is(text);
    std::vector<double> out;
    double v;
    while (is >> v)
        out.push_back(v);
    return out;
}

dynamics::LaserBeam beam_from_section(const ConfigSection& sec,
                                      const IonSpecies& sp) {
    dynamics::LaserBeam beam;
    if (auto wl = sec.maybe_double("wavelength_nm"))
        beam.wavelength = *wl * 1e-9;
    else if (sp.cooling_wavelength)
        beam.wavelength = *sp.cooling_wavelength;
    else
        throw ConfigError("[beam]: no wavelength and species '" + sp.name +
                          "' has no cooling wavelength");
    beam.detuning = sec.get_double_or("detuning_2pi_mhz", 0.0) * two_pi * 1e6;
    beam.saturation = sec.get_double_or("saturation", 1.0);
    const auto dir = parse_numbers(sec.get_string_or("direction", "0 0 1"));
    if (dir.size() != 3)
        throw ConfigError("[beam]: direction needs three components");
    beam.direction = Vec3{dir[0], dir[1], dir[2]}.normalized();
    beam.waist = sec.get_double_or("waist_um", 10.0) * 1e-6;
    beam.aspect_ratio = sec.get_double_or("aspect_ratio", 1.0);
    beam.footprint_center = sec.get_double_or("footprint_center_m", 0.0);
    beam.footprint_length = sec.get_double_or("footprint_length_m", 0.0);
    beam.validate();
    return beam;
}

crystal::Branch branch_from_string(const std::string& name) {
    if (name == "axial")
        return crystal::Branch::axial;
    if (name == "transverse")
        return crystal::Branch::transverse;
    if (name == "all")
        return crystal::Branch::all;
    throw ConfigError("unknown branch '" + name +
                      "' (expected axial, transverse or all)");
}

json entry_to_json(const budget::BudgetEntry& e) {
    json j;
    j["value"] = e.value;
    j["unit"] = e.unit;
    j["formula"] = e.formula;
    j["inputs"] = e.inputs;
    if (e.discrepancy)
        j["paper_discrepancy"] = *e.discrepancy;
    return j;
}

} // namespace

Scenario load_scenario(const ConfigFile& cfg) {
    Scenario sc;

    sc.species = species_from_section(cfg.require("species"));
    if (const auto* ring_sec = cfg.find("ring"))
        sc.ring = ring_from_section(*ring_sec);
    else
        sc.ring = load_machine("PALLAS");

    for (const auto* beam_sec : cfg.all("beam"))
        sc.beams.push_back(beam_from_section(*beam_sec, sc.species));

    sc.stray.circumference = sc.ring.circumference;
    if (const auto* stray_sec = cfg.find("stray")) {
        for (const auto& [key, value] : stray_sec->entries) {
            if (key != "sample")
                continue;
            const auto v = parse_numbers(value);
            if (v.size() != 4)
                throw ConfigError("[stray]: sample needs 'arc Ex Ey Ez'");
            sc.stray.field.push_back(
                dynamics::ArcFieldSample{v[0], Vec3{v[1], v[2], v[3]}});
        }
        sc.stray.sort_samples();
    }

    if (const auto* b = cfg.find("budget")) {
        budget::BudgetInputs in;
        in.species = sc.species;
        in.ring = sc.ring;
        in.lamb_dicke_temperature =
            b->get_double_or("lamb_dicke_temperature_uk", 20.0) * 1e-6;
        in.stray_field = b->get_double_or("stray_field_v_m", 10.0);
        in.waist = b->get_double_or("waist_um", 10.0) * 1e-6;
        in.gate_pulse_length =
            b->get_double_or("gate_pulse_length_ns", 4.6) * 1e-9;
        in.gate_eta = b->get_double_or("eta", 0.2);
        in.band_width = b->get_double_or("band_width_hz", 1e6);
        sc.budget_request = in;
    }

    if (const auto* c = cfg.find("crystal")) {
        CrystalRequest req;
        req.n_ions = static_cast<int>(c->get_long("n_ions"));
        const double default_wx = sc.ring.secular_freq_x
                                      ? *sc.ring.secular_freq_x
                                      : sc.species.typical_transverse_freq
                                            .value_or(0.0);
        const double default_wz = sc.ring.secular_freq_z
                                      ? *sc.ring.secular_freq_z
                                      : sc.species.typical_axial_freq
                                            .value_or(0.0);
        req.omega_x =
            c->get_double_or("omega_x_2pi_khz", default_wx / (two_pi * 1e3)) *
            two_pi * 1e3;
        req.omega_y =
            c->get_double_or("omega_y_2pi_khz", req.omega_x / (two_pi * 1e3)) *
            two_pi * 1e3;
        req.omega_z =
            c->get_double_or("omega_z_2pi_khz", default_wz / (two_pi * 1e3)) *
            two_pi * 1e3;
        req.branch = branch_from_string(c->get_string_or("branch", "all"));
        req.emit_eigenvectors = c->get_bool_or("emit_eigenvectors", false);
        req.check_zigzag = c->get_bool_or("check_zigzag", false);
        sc.crystal_request = req;
    }

    if (const auto* d = cfg.find("dynamics")) {
        DynamicsRequest req;
        req.n_ions = static_cast<int>(d->get_long_or("n_ions", 1));
        req.duration = d->get_double("duration_s");
        req.dt = d->get_double_or("dt_s", 0.0); // 0 = auto from the guard
        req.decimate = static_cast<int>(d->get_long_or("decimate", 100));
        req.seed = static_cast<std::uint64_t>(d->get_long_or("seed", 1));
        req.options.recoil_noise = d->get_bool_or("recoil_noise", true);
        req.options.rf_micromotion = d->get_bool_or("rf_micromotion", false);
        req.options.coulomb = d->get_bool_or("coulomb", false);
        if (d->has("dark_indices")) {
            req.options.dark.assign(static_cast<std::size_t>(req.n_ions), 0);
            for (double ix : parse_numbers(d->get_string("dark_indices"))) {
                const auto i = static_cast<std::size_t>(ix);
                if (i < req.options.dark.size())
                    req.options.dark[i] = 1;
            }
        }
        req.discard_snapshots =
            static_cast<std::size_t>(d->get_long_or("discard_snapshots", 0));
        sc.dynamics_request = req;
    }

    if (const auto* g = cfg.find("gates")) {
        GatesRequest req;
        req.arrival_rate = g->get_double_or("arrival_rate_mhz", 0.0) * 1e6;
        req.pulse_length = g->get_double("pulse_length_ns") * 1e-9;
        req.rise_fall = g->get_double_or("rise_fall_ns", 2.0) * 1e-9;
        for (double t : parse_numbers(g->get_string_or("targets", "")))
            req.targets.push_back(static_cast<int>(t));
        req.eta = g->get_double_or("eta", 0.2);
        req.n_ions_for_scaling = g->get_double_or(
            "n_ions", static_cast<double>(sc.ring.n_ions));
        req.target_angle = g->get_double_or("target_angle_rad", 0.0);
        req.max_angle_per_pass = g->get_double_or("max_angle_per_pass_rad", 0.0);
        req.revolution_period = g->get_double_or("revolution_period_s", 0.0);
        sc.gates_request = req;
    }

    if (const auto* t = cfg.find("tracking")) {
        TrackingRequest req;
        req.n_ions = t->get_long("n_ions");
        req.dark_fraction = t->get_double_or("dark_fraction", 0.1);
        req.seed = static_cast<std::uint64_t>(t->get_long_or("seed", 1));
        req.mc_trials = static_cast<int>(t->get_long_or("mc_trials", 0));
        for (const auto& [key, value] : t->entries) {
            if (key != "event")
                continue;
            std::istringstream is(value);
            TrackingEventSpec spec;
            is >> spec.kind >> spec.a;
            if (spec.kind == "reorder")
                is >> spec.b;
            if (!is && spec.kind != "loss")
                throw ConfigError("[tracking]: bad event '" + value + "'");
            req.events.push_back(spec);
        }
        sc.tracking_request = req;
    }

    return sc;
}

std::vector<std::filesystem::path>
run_scenario(const Scenario& sc, const std::filesystem::path& out_dir,
             const RunOptions& options) {
    std::vector<std::filesystem::path> written;
    std::filesystem::create_directories(out_dir);

    json summary;
    summary["schema_version"] = "1";
    summary["species"] = sc.species.name;
    summary["ring"] = sc.ring.name;
    std::ostringstream report;
    report << "scenario report: species " << sc.species.name << ", machine "
           << sc.ring.name << "\n";

    auto emit = [&](const std::filesystem::path& rel,
                    const std::string& content) {
        const auto path = out_dir / rel;
        io::atomic_write(path, content);
        written.push_back(path);
    };

    // Validate every requested pipeline before any of them runs.
    sc.species.validate();
    sc.ring.validate();
    for (const auto& b : sc.beams)
        b.validate();

    if (sc.budget_request) {
        budget::BudgetReport rep = budget::compute_budget_report(
            *sc.budget_request);
        emit("budget.json", rep.to_json());
        json jb;
        for (const auto& e : rep.entries)
            jb[e.name] = entry_to_json(e);
        summary["budget"] = jb;
        report << "\n[budget]\n";
        for (const auto& e : rep.entries) {
            report << "  " << e.name << " = " << io::format_double(e.value)
                   << " " << e.unit << "\n";
        }
    }

    if (sc.crystal_request) {
        const auto& req = *sc.crystal_request;
        const auto trap = crystal::TrapPotential::from(
            sc.species, req.omega_x, req.omega_y, req.omega_z);
        const auto state = crystal::solve_equilibrium(trap, req.n_ions);

        std::ostringstream pos_csv;
        pos_csv << "ion,x_m,y_m,z_m\n";
        for (int i = 0; i < state.n_ions(); ++i)
            pos_csv << i << "," << io::format_double(state.positions(i, 0))
                    << "," << io::format_double(state.positions(i, 1)) << ","
                    << io::format_double(state.positions(i, 2)) << "\n";
        emit("crystal_positions.csv", pos_csv.str());

        json jc;
        jc["n_ions"] = req.n_ions;
        jc["potential_energy_j"] = state.potential_energy;
        jc["residual_gradient_n"] = state.residual_gradient_norm;

        if (req.n_ions <= crystal::dense_mode_cap) {
            const auto spec = crystal::phonon_modes(state, trap);
            std::ostringstream modes_csv;
            modes_csv << "mode,frequency_rad_s,axial_weight\n";
            for (int i = 0; i < spec.n_modes(); ++i)
                modes_csv << i << "," << io::format_double(spec.frequencies[i])
                          << "," << io::format_double(spec.axial_weight(i))
                          << "\n";
            emit("crystal_modes.csv", modes_csv.str());
            if (req.emit_eigenvectors) {
                std::ostringstream vec_csv;
                vec_csv << "mode,components...\n";
                for (int c = 0; c < spec.eigenvectors.cols(); ++c) {
                    vec_csv << c;
                    for (int r = 0; r < spec.eigenvectors.rows(); ++r)
                        vec_csv << ","
                                << io::format_double(spec.eigenvectors(r, c));
                    vec_csv << "\n";
                }
                emit("crystal_eigenvectors.csv", vec_csv.str());
            }
            const auto stats = crystal::band_statistics(spec, req.branch);
            jc["mode_count"] = spec.n_modes();
            jc["band_min_rad_s"] = spec.band_min;
            jc["band_max_rad_s"] = spec.band_max;
            jc["branch_width_rad_s"] = stats.width;
            jc["branch_mean_spacing_rad_s"] = stats.mean_spacing;
            jc["branch_min_spacing_rad_s"] = stats.min_spacing;
            jc["branch_mode_count"] = stats.count;
            report << "\n[crystal]\n  N = " << req.n_ions
                   << ", band = [" << io::format_double(spec.band_min) << ", "
                   << io::format_double(spec.band_max)
                   << "] rad/s, branch width = "
                   << io::format_double(stats.width) << " rad/s\n";
        } else {
            const auto extremes = crystal::band_extremes(state, trap);
            jc["band_min_rad_s"] = extremes.min_freq;
            jc["band_max_rad_s"] = extremes.max_freq;
            report << "\n[crystal]\n  N = " << req.n_ions
                   << " (band extremes only)\n";
        }
        if (req.check_zigzag) {
            const auto zz = crystal::zigzag_stability(trap, req.n_ions);
            jc["linear_chain_stable"] = zz.is_linear_stable;
            jc["lowest_transverse_mode_rad_s"] = zz.lowest_transverse_mode;
            report << "  linear chain "
                   << (zz.is_linear_stable ? "stable" : "unstable (zigzag)")
                   << "\n";
        }
        summary["crystal"] = jc;
    }

    if (sc.dynamics_request) {
        const auto& req = *sc.dynamics_request;
        dynamics::Simulator sim(sc.species, sc.ring, sc.beams, sc.stray,
                                req.options);
        const double dt = req.dt > 0.0 ? req.dt : 0.5 * sim.max_step();
        const std::uint64_t seed = options.seed_override.value_or(req.seed);
        auto state = sim.initial_state(req.n_ions, seed);
        auto history = sim.run(state, req.duration, dt, req.decimate);

        std::ostringstream traj;
        traj << "time_s,ion,arc_m,x_m,y_m,vx_m_s,vy_m_s,vz_m_s\n";
        for (const auto& snap : history) {
            for (std::size_t i = 0; i < snap.arc.size(); ++i) {
                traj << io::format_double(snap.time) << "," << i << ","
                     << io::format_double(snap.arc[i]) << ","
                     << io::format_double(snap.offset_x[i]) << ","
                     << io::format_double(snap.offset_y[i]) << ","
                     << io::format_double(snap.velocity[i].x) << ","
                     << io::format_double(snap.velocity[i].y) << ","
                     << io::format_double(snap.velocity[i].z) << "\n";
            }
        }
        emit("trajectory.csv", traj.str());

        const std::size_t discard = req.discard_snapshots > 0
                                        ? req.discard_snapshots
                                        : history.size() / 2;
        const auto est = dynamics::estimate_temperatures(history,
                                                         sc.species.mass,
                                                         discard);
        json jd;
        jd["seed"] = seed;
        jd["dt_s"] = dt;
        jd["snapshots"] = history.size();
        jd["t_parallel_k"] = est.t_parallel;
        jd["t_transverse_k"] = est.t_transverse;
        jd["mean_velocity_m_s"] = est.mean_velocity;
        jd["recoil_events"] = state.recoil_events;
        summary["dynamics"] = jd;
        report << "\n[dynamics]\n  T_parallel = "
               << io::format_double(est.t_parallel)
               << " K, T_transverse = " << io::format_double(est.t_transverse)
               << " K, mean velocity = " << io::format_double(est.mean_velocity)
               << " m/s\n";
    }

    if (sc.gates_request) {
        const auto& req = *sc.gates_request;
        json jg;
        if (req.arrival_rate > 0.0 && !req.targets.empty()) {
            const auto train = gates::schedule_pulses(
                req.arrival_rate, req.targets, req.pulse_length,
                req.rise_fall);
            std::ostringstream csv;
            train.write_csv(csv);
            emit("pulse_train.csv", csv.str());
            jg["pulses"] = train.pulses.size();
            jg["arrival_period_s"] = train.arrival_period;
        }
        std::optional<gates::TransitGeometry> geom;
        if (sc.ring.secular_freq_z && sc.ring.kinetic_energy > 0.0) {
            gates::TransitGeometry g;
            g.waist = 10e-6;
            g.velocity = beam_velocity(sc.ring, sc.species);
            g.spacing = budget::ion_spacing(sc.species,
                                            *sc.ring.secular_freq_z);
            geom = g;
        }
        if (sc.species.reference_rabi) {
            const auto sw = gates::switching_budget(
                sc.species, req.pulse_length, req.eta, req.n_ions_for_scaling,
                geom);
            jg["switching_rabi_rad_s"] = sw.single_ion_rabi;
            jg["intensity_w_m2"] = sw.intensity;
            jg["n_ion_gate_time_s"] = sw.n_ion_gate_time;
            if (sw.modulator_rate)
                jg["modulator_rate_hz"] = *sw.modulator_rate;
            report << "\n[gates]\n  switching Rabi = "
                   << io::format_double(sw.single_ion_rabi)
                   << " rad/s, N-ion gate time = "
                   << io::format_double(sw.n_ion_gate_time) << " s\n";
        }
        if (req.target_angle != 0.0 && req.max_angle_per_pass > 0.0) {
            const auto plan = gates::plan_piecewise_gate(
                req.target_angle, req.max_angle_per_pass,
                req.revolution_period);
            jg["plan_passes"] = plan.passes;
            jg["plan_wall_clock_s"] = plan.wall_clock_time;
        }
        summary["gates"] = jg;
    }

    if (sc.tracking_request) {
        const auto& req = *sc.tracking_request;
        const std::uint64_t seed = options.seed_override.value_or(req.seed);
        auto ledger = tracking::load_pattern(req.n_ions, req.dark_fraction,
                                             seed);
        json jt;
        jt["n_ions"] = req.n_ions;
        jt["bright"] = ledger.bright_count();
        const auto muw = tracking::min_unique_window(ledger);
        if (muw)
            jt["min_unique_window"] = *muw;
        else
            jt["min_unique_window"] = nullptr;

        for (const auto& spec : req.events) {
            const auto event =
                spec.kind == "loss"
                    ? tracking::CollisionEvent::loss(spec.a)
                    : tracking::CollisionEvent::reorder(spec.a, spec.b);
            ledger = tracking::apply_event(ledger, event);
        }
        jt["final_length"] = ledger.size();

        if (req.mc_trials > 0) {
            std::vector<int> lengths;
            for (int t = 0; t < req.mc_trials; ++t) {
                const auto trial = tracking::load_pattern(
                    req.n_ions, req.dark_fraction, seed + 1 + t);
                if (const auto l = tracking::min_unique_window(trial))
                    lengths.push_back(*l);
            }
            std::sort(lengths.begin(), lengths.end());
            if (!lengths.empty())
                jt["mc_median_window"] = lengths[lengths.size() / 2];
        }

        std::ostringstream log;
        tracking::write_log(log, ledger);
        emit("tracking_log.txt", log.str());
        summary["tracking"] = jt;
        report << "\n[tracking]\n  N = " << req.n_ions << ", bright = "
               << ledger.bright_count() << ", min unique window = "
               << (muw ? std::to_string(*muw) : std::string("none")) << "\n";
    }

    emit("summary.json", summary.dump(2) + "\n");
    if (!options.json_only)
        emit("report.txt", report.str());
    return written;
}

} // namespace ringqc::scenario
