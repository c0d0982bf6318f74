#include "ringqc/paper_check.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ringqc/budget.hpp"
#include "ringqc/constants.hpp"
#include "ringqc/gates.hpp"
#include "ringqc/io.hpp"
#include "ringqc/species.hpp"

namespace ringqc::check {

namespace {

constexpr double two_pi = 2.0 * constants::pi;

PaperCheckRow match_row(std::string id, std::string location,
                        std::string quoted, double published, double computed,
                        std::string unit, double tolerance, std::string note) {
    PaperCheckRow row;
    row.id = std::move(id);
    row.location = std::move(location);
    row.quoted = std::move(quoted);
    row.published = published;
    row.computed = computed;
    row.unit = std::move(unit);
    row.tolerance = tolerance;
    row.status = RowStatus::match;
    row.relative_deviation =
        published != 0.0 ? std::fabs(computed - published) / std::fabs(published)
                         : std::fabs(computed);
    row.within_tolerance = row.relative_deviation <= tolerance;
    row.note = std::move(note);
    return row;
}

PaperCheckRow discrepancy_row(std::string id, std::string location,
                              std::string quoted, double published,
                              double computed, std::string unit,
                              std::string note) {
    PaperCheckRow row;
    row.id = std::move(id);
    row.location = std::move(location);
    row.quoted = std::move(quoted);
    row.published = published;
    row.computed = computed;
    row.unit = std::move(unit);
    row.status = RowStatus::paper_discrepancy;
    row.relative_deviation =
        published != 0.0 ? std::fabs(computed - published) / std::fabs(published)
                         : std::fabs(computed);
    row.within_tolerance = false;
    row.note = std::move(note);
    return row;
}

} // namespace

std::vector<PaperCheckRow> paper_check(double tolerance_scale) {
    std::vector<PaperCheckRow> rows;
    const IonSpecies ca = load_species("Ca-40");
    const IonSpecies ba = load_species("Ba-138");
    const IonSpecies mg = load_species("Mg-24");
    const RingConfig pallas = load_machine("PALLAS");
    auto tol = [&](double t) { return t * tolerance_scale; };

    // 1. micromotion displacement at 10 V/m, 2pi x 200 kHz
    const double wx200 = two_pi * 200e3;
    const double dx_ca = budget::micromotion_displacement(10.0, ca, wx200);
    rows.push_back(match_row("micromotion.displacement.ca40", "Sec. 4",
                             "15 um", 15e-6, dx_ca, "m", tol(0.05),
                             "10 V/m, Ca-40, wx = 2pi x 200 kHz"));
    const double dx_ba = budget::micromotion_displacement(10.0, ba, wx200);
    rows.push_back(match_row("micromotion.displacement.ba138", "Sec. 4",
                             "4.5 um", 4.5e-6, dx_ba, "m", tol(0.05),
                             "10 V/m, Ba-138, wx = 2pi x 200 kHz"));

    // 2. micromotion amplitude at Omega_RF = 2pi x 10 MHz
    const double w_rf = two_pi * 10e6;
    const auto mm_ca =
        budget::micromotion_amplitude_energy(dx_ca, wx200, w_rf, ca.mass);
    rows.push_back(match_row("micromotion.amplitude.ca40", "Sec. 4",
                             "0.45 um", 0.45e-6, mm_ca.amplitude, "m",
                             tol(0.10), "Mathieu-q model, q = 2 sqrt(2) w/W"));
    const auto mm_ba =
        budget::micromotion_amplitude_energy(dx_ba, wx200, w_rf, ba.mass);
    rows.push_back(match_row("micromotion.amplitude.ba138", "Sec. 4",
                             "0.13 um", 0.13e-6, mm_ba.amplitude, "m",
                             tol(0.10), "Mathieu-q model, q = 2 sqrt(2) w/W"));

    // 3. beam velocity for Mg-24 at 1 eV
    RingConfig one_ev = pallas;
    one_ev.kinetic_energy = 1.0 * constants::electron_volt;
    const double v_mg = beam_velocity(one_ev, mg);
    rows.push_back(match_row("beam.velocity.mg24", "Sec. 6", "2.8 km/s",
                             2800.0, v_mg, "m/s", tol(0.02),
                             "Mg-24 at 1 eV, sqrt(2E/m)"));

    // 4. ion spacing for Mg-24 at 2pi x 180 kHz
    const double spacing_mg = budget::ion_spacing(mg, two_pi * 180e3);
    rows.push_back(match_row("crystal.spacing.mg24", "Sec. 6 / Table 2",
                             "20 um", 20e-6, spacing_mg, "m", tol(0.10),
                             "cbrt(e^2/(2 pi eps0 m wz^2)), wz = 2pi x 180 kHz"));

    // 5. Rayleigh range at w0 = 10 um, 397 nm
    const double zr = budget::rayleigh_range(10e-6, 397e-9);
    rows.push_back(match_row("laser.rayleigh_range", "Sec. 6", "0.8 mm",
                             0.8e-3, zr, "m", tol(0.02),
                             "pi w0^2 / lambda"));

    // 6. arrival / modulator rate at the stated inputs
    const auto timing = budget::pulse_timing(10e-6, 2800.0, 20e-6);
    rows.push_back(match_row("gates.arrival_rate", "Sec. 6", "140 MHz", 140e6,
                             timing.arrival_rate, "Hz", tol(0.02),
                             "v = 2.8 km/s, spacing 20 um (stated inputs)"));

    // 7. pi-pulse anchors and scaled intensities for a 4.6 ns pulse
    const double tau_ref_ca =
        constants::pi / ca.reference_rabi->rabi_freq;
    rows.push_back(match_row("gates.pi_time.ca40", "Sec. 6", "0.5 us", 0.5e-6,
                             tau_ref_ca, "s", tol(0.01),
                             "pi / Omega_ref at 5000 W/mm^2"));
    const double tau_ref_ba =
        constants::pi / ba.reference_rabi->rabi_freq;
    rows.push_back(match_row("gates.pi_time.ba138", "Sec. 6", "11.6 us",
                             11.6e-6, tau_ref_ba, "s", tol(0.01),
                             "pi / Omega_ref at 250 mW/mm^2"));
    const auto pi_ca = budget::pi_pulse_requirements(ca, 4.6e-9);
    rows.push_back(match_row("gates.pi_intensity.ca40", "Sec. 6",
                             "540000 W/mm^2", 540000.0,
                             pi_ca.required_intensity / 1e6, "W/mm^2",
                             tol(0.03), "linear intensity scaling to 4.6 ns"));
    const auto pi_ba = budget::pi_pulse_requirements(ba, 4.6e-9);
    rows.push_back(match_row("gates.pi_intensity.ba138", "Sec. 6",
                             "600 W/mm^2", 600.0,
                             pi_ba.required_intensity / 1e6, "W/mm^2",
                             tol(0.10), "linear intensity scaling to 4.6 ns"));

    // 8. switching Rabi frequency and N-scaled gate times
    const auto sw100 = gates::switching_budget(ca, 4.6e-9, 0.2, 100.0);
    rows.push_back(match_row("gates.switching_rabi", "Sec. 7",
                             "2pi x 218 MHz", two_pi * 218e6,
                             sw100.single_ion_rabi, "rad/s", tol(0.01),
                             "2 pi / 4.6 ns (2pi-pulse convention)"));
    rows.push_back(match_row("gates.gate_time.n100", "Sec. 7", "230 ns",
                             230e-9, sw100.n_ion_gate_time, "s", tol(0.03),
                             "eta = 0.2, N = 100"));
    const auto sw1e5 = gates::switching_budget(ca, 4.6e-9, 0.2, 1e5);
    rows.push_back(match_row("gates.gate_time.n1e5", "Sec. 7", "7.3 us",
                             7.3e-6, sw1e5.n_ion_gate_time, "s", tol(0.03),
                             "eta = 0.2, N = 1e5"));

    // 9. phonon band budget, exact
    const auto band = budget::phonon_band_budget(1e6, 1e5);
    rows.push_back(match_row("phonons.mode_spacing", "Sec. 7", "10 Hz", 10.0,
                             band.mode_spacing, "Hz", tol(1e-12),
                             "1 MHz band, 1e5 modes"));
    rows.push_back(match_row("phonons.sideband_floor", "Sec. 7", "0.1 s", 0.1,
                             band.min_resolved_sideband_time, "s", tol(1e-12),
                             "inverse mode spacing"));

    // 10. apparent temperatures: identity reproduction of the reference pair
    const budget::ApparentTemperatureReference ref{pallas, 0.2e-3, 1.0e-3};
    const auto t_ref = budget::apparent_ring_temperatures(pallas, ref);
    rows.push_back(match_row("ring.apparent_t_parallel", "Sec. 4", "0.2 mK",
                             0.2e-3, t_ref.t_parallel, "K", tol(1e-12),
                             "identity reproduction, 1/Qx^2 scaling"));
    rows.push_back(match_row("ring.apparent_t_perp", "Sec. 4", "1 mK", 1.0e-3,
                             t_ref.t_perpendicular, "K", tol(1e-12),
                             "identity reproduction, mu_cell^2 scaling"));
    RingConfig doubled = pallas;
    doubled.horizontal_tune = 2.0 * *pallas.horizontal_tune;
    const auto t_scaled = budget::apparent_ring_temperatures(doubled, ref);
    rows.push_back(match_row("ring.apparent_t_parallel.qx_doubled", "Sec. 4",
                             "0.05 mK (quadratic scaling)", 0.05e-3,
                             t_scaled.t_parallel, "K", tol(1e-12),
                             "Qx doubled quarters T_parallel"));

    // 11. documented discrepancies: the formulas win, the published numbers
    // are flagged with the computed alternatives
    const double loc_ca = budget::localization_length(
        20e-6, ca.mass, *ca.typical_axial_freq);
    rows.push_back(discrepancy_row(
        "localization.47nm", "Sec. 4", "47 nm", 47e-9, loc_ca, "m",
        budget::discrepancy::localization_47nm));
    const double v80 =
        budget::doppler_control_velocity(two_pi * 80e6, 397e-9);
    rows.push_back(discrepancy_row("doppler.split_pairing", "Sec. 6",
                                   "100 m/s at ~80 MHz", 100.0, v80, "m/s",
                                   budget::discrepancy::velocity_80mhz));
    rows.push_back(discrepancy_row("gates.pulse_length", "Sec. 6", "4.6 ns",
                                   4.6e-9, timing.formula_pulse_length, "s",
                                   budget::discrepancy::pulse_length_4_6ns));
    rows.push_back(discrepancy_row(
        "micromotion.energy.ca40", "Sec. 4", "16 meV / 190 mK", 16e-3,
        mm_ca.mean_kinetic_energy / constants::electron_volt * 1e3, "meV",
        budget::discrepancy::micromotion_energy_16mev));
    const double t_7um = budget::transverse_temperature_from_size(
        7e-6, mg.mass, two_pi * 110e3);
    rows.push_back(discrepancy_row("ring.transverse_temp.28mk", "Sec. 4",
                                   "28 mK", 28e-3, t_7um, "K",
                                   budget::discrepancy::transverse_temp_28mk));

    return rows;
}

bool all_match_rows_pass(const std::vector<PaperCheckRow>& rows) {
    for (const auto& row : rows)
        if (row.status == RowStatus::match && !row.within_tolerance)
            return false;
    return true;
}

namespace {
const char* status_name(RowStatus s) {
    switch (s) {
    case RowStatus::match:
        return "match";
    case RowStatus::paper_discrepancy:
        return "paper_discrepancy";
    case RowStatus::not_reproducible:
        return "not_reproducible";
    }
    return "?";
}
} // namespace

void write_table(std::ostream& os, const std::vector<PaperCheckRow>& rows) {
    os << std::left;
    for (const auto& row : rows) {
        std::ostringstream line;
        line << std::left << std::setw(36) << row.id << " " << std::setw(10)
             << row.location << " quoted " << std::setw(22) << row.quoted
             << " computed " << std::setw(14) << io::format_double(row.computed)
             << " " << std::setw(7) << row.unit;
        if (row.status == RowStatus::match) {
            line << " dev " << std::setw(10)
                 << io::format_double(row.relative_deviation) << " tol "
                 << std::setw(8) << io::format_double(row.tolerance)
                 << (row.within_tolerance ? " [match]" : " [MATCH FAILED]");
        } else {
            line << " [" << status_name(row.status) << "]";
        }
        os << line.str() << "\n";
        if (row.status != RowStatus::match)
            os << "    note: " << row.note << "\n";
    }
    std::size_t n_match = 0, n_pass = 0, n_disc = 0;
    for (const auto& row : rows) {
        if (row.status == RowStatus::match) {
            ++n_match;
            if (row.within_tolerance)
                ++n_pass;
        } else {
            ++n_disc;
        }
    }
    os << n_pass << "/" << n_match
       << " quantitative claims reproduced within tolerance, " << n_disc
       << " published figures flagged as internally inconsistent\n";
}

std::string to_json(const std::vector<PaperCheckRow>& rows) {
    auto esc = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '"' || c == '\\')
                out += '\\';
            out += c;
        }
        return out;
    };
    std::ostringstream os;
    os << "{\n  \"schema_version\": \"1\",\n  \"rows\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << "    {\"id\": \"" << esc(r.id) << "\", \"location\": \""
           << esc(r.location) << "\", \"quoted\": \"" << esc(r.quoted)
           << "\", \"published\": " << io::format_double(r.published)
           << ", \"computed\": " << io::format_double(r.computed)
           << ", \"unit\": \"" << esc(r.unit)
           << "\", \"relative_deviation\": "
           << io::format_double(r.relative_deviation) << ", \"status\": \""
           << status_name(r.status) << "\"";
        if (r.status == RowStatus::match)
            os << ", \"tolerance\": " << io::format_double(r.tolerance)
               << ", \"within_tolerance\": "
               << (r.within_tolerance ? "true" : "false");
        else
            os << ", \"note\": \"" << esc(r.note) << "\"";
        os << "}" << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    os << "  ]\n}\n";
    return os.str();
}

} // namespace ringqc::check
