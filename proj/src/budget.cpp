#include "ringqc/budget.hpp"

#include <cmath>
#include <sstream>

#include "ringqc/constants.hpp"
#include "ringqc/errors.hpp"
#include "ringqc/io.hpp"

namespace ringqc::budget {

namespace {

constexpr double two_pi = 2.0 * constants::pi;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be > 0, got " +
                          io::format_double(v));
}

void require_nonnegative(double v, const char* what) {
    if (v < 0.0 || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be >= 0, got " +
                          io::format_double(v));
}

} // namespace

double localization_length(double temperature, double mass, double mode_freq) {
    require_nonnegative(temperature, "temperature");
    require_positive(mass, "mass");
    require_positive(mode_freq, "mode frequency");
    return std::sqrt(2.0 * constants::boltzmann * temperature /
                     (mass * mode_freq * mode_freq));
}

double transverse_temperature_from_size(double size, double mass,
                                        double mode_freq) {
    require_nonnegative(size, "size");
    require_positive(mass, "mass");
    require_positive(mode_freq, "mode frequency");
    return mass * mode_freq * mode_freq * size * size /
           (2.0 * constants::boltzmann);
}

LambDickeParams lamb_dicke(double mass, double laser_wavelength,
                           double mode_freq) {
    require_positive(mass, "mass");
    require_positive(laser_wavelength, "wavelength");
    require_positive(mode_freq, "mode frequency");
    LambDickeParams p;
    p.wavevector = two_pi / laser_wavelength;
    p.recoil_freq =
        constants::reduced_planck * p.wavevector * p.wavevector / (2.0 * mass);
    p.mode_freq = mode_freq;
    p.eta = std::sqrt(p.recoil_freq / mode_freq);
    return p;
}

LambDickeParams lamb_dicke(const IonSpecies& sp, double laser_wavelength,
                           double mode_freq) {
    return lamb_dicke(sp.mass, laser_wavelength, mode_freq);
}

double ion_spacing(double mass, double charge, double mode_freq_z) {
    require_positive(mass, "mass");
    require_positive(charge, "charge");
    require_positive(mode_freq_z, "mode frequency");
    const double numerator = charge * charge;
    const double denominator = two_pi * constants::vacuum_permittivity * mass *
                               mode_freq_z * mode_freq_z;
    return std::cbrt(numerator / denominator);
}

double ion_spacing(const IonSpecies& sp, double mode_freq_z) {
    return ion_spacing(sp.mass, sp.charge, mode_freq_z);
}

double micromotion_displacement(double stray_field, double mass, double charge,
                                double secular_freq_x) {
    require_positive(mass, "mass");
    require_positive(charge, "charge");
    require_positive(secular_freq_x, "secular frequency");
    if (!std::isfinite(stray_field))
        throw DomainError("stray field must be finite");
    return charge * stray_field / (mass * secular_freq_x * secular_freq_x);
}

double micromotion_displacement(double stray_field, const IonSpecies& sp,
                                double secular_freq_x) {
    return micromotion_displacement(stray_field, sp.mass, sp.charge,
                                    secular_freq_x);
}

MicromotionEstimate micromotion_amplitude_energy(double displacement,
                                                 double secular_freq,
                                                 double rf_freq, double mass) {
    require_positive(secular_freq, "secular frequency");
    require_positive(mass, "mass");
    if (!(rf_freq > secular_freq))
        throw DomainError("trap model invalid: RF frequency must exceed the "
                          "secular frequency");
    const double q = 2.0 * std::sqrt(2.0) * secular_freq / rf_freq;
    MicromotionEstimate est;
    est.amplitude = q * std::abs(displacement) / 2.0;
    // driven motion x(t) = x_u cos(Omega t): <KE> = m x_u^2 Omega^2 / 4
    est.mean_kinetic_energy =
        mass * est.amplitude * est.amplitude * rf_freq * rf_freq / 4.0;
    est.equivalent_temperature = est.mean_kinetic_energy / constants::boltzmann;
    return est;
}

double doppler_control_velocity(double delta_omega, double cooling_wavelength) {
    require_positive(cooling_wavelength, "wavelength");
    const double k = two_pi / cooling_wavelength;
    return delta_omega / (2.0 * k);
}

double rayleigh_range(double waist, double wavelength) {
    require_positive(waist, "waist");
    require_positive(wavelength, "wavelength");
    return constants::pi * waist * waist / wavelength;
}

PulseTiming pulse_timing(double waist, double velocity, double spacing) {
    require_positive(waist, "waist");
    require_positive(velocity, "velocity");
    require_positive(spacing, "spacing");
    PulseTiming t;
    t.formula_pulse_length = waist / (2.0 * velocity);
    t.arrival_period = spacing / velocity;
    t.arrival_rate = 1.0 / t.arrival_period;
    return t;
}

PiPulseRequirement pi_pulse_requirements(const IonSpecies& sp,
                                         double target_pulse) {
    require_positive(target_pulse, "target pulse length");
    const ReferenceRabi& ref = sp.require_reference_rabi();
    PiPulseRequirement req;
    req.rabi_freq = constants::pi / target_pulse;
    // electric quadrupole transition: Rabi frequency linear in intensity
    req.required_intensity = ref.intensity * (req.rabi_freq / ref.rabi_freq);
    return req;
}

double n_ion_gate_time(double single_ion_rabi, double eta, double n_ions) {
    require_positive(single_ion_rabi, "Rabi frequency");
    require_positive(eta, "eta");
    require_positive(n_ions, "ion count");
    const double collective = eta * single_ion_rabi / std::sqrt(n_ions);
    return two_pi / collective;
}

PhononBandBudget phonon_band_budget(double band_width, double n_modes) {
    require_positive(band_width, "band width");
    if (!(n_modes >= 1.0))
        throw DomainError("mode count must be >= 1");
    PhononBandBudget b;
    b.mode_spacing = band_width / n_modes;
    b.min_resolved_sideband_time = 1.0 / b.mode_spacing;
    return b;
}

ApparentTemperatures
apparent_ring_temperatures(const RingConfig& cfg,
                           const ApparentTemperatureReference& ref) {
    const double q = cfg.require_tune();
    const double q_ref = ref.machine.require_tune();
    const double mu = cfg.require_cell_phase_advance();
    const double mu_ref = ref.machine.require_cell_phase_advance();
    require_positive(q, "horizontal tune");
    require_positive(q_ref, "reference horizontal tune");
    require_positive(mu, "cell phase advance");
    require_positive(mu_ref, "reference cell phase advance");
    ApparentTemperatures t;
    t.t_parallel = ref.t_parallel * (q_ref / q) * (q_ref / q);
    t.t_perpendicular = ref.t_perpendicular * (mu / mu_ref) * (mu / mu_ref);
    return t;
}

// --- report -----------------------------------------------------------------

namespace discrepancy {
const char* localization_47nm =
    "published localization length ~47 nm is stated without the mass and "
    "frequency used; direct evaluation of sqrt(2 kB T/(m w^2)) at 20 uK "
    "gives 14.5 nm (Ca-40, 2pi x 1.0 MHz) to 31.3 nm (Ba-138, 2pi x 0.25 "
    "MHz); Ca-40 at w_z ~ 2pi x 0.31 MHz would reproduce 47 nm";
const char* velocity_80mhz =
    "published pairing of 100 m/s with an ~80 MHz beam split conflicts with "
    "the stated condition k v = dw/2: 2pi x 80 MHz at 397 nm gives 15.9 m/s, "
    "and 100 m/s requires a split of 2pi x 503.8 MHz";
const char* pulse_length_4_6ns =
    "published pulse length ~4.6 ns does not follow from the stated "
    "expression w0/(2v) = 1.79 ns at w0 = 10 um, v = 2.8 km/s; downstream "
    "operations therefore take the pulse length as an explicit input";
const char* micromotion_energy_16mev =
    "published micromotion energy 16 meV (190 mK) is ~2 orders above the "
    "lowest-order driven-oscillator value 0.076 meV for the same inputs; "
    "16 meV/kB is also 186 K, not 190 mK (16 ueV would match), so the "
    "published computation path is unknown";
const char* transverse_temp_28mk =
    "published 28 mK for a 7 um transverse size is stated without inputs; "
    "m w^2 dz^2/(2 kB) with Mg-24 at 2pi x 110 kHz gives 33.8 mK (2pi x 100 "
    "kHz would reproduce 28 mK)";
} // namespace discrepancy

const BudgetEntry* BudgetReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name)
            return &e;
    return nullptr;
}

void BudgetReport::validate() const {
    for (const auto& e : entries) {
        if (!std::isfinite(e.value))
            throw ValidationError("budget entry '" + e.name +
                                  "' is not finite");
        if (e.unit.empty())
            throw ValidationError("budget entry '" + e.name +
                                  "' carries no unit");
    }
}

namespace {
std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    return out;
}
} // namespace

std::string BudgetReport::to_json() const {
    validate();
    std::ostringstream os;
    os << "{\n  \"schema_version\": \"1\",\n  \"entries\": {\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        os << "    \"" << json_escape(e.name) << "\": {"
           << "\"value\": " << io::format_double(e.value) << ", "
           << "\"unit\": \"" << json_escape(e.unit) << "\", "
           << "\"formula\": \"" << json_escape(e.formula) << "\", "
           << "\"inputs\": \"" << json_escape(e.inputs) << "\"";
        if (e.discrepancy)
            os << ", \"paper_discrepancy\": \"" << json_escape(*e.discrepancy)
               << "\"";
        os << "}";
        os << (i + 1 < entries.size() ? ",\n" : "\n");
    }
    os << "  }\n}\n";
    return os.str();
}

BudgetReport compute_budget_report(const BudgetInputs& in) {
    BudgetReport rep;
    const IonSpecies& sp = in.species;
    const RingConfig& ring = in.ring;

    auto add = [&](std::string name, double value, std::string unit,
                   std::string formula, std::string inputs,
                   std::optional<std::string> disc = std::nullopt) {
        rep.entries.push_back(BudgetEntry{std::move(name), value,
                                          std::move(unit), std::move(formula),
                                          std::move(inputs), std::move(disc)});
    };

    const double velocity = beam_velocity(ring, sp);
    add("beam_velocity", velocity, "m/s", "sqrt(2 E_kin / m)",
        sp.name + " at " +
            io::format_double(ring.kinetic_energy / constants::electron_volt) +
            " eV");

    const std::optional<double> wz =
        ring.secular_freq_z ? ring.secular_freq_z : sp.typical_axial_freq;
    const std::optional<double> wx =
        ring.secular_freq_x ? ring.secular_freq_x : sp.typical_transverse_freq;

    std::optional<double> spacing;
    if (wz) {
        spacing = ion_spacing(sp, *wz);
        add("ion_spacing", *spacing, "m", "cbrt(e^2/(2 pi eps0 m wz^2))",
            sp.name + ", wz = " + io::format_double(*wz) + " rad/s");

        const double loc =
            localization_length(in.lamb_dicke_temperature, sp.mass, *wz);
        add("localization_length", loc, "m", "sqrt(2 kB T/(m wz^2))",
            sp.name + ", T = " + io::format_double(in.lamb_dicke_temperature) +
                " K",
            std::string(discrepancy::localization_47nm));

        if (sp.qubit_wavelength) {
            const auto ld = lamb_dicke(sp, *sp.qubit_wavelength, *wz);
            add("lamb_dicke_eta", ld.eta, "1", "sqrt(hbar k^2/(2 m wz))",
                sp.name + " qubit transition, wz = " + io::format_double(*wz) +
                    " rad/s");
        }
    }

    if (wx) {
        const double dx = micromotion_displacement(in.stray_field, sp, *wx);
        add("micromotion_displacement", dx, "m", "q E / (m wx^2)",
            sp.name + ", E = " + io::format_double(in.stray_field) +
                " V/m, wx = " + io::format_double(*wx) + " rad/s");
        if (ring.rf_drive_freq) {
            const auto mm = micromotion_amplitude_energy(
                dx, *wx, *ring.rf_drive_freq, sp.mass);
            add("micromotion_amplitude", mm.amplitude, "m",
                "q_mathieu dx / 2, q_mathieu = 2 sqrt(2) wx / Omega_RF",
                "Omega_RF = " + io::format_double(*ring.rf_drive_freq) +
                    " rad/s");
            add("micromotion_mean_kinetic_energy", mm.mean_kinetic_energy, "J",
                "m x_u^2 Omega_RF^2 / 4", "driven-oscillator average",
                std::string(discrepancy::micromotion_energy_16mev));
            add("micromotion_equivalent_temperature",
                mm.equivalent_temperature, "K", "<KE> / kB",
                "driven, not thermal");
        }
    }

    if (sp.cooling_wavelength) {
        const double v80 = doppler_control_velocity(two_pi * 80e6,
                                                    *sp.cooling_wavelength);
        add("doppler_control_velocity_80mhz", v80, "m/s", "v = dw/(2k)",
            sp.name + ", dw = 2pi x 80 MHz",
            std::string(discrepancy::velocity_80mhz));
        const double k = two_pi / *sp.cooling_wavelength;
        add("doppler_split_for_100m_s", 2.0 * k * 100.0, "rad/s", "dw = 2 k v",
            sp.name + ", v = 100 m/s");
        add("rayleigh_range", rayleigh_range(in.waist, *sp.cooling_wavelength),
            "m", "pi w0^2 / lambda",
            "w0 = " + io::format_double(in.waist) + " m, cooling wavelength");
    }

    if (spacing && velocity > 0.0) {
        const auto timing = pulse_timing(in.waist, velocity, *spacing);
        add("formula_pulse_length", timing.formula_pulse_length, "s",
            "w0 / (2 v)", "computed velocity and waist",
            std::string(discrepancy::pulse_length_4_6ns));
        add("ion_arrival_rate", timing.arrival_rate, "Hz", "v / spacing",
            "computed velocity and spacing");
    }

    if (sp.reference_rabi) {
        const auto pi_req = pi_pulse_requirements(sp, in.gate_pulse_length);
        add("pi_pulse_rabi", pi_req.rabi_freq, "rad/s", "pi / tau",
            "tau = " + io::format_double(in.gate_pulse_length) + " s");
        add("pi_pulse_intensity", pi_req.required_intensity, "W/m^2",
            "I_ref (Omega/Omega_ref), linear quadrupole scaling",
            sp.name + " reference point");
    }

    const double switching_rabi = two_pi / in.gate_pulse_length;
    add("switching_rabi", switching_rabi, "rad/s", "2 pi / tau (2pi-pulse)",
        "tau = " + io::format_double(in.gate_pulse_length) + " s");
    add("gate_time_n_ions",
        n_ion_gate_time(switching_rabi, in.gate_eta,
                        static_cast<double>(ring.n_ions)),
        "s", "2 pi sqrt(N) / (eta Omega)",
        "N = " + std::to_string(ring.n_ions) +
            ", eta = " + io::format_double(in.gate_eta));

    const auto band = phonon_band_budget(in.band_width,
                                         static_cast<double>(ring.n_ions));
    add("phonon_mode_spacing", band.mode_spacing, "Hz", "band / N",
        "band = " + io::format_double(in.band_width) +
            " Hz, N = " + std::to_string(ring.n_ions));
    add("min_resolved_sideband_time", band.min_resolved_sideband_time, "s",
        "1 / spacing", "resolved-sideband floor");

    if (ring.horizontal_tune && ring.cell_phase_advance) {
        ApparentTemperatureReference ref{load_machine("PALLAS"), 0.2e-3,
                                         1.0e-3};
        const auto t = apparent_ring_temperatures(ring, ref);
        add("apparent_temperature_parallel", t.t_parallel, "K",
            "T_par,ref (Qx_ref/Qx)^2", "reference machine PALLAS, 0.2 mK");
        add("apparent_temperature_perpendicular", t.t_perpendicular, "K",
            "T_perp,ref (mu/mu_ref)^2", "reference machine PALLAS, 1 mK");
    }

    rep.validate();
    return rep;
}

} // namespace ringqc::budget
