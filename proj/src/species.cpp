#include "ringqc/species.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "ringqc/constants.hpp"
#include "ringqc/errors.hpp"
#include "ringqc/io.hpp"

namespace ringqc {

namespace {

constexpr double two_pi = 2.0 * constants::pi;

// Built-in species. Masses are mass number times the atomic mass unit.
// Wavelengths, shelved lifetimes and reference Rabi points follow the
// machine-comparison tables; the cooling linewidths are external atomic
// data (P1/2 natural linewidths from the standard ion-trap literature),
// NOT values those tables provide.
std::map<std::string, IonSpecies> build_species_registry() {
    using constants::atomic_mass_unit;
    using constants::elementary_charge;

    std::map<std::string, IonSpecies> reg;

    IonSpecies ca;
    ca.name = "Ca-40";
    ca.mass = 40.0 * atomic_mass_unit;
    ca.charge = elementary_charge;
    ca.cooling_wavelength = 397e-9;
    ca.qubit_wavelength = 792e-9;
    ca.cooling_linewidth = two_pi * 20.7e6; // external data, not from tables
    ca.shelved_lifetime = 1.0;
    ca.reference_rabi = ReferenceRabi{two_pi * 1000e3, 5000e6}; // 5000 W/mm^2
    ca.typical_transverse_freq = two_pi * 2.5e6;
    ca.typical_axial_freq = two_pi * 1.0e6;
    reg[ca.name] = ca;

    IonSpecies ba;
    ba.name = "Ba-138";
    ba.mass = 138.0 * atomic_mass_unit;
    ba.charge = elementary_charge;
    ba.cooling_wavelength = 493e-9;
    ba.qubit_wavelength = 1762e-9;
    ba.cooling_linewidth = two_pi * 20.1e6; // external data, not from tables
    ba.shelved_lifetime = 32.0;
    ba.reference_rabi = ReferenceRabi{two_pi * 43e3, 0.25e6}; // 250 mW/mm^2
    ba.typical_transverse_freq = two_pi * 1.0e6;
    ba.typical_axial_freq = two_pi * 0.25e6;
    reg[ba.name] = ba;

    IonSpecies mg; // beam species of the RFQ-ring experiments; mass only
    mg.name = "Mg-24";
    mg.mass = 24.0 * atomic_mass_unit;
    mg.charge = elementary_charge;
    reg[mg.name] = mg;

    IonSpecies ca43; // dark admixture isotope, mass-only record
    ca43.name = "Ca-43";
    ca43.mass = 43.0 * atomic_mass_unit;
    ca43.charge = elementary_charge;
    ca43.dark = true;
    reg[ca43.name] = ca43;

    IonSpecies ba136; // dark admixture isotope, mass-only record
    ba136.name = "Ba-136";
    ba136.mass = 136.0 * atomic_mass_unit;
    ba136.charge = elementary_charge;
    ba136.dark = true;
    reg[ba136.name] = ba136;

    return reg;
}

const std::map<std::string, IonSpecies>& species_registry() {
    static const std::map<std::string, IonSpecies> reg =
        build_species_registry();
    return reg;
}

std::map<std::string, RingConfig> build_machine_registry() {
    std::map<std::string, RingConfig> reg;

    RingConfig pallas;
    pallas.name = "PALLAS";
    pallas.circumference = 0.36; // m
    pallas.n_ions = 10000;
    pallas.kinetic_energy = 1.0 * constants::electron_volt;
    pallas.secular_freq_x = two_pi * 110e3;
    pallas.secular_freq_y = two_pi * 110e3;
    pallas.secular_freq_z = two_pi * 180e3;
    // RF frequency assumed in the published micromotion estimates.
    pallas.rf_drive_freq = two_pi * 10e6;
    pallas.horizontal_tune = 50.0;
    pallas.periodicity = 800;
    pallas.cell_phase_advance = two_pi * 50.0 / 800.0;
    reg[pallas.name] = pallas;

    RingConfig astrid;
    astrid.name = "ASTRID";
    astrid.circumference = 40.0; // m
    astrid.n_ions = 280000;
    astrid.kinetic_energy = 1e5 * constants::electron_volt;
    astrid.secular_freq_x = two_pi * 50e3;
    astrid.secular_freq_y = two_pi * 50e3;
    // no longitudinal secular frequency or RF drive in the comparison table
    astrid.horizontal_tune = 2.3;
    astrid.periodicity = 4;
    astrid.cell_phase_advance = two_pi * 2.3 / 4.0;
    reg[astrid.name] = astrid;

    return reg;
}

const std::map<std::string, RingConfig>& machine_registry() {
    static const std::map<std::string, RingConfig> reg =
        build_machine_registry();
    return reg;
}

void check_wavelength(const std::optional<double>& wl, const char* what) {
    if (wl && (*wl <= 100e-9 || *wl >= 10e-6))
        throw ValidationError(std::string(what) +
                              " outside (100 nm, 10 um): " +
                              io::format_double(*wl) + " m");
}

} // namespace

void IonSpecies::validate() const {
    if (mass <= 0.0)
        throw ValidationError("species '" + name + "': mass must be > 0");
    const double n = charge / constants::elementary_charge;
    if (charge <= 0.0 || std::abs(n - std::round(n)) > 1e-6)
        throw ValidationError("species '" + name +
                              "': charge must be a positive integer "
                              "multiple of e");
    check_wavelength(cooling_wavelength, "cooling wavelength");
    check_wavelength(qubit_wavelength, "qubit wavelength");
    if (cooling_linewidth && *cooling_linewidth <= 0.0)
        throw ValidationError("species '" + name + "': linewidth must be > 0");
    if (shelved_lifetime && *shelved_lifetime <= 0.0)
        throw ValidationError("species '" + name + "': lifetime must be > 0");
    if (reference_rabi && reference_rabi->intensity <= 0.0)
        throw ValidationError("species '" + name +
                              "': reference intensity must be > 0");
}

const ReferenceRabi& IonSpecies::require_reference_rabi() const {
    if (!reference_rabi)
        throw MissingDataError("species '" + name +
                               "' has no reference Rabi point");
    return *reference_rabi;
}

double IonSpecies::require_cooling_wavelength() const {
    if (!cooling_wavelength)
        throw MissingDataError("species '" + name +
                               "' has no cooling wavelength");
    return *cooling_wavelength;
}

double IonSpecies::require_cooling_linewidth() const {
    if (!cooling_linewidth)
        throw MissingDataError("species '" + name +
                               "' has no cooling linewidth");
    return *cooling_linewidth;
}

double IonSpecies::require_qubit_wavelength() const {
    if (!qubit_wavelength)
        throw MissingDataError("species '" + name +
                               "' has no qubit wavelength");
    return *qubit_wavelength;
}

void RingConfig::validate() const {
    if (circumference <= 0.0)
        throw ValidationError("machine '" + name +
                              "': circumference must be > 0");
    if (n_ions < 1)
        throw ValidationError("machine '" + name + "': n_ions must be >= 1");
    if (kinetic_energy < 0.0)
        throw ValidationError("machine '" + name +
                              "': kinetic energy must be >= 0");
    auto positive = [&](const std::optional<double>& v, const char* what) {
        if (v && *v <= 0.0)
            throw ValidationError("machine '" + name + "': " + what +
                                  " must be > 0");
    };
    positive(secular_freq_x, "secular_freq_x");
    positive(secular_freq_y, "secular_freq_y");
    positive(secular_freq_z, "secular_freq_z");
    positive(rf_drive_freq, "rf_drive_freq");
    positive(horizontal_tune, "horizontal_tune");
    positive(cell_phase_advance, "cell_phase_advance");
    if (periodicity && *periodicity < 1)
        throw ValidationError("machine '" + name +
                              "': periodicity must be >= 1");
}

namespace {
double require_field(const std::optional<double>& v, const std::string& name,
                     const char* what) {
    if (!v)
        throw ValidationError("machine '" + name + "' does not define " +
                              what);
    return *v;
}
} // namespace

double RingConfig::require_secular_x() const {
    return require_field(secular_freq_x, name, "secular_freq_x");
}
double RingConfig::require_secular_y() const {
    return require_field(secular_freq_y, name, "secular_freq_y");
}
double RingConfig::require_secular_z() const {
    return require_field(secular_freq_z, name, "secular_freq_z");
}
double RingConfig::require_rf_drive() const {
    return require_field(rf_drive_freq, name, "rf_drive_freq");
}
double RingConfig::require_tune() const {
    return require_field(horizontal_tune, name, "horizontal_tune");
}
double RingConfig::require_cell_phase_advance() const {
    return require_field(cell_phase_advance, name, "cell_phase_advance");
}

IonSpecies load_species(const std::string& name) {
    const auto& reg = species_registry();
    const auto it = reg.find(name);
    if (it == reg.end())
        throw UnknownSpeciesError(name);
    return it->second;
}

std::vector<std::string> species_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : species_registry())
        names.push_back(k);
    return names;
}

RingConfig load_machine(const std::string& name) {
    const auto& reg = machine_registry();
    const auto it = reg.find(name);
    if (it == reg.end())
        throw UnknownMachineError(name);
    return it->second;
}

std::vector<std::string> machine_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : machine_registry())
        names.push_back(k);
    return names;
}

double beam_velocity(const RingConfig& cfg, const IonSpecies& sp) {
    if (cfg.kinetic_energy < 0.0)
        throw DomainError("kinetic energy must be >= 0");
    if (sp.mass <= 0.0)
        throw DomainError("mass must be > 0");
    const double v = std::sqrt(2.0 * cfg.kinetic_energy / sp.mass);
    if (!std::isfinite(v) || v >= 1e6)
        throw ValidationError("beam velocity " + io::format_double(v) +
                              " m/s outside the nonrelativistic regime");
    return v;
}

// --- config-file interface ------------------------------------------------
//
// Reading accepts either exact SI keys (used by the writers, full precision,
// bit-exact round trip) or the boundary-unit keys meant for hand-written
// files (amu, nm, 2pi MHz, eV, ...).

namespace {

std::optional<double> dual_key(const ConfigSection& sec, const char* si_key,
                               const char* human_key, double scale) {
    if (auto v = sec.maybe_double(si_key))
        return v;
    if (auto v = sec.maybe_double(human_key))
        return *v * scale;
    return std::nullopt;
}

} // namespace

IonSpecies species_from_section(const ConfigSection& sec) {
    IonSpecies sp;
    if (sec.has("use")) {
        sp = load_species(sec.get_string("use"));
    }
    sp.name = sec.get_string_or("name", sp.name);

    if (auto m = dual_key(sec, "mass_kg", "mass_amu",
                          constants::atomic_mass_unit))
        sp.mass = *m;
    if (auto q = dual_key(sec, "charge_c", "charge_e",
                          constants::elementary_charge))
        sp.charge = *q;
    else if (sp.charge == 0.0)
        sp.charge = constants::elementary_charge;
    if (sec.has("dark"))
        sp.dark = sec.get_bool("dark");

    if (auto v = dual_key(sec, "cooling_wavelength_m", "cooling_wavelength_nm",
                          1e-9))
        sp.cooling_wavelength = v;
    if (auto v =
            dual_key(sec, "qubit_wavelength_m", "qubit_wavelength_nm", 1e-9))
        sp.qubit_wavelength = v;
    if (auto v = dual_key(sec, "cooling_linewidth_rad_s",
                          "cooling_linewidth_2pi_mhz", two_pi * 1e6))
        sp.cooling_linewidth = v;
    if (auto v = sec.maybe_double("shelved_lifetime_s"))
        sp.shelved_lifetime = v;
    if (auto rabi = dual_key(sec, "reference_rabi_rad_s",
                             "reference_rabi_2pi_khz", two_pi * 1e3)) {
        const auto intensity = dual_key(sec, "reference_intensity_w_m2",
                                        "reference_intensity_w_mm2", 1e6);
        if (!intensity)
            throw ConfigError("[" + sec.name +
                              "]: reference Rabi given without "
                              "reference intensity");
        sp.reference_rabi = ReferenceRabi{*rabi, *intensity};
    }
    if (auto v = dual_key(sec, "typical_transverse_freq_rad_s",
                          "typical_transverse_freq_2pi_mhz", two_pi * 1e6))
        sp.typical_transverse_freq = v;
    if (auto v = dual_key(sec, "typical_axial_freq_rad_s",
                          "typical_axial_freq_2pi_mhz", two_pi * 1e6))
        sp.typical_axial_freq = v;

    sp.validate();
    return sp;
}

RingConfig ring_from_section(const ConfigSection& sec) {
    RingConfig cfg;
    if (sec.has("use"))
        cfg = load_machine(sec.get_string("use"));
    cfg.name = sec.get_string_or("name", cfg.name);

    if (auto v = sec.maybe_double("circumference_m"))
        cfg.circumference = *v;
    if (auto v = sec.maybe_long("n_ions"))
        cfg.n_ions = *v;
    if (auto v = dual_key(sec, "kinetic_energy_j", "kinetic_energy_ev",
                          constants::electron_volt))
        cfg.kinetic_energy = *v;

    if (auto v = dual_key(sec, "secular_freq_x_rad_s", "secular_freq_x_2pi_khz",
                          two_pi * 1e3))
        cfg.secular_freq_x = v;
    if (auto v = dual_key(sec, "secular_freq_y_rad_s", "secular_freq_y_2pi_khz",
                          two_pi * 1e3))
        cfg.secular_freq_y = v;
    if (auto v = dual_key(sec, "secular_freq_z_rad_s", "secular_freq_z_2pi_khz",
                          two_pi * 1e3))
        cfg.secular_freq_z = v;
    if (auto v = dual_key(sec, "rf_drive_freq_rad_s", "rf_drive_freq_2pi_mhz",
                          two_pi * 1e6))
        cfg.rf_drive_freq = v;
    if (auto v = sec.maybe_double("horizontal_tune"))
        cfg.horizontal_tune = v;
    if (auto v = sec.maybe_long("periodicity"))
        cfg.periodicity = v;
    if (auto v = sec.maybe_double("cell_phase_advance_rad"))
        cfg.cell_phase_advance = v;
    else if (!cfg.cell_phase_advance && cfg.horizontal_tune && cfg.periodicity)
        cfg.cell_phase_advance = two_pi * *cfg.horizontal_tune /
                                 static_cast<double>(*cfg.periodicity);

    cfg.validate();
    return cfg;
}

void write_species(std::ostream& os, const IonSpecies& sp) {
    using io::format_double;
    os << "[species]\n";
    os << "name = " << sp.name << "\n";
    os << "mass_kg = " << format_double(sp.mass) << "\n";
    os << "charge_c = " << format_double(sp.charge) << "\n";
    os << "dark = " << (sp.dark ? "true" : "false") << "\n";
    if (sp.cooling_wavelength)
        os << "cooling_wavelength_m = " << format_double(*sp.cooling_wavelength)
           << "\n";
    if (sp.qubit_wavelength)
        os << "qubit_wavelength_m = " << format_double(*sp.qubit_wavelength)
           << "\n";
    if (sp.cooling_linewidth)
        os << "cooling_linewidth_rad_s = "
           << format_double(*sp.cooling_linewidth) << "\n";
    if (sp.shelved_lifetime)
        os << "shelved_lifetime_s = " << format_double(*sp.shelved_lifetime)
           << "\n";
    if (sp.reference_rabi) {
        os << "reference_rabi_rad_s = "
           << format_double(sp.reference_rabi->rabi_freq) << "\n";
        os << "reference_intensity_w_m2 = "
           << format_double(sp.reference_rabi->intensity) << "\n";
    }
    if (sp.typical_transverse_freq)
        os << "typical_transverse_freq_rad_s = "
           << format_double(*sp.typical_transverse_freq) << "\n";
    if (sp.typical_axial_freq)
        os << "typical_axial_freq_rad_s = "
           << format_double(*sp.typical_axial_freq) << "\n";
}

void write_ring(std::ostream& os, const RingConfig& cfg) {
    using io::format_double;
    os << "[ring]\n";
    os << "name = " << cfg.name << "\n";
    os << "circumference_m = " << format_double(cfg.circumference) << "\n";
    os << "n_ions = " << cfg.n_ions << "\n";
    os << "kinetic_energy_j = " << format_double(cfg.kinetic_energy) << "\n";
    auto emit = [&](const char* key, const std::optional<double>& v) {
        if (v)
            os << key << " = " << format_double(*v) << "\n";
    };
    emit("secular_freq_x_rad_s", cfg.secular_freq_x);
    emit("secular_freq_y_rad_s", cfg.secular_freq_y);
    emit("secular_freq_z_rad_s", cfg.secular_freq_z);
    emit("rf_drive_freq_rad_s", cfg.rf_drive_freq);
    emit("horizontal_tune", cfg.horizontal_tune);
    if (cfg.periodicity)
        os << "periodicity = " << *cfg.periodicity << "\n";
    emit("cell_phase_advance_rad", cfg.cell_phase_advance);
}

} // namespace ringqc
