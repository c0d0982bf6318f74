#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ringqc/configfile.hpp"

namespace ringqc {

/// A measured Rabi frequency at a stated laser intensity, used as the anchor
/// for linear electric-quadrupole intensity scaling.
struct ReferenceRabi {
    double rabi_freq = 0.0; // rad/s
    double intensity = 0.0; // W/m^2
};

// One ion species, SI units throughout. Mass-only records (the dark
// admixture isotopes and the magnesium beam species) leave the optical
// fields unset. Cooling linewidths are external atomic data with provenance
// noted in the registry source, not values from the machine-comparison
// tables this registry mirrors.
struct IonSpecies {
    std::string name;
    double mass = 0.0;   // kg
    double charge = 0.0; // C, positive integer multiple of e
    bool dark = false;   // admixture isotope, scatters no cooling photons

    std::optional<double> cooling_wavelength;  // m
    std::optional<double> qubit_wavelength;    // m
    std::optional<double> cooling_linewidth;   // rad/s, natural linewidth
    std::optional<double> shelved_lifetime;    // s
    std::optional<ReferenceRabi> reference_rabi;

    // Overridable per-species defaults for trap secular frequencies.
    std::optional<double> typical_transverse_freq; // rad/s
    std::optional<double> typical_axial_freq;      // rad/s

    void validate() const; // throws ValidationError

    const ReferenceRabi& require_reference_rabi() const; // MissingDataError
    double require_cooling_wavelength() const;
    double require_cooling_linewidth() const;
    double require_qubit_wavelength() const;
};

// Storage-ring (or trap) operating point. Fields that are not defined for
// every machine are optional; operations that need one raise a validation
// error naming it.
struct RingConfig {
    std::string name;
    double circumference = 0.0;   // m
    long n_ions = 0;              // N
    double kinetic_energy = 0.0;  // J per ion

    std::optional<double> secular_freq_x; // rad/s
    std::optional<double> secular_freq_y; // rad/s
    std::optional<double> secular_freq_z; // rad/s
    std::optional<double> rf_drive_freq;  // rad/s
    std::optional<double> horizontal_tune;     // Q_x
    std::optional<long> periodicity;           // cells P
    std::optional<double> cell_phase_advance;  // mu_cell, rad

    void validate() const;

    double require_secular_x() const;
    double require_secular_y() const;
    double require_secular_z() const;
    double require_rf_drive() const;
    double require_tune() const;
    double require_cell_phase_advance() const;
};

/// Built-in species registry: Ca-40, Ba-138, Mg-24 (mass only) and the dark
/// isotopes Ca-43 and Ba-136 (mass only). Lookups are pure.
IonSpecies load_species(const std::string& name);
std::vector<std::string> species_names();

/// Built-in machine registry: PALLAS and ASTRID operating points.
RingConfig load_machine(const std::string& name);
std::vector<std::string> machine_names();

/// v = sqrt(2 E_kin / m); zero energy gives zero velocity.
double beam_velocity(const RingConfig& cfg, const IonSpecies& sp);

// Config-file (de)serialization. Field names are the documented external
// interface; write_* emits full-precision values so that a round trip
// reproduces the record bit-exactly.
IonSpecies species_from_section(const ConfigSection& sec);
RingConfig ring_from_section(const ConfigSection& sec);
void write_species(std::ostream& os, const IonSpecies& sp);
void write_ring(std::ostream& os, const RingConfig& cfg);

} // namespace ringqc
