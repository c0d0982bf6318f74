#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ringqc/rng.hpp"
#include "ringqc/species.hpp"
#include "ringqc/vec3.hpp"

// Time-domain stochastic simulation of ions on the ring orbit. Local frame
// per ion: z along the orbit tangent (arc direction), x horizontal
// transverse, y vertical. The arc coordinate is periodic in the ring
// circumference; transverse confinement is harmonic at the secular
// frequencies.
namespace ringqc::dynamics {

struct LaserBeam {
    double wavelength = 0.0; // m
    double detuning = 0.0;   // rad/s, lab frame, relative to the transition
    double saturation = 0.0; // s0 = I/Isat at beam center
    Vec3 direction;          // unit propagation vector
    double waist = 0.0;      // m
    double aspect_ratio = 1.0; // elliptical profile: waist_long/waist_short
    // Arc segment the beam illuminates. footprint_length = 0 means the whole
    // orbit (how long a tangential cooler acts is machine-specific).
    double footprint_center = 0.0; // m
    double footprint_length = 0.0; // m

    void validate() const;
    bool covers(double arc_position, double circumference) const;
};

struct ArcFieldSample {
    double arc_position = 0.0; // m
    Vec3 field;                // V/m
};

// Piecewise-linear periodic description of the DC stray field along the
// orbit plus compensation entries; compensation subtracts linearly.
struct StrayFieldMap {
    double circumference = 0.0;
    std::vector<ArcFieldSample> field;        // sorted control points
    std::vector<ArcFieldSample> compensation; // applied (negative) fields

    Vec3 stray_at(double arc_position) const;
    Vec3 compensation_at(double arc_position) const;
    /// stray + compensation.
    Vec3 total_at(double arc_position) const;
    void sort_samples();
};

struct SimState {
    std::vector<double> arc;      // [0, circumference)
    std::vector<Vec3> velocity;   // m/s, (vx, vy, vz)
    std::vector<double> offset_x; // m
    std::vector<double> offset_y; // m
    double time = 0.0;
    Rng rng;

    // Fluctuation bookkeeping.
    std::uint64_t recoil_events = 0;
    double recoil_energy = 0.0; // J, cumulative isotropic-kick energy

    int n_ions() const { return static_cast<int>(arc.size()); }
};

struct Snapshot {
    double time = 0.0;
    std::vector<double> arc;
    std::vector<Vec3> velocity;
    std::vector<double> offset_x;
    std::vector<double> offset_y;
};

struct SimOptions {
    bool recoil_noise = true;
    bool rf_micromotion = false;
    bool coulomb = false;
    int coulomb_neighbors = 8; // truncation above coulomb_full_cap ions
    std::vector<std::uint8_t> dark; // per-ion: dark ions scatter nothing
};

inline constexpr int coulomb_full_cap = 512;

/// Two-level Lorentzian scattering force (standard model; the arrangement
/// sets the mechanism, the force law is textbook):
///   F = hbar k (Gamma/2) s0 / (1 + s0 + (2 d_eff/Gamma)^2) * direction,
///   d_eff = detuning - k (direction . velocity).
Vec3 scattering_force(const LaserBeam& beam, const Vec3& velocity,
                      double linewidth, double transition_wavelength);

class Simulator {
  public:
    Simulator(IonSpecies species, RingConfig ring, std::vector<LaserBeam> beams,
              StrayFieldMap stray, SimOptions options = {});

    /// Ions equally spaced along the arc, all at the ring design velocity,
    /// zero transverse offsets.
    SimState initial_state(int n_ions, std::uint64_t seed) const;

    /// One velocity-Verlet step with recoil kicks applied after each velocity
    /// half-step. Throws StepSizeError when dt violates the resolution guard
    /// dt < 0.05/max(Gamma, wx, wy, Omega_RF).
    void step(SimState& state, double dt) const;

    /// Advance for `duration`, recording a snapshot every `decimate` steps
    /// (first and last step always recorded).
    std::vector<Snapshot> run(SimState& state, double duration, double dt,
                              int decimate = 1) const;

    /// Idealized sub-Doppler stage: resample all velocities from a thermal
    /// distribution at the target temperature (the mechanism itself is out of
    /// scope; only the resulting temperature matters downstream).
    void set_temperature(SimState& state, double temperature) const;

    double max_step(double dt_guard_fraction = 0.05) const;
    const IonSpecies& species() const { return species_; }
    const RingConfig& ring() const { return ring_; }
    const std::vector<LaserBeam>& beams() const { return beams_; }

  private:
    Vec3 deterministic_force(const SimState& state, int ion, double time) const;
    void apply_recoil(SimState& state, int ion, double dt) const;

    IonSpecies species_;
    RingConfig ring_;
    std::vector<LaserBeam> beams_;
    StrayFieldMap stray_;
    SimOptions options_;
};

struct TemperatureEstimate {
    double t_parallel = 0.0;   // K, kB T = m <dvz^2> / 2 (source convention;
                               // half the 1D equipartition value)
    double t_transverse = 0.0; // K, from transverse kinetic equipartition
    double mean_velocity = 0.0; // m/s, mean longitudinal velocity
};

/// Estimate from recorded history, discarding the first `discard` snapshots
/// as transient. The caller is responsible for covering >= 10 cooling time
/// constants after the transient. Throws InsufficientHistoryError when fewer
/// than two snapshots remain.
TemperatureEstimate estimate_temperatures(std::span<const Snapshot> history,
                                          double mass, std::size_t discard);

/// Add compensation entries canceling the sampled stray field at each sensor
/// down to |residual| = target_residual.
StrayFieldMap compensate_stray(const StrayFieldMap& stray,
                               std::span<const double> sensor_positions,
                               double target_residual);

/// Worst residual micromotion displacement along the orbit after
/// compensation, scanned on a uniform grid.
double max_residual_displacement(const StrayFieldMap& compensated,
                                 const IonSpecies& sp, double secular_freq_x,
                                 int scan_points = 4096);

} // namespace ringqc::dynamics
