#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ringqc/species.hpp"

// Pulsed laser-qubit interaction for moving ions: AOM pulse trains scheduled
// against ion arrival times, carrier-level two-level Rabi evolution under
// pulse envelopes, and piecewise multi-pass gate planning. Only the carrier
// is time-evolved; sideband structure enters through the eta/sqrt(N) Rabi
// derating in the switching budget.
namespace ringqc::gates {

struct QubitState {
    std::complex<double> ground{1.0, 0.0};
    std::complex<double> excited{0.0, 0.0};

    static QubitState in_ground() { return {}; }
    double norm() const;
    double excited_population() const;
    QubitState normalized() const;
};

// Pulse envelope Omega(t), t in [0, duration]. Areas are exact (closed
// form), which keeps resonant evolution bit-stable against the area theorem.
class PulseEnvelope {
  public:
    enum class Shape { rectangular, trapezoid, gaussian_transit };

    static PulseEnvelope rectangular(double peak_rabi, double duration);
    static PulseEnvelope trapezoid(double peak_rabi, double rise, double flat,
                                   double fall);
    /// Gaussian transit across a beam waist at speed v: the intensity profile
    /// exp(-2 (v t)^2 / w0^2) centered in the window (electric quadrupole:
    /// Rabi frequency is linear in intensity, so Omega inherits the profile).
    static PulseEnvelope gaussian_transit(double peak_rabi, double waist,
                                          double velocity, double duration);

    double value(double t) const; // rad/s
    double area() const;          // integral of Omega dt, exact
    double duration() const { return duration_; }
    Shape shape() const { return shape_; }
    /// Segment boundaries for exact piecewise integration.
    std::vector<double> breakpoints() const;

  private:
    Shape shape_ = Shape::rectangular;
    double peak_ = 0.0;
    double duration_ = 0.0;
    double rise_ = 0.0, flat_ = 0.0, fall_ = 0.0; // trapezoid
    double time_scale_ = 0.0;                     // gaussian: w0/v
};

/// Integrate the rotating-frame two-level Schroedinger equation under the
/// envelope. Piecewise-exact 2x2 propagators (unitary at every step); on
/// resonance with a fixed phase the result depends only on the pulse area.
QubitState rabi_evolve(const QubitState& state, const PulseEnvelope& pulse,
                       double detuning, double phase = 0.0,
                       int steps_per_segment = 512);

struct Pulse {
    double start = 0.0;         // s, beginning of the rise ramp
    double flat_duration = 0.0; // s
    double rise = 0.0;          // s
    double fall = 0.0;          // s
    double peak_rabi = 0.0;     // rad/s
    double phase = 0.0;         // rad
    int target = -1;            // ion index

    double end() const { return start + rise + flat_duration + fall; }
    double envelope_at(double t) const; // trapezoid value, rad/s
};

struct ModulatorLimits {
    double min_rise_fall = 2e-9;       // s, AOM hardware minimum
    double max_repetition_rate = 1e9;  // Hz
};

struct PulseTrain {
    std::vector<Pulse> pulses; // sorted by start
    double arrival_period = 0.0;

    double envelope_at(double t) const;
    /// Non-overlap, ramp minimums, repetition cap. Throws ValidationError.
    void validate(const ModulatorLimits& limits = {}) const;
    /// One row per pulse, ns units at the boundary.
    void write_csv(std::ostream& os) const;
};

/// One pulse per target ion, centered on its transit through the waist.
/// Transit of ion i is at lead_in + i/arrival_rate with lead_in chosen so
/// the first pulse starts at t = 0. Requires
/// pulse_length + 2 rise_fall <= 1/arrival_rate (no-crosstalk condition);
/// violations raise CrosstalkError carrying the maximum feasible length.
PulseTrain schedule_pulses(double arrival_rate, std::span<const int> targets,
                           double pulse_length, double rise_fall,
                           double pulse_area = 3.14159265358979323846,
                           const ModulatorLimits& limits = {});

struct GatePlan {
    double target_angle = 0.0;
    double max_angle_per_pass = 0.0;
    int passes = 0;
    std::vector<double> fragment_angles; // equal fragments summing to target
    double revolution_period = 0.0;
    double wall_clock_time = 0.0; // passes * revolution_period

    double angle_sum() const;
};

/// Split a rotation into equal per-pass fragments, one per revolution.
/// Laser phase is treated as coherent across passes.
GatePlan plan_piecewise_gate(double target_angle, double max_angle_per_pass,
                             double revolution_period);

struct TransitGeometry {
    double waist = 0.0;    // m
    double velocity = 0.0; // m/s
    double spacing = 0.0;  // m
};

struct SwitchingBudget {
    double single_ion_rabi = 0.0;   // rad/s, 2 pi / pulse_length
    double intensity = 0.0;         // W/m^2
    double n_ion_gate_time = 0.0;   // s
    std::optional<double> modulator_rate; // Hz, set when geometry is given
};

/// Switching-rate budget with the 2 pi pulse convention (one full Rabi cycle
/// per transit); intensity scales linearly from the species reference.
/// Distinct from pi_pulse_requirements to keep the factor-2 conventions
/// explicit.
SwitchingBudget switching_budget(const IonSpecies& sp, double pulse_length,
                                 double eta, double n_ions,
                                 std::optional<TransitGeometry> geometry = {});

} // namespace ringqc::gates
