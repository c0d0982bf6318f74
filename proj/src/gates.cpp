#include "ringqc/gates.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "ringqc/budget.hpp"
#include "ringqc/constants.hpp"
#include "ringqc/errors.hpp"
#include "ringqc/io.hpp"

namespace ringqc::gates {

namespace {
constexpr double two_pi = 2.0 * constants::pi;
}

double QubitState::norm() const {
    return std::sqrt(std::norm(ground) + std::norm(excited));
}

double QubitState::excited_population() const { return std::norm(excited); }

QubitState QubitState::normalized() const {
    const double n = norm();
    if (n <= 0.0)
        return in_ground();
    QubitState out = *this;
    out.ground /= n;
    out.excited /= n;
    return out;
}

PulseEnvelope PulseEnvelope::rectangular(double peak_rabi, double duration) {
    if (!(duration > 0.0) || peak_rabi < 0.0)
        throw DomainError("rectangular envelope needs duration > 0, peak >= 0");
    PulseEnvelope e;
    e.shape_ = Shape::rectangular;
    e.peak_ = peak_rabi;
    e.duration_ = duration;
    return e;
}

PulseEnvelope PulseEnvelope::trapezoid(double peak_rabi, double rise,
                                       double flat, double fall) {
    if (rise < 0.0 || fall < 0.0 || flat < 0.0 || peak_rabi < 0.0)
        throw DomainError("trapezoid envelope needs nonnegative segments");
    if (!(rise + flat + fall > 0.0))
        throw DomainError("trapezoid envelope has zero duration");
    PulseEnvelope e;
    e.shape_ = Shape::trapezoid;
    e.peak_ = peak_rabi;
    e.rise_ = rise;
    e.flat_ = flat;
    e.fall_ = fall;
    e.duration_ = rise + flat + fall;
    return e;
}

PulseEnvelope PulseEnvelope::gaussian_transit(double peak_rabi, double waist,
                                              double velocity,
                                              double duration) {
    if (!(waist > 0.0) || !(velocity > 0.0) || !(duration > 0.0) ||
        peak_rabi < 0.0)
        throw DomainError("gaussian transit envelope needs positive "
                          "waist, velocity and duration");
    PulseEnvelope e;
    e.shape_ = Shape::gaussian_transit;
    e.peak_ = peak_rabi;
    e.duration_ = duration;
    e.time_scale_ = waist / velocity;
    return e;
}

double PulseEnvelope::value(double t) const {
    if (t < 0.0 || t > duration_)
        return 0.0;
    switch (shape_) {
    case Shape::rectangular:
        return peak_;
    case Shape::trapezoid:
        if (t < rise_)
            return peak_ * (rise_ > 0.0 ? t / rise_ : 1.0);
        if (t <= rise_ + flat_)
            return peak_;
        return peak_ * (fall_ > 0.0 ? (duration_ - t) / fall_ : 1.0);
    case Shape::gaussian_transit: {
        // intensity profile of the waist crossing; Rabi frequency is linear
        // in intensity for the quadrupole transition
        const double u = (t - 0.5 * duration_) / time_scale_;
        return peak_ * std::exp(-2.0 * u * u);
    }
    }
    return 0.0;
}

double PulseEnvelope::area() const {
    switch (shape_) {
    case Shape::rectangular:
        return peak_ * duration_;
    case Shape::trapezoid:
        return peak_ * (flat_ + 0.5 * (rise_ + fall_));
    case Shape::gaussian_transit: {
        // integral of exp(-2 (t/ts)^2) over the centered window
        const double sigma = 0.5 * time_scale_;
        const double a = 0.5 * duration_;
        return peak_ * sigma * std::sqrt(2.0 * constants::pi) *
               std::erf(a / (sigma * std::sqrt(2.0)));
    }
    }
    return 0.0;
}

std::vector<double> PulseEnvelope::breakpoints() const {
    if (shape_ == Shape::trapezoid)
        return {0.0, rise_, rise_ + flat_, duration_};
    return {0.0, duration_};
}

QubitState rabi_evolve(const QubitState& state, const PulseEnvelope& pulse,
                       double detuning, double phase, int steps_per_segment) {
    if (steps_per_segment < 1)
        steps_per_segment = 1;
    std::complex<double> ce = state.excited;
    std::complex<double> cg = state.ground;
    const std::complex<double> im{0.0, 1.0};
    const double cph = std::cos(phase), sph = std::sin(phase);

    const auto bps = pulse.breakpoints();
    for (std::size_t seg = 0; seg + 1 < bps.size(); ++seg) {
        const double t0 = bps[seg];
        const double t1 = bps[seg + 1];
        if (!(t1 > t0))
            continue;
        const double h = (t1 - t0) / steps_per_segment;
        for (int k = 0; k < steps_per_segment; ++k) {
            const double a = t0 + k * h;
            // Simpson average of the envelope over the substep; exact for
            // the piecewise-linear shapes, O(h^4) otherwise
            const double om = (pulse.value(a) + 4.0 * pulse.value(a + 0.5 * h) +
                               pulse.value(a + h)) /
                              6.0;
            const double oeff = std::sqrt(om * om + detuning * detuning);
            if (oeff * h == 0.0)
                continue;
            const double theta = oeff * h;
            const double c = std::cos(0.5 * theta);
            const double s = std::sin(0.5 * theta);
            const double nx = om * cph / oeff;
            const double ny = om * sph / oeff;
            const double nz = -detuning / oeff;
            // U = cos(theta/2) I - i sin(theta/2) (n . sigma) on (ce, cg)
            const std::complex<double> ue =
                (c - im * s * nz) * ce - im * s * (nx - im * ny) * cg;
            const std::complex<double> ug =
                -im * s * (nx + im * ny) * ce + (c + im * s * nz) * cg;
            ce = ue;
            cg = ug;
        }
    }
    QubitState out;
    out.excited = ce;
    out.ground = cg;
    return out;
}

double Pulse::envelope_at(double t) const {
    const double rel = t - start;
    const double total = rise + flat_duration + fall;
    if (rel < 0.0 || rel > total)
        return 0.0;
    if (rel < rise)
        return peak_rabi * (rise > 0.0 ? rel / rise : 1.0);
    if (rel <= rise + flat_duration)
        return peak_rabi;
    return peak_rabi * (fall > 0.0 ? (total - rel) / fall : 1.0);
}

double PulseTrain::envelope_at(double t) const {
    double v = 0.0;
    for (const auto& p : pulses)
        v += p.envelope_at(t);
    return v;
}

void PulseTrain::validate(const ModulatorLimits& limits) const {
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const auto& p = pulses[i];
        if (p.rise < limits.min_rise_fall - 1e-15 ||
            p.fall < limits.min_rise_fall - 1e-15)
            throw ValidationError("pulse " + std::to_string(i) +
                                  " ramps below the hardware minimum");
        if (i + 1 < pulses.size() &&
            p.end() > pulses[i + 1].start + 1e-15)
            throw ValidationError("pulses " + std::to_string(i) + " and " +
                                  std::to_string(i + 1) +
                                  " overlap after envelope extension");
    }
    if (arrival_period > 0.0 &&
        1.0 / arrival_period > limits.max_repetition_rate + 1e-6)
        throw ValidationError("repetition rate exceeds the modulator cap");
}

void PulseTrain::write_csv(std::ostream& os) const {
    os << "start_ns,rise_ns,flat_ns,fall_ns,peak_rabi_rad_s,phase_rad,target\n";
    for (const auto& p : pulses) {
        os << io::format_double(p.start * 1e9) << ","
           << io::format_double(p.rise * 1e9) << ","
           << io::format_double(p.flat_duration * 1e9) << ","
           << io::format_double(p.fall * 1e9) << ","
           << io::format_double(p.peak_rabi) << ","
           << io::format_double(p.phase) << "," << p.target << "\n";
    }
}

PulseTrain schedule_pulses(double arrival_rate, std::span<const int> targets,
                           double pulse_length, double rise_fall,
                           double pulse_area, const ModulatorLimits& limits) {
    if (!(arrival_rate > 0.0))
        throw DomainError("arrival rate must be > 0");
    if (!(pulse_length > 0.0))
        throw DomainError("pulse length must be > 0");
    if (rise_fall < limits.min_rise_fall)
        throw ValidationError("rise/fall below the hardware minimum of " +
                              io::format_double(limits.min_rise_fall) + " s");
    if (arrival_rate > limits.max_repetition_rate)
        throw ValidationError("arrival rate exceeds the modulator cap");

    const double period = 1.0 / arrival_rate;
    const double extension = pulse_length + 2.0 * rise_fall;
    if (extension > period)
        throw CrosstalkError(
            "pulse of " + io::format_double(pulse_length) + " s plus ramps (" +
                io::format_double(extension) +
                " s) does not fit the arrival period " +
                io::format_double(period) + " s; maximum feasible length is " +
                io::format_double(period - 2.0 * rise_fall) + " s",
            period - 2.0 * rise_fall);

    std::set<int> unique_targets;
    for (int t : targets) {
        if (t < 0)
            throw ValidationError("negative target ion index");
        unique_targets.insert(t);
    }

    PulseTrain train;
    train.arrival_period = period;
    const double lead_in = 0.5 * extension; // first transit; pulse 0 starts at 0
    // area of the trapezoid = peak * (flat + (rise+fall)/2)
    const double peak = pulse_area / (pulse_length + rise_fall);
    for (int t : unique_targets) {
        Pulse p;
        p.target = t;
        p.rise = rise_fall;
        p.fall = rise_fall;
        p.flat_duration = pulse_length;
        p.peak_rabi = peak;
        p.phase = 0.0;
        const double transit = lead_in + t * period;
        p.start = transit - 0.5 * extension;
        train.pulses.push_back(p);
    }
    train.validate(limits);
    return train;
}

double GatePlan::angle_sum() const {
    double s = 0.0;
    for (double a : fragment_angles)
        s += a;
    return s;
}

GatePlan plan_piecewise_gate(double target_angle, double max_angle_per_pass,
                             double revolution_period) {
    if (!(max_angle_per_pass > 0.0))
        throw DomainError("max angle per pass must be > 0");
    if (revolution_period < 0.0)
        throw DomainError("revolution period must be >= 0");
    GatePlan plan;
    plan.target_angle = target_angle;
    plan.max_angle_per_pass = max_angle_per_pass;
    plan.revolution_period = revolution_period;
    if (target_angle == 0.0)
        return plan;
    plan.passes = static_cast<int>(
        std::ceil(std::fabs(target_angle) / max_angle_per_pass - 1e-12));
    if (plan.passes < 1)
        plan.passes = 1;
    plan.fragment_angles.assign(plan.passes,
                                target_angle / plan.passes);
    plan.wall_clock_time = plan.passes * revolution_period;
    return plan;
}

SwitchingBudget switching_budget(const IonSpecies& sp, double pulse_length,
                                 double eta, double n_ions,
                                 std::optional<TransitGeometry> geometry) {
    if (!(pulse_length > 0.0))
        throw DomainError("pulse length must be > 0");
    SwitchingBudget b;
    // 2pi-pulse convention: one full Rabi cycle per transit
    b.single_ion_rabi = two_pi / pulse_length;
    const ReferenceRabi& ref = sp.require_reference_rabi();
    b.intensity = ref.intensity * (b.single_ion_rabi / ref.rabi_freq);
    b.n_ion_gate_time = budget::n_ion_gate_time(b.single_ion_rabi, eta, n_ions);
    if (geometry) {
        const auto timing = budget::pulse_timing(
            geometry->waist, geometry->velocity, geometry->spacing);
        b.modulator_rate = timing.arrival_rate;
    }
    return b;
}

} // namespace ringqc::gates
