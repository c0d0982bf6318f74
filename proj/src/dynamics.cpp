#include "ringqc/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "ringqc/budget.hpp"
#include "ringqc/constants.hpp"
#include "ringqc/errors.hpp"
#include "ringqc/io.hpp"

namespace ringqc::dynamics {

namespace {

constexpr double two_pi = 2.0 * constants::pi;

double wrap_arc(double s, double circumference) {
    // conditional subtraction keeps the reduction exact for |v dt| < C
    while (s >= circumference)
        s -= circumference;
    while (s < 0.0)
        s += circumference;
    return s;
}

double periodic_distance(double a, double b, double circumference) {
    double d = std::fabs(a - b);
    if (d > 0.5 * circumference)
        d = circumference - d;
    return d;
}

// Periodic piecewise-linear interpolation through sorted control points.
Vec3 interpolate(const std::vector<ArcFieldSample>& samples, double s,
                 double circumference) {
    if (samples.empty())
        return {};
    if (samples.size() == 1)
        return samples.front().field;
    s = wrap_arc(s, circumference);
    // find the first sample with arc_position > s
    auto hi = std::upper_bound(samples.begin(), samples.end(), s,
                               [](double value, const ArcFieldSample& sample) {
                                   return value < sample.arc_position;
                               });
    double s0, s1;
    Vec3 f0, f1;
    if (hi == samples.begin() || hi == samples.end()) {
        // wrap segment between the last and the first sample
        s0 = samples.back().arc_position;
        s1 = samples.front().arc_position + circumference;
        f0 = samples.back().field;
        f1 = samples.front().field;
        if (s < s0)
            s += circumference;
    } else {
        s0 = std::prev(hi)->arc_position;
        s1 = hi->arc_position;
        f0 = std::prev(hi)->field;
        f1 = hi->field;
    }
    const double span = s1 - s0;
    if (span <= 0.0)
        return f0;
    const double t = (s - s0) / span;
    return f0 * (1.0 - t) + f1 * t;
}

} // namespace

void LaserBeam::validate() const {
    if (!(wavelength > 0.0))
        throw ValidationError("beam wavelength must be > 0");
    if (saturation < 0.0)
        throw ValidationError("beam saturation must be >= 0");
    if (!(waist > 0.0))
        throw ValidationError("beam waist must be > 0");
    if (aspect_ratio < 1.0)
        throw ValidationError("beam aspect ratio must be >= 1");
    if (std::fabs(direction.norm() - 1.0) > 1e-9)
        throw ValidationError("beam direction must be a unit vector");
    if (footprint_length < 0.0)
        throw ValidationError("beam footprint length must be >= 0");
}

bool LaserBeam::covers(double arc_position, double circumference) const {
    if (footprint_length <= 0.0)
        return true;
    return periodic_distance(arc_position, footprint_center, circumference) <=
           0.5 * footprint_length;
}

void StrayFieldMap::sort_samples() {
    auto by_arc = [](const ArcFieldSample& a, const ArcFieldSample& b) {
        return a.arc_position < b.arc_position;
    };
    std::sort(field.begin(), field.end(), by_arc);
    std::sort(compensation.begin(), compensation.end(), by_arc);
}

Vec3 StrayFieldMap::stray_at(double arc_position) const {
    return interpolate(field, arc_position, circumference);
}

Vec3 StrayFieldMap::compensation_at(double arc_position) const {
    return interpolate(compensation, arc_position, circumference);
}

Vec3 StrayFieldMap::total_at(double arc_position) const {
    return stray_at(arc_position) + compensation_at(arc_position);
}

Vec3 scattering_force(const LaserBeam& beam, const Vec3& velocity,
                      double linewidth, double transition_wavelength) {
    if (!(linewidth > 0.0))
        throw DomainError("linewidth must be > 0");
    const double k = two_pi / transition_wavelength;
    const double doppler = k * beam.direction.dot(velocity);
    const double detuning_eff = beam.detuning - doppler;
    const double s0 = beam.saturation;
    const double x = 2.0 * detuning_eff / linewidth;
    const double rate =
        0.5 * linewidth * s0 / (1.0 + s0 + x * x); // photons/s
    const double f = constants::reduced_planck * k * rate;
    return beam.direction * f;
}

Simulator::Simulator(IonSpecies species, RingConfig ring,
                     std::vector<LaserBeam> beams, StrayFieldMap stray,
                     SimOptions options)
    : species_(std::move(species)), ring_(std::move(ring)),
      beams_(std::move(beams)), stray_(std::move(stray)),
      options_(std::move(options)) {
    species_.validate();
    ring_.validate();
    for (const auto& b : beams_)
        b.validate();
    if (!beams_.empty()) {
        species_.require_cooling_wavelength();
        species_.require_cooling_linewidth();
    }
    ring_.require_secular_x();
    ring_.require_secular_y();
    if (options_.rf_micromotion)
        ring_.require_rf_drive();
    stray_.circumference = ring_.circumference;
    stray_.sort_samples();
}

double Simulator::max_step(double dt_guard_fraction) const {
    double scale = std::max(ring_.require_secular_x(), ring_.require_secular_y());
    if (!beams_.empty())
        scale = std::max(scale, species_.require_cooling_linewidth());
    if (options_.rf_micromotion)
        scale = std::max(scale, ring_.require_rf_drive());
    return dt_guard_fraction / scale;
}

SimState Simulator::initial_state(int n_ions, std::uint64_t seed) const {
    if (n_ions < 1)
        throw ValidationError("n_ions must be >= 1");
    SimState state;
    state.rng = Rng(seed);
    state.arc.resize(n_ions);
    state.velocity.assign(n_ions, Vec3{});
    state.offset_x.assign(n_ions, 0.0);
    state.offset_y.assign(n_ions, 0.0);
    const double v0 = beam_velocity(ring_, species_);
    for (int i = 0; i < n_ions; ++i) {
        state.arc[i] =
            ring_.circumference * static_cast<double>(i) / n_ions;
        state.velocity[i] = Vec3{0.0, 0.0, v0};
    }
    return state;
}

Vec3 Simulator::deterministic_force(const SimState& state, int ion,
                                    double time) const {
    const double m = species_.mass;
    const double wx = *ring_.secular_freq_x;
    const double wy = *ring_.secular_freq_y;
    const double x = state.offset_x[ion];
    const double y = state.offset_y[ion];

    Vec3 f{-m * wx * wx * x, -m * wy * wy * y, 0.0};

    // stray DC field
    const Vec3 e = stray_.total_at(state.arc[ion]);
    f += e * species_.charge;

    // explicit micromotion drive at the RF frequency, proportional to the
    // displacement from the RF null (consistent with the q = 2 sqrt(2) w/W
    // amplitude model)
    if (options_.rf_micromotion) {
        const double w_rf = *ring_.rf_drive_freq;
        const double c = std::cos(w_rf * time);
        const double qx = 2.0 * std::sqrt(2.0) * wx / w_rf;
        const double qy = 2.0 * std::sqrt(2.0) * wy / w_rf;
        f.x -= 0.5 * m * qx * w_rf * w_rf * c * x;
        f.y -= 0.5 * m * qy * w_rf * w_rf * c * y;
    }

    const bool dark = ion < static_cast<int>(options_.dark.size()) &&
                      options_.dark[ion] != 0;
    if (!beams_.empty() && !dark) {
        const double gamma = *species_.cooling_linewidth;
        const double lambda = *species_.cooling_wavelength;
        for (const auto& beam : beams_) {
            if (!beam.covers(state.arc[ion], ring_.circumference))
                continue;
            LaserBeam local = beam;
            // transverse Gaussian profile; the along-orbit extent is the
            // footprint
            const Vec3 offset{x, y, 0.0};
            const Vec3 perp =
                offset - beam.direction * beam.direction.dot(offset);
            const double w = beam.waist;
            local.saturation =
                beam.saturation *
                std::exp(-2.0 * perp.squared_norm() / (w * w));
            f += scattering_force(local, state.velocity[ion], gamma, lambda);
        }
    }

    // optional inter-ion Coulomb force; full pairwise for small crystals,
    // nearest neighbors by chain index above the cap
    if (options_.coulomb && state.n_ions() > 1) {
        const int n = state.n_ions();
        const double keq2 =
            constants::coulomb_constant * species_.charge * species_.charge;
        auto add_pair = [&](int j) {
            double dz = state.arc[ion] - state.arc[j];
            if (dz > 0.5 * ring_.circumference)
                dz -= ring_.circumference;
            if (dz < -0.5 * ring_.circumference)
                dz += ring_.circumference;
            const Vec3 dr{state.offset_x[ion] - state.offset_x[j],
                          state.offset_y[ion] - state.offset_y[j], dz};
            const double r2 = dr.squared_norm();
            if (r2 <= 0.0)
                return;
            f += dr * (keq2 / (r2 * std::sqrt(r2)));
        };
        if (n <= coulomb_full_cap) {
            for (int j = 0; j < n; ++j)
                if (j != ion)
                    add_pair(j);
        } else {
            const int span = std::min(options_.coulomb_neighbors, (n - 1) / 2);
            for (int d = 1; d <= span; ++d) {
                add_pair((ion + d) % n);
                add_pair(((ion - d) % n + n) % n);
            }
        }
    }
    return f;
}

void Simulator::apply_recoil(SimState& state, int ion, double dt) const {
    if (!options_.recoil_noise || beams_.empty())
        return;
    const bool dark = ion < static_cast<int>(options_.dark.size()) &&
                      options_.dark[ion] != 0;
    if (dark)
        return;
    const double gamma = *species_.cooling_linewidth;
    const double lambda = *species_.cooling_wavelength;
    const double k = two_pi / lambda;
    const double hbar_k = constants::reduced_planck * k;
    const double m = species_.mass;

    for (const auto& beam : beams_) {
        if (!beam.covers(state.arc[ion], ring_.circumference))
            continue;
        const Vec3 offset{state.offset_x[ion], state.offset_y[ion], 0.0};
        const Vec3 perp = offset - beam.direction * beam.direction.dot(offset);
        const double s0 =
            beam.saturation *
            std::exp(-2.0 * perp.squared_norm() / (beam.waist * beam.waist));
        if (s0 <= 0.0)
            continue;
        const double doppler = k * beam.direction.dot(state.velocity[ion]);
        const double x = 2.0 * (beam.detuning - doppler) / gamma;
        const double rate = 0.5 * gamma * s0 / (1.0 + s0 + x * x);
        const double mean = rate * dt;
        const std::uint64_t events = state.rng.poisson(mean);

        // photon shot noise: the mean absorption force is applied as part of
        // the deterministic force, so the absorption kick enters as the
        // zero-mean Poisson fluctuation; each event also recoils isotropically
        // by one photon momentum from the spontaneous emission
        Vec3 dp = beam.direction *
                  (hbar_k * (static_cast<double>(events) - mean));
        for (std::uint64_t e = 0; e < events; ++e) {
            const auto u = state.rng.unit_vector();
            dp += Vec3{u[0], u[1], u[2]} * hbar_k;
        }
        state.velocity[ion] += dp / m;
        state.recoil_events += events;
        state.recoil_energy += static_cast<double>(events) * hbar_k * hbar_k /
                               (2.0 * m);
    }
}

void Simulator::step(SimState& state, double dt) const {
    if (!(dt > 0.0))
        throw StepSizeError("dt must be > 0");
    const double guard = max_step();
    if (dt >= guard)
        throw StepSizeError("dt = " + io::format_double(dt) +
                            " s violates the resolution guard dt < " +
                            io::format_double(guard) + " s");
    const int n = state.n_ions();
    const double m = species_.mass;
    const double half = 0.5 * dt;

    for (int i = 0; i < n; ++i) {
        const Vec3 f = deterministic_force(state, i, state.time);
        state.velocity[i] += f * (half / m);
        apply_recoil(state, i, half);
    }
    for (int i = 0; i < n; ++i) {
        state.arc[i] = wrap_arc(state.arc[i] + state.velocity[i].z * dt,
                                ring_.circumference);
        state.offset_x[i] += state.velocity[i].x * dt;
        state.offset_y[i] += state.velocity[i].y * dt;
    }
    const double t_end = state.time + dt;
    for (int i = 0; i < n; ++i) {
        const Vec3 f = deterministic_force(state, i, t_end);
        state.velocity[i] += f * (half / m);
        apply_recoil(state, i, half);
    }
    state.time = t_end;
}

std::vector<Snapshot> Simulator::run(SimState& state, double duration,
                                     double dt, int decimate) const {
    if (decimate < 1)
        decimate = 1;
    const auto total_steps = static_cast<long>(std::ceil(duration / dt));
    std::vector<Snapshot> history;
    history.reserve(static_cast<std::size_t>(total_steps / decimate) + 2);

    auto record = [&] {
        history.push_back(Snapshot{state.time, state.arc, state.velocity,
                                   state.offset_x, state.offset_y});
    };
    record();
    for (long s = 0; s < total_steps; ++s) {
        step(state, dt);
        if ((s + 1) % decimate == 0 || s + 1 == total_steps)
            record();
    }
    return history;
}

void Simulator::set_temperature(SimState& state, double temperature) const {
    if (temperature < 0.0)
        throw DomainError("temperature must be >= 0");
    const double sigma =
        std::sqrt(constants::boltzmann * temperature / species_.mass);
    double v_mean = 0.0;
    for (const auto& v : state.velocity)
        v_mean += v.z;
    v_mean /= static_cast<double>(state.n_ions());
    for (auto& v : state.velocity) {
        v.x = sigma * state.rng.normal();
        v.y = sigma * state.rng.normal();
        v.z = v_mean + sigma * state.rng.normal();
    }
}

TemperatureEstimate estimate_temperatures(std::span<const Snapshot> history,
                                          double mass, std::size_t discard) {
    if (history.size() <= discard + 1)
        throw InsufficientHistoryError(
            "need at least 2 snapshots after the transient cut, have " +
            std::to_string(history.size() > discard
                               ? history.size() - discard
                               : 0));
    double sum_z = 0.0, sum_z2 = 0.0, sum_t2 = 0.0;
    std::size_t count = 0;
    for (std::size_t s = discard; s < history.size(); ++s) {
        for (const auto& v : history[s].velocity) {
            sum_z += v.z;
            sum_z2 += v.z * v.z;
            sum_t2 += v.x * v.x + v.y * v.y;
            ++count;
        }
    }
    const double nd = static_cast<double>(count);
    const double mean_z = sum_z / nd;
    const double var_z = std::max(sum_z2 / nd - mean_z * mean_z, 0.0);

    TemperatureEstimate est;
    // longitudinal convention: kB T = m <dv^2> / 2 (half the equipartition
    // value; kept as published)
    est.t_parallel = mass * var_z / (2.0 * constants::boltzmann);
    est.t_transverse = mass * (sum_t2 / nd) / (2.0 * constants::boltzmann);
    est.mean_velocity = mean_z;
    return est;
}

StrayFieldMap compensate_stray(const StrayFieldMap& stray,
                               std::span<const double> sensor_positions,
                               double target_residual) {
    if (target_residual < 0.0)
        throw DomainError("target residual must be >= 0");
    for (std::size_t i = 0; i < sensor_positions.size(); ++i)
        for (std::size_t j = i + 1; j < sensor_positions.size(); ++j)
            if (sensor_positions[i] == sensor_positions[j])
                throw ValidationError("sensor positions must be distinct");

    StrayFieldMap out = stray;
    for (double s : sensor_positions) {
        const Vec3 sampled = out.total_at(s);
        const double mag = sampled.norm();
        Vec3 applied{};
        if (mag > target_residual && mag > 0.0)
            applied = -sampled * (1.0 - target_residual / mag);
        // merge with an existing electrode at the same position if any
        bool merged = false;
        for (auto& entry : out.compensation) {
            if (entry.arc_position == s) {
                entry.field += applied;
                merged = true;
                break;
            }
        }
        if (!merged)
            out.compensation.push_back(ArcFieldSample{s, applied});
        out.sort_samples();
    }
    return out;
}

double max_residual_displacement(const StrayFieldMap& compensated,
                                 const IonSpecies& sp, double secular_freq_x,
                                 int scan_points) {
    double worst = 0.0;
    for (int i = 0; i < scan_points; ++i) {
        const double s = compensated.circumference *
                         static_cast<double>(i) / scan_points;
        worst = std::max(worst, compensated.total_at(s).norm());
    }
    return budget::micromotion_displacement(worst, sp, secular_freq_x);
}

} // namespace ringqc::dynamics
