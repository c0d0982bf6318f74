#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "oracle_helpers.hpp"
#include "ringqc/budget.hpp"
#include "ringqc/constants.hpp"
#include "ringqc/errors.hpp"
#include "ringqc/gates.hpp"

using namespace ringqc;
using namespace ringqc::gates;
using oracle::rel_err;

namespace {
constexpr double two_pi = 2.0 * constants::pi;
}

TEST_CASE("resonant rectangular pulses follow sin^2(area/2)") {
    // pi pulse: full population transfer
    const auto pulse = PulseEnvelope::rectangular(constants::pi / 10e-9, 10e-9);
    const auto flipped = rabi_evolve(QubitState::in_ground(), pulse, 0.0);
    CHECK(flipped.excited_population() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(flipped.norm() - 1.0) < 1e-12);

    // 2 pi pulse: back to the initial population
    const auto cycle = PulseEnvelope::rectangular(two_pi / 10e-9, 10e-9);
    const auto back = rabi_evolve(QubitState::in_ground(), cycle, 0.0);
    CHECK(back.excited_population() < 1e-12);

    // generic area
    for (double area : {0.3, 1.1, 2.0, 2.9}) {
        const auto p = PulseEnvelope::rectangular(area / 10e-9, 10e-9);
        const auto out = rabi_evolve(QubitState::in_ground(), p, 0.0);
        CHECK(rel_err(out.excited_population(),
                      std::sin(0.5 * area) * std::sin(0.5 * area)) < 1e-10);
    }
}

TEST_CASE("pulse-area theorem across envelope shapes") {
    // same area, three shapes, same resonant flip probability to 1e-9
    const double area = 1.8;
    const auto rect = PulseEnvelope::rectangular(area / 8e-9, 8e-9);
    const double trap_peak = area / (6e-9 + 2e-9); // flat 6 ns, 2 ns ramps
    const auto trap = PulseEnvelope::trapezoid(trap_peak, 2e-9, 6e-9, 2e-9);
    // gaussian transit: solve for the peak that gives the same area
    auto gauss_for_area = [&](double target) {
        const auto unit = PulseEnvelope::gaussian_transit(1.0, 10e-6, 2800.0,
                                                          12e-9);
        return PulseEnvelope::gaussian_transit(target / unit.area(), 10e-6,
                                               2800.0, 12e-9);
    };
    const auto gauss = gauss_for_area(area);

    CHECK(rel_err(rect.area(), area) < 1e-12);
    CHECK(rel_err(trap.area(), area) < 1e-12);
    CHECK(rel_err(gauss.area(), area) < 1e-12);

    const double p_rect =
        rabi_evolve(QubitState::in_ground(), rect, 0.0).excited_population();
    const double p_trap =
        rabi_evolve(QubitState::in_ground(), trap, 0.0).excited_population();
    const double p_gauss =
        rabi_evolve(QubitState::in_ground(), gauss, 0.0).excited_population();
    const double want = std::sin(0.5 * area) * std::sin(0.5 * area);
    CHECK(std::fabs(p_rect - want) < 1e-9);
    CHECK(std::fabs(p_trap - want) < 1e-9);
    CHECK(std::fabs(p_gauss - want) < 1e-9);
}

TEST_CASE("evolution matches the independent ODE oracle, on and off resonance") {
    const double peak = two_pi * 50e6;
    const auto envelope = PulseEnvelope::trapezoid(peak, 2e-9, 6e-9, 2e-9);
    auto omega_fn = [&](double t) { return envelope.value(t); };

    for (double detuning : {0.0, two_pi * 20e6, -two_pi * 35e6}) {
        for (double phase : {0.0, 0.7}) {
            // fine substeps: the piecewise-constant propagator converges
            // O(h^2) off resonance
            const auto mine = rabi_evolve(QubitState::in_ground(), envelope,
                                          detuning, phase, 8192);
            const auto [ce, cg] = oracle::rk4_two_level(
                {0.0, 0.0}, {1.0, 0.0}, omega_fn, detuning, phase,
                envelope.duration(), 200000);
            CHECK(std::abs(mine.excited - ce) < 1e-8);
            CHECK(std::abs(mine.ground - cg) < 1e-8);
        }
    }
}

TEST_CASE("norm preservation and rotation composition") {
    const double peak = two_pi * 80e6;
    QubitState state = QubitState::in_ground();
    for (int i = 0; i < 50; ++i) {
        const auto p = PulseEnvelope::rectangular(peak, (i % 7 + 1) * 1e-9);
        state = rabi_evolve(state, p, two_pi * 10e6, 0.3);
        CHECK(std::fabs(state.norm() - 1.0) < 1e-12);
    }

    // evolve(a) then evolve(b) equals evolve(a+b) for resonant same-phase
    const auto pa = PulseEnvelope::rectangular(1.1 / 4e-9, 4e-9);
    const auto pb = PulseEnvelope::rectangular(0.8 / 4e-9, 4e-9);
    const auto pab = PulseEnvelope::rectangular(1.9 / 4e-9, 4e-9);
    const auto two_step = rabi_evolve(
        rabi_evolve(QubitState::in_ground(), pa, 0.0, 0.4), pb, 0.0, 0.4);
    const auto one_step = rabi_evolve(QubitState::in_ground(), pab, 0.0, 0.4);
    CHECK(std::abs(two_step.excited - one_step.excited) < 1e-9);
    CHECK(std::abs(two_step.ground - one_step.ground) < 1e-9);
}

TEST_CASE("scheduler feasibility at the published rates") {
    const std::vector<int> targets{0, 1, 2};

    // 4.6 ns + 2 x 2 ns = 8.6 ns does not fit a 7.14 ns arrival period
    CHECK_THROWS_AS(
        schedule_pulses(140e6, targets, 4.6e-9, 2e-9), CrosstalkError);
    try {
        schedule_pulses(140e6, targets, 4.6e-9, 2e-9);
    } catch (const CrosstalkError& e) {
        CHECK(rel_err(e.max_feasible_pulse(), 1.0 / 140e6 - 4e-9) < 1e-9);
    }

    // the formula pulse length 1.79 ns does fit
    const auto train = schedule_pulses(140e6, targets, 1.79e-9, 2e-9);
    CHECK(train.pulses.size() == 3);
    train.validate();
}

TEST_CASE("scheduler emits one pulse per target, zero elsewhere") {
    const double rate = 100e6;
    const double period = 1.0 / rate;
    const std::vector<int> targets{1, 4, 5};
    const auto train = schedule_pulses(rate, targets, 3e-9, 2e-9);
    REQUIRE(train.pulses.size() == 3);

    const double lead_in = 0.5 * (3e-9 + 4e-9);
    for (int ion = 0; ion < 10; ++ion) {
        const double transit = lead_in + ion * period;
        const bool is_target = ion == 1 || ion == 4 || ion == 5;
        if (is_target) {
            CHECK(train.envelope_at(transit) > 0.0);
        } else {
            // sweep the whole transit window of a non-target ion
            for (double dt = -3.5e-9; dt <= 3.5e-9; dt += 0.1e-9)
                CHECK(train.envelope_at(transit + dt) == 0.0);
        }
    }
}

TEST_CASE("scheduler edge cases") {
    // empty target list
    const auto empty = schedule_pulses(140e6, {}, 1.79e-9, 2e-9);
    CHECK(empty.pulses.empty());

    // every other ion: starts spaced by two periods
    const std::vector<int> alternating{0, 2, 4, 6};
    const auto train = schedule_pulses(100e6, alternating, 3e-9, 2e-9);
    REQUIRE(train.pulses.size() == 4);
    for (std::size_t i = 1; i < train.pulses.size(); ++i)
        CHECK(rel_err(train.pulses[i].start - train.pulses[i - 1].start,
                      2.0 / 100e6) < 1e-9);

    // hardware minimum on ramps
    CHECK_THROWS_AS(schedule_pulses(100e6, alternating, 3e-9, 0.5e-9),
                    ValidationError);
    // bandwidth cap
    ModulatorLimits limits;
    limits.max_repetition_rate = 50e6;
    CHECK_THROWS_AS(schedule_pulses(100e6, alternating, 3e-9, 2e-9,
                                    constants::pi, limits),
                    ValidationError);

    const std::vector<int> negative{-1};
    CHECK_THROWS_AS(schedule_pulses(100e6, negative, 3e-9, 2e-9),
                    ValidationError);
}

TEST_CASE("pulse train CSV serialization") {
    const std::vector<int> targets{0, 3};
    const auto train = schedule_pulses(100e6, targets, 3e-9, 2e-9);
    std::ostringstream os;
    train.write_csv(os);
    const std::string csv = os.str();
    CHECK(csv.find("start_ns") != std::string::npos);
    // 1 header + 2 rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("piecewise gate plan") {
    const auto plan = plan_piecewise_gate(constants::pi, constants::pi / 4.0,
                                          130e-6);
    CHECK(plan.passes == 4);
    CHECK(plan.fragment_angles.size() == 4);
    CHECK(std::fabs(plan.angle_sum() - constants::pi) < 1e-9);
    CHECK(plan.wall_clock_time == doctest::Approx(4 * 130e-6));

    const auto zero = plan_piecewise_gate(0.0, 0.1, 1e-6);
    CHECK(zero.passes == 0);
    CHECK(zero.fragment_angles.empty());

    CHECK_THROWS_AS(plan_piecewise_gate(1.0, 0.0, 1e-6), DomainError);
}

TEST_CASE("fragmented plan composes to the single-pulse rotation") {
    const double target = 2.2;
    const auto plan = plan_piecewise_gate(target, 0.4, 1e-6);

    QubitState state = QubitState::in_ground();
    for (double angle : plan.fragment_angles) {
        const auto fragment = PulseEnvelope::rectangular(angle / 5e-9, 5e-9);
        state = rabi_evolve(state, fragment, 0.0);
    }
    const auto direct = rabi_evolve(
        QubitState::in_ground(),
        PulseEnvelope::rectangular(target / 5e-9, 5e-9), 0.0);
    CHECK(std::abs(state.excited - direct.excited) < 1e-9);
    CHECK(std::abs(state.ground - direct.ground) < 1e-9);
}

TEST_CASE("switching budget reproduces the published timing chain") {
    const auto ca = load_species("Ca-40");

    const auto b100 = switching_budget(ca, 4.6e-9, 0.2, 100.0);
    CHECK(rel_err(b100.single_ion_rabi / two_pi / 1e6, 217.391304347826) <
          1e-12);                                              // frozen
    CHECK(rel_err(b100.single_ion_rabi, two_pi * 218e6) < 0.01); // published
    CHECK(rel_err(b100.n_ion_gate_time, 2.3e-07) < 1e-12);       // frozen
    CHECK(rel_err(b100.n_ion_gate_time, 230e-9) < 0.03);         // published
    CHECK_FALSE(b100.modulator_rate.has_value());

    const auto b1e5 = switching_budget(ca, 4.6e-9, 0.2, 1e5);
    CHECK(rel_err(b1e5.n_ion_gate_time, 7.27323861838727e-06) < 1e-12);
    CHECK(rel_err(b1e5.n_ion_gate_time, 7.3e-6) < 0.03); // published

    const auto with_geom = switching_budget(
        ca, 4.6e-9, 0.2, 100.0, TransitGeometry{10e-6, 2800.0, 20e-6});
    REQUIRE(with_geom.modulator_rate.has_value());
    CHECK(rel_err(*with_geom.modulator_rate, 140e6) < 1e-12); // published

    // pi vs 2pi conventions stay a factor of two apart
    const auto pi_req = budget::pi_pulse_requirements(ca, 4.6e-9);
    CHECK(rel_err(b100.single_ion_rabi, 2.0 * pi_req.rabi_freq) < 1e-12);
    CHECK(rel_err(b100.intensity, 2.0 * pi_req.required_intensity) < 1e-12);

    const auto mg = load_species("Mg-24");
    CHECK_THROWS_AS(switching_budget(mg, 4.6e-9, 0.2, 100.0),
                    MissingDataError);
}
