#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <random>

#include "oracle_helpers.hpp"
#include "ringqc/budget.hpp"
#include "ringqc/constants.hpp"
#include "ringqc/crystal.hpp"
#include "ringqc/errors.hpp"

using namespace ringqc;
using namespace ringqc::crystal;
using oracle::rel_err;

namespace {

constexpr double two_pi = 2.0 * constants::pi;

TrapPotential ca_trap(double wx_hz, double wy_hz, double wz_hz) {
    return TrapPotential::from(load_species("Ca-40"), two_pi * wx_hz,
                               two_pi * wy_hz, two_pi * wz_hz);
}

double length_unit(const TrapPotential& t) {
    return std::cbrt(constants::coulomb_constant * t.charge * t.charge /
                     (t.mass * t.omega_z * t.omega_z));
}

// positions in oracle (dimensionless) coordinates
std::vector<double> to_scaled(const CrystalState& st, const TrapPotential& t) {
    const double l = length_unit(t);
    std::vector<double> r(3 * st.n_ions());
    for (int i = 0; i < st.n_ions(); ++i)
        for (int a = 0; a < 3; ++a)
            r[3 * i + a] = st.positions(i, a) / l;
    return r;
}

std::vector<double> sorted_axial(const CrystalState& st) {
    std::vector<double> z;
    for (int i = 0; i < st.n_ions(); ++i)
        z.push_back(st.positions(i, 2));
    std::sort(z.begin(), z.end());
    return z;
}

} // namespace

TEST_CASE("single ion sits at the trap center with the bare frequencies") {
    const auto trap = ca_trap(3e6, 2.5e6, 1e6);
    const auto st = solve_equilibrium(trap, 1);
    CHECK(std::fabs(st.positions(0, 0)) < 1e-12);
    CHECK(std::fabs(st.positions(0, 1)) < 1e-12);
    CHECK(std::fabs(st.positions(0, 2)) < 1e-12);

    const auto spec = phonon_modes(st, trap);
    REQUIRE(spec.n_modes() == 3);
    CHECK(rel_err(spec.frequencies[0], trap.omega_z) < 1e-9);
    CHECK(rel_err(spec.frequencies[1], trap.omega_y) < 1e-9);
    CHECK(rel_err(spec.frequencies[2], trap.omega_x) < 1e-9);
}

TEST_CASE("two-ion separation equals the closed-form spacing analytically") {
    const auto trap = ca_trap(5e6, 5e6, 1e6);
    const auto st = solve_equilibrium(trap, 2);
    const double sep = (st.positions.row(0) - st.positions.row(1)).norm();
    const double formula =
        budget::ion_spacing(load_species("Ca-40"), trap.omega_z);
    CHECK(rel_err(sep, formula) < 1e-9);

    // axial pair: transverse excursions vanish
    CHECK(std::fabs(st.positions(0, 0)) < 1e-12 * formula);
    CHECK(std::fabs(st.positions(1, 1)) < 1e-12 * formula);
}

TEST_CASE("two-ion normal modes match the analytic values") {
    const auto trap = ca_trap(5e6, 5e6, 1e6);
    const auto st = solve_equilibrium(trap, 2);
    const auto spec = phonon_modes(st, trap);
    REQUIRE(spec.n_modes() == 6);

    std::vector<double> want = {
        trap.omega_z,                                            // axial COM
        std::sqrt(3.0) * trap.omega_z,                           // stretch
        trap.omega_x, trap.omega_y,                              // transverse COM
        std::sqrt(trap.omega_x * trap.omega_x -
                  trap.omega_z * trap.omega_z),                  // rocking x
        std::sqrt(trap.omega_y * trap.omega_y -
                  trap.omega_z * trap.omega_z)};                 // rocking y
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 6; ++i)
        CHECK(rel_err(spec.frequencies[i], want[i]) < 1e-8);
}

TEST_CASE("three-ion axial spectrum: 1, sqrt(3), sqrt(29/5)") {
    const auto trap = ca_trap(8e6, 8e6, 1e6);
    const auto st = solve_equilibrium(trap, 3);
    const auto spec = phonon_modes(st, trap);

    std::vector<double> axial;
    for (int i = 0; i < spec.n_modes(); ++i)
        if (spec.axial_weight(i) > 0.5)
            axial.push_back(spec.frequencies[i] / trap.omega_z);
    std::sort(axial.begin(), axial.end());
    REQUIRE(axial.size() == 3);
    CHECK(rel_err(axial[0], 1.0) < 1e-8);
    CHECK(rel_err(axial[1], std::sqrt(3.0)) < 1e-8);
    CHECK(rel_err(axial[2], 2.40831891575846) < 1e-8); // sqrt(29/5)

    // cross-check every mode against the finite-difference Hessian oracle
    oracle::CrystalOracle ora;
    ora.ax = (trap.omega_x / trap.omega_z) * (trap.omega_x / trap.omega_z);
    ora.ay = (trap.omega_y / trap.omega_z) * (trap.omega_y / trap.omega_z);
    const auto r = to_scaled(st, trap);
    const auto h = ora.fd_hessian(r);
    Eigen::MatrixXd hm(9, 9);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j)
            hm(i, j) = h[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
    for (int i = 0; i < 9; ++i) {
        const double w_oracle =
            trap.omega_z * std::sqrt(std::max(es.eigenvalues()[i], 0.0));
        CHECK(rel_err(spec.frequencies[i], w_oracle) < 1e-6);
    }
}

TEST_CASE("seven-ion chain matches 50-start brute-force minimization") {
    const auto trap = ca_trap(10e6, 10e6, 1e6);
    const auto st = solve_equilibrium(trap, 7);

    oracle::CrystalOracle ora;
    ora.ax = 100.0;
    ora.ay = 100.0;
    std::vector<double> best_r;
    const double best = ora.multistart_best_energy(7, 50, 1234, &best_r);
    const double mine = ora.energy(to_scaled(st, trap));
    CHECK(mine <= best + 1e-6 * std::fabs(best));
    CHECK(rel_err(mine, best) < 1e-6);

    // sorted axial positions agree with the oracle minimizer
    std::vector<double> oz;
    for (int i = 0; i < 7; ++i)
        oz.push_back(best_r[3 * i + 2]);
    std::sort(oz.begin(), oz.end());
    const double l = length_unit(trap);
    const auto z = sorted_axial(st);
    for (int i = 0; i < 7; ++i)
        CHECK(std::fabs(z[i] / l - oz[i]) < 1e-5);
}

TEST_CASE("small zigzag and isotropic crystals reach the brute-force optimum") {
    struct Case {
        int n;
        double ax, ay;
    };
    const Case cases[] = {{5, 4.0, 4.0}, {6, 1.0, 1.0}, {4, 2.25, 9.0}};
    int idx = 0;
    for (const auto& c : cases) {
        const auto trap = ca_trap(1e6 * std::sqrt(c.ax), 1e6 * std::sqrt(c.ay),
                                  1e6);
        const auto st = solve_equilibrium(trap, c.n);
        oracle::CrystalOracle ora;
        ora.ax = c.ax;
        ora.ay = c.ay;
        const double best =
            ora.multistart_best_energy(c.n, 50, 777 + idx++);
        const double mine = ora.energy(to_scaled(st, trap));
        CHECK(mine <= best + 1e-6 * std::fabs(best));
    }
}

TEST_CASE("analytic Hessian is symmetric and matches finite differences") {
    const auto trap = ca_trap(3.7e6, 2.9e6, 1e6);
    const auto st = solve_equilibrium(trap, 5);
    const auto h = potential_hessian(trap, st.positions);

    const double hmax = h.cwiseAbs().maxCoeff();
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12 * hmax);

    oracle::CrystalOracle ora;
    ora.ax = (trap.omega_x / trap.omega_z) * (trap.omega_x / trap.omega_z);
    ora.ay = (trap.omega_y / trap.omega_z) * (trap.omega_y / trap.omega_z);
    const auto r = to_scaled(st, trap);
    const auto fd = ora.fd_hessian(r);
    const double unit = trap.mass * trap.omega_z * trap.omega_z;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            CHECK(std::fabs(h(i, j) / unit - fd[i][j]) < 1e-7);
}

TEST_CASE("total Coulomb force cancels pairwise") {
    const auto trap = ca_trap(3e6, 3e6, 1e6);
    const auto st = solve_equilibrium(trap, 6);
    // displace away from equilibrium so individual forces are large
    PositionMatrix r = st.positions * 1.1;
    const auto g = potential_gradient(trap, r);

    // subtract the trap part; what remains is the Coulomb gradient, whose
    // per-axis total must vanish by the action-reaction symmetry
    double sum[3] = {0.0, 0.0, 0.0};
    double scale = 0.0;
    const double m = trap.mass;
    const double w2[3] = {trap.omega_x * trap.omega_x,
                          trap.omega_y * trap.omega_y,
                          trap.omega_z * trap.omega_z};
    for (int i = 0; i < 6; ++i) {
        for (int a = 0; a < 3; ++a) {
            const double coulomb = g[3 * i + a] - m * w2[a] * r(i, a);
            sum[a] += coulomb;
            scale = std::max(scale, std::fabs(coulomb));
        }
    }
    for (int a = 0; a < 3; ++a)
        CHECK(std::fabs(sum[a]) < 1e-10 * scale);
}

TEST_CASE("equilibrium is a local minimum against random perturbations") {
    const auto trap = ca_trap(4e6, 4e6, 1e6);
    const auto st = solve_equilibrium(trap, 6);
    const double e0 = st.potential_energy;
    const double l = length_unit(trap);

    std::mt19937_64 eng(99);
    auto uni = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 50; ++trial) {
        PositionMatrix r = st.positions;
        for (int i = 0; i < r.rows(); ++i)
            for (int a = 0; a < 3; ++a)
                r(i, a) += 0.02 * l * (2.0 * uni() - 1.0);
        CHECK(potential_energy(trap, r) >= e0);
    }
}

TEST_CASE("linear chain decouples axial and transverse blocks") {
    const auto trap = ca_trap(10e6, 10e6, 1e6);
    const auto st = solve_equilibrium(trap, 6);
    const auto h = potential_hessian(trap, st.positions);
    const double hmax = h.cwiseAbs().maxCoeff();
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            CHECK(std::fabs(h(3 * i, 3 * j + 2)) < 1e-10 * hmax);     // x-z
            CHECK(std::fabs(h(3 * i + 1, 3 * j + 2)) < 1e-10 * hmax); // y-z
            CHECK(std::fabs(h(3 * i, 3 * j + 1)) < 1e-10 * hmax);     // x-y
        }
    }
}

TEST_CASE("mode count, orthonormality and center-of-mass frequencies") {
    const auto trap = ca_trap(3.1e6, 2.7e6, 1e6);
    for (int n : {2, 4, 9}) {
        const auto st = solve_equilibrium(trap, n);
        const auto spec = phonon_modes(st, trap);
        REQUIRE(spec.n_modes() == 3 * n);

        const Eigen::MatrixXd gram =
            spec.eigenvectors.transpose() * spec.eigenvectors;
        CHECK((gram - Eigen::MatrixXd::Identity(3 * n, 3 * n))
                  .cwiseAbs()
                  .maxCoeff() < 1e-8);

        // equal masses: the COM mode in each axis is the bare trap frequency
        auto has_mode = [&](double w) {
            for (int i = 0; i < spec.n_modes(); ++i)
                if (rel_err(spec.frequencies[i], w) < 1e-6)
                    return true;
            return false;
        };
        CHECK(has_mode(trap.omega_x));
        CHECK(has_mode(trap.omega_y));
        CHECK(has_mode(trap.omega_z));

        for (int i = 0; i < spec.n_modes(); ++i)
            CHECK(spec.frequencies[i] > 0.0);
        CHECK(spec.band_width == spec.band_max - spec.band_min);
    }
}

TEST_CASE("frequency scaling law") {
    const auto trap = ca_trap(3e6, 3e6, 1e6);
    const auto st = solve_equilibrium(trap, 5);
    const auto spec = phonon_modes(st, trap);

    const double alpha = 1.7;
    TrapPotential scaled = trap;
    scaled.omega_x *= alpha;
    scaled.omega_y *= alpha;
    scaled.omega_z *= alpha;
    const auto st2 = solve_equilibrium(scaled, 5);
    const auto spec2 = phonon_modes(st2, scaled);

    for (int i = 0; i < spec.n_modes(); ++i)
        CHECK(rel_err(spec2.frequencies[i], alpha * spec.frequencies[i]) <
              1e-9);

    // coordinates contract as alpha^(-2/3)
    const auto z1 = sorted_axial(st);
    const auto z2 = sorted_axial(st2);
    const double shrink = std::pow(alpha, -2.0 / 3.0);
    for (std::size_t i = 0; i < z1.size(); ++i) {
        if (std::fabs(z1[i]) < 1e-12)
            continue;
        CHECK(rel_err(z2[i], shrink * z1[i]) < 1e-9);
    }
}

TEST_CASE("zigzag stability flips once and lands on the analytic point") {
    // N = 3: the chain buckles at (wx/wz)^2 = 12/5
    auto result_at = [&](double ratio, int n) {
        const auto trap = ca_trap(1e6 * ratio, 1e6 * ratio, 1e6);
        return zigzag_stability(trap, n);
    };

    CHECK(result_at(10.0, 3).is_linear_stable);
    CHECK_FALSE(result_at(1.01, 3).is_linear_stable);

    for (int n : {3, 5, 10}) {
        // scan: stability is monotone in the anisotropy, one sign flip
        double lo = 1.01, hi = 20.0;
        CHECK_FALSE(result_at(lo, n).is_linear_stable);
        CHECK(result_at(hi, n).is_linear_stable);
        int flips = 0;
        bool prev = result_at(1.01, n).is_linear_stable;
        for (double x = 1.2; x <= 20.0; x += 0.2) {
            const bool cur = result_at(x, n).is_linear_stable;
            if (cur != prev)
                ++flips;
            prev = cur;
        }
        CHECK(flips == 1);

        // bisection to the critical anisotropy
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (result_at(mid, n).is_linear_stable)
                hi = mid;
            else
                lo = mid;
        }
        const double critical = 0.5 * (lo + hi);

        if (n == 3)
            CHECK(rel_err(critical, 1.54919333848297) < 1e-6); // sqrt(12/5)

        // independent eigen-scan oracle: fine scan of the lowest transverse
        // eigenvalue from the finite-difference Hessian of the oracle
        // potential, linear interpolation of the sign crossing
        auto lowest_eig = [&](double ratio) {
            oracle::CrystalOracle ora;
            ora.ax = ratio * ratio;
            ora.ay = ratio * ratio;
            // axial-only seed, relax only z by coordinate descent
            std::vector<double> r(3 * n, 0.0);
            for (int i = 0; i < n; ++i)
                r[3 * i + 2] =
                    (i - 0.5 * (n - 1)) * std::cbrt(2.0);
            // BB descent keeps x = y = 0 because those gradient components
            // vanish on the axis
            r = ora.descend(r);
            const auto h = ora.fd_hessian(r);
            // transverse x block
            Eigen::MatrixXd hx(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    hx(i, j) = h[3 * i][3 * j];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hx);
            return es.eigenvalues()[0];
        };
        double prev_x = critical * 0.98;
        double prev_e = lowest_eig(prev_x);
        double crossing = 0.0;
        for (double x = prev_x + 0.002; x < critical * 1.02; x += 0.002) {
            const double e = lowest_eig(x);
            if (prev_e < 0.0 && e >= 0.0) {
                crossing = prev_x + (0.0 - prev_e) / (e - prev_e) * (x - prev_x);
                break;
            }
            prev_x = x;
            prev_e = e;
        }
        REQUIRE(crossing > 0.0);
        CHECK(rel_err(critical, crossing) < 1e-4);
    }
}

TEST_CASE("zigzag result carries the lowest transverse mode frequency") {
    const auto trap = ca_trap(10e6, 10e6, 1e6);
    const auto zz = zigzag_stability(trap, 3);
    CHECK(zz.is_linear_stable);
    // lowest transverse mode of a stable 3-ion chain: sqrt(wx^2 - 2.4 wz^2)
    const double want = std::sqrt(trap.omega_x * trap.omega_x -
                                  2.4 * trap.omega_z * trap.omega_z);
    CHECK(rel_err(zz.lowest_transverse_mode, want) < 1e-6);

    const auto unstable = zigzag_stability(ca_trap(1.2e6, 1.2e6, 1e6), 3);
    CHECK_FALSE(unstable.is_linear_stable);
    CHECK(unstable.lowest_transverse_mode < 0.0); // imaginary frequency
}

TEST_CASE("band statistics per branch") {
    const auto trap = ca_trap(10e6, 10e6, 1e6);

    const auto single = solve_equilibrium(trap, 1);
    const auto spec1 = phonon_modes(single, trap);
    const auto axial1 = band_statistics(spec1, Branch::axial);
    CHECK(axial1.count == 1);
    CHECK(axial1.width == 0.0);

    const auto st = solve_equilibrium(trap, 10);
    const auto spec = phonon_modes(st, trap);
    const auto axial = band_statistics(spec, Branch::axial);
    CHECK(axial.count == 10);
    CHECK(rel_err(axial.mean_spacing, axial.width / 9.0) < 1e-12);
    CHECK(axial.min_spacing <= axial.mean_spacing);
    const auto all_stats = band_statistics(spec, Branch::all);
    CHECK(all_stats.count == 30);

    // extrapolation hook: a 1 MHz band over 1e5 modes leaves 10 Hz per mode
    const auto b = budget::phonon_band_budget(1e6, 1e5);
    CHECK(b.mode_spacing == 10.0);
}

TEST_CASE("band extremes via Lanczos match the dense solve") {
    const auto trap = ca_trap(4e6, 4e6, 1e6);
    const auto st = solve_equilibrium(trap, 8);
    const auto spec = phonon_modes(st, trap);
    const auto ext = band_extremes(st, trap);
    CHECK(rel_err(ext.min_freq, spec.band_min) < 1e-6);
    CHECK(rel_err(ext.max_freq, spec.band_max) < 1e-6);
}

TEST_CASE("solver reports non-convergence with the residual") {
    const auto trap = ca_trap(5e6, 5e6, 1e6);
    SolveOptions opt;
    opt.max_iterations = 1;
    CHECK_THROWS_AS(solve_equilibrium(trap, 9, opt), ConvergenceError);
    try {
        solve_equilibrium(trap, 9, opt);
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("seed layouts are honored and validated") {
    const auto trap = ca_trap(5e6, 5e6, 1e6);
    SolveOptions opt;
    PositionMatrix seed(2, 3);
    const double l = length_unit(trap);
    seed << 0, 0, -l, 0, 0, l;
    opt.seed_layout = seed;
    const auto st = solve_equilibrium(trap, 2, opt);
    CHECK(st.residual_gradient_norm >= 0.0);

    opt.seed_layout = PositionMatrix(3, 3); // wrong ion count
    CHECK_THROWS_AS(solve_equilibrium(trap, 2, opt), ValidationError);
}

TEST_CASE("determinism: identical options give identical positions") {
    const auto trap = ca_trap(2.5e6, 2.4e6, 1e6);
    const auto a = solve_equilibrium(trap, 6);
    const auto b = solve_equilibrium(trap, 6);
    CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.potential_energy == b.potential_energy);
}

TEST_CASE("collision guard: no two ions closer than 1 nm") {
    const auto trap = ca_trap(4e6, 4e6, 1e6);
    const auto st = solve_equilibrium(trap, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j)
            CHECK((st.positions.row(i) - st.positions.row(j)).norm() > 1e-9);

    // center of mass at the trap center
    CHECK(st.positions.colwise().mean().norm() < 1e-12);
}
