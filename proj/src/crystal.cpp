#include "ringqc/crystal.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ringqc/constants.hpp"
#include "ringqc/errors.hpp"
#include "ringqc/io.hpp"

namespace ringqc::crystal {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double min_ion_separation = 1e-9; // m, collision guard

// The solver works in scaled coordinates: length unit l = cbrt(ke q^2 /
// (m wz^2)), energy unit E0 = ke q^2 / l. In these units
//   u = sum_i (ax x^2 + ay y^2 + z^2)/2 + sum_{i<j} 1/r_ij,
// with ax = (wx/wz)^2, ay = (wy/wz)^2, and the SI Hessian is m wz^2 times
// the dimensionless one.
struct Scaled {
    double ax = 1.0, ay = 1.0;
    double length = 0.0; // l, meters
    double energy = 0.0; // E0, joules
    double min_sep = 0.0; // collision guard in scaled units

    static Scaled from(const TrapPotential& trap) {
        Scaled s;
        const double ke_q2 =
            constants::coulomb_constant * trap.charge * trap.charge;
        s.length = std::cbrt(ke_q2 / (trap.mass * trap.omega_z * trap.omega_z));
        s.energy = ke_q2 / s.length;
        s.ax = (trap.omega_x / trap.omega_z) * (trap.omega_x / trap.omega_z);
        s.ay = (trap.omega_y / trap.omega_z) * (trap.omega_y / trap.omega_z);
        s.min_sep = min_ion_separation / s.length;
        return s;
    }
};

double scaled_energy(const Scaled& s, const VectorXd& r) {
    const int n = static_cast<int>(r.size()) / 3;
    double u = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r[3 * i], y = r[3 * i + 1], z = r[3 * i + 2];
        u += 0.5 * (s.ax * x * x + s.ay * y * y + z * z);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = r[3 * i] - r[3 * j];
            const double dy = r[3 * i + 1] - r[3 * j + 1];
            const double dz = r[3 * i + 2] - r[3 * j + 2];
            const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (dist < s.min_sep)
                return std::numeric_limits<double>::infinity();
            u += 1.0 / dist;
        }
    }
    return u;
}

VectorXd scaled_gradient(const Scaled& s, const VectorXd& r) {
    const int n = static_cast<int>(r.size()) / 3;
    VectorXd g(r.size());
    for (int i = 0; i < n; ++i) {
        g[3 * i] = s.ax * r[3 * i];
        g[3 * i + 1] = s.ay * r[3 * i + 1];
        g[3 * i + 2] = r[3 * i + 2];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = r[3 * i] - r[3 * j];
            const double dy = r[3 * i + 1] - r[3 * j + 1];
            const double dz = r[3 * i + 2] - r[3 * j + 2];
            const double d2 = dx * dx + dy * dy + dz * dz;
            const double inv3 = 1.0 / (d2 * std::sqrt(d2));
            g[3 * i] -= dx * inv3;
            g[3 * i + 1] -= dy * inv3;
            g[3 * i + 2] -= dz * inv3;
            g[3 * j] += dx * inv3;
            g[3 * j + 1] += dy * inv3;
            g[3 * j + 2] += dz * inv3;
        }
    }
    return g;
}

MatrixXd scaled_hessian(const Scaled& s, const VectorXd& r) {
    const int n = static_cast<int>(r.size()) / 3;
    MatrixXd h = MatrixXd::Zero(r.size(), r.size());
    for (int i = 0; i < n; ++i) {
        h(3 * i, 3 * i) = s.ax;
        h(3 * i + 1, 3 * i + 1) = s.ay;
        h(3 * i + 2, 3 * i + 2) = 1.0;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d[3] = {r[3 * i] - r[3 * j],
                                 r[3 * i + 1] - r[3 * j + 1],
                                 r[3 * i + 2] - r[3 * j + 2]};
            const double d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            const double inv3 = 1.0 / (d2 * std::sqrt(d2));
            const double inv5 = inv3 / d2;
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    const double p =
                        3.0 * d[a] * d[b] * inv5 - (a == b ? inv3 : 0.0);
                    h(3 * i + a, 3 * i + b) += p;
                    h(3 * j + a, 3 * j + b) += p;
                    h(3 * i + a, 3 * j + b) -= p;
                    h(3 * j + a, 3 * i + b) -= p;
                }
            }
        }
    }
    return h;
}

// Matrix-free Hessian product for the Lanczos path.
VectorXd scaled_hessian_product(const Scaled& s, const VectorXd& r,
                                const VectorXd& v) {
    const int n = static_cast<int>(r.size()) / 3;
    VectorXd out(r.size());
    for (int i = 0; i < n; ++i) {
        out[3 * i] = s.ax * v[3 * i];
        out[3 * i + 1] = s.ay * v[3 * i + 1];
        out[3 * i + 2] = v[3 * i + 2];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d[3] = {r[3 * i] - r[3 * j],
                                 r[3 * i + 1] - r[3 * j + 1],
                                 r[3 * i + 2] - r[3 * j + 2]};
            const double d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            const double inv3 = 1.0 / (d2 * std::sqrt(d2));
            const double inv5 = inv3 / d2;
            const double dv[3] = {v[3 * i] - v[3 * j], v[3 * i + 1] - v[3 * j + 1],
                                  v[3 * i + 2] - v[3 * j + 2]};
            const double ddotdv = d[0] * dv[0] + d[1] * dv[1] + d[2] * dv[2];
            for (int a = 0; a < 3; ++a) {
                const double pa = 3.0 * d[a] * ddotdv * inv5 - dv[a] * inv3;
                out[3 * i + a] += pa;
                out[3 * j + a] -= pa;
            }
        }
    }
    return out;
}

// Damped Newton with a Levenberg shift and backtracking on the energy;
// deterministic for a fixed start.
VectorXd minimize(const Scaled& s, VectorXd r, int max_iterations,
                  double gradient_tolerance, double* residual_out) {
    double lambda = 0.0;
    double f = scaled_energy(s, r);
    if (!std::isfinite(f))
        throw ConvergenceError("seed layout violates the collision guard", f);

    for (int iter = 0; iter < max_iterations; ++iter) {
        const VectorXd g = scaled_gradient(s, r);
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        if (gnorm < gradient_tolerance) {
            if (residual_out)
                *residual_out = gnorm;
            return r;
        }

        MatrixXd h = scaled_hessian(s, r);
        const double diag_scale =
            std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());

        bool stepped = false;
        for (int attempt = 0; attempt < 60 && !stepped; ++attempt) {
            MatrixXd shifted = h;
            if (lambda > 0.0)
                shifted.diagonal().array() += lambda * diag_scale;
            Eigen::LLT<MatrixXd> llt(shifted);
            if (llt.info() != Eigen::Success) {
                lambda = std::max(4.0 * lambda, 1e-10);
                continue;
            }
            const VectorXd p = llt.solve(-g);
            const double slope = g.dot(p);
            if (!(slope < 0.0)) {
                lambda = std::max(4.0 * lambda, 1e-10);
                continue;
            }
            double alpha = 1.0;
            for (int ls = 0; ls < 40; ++ls) {
                const VectorXd trial = r + alpha * p;
                const double ft = scaled_energy(s, trial);
                if (ft <= f + 1e-4 * alpha * slope + 1e-14 * std::fabs(f)) {
                    r = trial;
                    f = ft;
                    stepped = true;
                    lambda *= 0.25;
                    if (lambda < 1e-14)
                        lambda = 0.0;
                    break;
                }
                alpha *= 0.5;
            }
            if (!stepped)
                lambda = std::max(4.0 * lambda, 1e-10);
        }
        if (!stepped) {
            // steepest-descent fallback with a crude trust step
            double alpha = 1.0 / diag_scale;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                const VectorXd trial = r - alpha * g;
                const double ft = scaled_energy(s, trial);
                if (ft < f) {
                    r = trial;
                    f = ft;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!moved) {
                if (residual_out)
                    *residual_out = gnorm;
                throw ConvergenceError(
                    "equilibrium solver stalled at gradient " +
                        io::format_double(gnorm),
                    gnorm);
            }
        }
    }
    const double gnorm =
        scaled_gradient(s, r).lpNorm<Eigen::Infinity>();
    if (residual_out)
        *residual_out = gnorm;
    throw ConvergenceError("equilibrium solver did not converge; residual " +
                               io::format_double(gnorm),
                           gnorm);
}

// Axis-constrained chain equilibrium in the reduced z coordinates. The
// axial Hessian (1 + sum 2/d^3 on the diagonal, -2/d^3 off it) is strictly
// diagonally dominant, so plain Newton converges regardless of the
// transverse stability of the chain.
VectorXd solve_axial_chain(int n, int max_iterations, double tolerance) {
    VectorXd z(n);
    const double spacing = std::cbrt(2.0);
    for (int i = 0; i < n; ++i)
        z[i] = (static_cast<double>(i) - 0.5 * (n - 1)) * spacing;

    auto energy = [&](const VectorXd& zz) {
        double u = 0.5 * zz.squaredNorm();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                u += 1.0 / std::fabs(zz[i] - zz[j]);
        return u;
    };

    for (int iter = 0; iter < max_iterations; ++iter) {
        VectorXd g = z;
        MatrixXd h = MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double d = z[i] - z[j];
                const double inv2 = 1.0 / (d * d);
                const double s = d > 0.0 ? 1.0 : -1.0;
                g[i] -= s * inv2;
                g[j] += s * inv2;
                const double c = 2.0 * inv2 / std::fabs(d);
                h(i, i) += c;
                h(j, j) += c;
                h(i, j) -= c;
                h(j, i) -= c;
            }
        }
        if (g.lpNorm<Eigen::Infinity>() < tolerance)
            return z;
        const VectorXd p = Eigen::LLT<MatrixXd>(h).solve(-g);
        double alpha = 1.0;
        const double f = energy(z);
        for (int ls = 0; ls < 50; ++ls) {
            const VectorXd trial = z + alpha * p;
            // epsilon slack: near the minimum the energy decrease underflows
            // while the Newton step still contracts the gradient
            if (energy(trial) <= f + 1e-14 * std::fabs(f)) {
                z = trial;
                break;
            }
            alpha *= 0.5;
        }
    }
    const double residual = [&] {
        VectorXd g = z;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double d = z[i] - z[j];
                const double s = d > 0.0 ? 1.0 : -1.0;
                g[i] -= s / (d * d);
                g[j] += s / (d * d);
            }
        return g.lpNorm<Eigen::Infinity>();
    }();
    throw ConvergenceError("axial chain solve did not converge; residual " +
                               io::format_double(residual),
                           residual);
}

// Uniform chain along z with a small deterministic transverse perturbation
// so transversely unstable chains can buckle off the symmetry axis.
VectorXd chain_seed(int n_ions, double jitter) {
    const double spacing = std::cbrt(2.0); // exact 2-ion value, scaled units
    VectorXd r(3 * n_ions);
    for (int i = 0; i < n_ions; ++i) {
        const double centered = static_cast<double>(i) -
                                0.5 * static_cast<double>(n_ions - 1);
        r[3 * i] = jitter * spacing * std::cos(2.399963 * i);
        r[3 * i + 1] = jitter * spacing * std::sin(2.399963 * i);
        r[3 * i + 2] = centered * spacing;
    }
    return r;
}

double dimensionless_tolerance(const SolveOptions& opt) {
    // gradient inf-norm below tolerance_scale * ke q^2 / spacing^2, expressed
    // in scaled units (spacing ~ cbrt(2) length units)
    const double spacing = std::cbrt(2.0);
    return opt.tolerance_scale / (spacing * spacing);
}

void fix_eigenvector_signs(MatrixXd& vectors) {
    for (int c = 0; c < vectors.cols(); ++c) {
        for (int rix = 0; rix < vectors.rows(); ++rix) {
            const double v = vectors(rix, c);
            if (std::abs(v) > 1e-8) {
                if (v < 0.0)
                    vectors.col(c) *= -1.0;
                break;
            }
        }
    }
}

} // namespace

void TrapPotential::validate() const {
    if (!(omega_x > 0.0) || !(omega_y > 0.0) || !(omega_z > 0.0))
        throw ValidationError("trap must confine in all three axes "
                              "(all secular frequencies > 0)");
    if (!(mass > 0.0))
        throw ValidationError("trap mass must be > 0");
    if (!(charge > 0.0))
        throw ValidationError("trap charge must be > 0");
}

TrapPotential TrapPotential::from(const IonSpecies& sp, double wx, double wy,
                                  double wz) {
    TrapPotential t;
    t.omega_x = wx;
    t.omega_y = wy;
    t.omega_z = wz;
    t.mass = sp.mass;
    t.charge = sp.charge;
    t.validate();
    return t;
}

double PhononSpectrum::axial_weight(int mode) const {
    double axial = 0.0, total = 0.0;
    for (int i = 0; i < eigenvectors.rows(); ++i) {
        const double w = eigenvectors(i, mode) * eigenvectors(i, mode);
        total += w;
        if (i % 3 == 2)
            axial += w;
    }
    return total > 0.0 ? axial / total : 0.0;
}

double potential_energy(const TrapPotential& trap, const PositionMatrix& r) {
    const Scaled s = Scaled::from(trap);
    VectorXd flat(3 * r.rows());
    for (int i = 0; i < r.rows(); ++i)
        for (int a = 0; a < 3; ++a)
            flat[3 * i + a] = r(i, a) / s.length;
    return s.energy * scaled_energy(s, flat);
}

Eigen::VectorXd potential_gradient(const TrapPotential& trap,
                                   const PositionMatrix& r) {
    const Scaled s = Scaled::from(trap);
    VectorXd flat(3 * r.rows());
    for (int i = 0; i < r.rows(); ++i)
        for (int a = 0; a < 3; ++a)
            flat[3 * i + a] = r(i, a) / s.length;
    return (s.energy / s.length) * scaled_gradient(s, flat);
}

Eigen::MatrixXd potential_hessian(const TrapPotential& trap,
                                  const PositionMatrix& r) {
    const Scaled s = Scaled::from(trap);
    VectorXd flat(3 * r.rows());
    for (int i = 0; i < r.rows(); ++i)
        for (int a = 0; a < 3; ++a)
            flat[3 * i + a] = r(i, a) / s.length;
    // E0 / l^2 = m wz^2
    return (trap.mass * trap.omega_z * trap.omega_z) *
           scaled_hessian(s, flat);
}

CrystalState solve_equilibrium(const TrapPotential& trap, int n_ions,
                               const SolveOptions& options) {
    trap.validate();
    if (n_ions < 1)
        throw ValidationError("n_ions must be >= 1");

    const Scaled s = Scaled::from(trap);

    VectorXd seed;
    if (options.seed_layout) {
        if (options.seed_layout->rows() != n_ions)
            throw ValidationError("seed layout has wrong ion count");
        seed.resize(3 * n_ions);
        for (int i = 0; i < n_ions; ++i)
            for (int a = 0; a < 3; ++a)
                seed[3 * i + a] = (*options.seed_layout)(i, a) / s.length;
    } else {
        seed = chain_seed(n_ions, options.seed_jitter);
    }

    double residual = 0.0;
    const VectorXd r = minimize(s, std::move(seed), options.max_iterations,
                                dimensionless_tolerance(options), &residual);

    CrystalState state;
    state.positions.resize(n_ions, 3);
    for (int i = 0; i < n_ions; ++i)
        for (int a = 0; a < 3; ++a)
            state.positions(i, a) = r[3 * i + a] * s.length;
    state.residual_gradient_norm = residual * s.energy / s.length;
    state.potential_energy = s.energy * scaled_energy(s, r);
    return state;
}

PhononSpectrum phonon_modes(const CrystalState& state,
                            const TrapPotential& trap) {
    trap.validate();
    const int n = state.n_ions();
    if (n < 1)
        throw ValidationError("empty crystal");
    if (n > dense_mode_cap)
        throw ValidationError(
            "dense mode solve capped at " + std::to_string(dense_mode_cap) +
            " ions; use band_extremes for larger crystals");

    const Scaled s = Scaled::from(trap);
    VectorXd flat(3 * n);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a)
            flat[3 * i + a] = state.positions(i, a) / s.length;

    MatrixXd h = scaled_hessian(s, flat);
    h = 0.5 * (h + h.transpose()).eval(); // symmetrize

    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw Error("eigendecomposition failed");

    const VectorXd lambda = solver.eigenvalues(); // ascending
    const double lambda_scale = lambda.cwiseAbs().maxCoeff();
    const double tol = 1e-9 * std::max(lambda_scale, 1.0);

    std::ostringstream unstable;
    int n_unstable = 0;
    for (int i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -tol) {
            if (n_unstable++)
                unstable << ", ";
            unstable << "mode " << i << " (lambda/(m wz^2) = "
                     << io::format_double(lambda[i]) << ")";
        }
    }
    if (n_unstable > 0)
        throw InstabilityError("configuration is not a local minimum: " +
                               unstable.str());

    PhononSpectrum spec;
    spec.frequencies.resize(lambda.size());
    for (int i = 0; i < lambda.size(); ++i)
        spec.frequencies[i] = trap.omega_z * std::sqrt(std::max(lambda[i], 0.0));
    spec.eigenvectors = solver.eigenvectors();
    fix_eigenvector_signs(spec.eigenvectors);
    spec.band_min = spec.frequencies[0];
    spec.band_max = spec.frequencies[lambda.size() - 1];
    spec.band_width = spec.band_max - spec.band_min;
    return spec;
}

ZigzagResult zigzag_stability(const TrapPotential& trap, int n_ions) {
    trap.validate();
    if (n_ions < 3)
        throw ValidationError("zigzag analysis needs at least 3 ions");

    const Scaled s = Scaled::from(trap);

    // chain equilibrium constrained to the z axis, then the full Hessian at
    // (0, 0, z) to probe the transverse curvature
    const VectorXd z =
        solve_axial_chain(n_ions, 400, dimensionless_tolerance({}));
    VectorXd r = VectorXd::Zero(3 * n_ions);
    for (int i = 0; i < n_ions; ++i)
        r[3 * i + 2] = z[i];

    const MatrixXd h = scaled_hessian(s, r);

    MatrixXd hx(n_ions, n_ions), hy(n_ions, n_ions);
    for (int i = 0; i < n_ions; ++i) {
        for (int j = 0; j < n_ions; ++j) {
            hx(i, j) = h(3 * i, 3 * j);
            hy(i, j) = h(3 * i + 1, 3 * j + 1);
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> ex(hx), ey(hy);
    const double lambda_min =
        std::min(ex.eigenvalues()[0], ey.eigenvalues()[0]);

    // lambda is in units of m wz^2
    const double omega2 = lambda_min * trap.omega_z * trap.omega_z;
    ZigzagResult result;
    result.is_linear_stable = lambda_min > 0.0;
    result.lowest_transverse_mode = omega2 >= 0.0
                                        ? std::sqrt(omega2)
                                        : -std::sqrt(-omega2);
    return result;
}

BandStatistics band_statistics(const PhononSpectrum& spectrum, Branch branch) {
    std::vector<double> freqs;
    for (int i = 0; i < spectrum.n_modes(); ++i) {
        const double w = spectrum.axial_weight(i);
        const bool axial = w > 0.5;
        if (branch == Branch::all || (branch == Branch::axial && axial) ||
            (branch == Branch::transverse && !axial))
            freqs.push_back(spectrum.frequencies[i]);
    }
    BandStatistics stats;
    stats.count = static_cast<int>(freqs.size());
    if (freqs.empty())
        return stats;
    std::sort(freqs.begin(), freqs.end());
    stats.width = freqs.back() - freqs.front();
    if (freqs.size() > 1) {
        stats.mean_spacing = stats.width / static_cast<double>(freqs.size() - 1);
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < freqs.size(); ++i)
            min_gap = std::min(min_gap, freqs[i] - freqs[i - 1]);
        stats.min_spacing = min_gap;
    }
    return stats;
}

BandExtremes band_extremes(const CrystalState& state, const TrapPotential& trap,
                           int max_lanczos_iterations) {
    trap.validate();
    const int n = state.n_ions();
    const int dim = 3 * n;
    const Scaled s = Scaled::from(trap);
    VectorXd flat(dim);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a)
            flat[3 * i + a] = state.positions(i, a) / s.length;

    // Lanczos with full reorthogonalization against the stored basis.
    const int m = std::min(dim, max_lanczos_iterations);
    MatrixXd basis(dim, m);
    VectorXd alpha(m), beta(m);
    VectorXd v = VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i)
        v[i] = std::sin(0.7 * (i + 1)); // fixed deterministic start
    v.normalize();

    int steps = 0;
    VectorXd prev = VectorXd::Zero(dim);
    double beta_prev = 0.0;
    for (int k = 0; k < m; ++k) {
        basis.col(k) = v;
        VectorXd w = scaled_hessian_product(s, flat, v);
        alpha[k] = v.dot(w);
        w -= alpha[k] * v;
        if (k > 0)
            w -= beta_prev * prev;
        // full reorthogonalization
        for (int j = 0; j <= k; ++j)
            w -= basis.col(j).dot(w) * basis.col(j);
        const double b = w.norm();
        steps = k + 1;
        if (b < 1e-12)
            break;
        beta[k] = b;
        beta_prev = b;
        prev = v;
        v = w / b;
    }

    MatrixXd tri = MatrixXd::Zero(steps, steps);
    for (int k = 0; k < steps; ++k) {
        tri(k, k) = alpha[k];
        if (k + 1 < steps) {
            tri(k, k + 1) = beta[k];
            tri(k + 1, k) = beta[k];
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(tri);
    const double lo = std::max(es.eigenvalues()[0], 0.0);
    const double hi = std::max(es.eigenvalues()[steps - 1], 0.0);

    BandExtremes out;
    out.min_freq = trap.omega_z * std::sqrt(lo);
    out.max_freq = trap.omega_z * std::sqrt(hi);
    return out;
}

} // namespace ringqc::crystal
