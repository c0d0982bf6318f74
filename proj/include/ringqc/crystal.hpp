#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ringqc/species.hpp"

// Coulomb-crystal statics in an anisotropic harmonic confinement: equilibrium
// configurations, the 3N-mode phonon spectrum, chain/zigzag stability and
// band statistics. Positions are SI meters; the solver works in scaled
// coordinates internally (length unit cbrt(ke q^2 / (m wz^2))) so tolerances
// are independent of the absolute trap scale.
namespace ringqc::crystal {

using PositionMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct TrapPotential {
    double omega_x = 0.0; // rad/s
    double omega_y = 0.0; // rad/s
    double omega_z = 0.0; // rad/s
    double mass = 0.0;    // kg
    double charge = 0.0;  // C

    void validate() const; // all frequencies > 0, mass/charge > 0
    static TrapPotential from(const IonSpecies& sp, double wx, double wy,
                              double wz);
};

struct CrystalState {
    PositionMatrix positions; // N x 3, equilibrium coordinates
    double residual_gradient_norm = 0.0; // N, inf-norm of the force residual
    double potential_energy = 0.0;       // J
    int n_ions() const { return static_cast<int>(positions.rows()); }
};

struct PhononSpectrum {
    Eigen::VectorXd frequencies;  // 3N, ascending, rad/s
    Eigen::MatrixXd eigenvectors; // 3N x 3N, orthonormal columns
    double band_min = 0.0;  // rad/s
    double band_max = 0.0;  // rad/s
    double band_width = 0.0;

    int n_modes() const { return static_cast<int>(frequencies.size()); }
    /// Fraction of mode weight on z components (1 for a pure axial mode).
    double axial_weight(int mode) const;
};

struct SolveOptions {
    int max_iterations = 300;
    // Convergence when the gradient inf-norm drops below
    // tolerance_scale * ke q^2 / spacing^2 (dimensionless inside the solver).
    double tolerance_scale = 1e-10;
    std::optional<PositionMatrix> seed_layout; // meters
    // Transverse symmetry breaking applied to the default chain seed, as a
    // fraction of the characteristic spacing.
    double seed_jitter = 1e-3;
};

/// Minimize the trap + Coulomb potential. Deterministic for a fixed seed
/// layout and options. Throws ConvergenceError when the iteration cap is hit.
CrystalState solve_equilibrium(const TrapPotential& trap, int n_ions,
                               const SolveOptions& options = {});

/// Mass-weighted normal modes from the analytic Hessian at equilibrium.
/// Throws InstabilityError (listing offending modes) if the configuration is
/// not a local minimum.
PhononSpectrum phonon_modes(const CrystalState& state,
                            const TrapPotential& trap);

struct ZigzagResult {
    bool is_linear_stable = false;
    // Lowest transverse mode of the axis-constrained chain, rad/s. Negative
    // value means an imaginary frequency: -sqrt(|lambda|/m) of the unstable
    // mode.
    double lowest_transverse_mode = 0.0;
};

/// Solve the linear chain constrained to the z axis and examine the sign of
/// the lowest transverse Hessian eigenvalue (over both transverse axes).
ZigzagResult zigzag_stability(const TrapPotential& trap, int n_ions);

enum class Branch { axial, transverse, all };

struct BandStatistics {
    double width = 0.0;        // rad/s
    double mean_spacing = 0.0; // rad/s, width/(count-1); 0 for single mode
    double min_spacing = 0.0;  // rad/s, minimum adjacent gap
    int count = 0;
};

BandStatistics band_statistics(const PhononSpectrum& spectrum, Branch branch);

// Potential, gradient and analytic Hessian of
//   U = sum_i m/2 (wx^2 x^2 + wy^2 y^2 + wz^2 z^2) + sum_{i<j} ke q^2 / r_ij
// in SI units, exposed for cross-checks and for the dynamics module.
double potential_energy(const TrapPotential& trap, const PositionMatrix& r);
Eigen::VectorXd potential_gradient(const TrapPotential& trap,
                                   const PositionMatrix& r);
// Coordinate order (x0,y0,z0, x1,y1,z1, ...); symmetric by construction.
Eigen::MatrixXd potential_hessian(const TrapPotential& trap,
                                  const PositionMatrix& r);

struct BandExtremes {
    double min_freq = 0.0; // rad/s
    double max_freq = 0.0; // rad/s
};

// Extremal mode frequencies without a dense eigensolve (Lanczos with full
// reorthogonalization on matrix-free Hessian products). For crystals beyond
// the dense cap used by phonon_modes.
BandExtremes band_extremes(const CrystalState& state, const TrapPotential& trap,
                           int max_lanczos_iterations = 200);

/// Dense-eigensolve cap: phonon_modes refuses crystals larger than this and
/// callers should switch to band_extremes.
inline constexpr int dense_mode_cap = 2000;

} // namespace ringqc::crystal
