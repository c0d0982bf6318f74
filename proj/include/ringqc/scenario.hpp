#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ringqc/budget.hpp"
#include "ringqc/configfile.hpp"
#include "ringqc/crystal.hpp"
#include "ringqc/dynamics.hpp"
#include "ringqc/species.hpp"

// Scenario orchestration: a config file names a species, a machine and the
// module pipelines to run; outputs are a JSON summary, CSV data files and a
// human-readable report, all written atomically and byte-stable for a fixed
// seed.
namespace ringqc::scenario {

struct CrystalRequest {
    int n_ions = 0;
    double omega_x = 0.0, omega_y = 0.0, omega_z = 0.0; // rad/s
    crystal::Branch branch = crystal::Branch::all;
    bool emit_eigenvectors = false;
    bool check_zigzag = false;
};

struct DynamicsRequest {
    int n_ions = 1;
    double duration = 0.0; // s
    double dt = 0.0;       // s
    int decimate = 100;
    std::uint64_t seed = 1;
    dynamics::SimOptions options;
    std::size_t discard_snapshots = 0; // transient cut for the estimator
};

struct GatesRequest {
    double arrival_rate = 0.0; // Hz
    double pulse_length = 0.0; // s
    double rise_fall = 2e-9;   // s
    std::vector<int> targets;
    double eta = 0.2;
    double n_ions_for_scaling = 1.0;
    double target_angle = 0.0;        // piecewise plan; 0 = skip
    double max_angle_per_pass = 0.0;
    double revolution_period = 0.0;
};

struct TrackingEventSpec {
    std::string kind; // "loss" | "reorder"
    int a = 0, b = 0;
};

struct TrackingRequest {
    long n_ions = 0;
    double dark_fraction = 0.0;
    std::uint64_t seed = 1;
    int mc_trials = 0; // extra seeds for the window-length distribution
    std::vector<TrackingEventSpec> events;
};

struct Scenario {
    IonSpecies species;
    RingConfig ring;
    std::vector<dynamics::LaserBeam> beams;
    dynamics::StrayFieldMap stray;
    std::optional<budget::BudgetInputs> budget_request;
    std::optional<CrystalRequest> crystal_request;
    std::optional<DynamicsRequest> dynamics_request;
    std::optional<GatesRequest> gates_request;
    std::optional<TrackingRequest> tracking_request;
};

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    bool json_only = false;
};

Scenario load_scenario(const ConfigFile& cfg);

/// Execute the requested pipelines in dependency order; write summary.json,
/// report.txt and the per-module data files into out_dir. Returns the list
/// of files written.
std::vector<std::filesystem::path>
run_scenario(const Scenario& sc, const std::filesystem::path& out_dir,
             const RunOptions& options = {});

} // namespace ringqc::scenario
