#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// Stochastic qubit identification along the chain: random bright/dark
// isotope loading, window-uniqueness analysis, collision-event injection and
// mismatch detection. Ledger operations are value transformations; inputs
// are never modified.
namespace ringqc::tracking {

enum class Site : std::uint8_t { bright = 0, dark = 1 };

struct QubitLedger {
    std::vector<Site> pattern;
    // labels[i] is the logical qubit id at chain position i, -1 for dark
    // (unlabeled) positions. Labels are bijective onto bright positions.
    std::vector<int> labels;
    long generation = 0; // incremented on each re-encoding
    std::vector<std::string> event_log; // replay grammar, one event per line

    std::size_t size() const { return pattern.size(); }
    int bright_count() const;
    void validate() const; // label bijection, sizes agree
};

struct CollisionEvent {
    enum class Kind { loss, reorder };
    Kind kind = Kind::loss;
    int position_a = 0;
    int position_b = 0; // reorder only
    double time = 0.0;

    static CollisionEvent loss(int position, double time = 0.0);
    static CollisionEvent reorder(int a, int b, double time = 0.0);

    std::string to_line() const;
    static CollisionEvent from_line(const std::string& line);
};

struct ObservationFrame {
    int start = 0; // position of window[0] in the observed (true) chain
    std::vector<Site> window;
    double timestamp = 0.0;
};

/// i.i.d. Bernoulli(dark_fraction) pattern, deterministic per seed; logical
/// labels assigned to bright positions in chain order.
QubitLedger load_pattern(long n_ions, double dark_fraction,
                         std::uint64_t seed);

/// Smallest window length L such that all contiguous windows of length L are
/// pairwise distinct. Linear convention scans the N-L+1 windows (L <= N-1);
/// circular scans all N wrapped windows. nullopt when no such L exists
/// (uniform patterns; periodic patterns in the circular convention).
std::optional<int> min_unique_window(const QubitLedger& ledger,
                                     bool circular = false);

/// Apply a collision event. Loss removes the position (orphaning its label
/// if bright); reorder swaps species and labels at the two positions.
QubitLedger apply_event(const QubitLedger& ledger, const CollisionEvent& event);

/// Extract a window of the chain as an observation (noiseless fluorescence
/// discrimination; optional per-site flip probability for robustness
/// studies).
ObservationFrame observe(const QubitLedger& chain, int start, int length,
                         double timestamp = 0.0);
ObservationFrame observe_noisy(const QubitLedger& chain, int start, int length,
                               double flip_probability, std::uint64_t seed,
                               double timestamp = 0.0);

struct MismatchReport {
    enum class Status { consistent, mismatch };
    enum class Hypothesis { loss, reorder, unknown };

    Status status = Status::consistent;
    Hypothesis hypothesis = Hypothesis::unknown; // meaningful for mismatch
    std::vector<int> affected_labels; // minimal set to reset and re-encode
};

/// Compare an observation of the true chain against the believed ledger.
/// Consistent when the believed window reproduces the observation exactly.
/// On mismatch, searches all single-event hypotheses (a loss at any
/// position, a reorder touching the window): if all window-consistent
/// hypotheses share a kind the mismatch is classified, otherwise unknown;
/// the affected set is the union over consistent hypotheses (the whole
/// window when none fits). Windows shorter than the believed pattern's
/// uniqueness length raise AmbiguityError (full-chain views are always
/// accepted).
MismatchReport detect_mismatch(const QubitLedger& believed,
                               const ObservationFrame& frame);

/// Re-encode after a detected event: bumps the generation counter and
/// reassigns labels in chain order.
QubitLedger reencode(const QubitLedger& ledger);

// Line-oriented serialization for replay (External interface):
//   pattern <B|D string>
//   loss <pos> <time> | reorder <a> <b> <time>
void write_log(std::ostream& os, const QubitLedger& ledger);
QubitLedger replay_log(std::istream& is);

} // namespace ringqc::tracking
