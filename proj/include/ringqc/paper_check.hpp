#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Reproduction table for the published feasibility figures: every headline
// number is recomputed from the module formulas and compared at a stated
// tolerance. Figures that disagree with their own defining expressions are
// reported as discrepancies with the computed alternative; they are never
// silently matched.
namespace ringqc::check {

enum class RowStatus { match, paper_discrepancy, not_reproducible };

struct PaperCheckRow {
    std::string id;        // stable claim identifier
    std::string location;  // where the figure is published (section/table)
    std::string quoted;    // the published value, verbatim number + unit
    double published = 0.0; // numeric form of the published value (SI-free,
                            // in `unit`)
    double computed = 0.0;  // recomputed value in the same unit
    std::string unit;
    double relative_deviation = 0.0;
    double tolerance = 0.0; // for match rows
    RowStatus status = RowStatus::match;
    bool within_tolerance = false; // evaluated for match rows
    std::string note; // inputs used; for discrepancy rows, the ledger note
};

/// Recompute every tabulated claim. tolerance_scale < 1 tightens all match
/// tolerances (strict profile).
std::vector<PaperCheckRow> paper_check(double tolerance_scale = 1.0);

/// False when any match-status row exceeds its tolerance.
bool all_match_rows_pass(const std::vector<PaperCheckRow>& rows);

void write_table(std::ostream& os, const std::vector<PaperCheckRow>& rows);
std::string to_json(const std::vector<PaperCheckRow>& rows);

} // namespace ringqc::check
