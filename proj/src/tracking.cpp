#include "ringqc/tracking.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "ringqc/errors.hpp"
#include "ringqc/rng.hpp"

namespace ringqc::tracking {

namespace {

std::string pattern_string(const std::vector<Site>& pattern) {
    std::string s;
    s.reserve(pattern.size());
    for (Site site : pattern)
        s.push_back(site == Site::bright ? 'B' : 'D');
    return s;
}

void assign_labels(QubitLedger& ledger) {
    ledger.labels.assign(ledger.pattern.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < ledger.pattern.size(); ++i)
        if (ledger.pattern[i] == Site::bright)
            ledger.labels[i] = next++;
}

void check_position(const QubitLedger& ledger, int pos, const char* what) {
    if (pos < 0 || pos >= static_cast<int>(ledger.size()))
        throw ValidationError(std::string(what) + " position " +
                              std::to_string(pos) + " out of range [0, " +
                              std::to_string(ledger.size()) + ")");
}

// All distinct windows of length len? Exact comparison via string views into
// a (doubled, for circular) pattern buffer.
bool windows_distinct(const std::string& buffer, int n_windows, int len) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(static_cast<std::size_t>(n_windows) * 2);
    for (int i = 0; i < n_windows; ++i) {
        const std::string_view w(buffer.data() + i,
                                 static_cast<std::size_t>(len));
        if (!seen.insert(w).second)
            return false;
    }
    return true;
}

} // namespace

int QubitLedger::bright_count() const {
    int c = 0;
    for (Site s : pattern)
        if (s == Site::bright)
            ++c;
    return c;
}

void QubitLedger::validate() const {
    if (labels.size() != pattern.size())
        throw ValidationError("ledger label array size mismatch");
    std::unordered_set<int> seen;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] == Site::bright) {
            if (labels[i] < 0)
                throw ValidationError("bright position " + std::to_string(i) +
                                      " is unlabeled");
            if (!seen.insert(labels[i]).second)
                throw ValidationError("duplicate label " +
                                      std::to_string(labels[i]));
        } else if (labels[i] != -1) {
            throw ValidationError("dark position " + std::to_string(i) +
                                  " carries a label");
        }
    }
}

CollisionEvent CollisionEvent::loss(int position, double time) {
    CollisionEvent e;
    e.kind = Kind::loss;
    e.position_a = position;
    e.time = time;
    return e;
}

CollisionEvent CollisionEvent::reorder(int a, int b, double time) {
    if (a == b)
        throw ValidationError("reorder positions must be distinct");
    CollisionEvent e;
    e.kind = Kind::reorder;
    e.position_a = a;
    e.position_b = b;
    e.time = time;
    return e;
}

std::string CollisionEvent::to_line() const {
    std::ostringstream os;
    if (kind == Kind::loss)
        os << "loss " << position_a << " " << time;
    else
        os << "reorder " << position_a << " " << position_b << " " << time;
    return os.str();
}

CollisionEvent CollisionEvent::from_line(const std::string& line) {
    std::istringstream is(line);
    std::string word;
    if (!(is >> word))
        throw ValidationError("empty event line");
    if (word == "loss") {
        int p = 0;
        double t = 0.0;
        if (!(is >> p))
            throw ValidationError("malformed loss line: '" + line + "'");
        is >> t;
        return loss(p, t);
    }
    if (word == "reorder") {
        int a = 0, b = 0;
        double t = 0.0;
        if (!(is >> a >> b))
            throw ValidationError("malformed reorder line: '" + line + "'");
        is >> t;
        return reorder(a, b, t);
    }
    throw ValidationError("unknown event kind '" + word + "'");
}

QubitLedger load_pattern(long n_ions, double dark_fraction,
                         std::uint64_t seed) {
    if (n_ions < 0)
        throw ValidationError("n_ions must be >= 0");
    if (dark_fraction < 0.0 || dark_fraction >= 1.0)
        throw DomainError("dark fraction must be in [0, 1)");
    QubitLedger ledger;
    ledger.pattern.reserve(static_cast<std::size_t>(n_ions));
    Rng rng(seed);
    for (long i = 0; i < n_ions; ++i)
        ledger.pattern.push_back(rng.bernoulli(dark_fraction) ? Site::dark
                                                              : Site::bright);
    assign_labels(ledger);
    std::ostringstream os;
    os << "load " << n_ions << " " << dark_fraction << " " << seed;
    ledger.event_log.push_back(os.str());
    return ledger;
}

std::optional<int> min_unique_window(const QubitLedger& ledger, bool circular) {
    const int n = static_cast<int>(ledger.size());
    if (n == 0)
        return std::nullopt;
    if (n == 1)
        return 1;

    std::string buffer = pattern_string(ledger.pattern);
    if (circular)
        buffer += buffer; // wrapped windows read straight through

    // distinctness is monotone in the window length, so binary search works:
    // equal (L+1)-windows at two positions imply equal L-windows there
    const int hi_limit = circular ? n : n - 1;
    auto distinct_at = [&](int len) {
        const int n_windows = circular ? n : n - len + 1;
        return windows_distinct(buffer, n_windows, len);
    };
    if (!distinct_at(hi_limit))
        return std::nullopt;
    int lo = 1, hi = hi_limit;
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (distinct_at(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

QubitLedger apply_event(const QubitLedger& ledger,
                        const CollisionEvent& event) {
    QubitLedger out = ledger;
    if (event.kind == CollisionEvent::Kind::loss) {
        check_position(ledger, event.position_a, "loss");
        out.pattern.erase(out.pattern.begin() + event.position_a);
        out.labels.erase(out.labels.begin() + event.position_a);
    } else {
        check_position(ledger, event.position_a, "reorder");
        check_position(ledger, event.position_b, "reorder");
        std::swap(out.pattern[event.position_a], out.pattern[event.position_b]);
        std::swap(out.labels[event.position_a], out.labels[event.position_b]);
    }
    out.event_log.push_back(event.to_line());
    return out;
}

ObservationFrame observe(const QubitLedger& chain, int start, int length,
                         double timestamp) {
    if (start < 0 || length < 1 ||
        start + length > static_cast<int>(chain.size()))
        throw ValidationError("observation window [" + std::to_string(start) +
                              ", " + std::to_string(start + length) +
                              ") outside chain of length " +
                              std::to_string(chain.size()));
    ObservationFrame frame;
    frame.start = start;
    frame.timestamp = timestamp;
    frame.window.assign(chain.pattern.begin() + start,
                        chain.pattern.begin() + start + length);
    return frame;
}

ObservationFrame observe_noisy(const QubitLedger& chain, int start, int length,
                               double flip_probability, std::uint64_t seed,
                               double timestamp) {
    ObservationFrame frame = observe(chain, start, length, timestamp);
    Rng rng(seed);
    for (auto& site : frame.window)
        if (rng.bernoulli(flip_probability))
            site = (site == Site::bright) ? Site::dark : Site::bright;
    return frame;
}

namespace {

void collect_label(std::vector<int>& labels, const QubitLedger& ledger,
                   int pos) {
    if (ledger.pattern[pos] == Site::bright)
        labels.push_back(ledger.labels[pos]);
}

} // namespace

MismatchReport detect_mismatch(const QubitLedger& believed,
                               const ObservationFrame& frame) {
    believed.validate();
    const int n = static_cast<int>(believed.size());
    const int w = static_cast<int>(frame.window.size());
    if (w < 1)
        throw ValidationError("empty observation window");
    if (frame.start < 0)
        throw ValidationError("negative window start");

    const auto muw = min_unique_window(believed);
    const bool full_view = frame.start == 0 && w >= n - 1;
    if (!full_view) {
        if (!muw)
            throw AmbiguityError(
                "believed pattern has no unique window length; only a "
                "full-chain view can be aligned");
        if (w < *muw)
            throw AmbiguityError("window of length " + std::to_string(w) +
                                 " is below the uniqueness length " +
                                 std::to_string(*muw));
    }

    MismatchReport report;

    // consistent when the believed pattern reproduces the window exactly
    if (frame.start + w <= n &&
        std::equal(frame.window.begin(), frame.window.end(),
                   believed.pattern.begin() + frame.start)) {
        report.status = MismatchReport::Status::consistent;
        return report;
    }

    report.status = MismatchReport::Status::mismatch;

    // single-event hypothesis search
    std::vector<int> loss_labels, reorder_labels;
    bool any_loss = false, any_reorder = false;

    // loss at p: the shortened chain must still contain the window, and only
    // p below the window end changes the view (p past it leaves the window
    // equal to the believed one, which was already ruled out)
    if (frame.start + w + 1 <= n) {
        for (int p = 0; p < frame.start + w; ++p) {
            bool match = true;
            for (int i = 0; i < w && match; ++i) {
                const int src = frame.start + i < p ? frame.start + i
                                                    : frame.start + i + 1;
                if (believed.pattern[src] != frame.window[i])
                    match = false;
            }
            if (match) {
                any_loss = true;
                collect_label(loss_labels, believed, p);
            }
        }
    }

    // reorder hypotheses: a single swap changes exactly the two swapped
    // positions, so the in-window difference set must have size 1 or 2
    if (frame.start + w <= n) {
        std::vector<int> diffs;
        for (int i = 0; i < w; ++i)
            if (believed.pattern[frame.start + i] != frame.window[i])
                diffs.push_back(frame.start + i);
        if (diffs.size() == 2) {
            const int p = diffs[0], q = diffs[1];
            if (believed.pattern[p] != believed.pattern[q]) {
                any_reorder = true;
                collect_label(reorder_labels, believed, p);
                collect_label(reorder_labels, believed, q);
            }
        } else if (diffs.size() == 1) {
            const int p = diffs[0];
            const Site observed = frame.window[p - frame.start];
            for (int q = 0; q < n; ++q) {
                const bool inside = q >= frame.start && q < frame.start + w;
                if (inside || believed.pattern[q] != observed)
                    continue;
                any_reorder = true;
                collect_label(reorder_labels, believed, p);
                collect_label(reorder_labels, believed, q);
            }
        }
    }

    if (any_loss && !any_reorder) {
        report.hypothesis = MismatchReport::Hypothesis::loss;
        report.affected_labels = std::move(loss_labels);
    } else if (any_reorder && !any_loss) {
        report.hypothesis = MismatchReport::Hypothesis::reorder;
        report.affected_labels = std::move(reorder_labels);
    } else if (any_loss && any_reorder) {
        report.hypothesis = MismatchReport::Hypothesis::unknown;
        report.affected_labels = std::move(loss_labels);
        report.affected_labels.insert(report.affected_labels.end(),
                                      reorder_labels.begin(),
                                      reorder_labels.end());
    } else {
        // no single event explains the window: flag everything in view
        report.hypothesis = MismatchReport::Hypothesis::unknown;
        for (int i = 0; i < w && frame.start + i < n; ++i)
            collect_label(report.affected_labels, believed, frame.start + i);
    }

    std::sort(report.affected_labels.begin(), report.affected_labels.end());
    report.affected_labels.erase(std::unique(report.affected_labels.begin(),
                                             report.affected_labels.end()),
                                 report.affected_labels.end());
    return report;
}

QubitLedger reencode(const QubitLedger& ledger) {
    QubitLedger out = ledger;
    assign_labels(out);
    out.generation = ledger.generation + 1;
    out.event_log.push_back("reencode " + std::to_string(out.generation));
    return out;
}

void write_log(std::ostream& os, const QubitLedger& ledger) {
    os << "pattern " << pattern_string(ledger.pattern) << "\n";
    for (const auto& line : ledger.event_log)
        if (line.rfind("loss", 0) == 0 || line.rfind("reorder", 0) == 0)
            os << line << "\n";
}

QubitLedger replay_log(std::istream& is) {
    std::string line;
    QubitLedger ledger;
    bool have_pattern = false;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        if (line.rfind("pattern ", 0) == 0) {
            ledger.pattern.clear();
            for (char c : line.substr(8)) {
                if (c == 'B')
                    ledger.pattern.push_back(Site::bright);
                else if (c == 'D')
                    ledger.pattern.push_back(Site::dark);
                else if (!std::isspace(static_cast<unsigned char>(c)))
                    throw ValidationError("bad pattern character '" +
                                          std::string(1, c) + "'");
            }
            assign_labels(ledger);
            have_pattern = true;
        } else {
            if (!have_pattern)
                throw ValidationError("event before pattern in replay log");
            ledger = apply_event(ledger, CollisionEvent::from_line(line));
        }
    }
    if (!have_pattern)
        throw ValidationError("replay log has no pattern line");
    return ledger;
}

} // namespace ringqc::tracking
