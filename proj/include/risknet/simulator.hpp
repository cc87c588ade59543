#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risknet/provisioning.hpp"

namespace risknet {

enum class EventKind { Repair = 0, Fail = 1 };

/// Ordered by time, then Repair before Fail, then ascending link id.
struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Fail;
    LinkId component = 0;
    bool operator<(const Event& o) const {
        if (time != o.time) return time < o.time;
        if (kind != o.kind) return kind < o.kind;
        return component < o.component;
    }
    bool operator==(const Event&) const = default;
};

enum class SlaStatus { OnWorking, OnBackup, Down };

struct SlaState {
    SlaStatus status = SlaStatus::OnWorking;
    double down_since = 0.0;
};

struct SimState {
    std::vector<char> component_up;
    std::vector<double> allocations;  // consumed backup capacity per link
    std::vector<SlaState> slas;

    static SimState initial(const Scenario& scenario);
};

/// An SLA's closed Down interval, in hours.
struct DownInterval {
    int sla = 0;
    double start = 0.0;
    double end = 0.0;
};

/// Absolute slack when comparing allocations against capacities.
inline constexpr double kCapacitySlack = 1e-9;

/// Deterministic re-resolution after a change of component states at `now`:
/// SLAs with an intact working path go (back) to it and free their backup
/// allocation; OnBackup SLAs whose backup lost a link release it; then every
/// remaining SLA in ascending id either allocates its demand on all backup
/// links or is Down. No preemption. Closed Down intervals are appended to
/// `closed` when given.
void resolve_slas(SimState& state, const Scenario& scenario, double now,
                  std::vector<DownInterval>* closed = nullptr);

/// Throws std::logic_error if allocations exceed capacity or disagree with
/// the set of OnBackup SLAs.
void check_state(const SimState& state, const Scenario& scenario);

/// Dense penalties[year][sla] in monetary units.
class PenaltyTable {
public:
    PenaltyTable() = default;
    PenaltyTable(int years, int n_slas);

    int years() const { return years_; }
    int n_slas() const { return n_slas_; }
    double at(int year, int sla) const { return values_[index(year, sla)]; }
    double& at(int year, int sla) { return values_[index(year, sla)]; }
    const std::vector<double>& values() const { return values_; }
    double total() const;
    bool operator==(const PenaltyTable&) const = default;

private:
    std::size_t index(int year, int sla) const;
    int years_ = 0;
    int n_slas_ = 0;
    std::vector<double> values_;
};

/// Adds rate * (end - start) to the table, split exactly at multiples of
/// 8760 h. Portions outside the table's years are dropped.
void add_down_interval(PenaltyTable& table, int sla, double start, double end, double rate);

/// A scheduled outage of one link on [start, end).
struct Outage {
    LinkId link = 0;
    double start = 0.0;
    double end = 0.0;
};

struct SimulationOptions {
    int years = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    int block_years = 10;           // replica block length; fixed independently of threads
    bool record_outages = false;
    bool check_invariants = false;
    double max_seconds = 0.0;       // 0 disables the wall-clock limit
};

struct SimulationResult {
    PenaltyTable penalties;
    std::vector<double> link_down_hours;  // total downtime per link
    std::vector<Outage> outages;          // only when recorded, sorted by (start, link)
    double horizon_hours = 0.0;
};

/// Alternating-renewal failure process per link (fresh up-time at the start
/// of every block), SBPP failover, and per-SLA annual penalties.
SimulationResult simulate(const Scenario& scenario, const SimulationOptions& options);

/// Same engine driven by a fixed outage schedule instead of random sampling.
/// Outages of one link must not overlap.
SimulationResult simulate_schedule(const Scenario& scenario, const std::vector<Outage>& outages,
                                   int years, bool check_invariants = true);

/// PenaltyTable CSV: header "year,sla_id,penalty", one row per nonzero entry
/// (or every entry when dense), then a footer "# rows=N years=Y slas=S".
std::string penalty_table_to_csv(const PenaltyTable& table, bool dense = false);
PenaltyTable penalty_table_from_csv(const std::string& text);

}  // namespace risknet
