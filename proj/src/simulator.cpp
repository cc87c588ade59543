#include "risknet/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "risknet/error.hpp"
#include "risknet/parallel.hpp"
#include "risknet/reliability.hpp"

namespace risknet {

SimState SimState::initial(const Scenario& scenario) {
    SimState s;
    s.component_up.assign(static_cast<std::size_t>(scenario.topology.n_links()), 1);
    s.allocations.assign(static_cast<std::size_t>(scenario.topology.n_links()), 0.0);
    s.slas.assign(scenario.slas.size(), SlaState{});
    return s;
}

namespace {

bool path_up(const SimState& state, const Path& path) {
    for (LinkId l : path)
        if (!state.component_up[static_cast<std::size_t>(l)]) return false;
    return true;
}

}  // namespace

void resolve_slas(SimState& state, const Scenario& scenario, double now,
                  std::vector<DownInterval>* closed) {
    const auto& slas = scenario.slas;
    auto close = [&](std::size_t k) {
        if (closed && now > state.slas[k].down_since)
            closed->push_back({static_cast<int>(k), state.slas[k].down_since, now});
    };

    std::vector<char> working_up(slas.size());
    for (std::size_t k = 0; k < slas.size(); ++k) {
        SlaState& s = state.slas[k];
        working_up[k] = path_up(state, slas[k].working);
        if (working_up[k]) {
            if (s.status == SlaStatus::Down) close(k);
            s.status = SlaStatus::OnWorking;
        } else if (s.status == SlaStatus::OnBackup && !path_up(state, slas[k].backup)) {
            // Lost its backup; re-enters resolution below as if newly failed.
            s.status = SlaStatus::OnWorking;
        }
    }

    // Rebuild the ledger from the SLAs that keep their backup, in id order.
    std::fill(state.allocations.begin(), state.allocations.end(), 0.0);
    for (std::size_t k = 0; k < slas.size(); ++k)
        if (state.slas[k].status == SlaStatus::OnBackup)
            for (LinkId l : slas[k].backup) state.allocations[static_cast<std::size_t>(l)] += slas[k].demand;

    const Topology& topo = scenario.topology;
    for (std::size_t k = 0; k < slas.size(); ++k) {
        SlaState& s = state.slas[k];
        if (working_up[k] || s.status == SlaStatus::OnBackup) continue;
        const Sla& sla = slas[k];
        bool feasible = path_up(state, sla.backup);
        for (std::size_t i = 0; feasible && i < sla.backup.size(); ++i) {
            const auto l = static_cast<std::size_t>(sla.backup[i]);
            feasible = state.allocations[l] + sla.demand <=
                       topo.link(sla.backup[i]).backup_capacity + kCapacitySlack;
        }
        if (feasible) {
            for (LinkId l : sla.backup) state.allocations[static_cast<std::size_t>(l)] += sla.demand;
            if (s.status == SlaStatus::Down) close(k);
            s.status = SlaStatus::OnBackup;
        } else if (s.status != SlaStatus::Down) {
            s.status = SlaStatus::Down;
            s.down_since = now;
        }
    }
}

void check_state(const SimState& state, const Scenario& scenario) {
    std::vector<double> expected(state.allocations.size(), 0.0);
    for (std::size_t k = 0; k < scenario.slas.size(); ++k) {
        const Sla& sla = scenario.slas[k];
        if (state.slas[k].status == SlaStatus::OnBackup) {
            if (!path_up(state, sla.backup)) throw std::logic_error("OnBackup SLA with a failed backup link");
            for (LinkId l : sla.backup) expected[static_cast<std::size_t>(l)] += sla.demand;
        }
        if (state.slas[k].status == SlaStatus::OnWorking && !path_up(state, sla.working))
            throw std::logic_error("OnWorking SLA with a failed working link");
    }
    for (std::size_t l = 0; l < expected.size(); ++l) {
        const double cap = scenario.topology.link(static_cast<LinkId>(l)).backup_capacity;
        if (state.allocations[l] < -kCapacitySlack || state.allocations[l] > cap + kCapacitySlack)
            throw std::logic_error("backup allocation out of bounds on link " + std::to_string(l));
        if (std::abs(state.allocations[l] - expected[l]) > kCapacitySlack * (1.0 + expected[l]))
            throw std::logic_error("allocation ledger mismatch on link " + std::to_string(l));
    }
}

PenaltyTable::PenaltyTable(int years, int n_slas)
    : years_(years), n_slas_(n_slas),
      values_(static_cast<std::size_t>(std::max(years, 0)) * static_cast<std::size_t>(std::max(n_slas, 0)), 0.0) {
    if (years < 0 || n_slas < 0) throw ParameterError("penalty table dimensions must be non-negative");
}

std::size_t PenaltyTable::index(int year, int sla) const {
    if (year < 0 || year >= years_ || sla < 0 || sla >= n_slas_)
        throw std::out_of_range("penalty table index out of range");
    return static_cast<std::size_t>(year) * static_cast<std::size_t>(n_slas_) + static_cast<std::size_t>(sla);
}

double PenaltyTable::total() const {
    double t = 0.0;
    for (double v : values_) t += v;
    return t;
}

void add_down_interval(PenaltyTable& table, int sla, double start, double end, double rate) {
    if (!(end > start)) return;
    auto year = static_cast<long long>(std::floor(start / kHoursPerYear));
    while (start < end) {
        const double boundary = static_cast<double>(year + 1) * kHoursPerYear;
        const double seg_end = std::min(end, boundary);
        if (year >= 0 && year < table.years())
            table.at(static_cast<int>(year), sla) += rate * (seg_end - start);
        start = seg_end;
        ++year;
    }
}

namespace {

// Event loop shared by the random and the scheduled drivers.
class Engine {
public:
    Engine(const Scenario& scenario, PenaltyTable& table, bool check)
        : scenario_(scenario), table_(table), check_(check), state_(SimState::initial(scenario)),
          down_since_(static_cast<std::size_t>(scenario.topology.n_links()), 0.0),
          link_down_hours_(static_cast<std::size_t>(scenario.topology.n_links()), 0.0) {}

    void apply(const Event& e, bool record) {
        const auto l = static_cast<std::size_t>(e.component);
        if (e.kind == EventKind::Fail) {
            if (!state_.component_up[l]) throw ParameterError("link failed while already down");
            state_.component_up[l] = 0;
            down_since_[l] = e.time;
        } else {
            if (state_.component_up[l]) throw ParameterError("link repaired while up");
            state_.component_up[l] = 1;
            link_down_hours_[l] += e.time - down_since_[l];
            if (record) outages_.push_back({e.component, down_since_[l], e.time});
        }
    }

    void resolve(double now) {
        closed_.clear();
        resolve_slas(state_, scenario_, now, &closed_);
        book(closed_);
        if (check_) check_state(state_, scenario_);
    }

    void finish(double end, bool record) {
        closed_.clear();
        for (std::size_t k = 0; k < state_.slas.size(); ++k)
            if (state_.slas[k].status == SlaStatus::Down && end > state_.slas[k].down_since)
                closed_.push_back({static_cast<int>(k), state_.slas[k].down_since, end});
        book(closed_);
        for (std::size_t l = 0; l < down_since_.size(); ++l) {
            if (state_.component_up[l]) continue;
            link_down_hours_[l] += end - down_since_[l];
            if (record) outages_.push_back({static_cast<LinkId>(l), down_since_[l], end});
        }
    }

    const std::vector<double>& link_down_hours() const { return link_down_hours_; }
    std::vector<Outage>& outages() { return outages_; }

private:
    void book(const std::vector<DownInterval>& intervals) {
        for (const DownInterval& d : intervals) {
            const double rate = scenario_.slas[static_cast<std::size_t>(d.sla)].demand * scenario_.penalty_rate;
            add_down_interval(table_, d.sla, d.start, d.end, rate);
        }
    }

    const Scenario& scenario_;
    PenaltyTable& table_;
    bool check_;
    SimState state_;
    std::vector<double> down_since_;
    std::vector<double> link_down_hours_;
    std::vector<Outage> outages_;
    std::vector<DownInterval> closed_;
};

struct BlockResult {
    std::vector<double> link_down_hours;
    std::vector<Outage> outages;
};

using Clock = std::chrono::steady_clock;

BlockResult run_random_block(const Scenario& scenario, const SimulationOptions& opt, int block,
                             PenaltyTable& table, Clock::time_point deadline) {
    const double t0 = static_cast<double>(block) * opt.block_years * kHoursPerYear;
    const double t1 = static_cast<double>(std::min(opt.years, (block + 1) * opt.block_years)) * kHoursPerYear;
    const Rng block_rng(derive_seed(opt.seed, {static_cast<std::uint64_t>(block)}));
    const auto n_links = static_cast<std::size_t>(scenario.topology.n_links());

    // One renewal stream per link.
    std::vector<Rng> streams;
    streams.reserve(n_links);
    for (std::size_t l = 0; l < n_links; ++l) streams.push_back(block_rng.split(l));

    std::priority_queue<Event, std::vector<Event>, decltype([](const Event& a, const Event& b) { return b < a; })> queue;
    for (std::size_t l = 0; l < n_links; ++l)
        queue.push({t0 + sample_uptime(scenario.reliability[l], streams[l]), EventKind::Fail, static_cast<LinkId>(l)});

    Engine engine(scenario, table, opt.check_invariants);
    std::size_t batches = 0;
    while (!queue.empty() && queue.top().time < t1) {
        const double now = queue.top().time;
        while (!queue.empty() && queue.top().time == now) {
            const Event e = queue.top();
            queue.pop();
            engine.apply(e, opt.record_outages);
            const auto l = static_cast<std::size_t>(e.component);
            if (e.kind == EventKind::Fail)
                queue.push({now + sample_downtime(scenario.reliability[l], streams[l]), EventKind::Repair, e.component});
            else
                queue.push({now + sample_uptime(scenario.reliability[l], streams[l]), EventKind::Fail, e.component});
        }
        engine.resolve(now);
        if (opt.max_seconds > 0.0 && (++batches & 1023) == 0 && Clock::now() > deadline)
            throw SimulationTimeout("simulation exceeded " + std::to_string(opt.max_seconds) + " s");
    }
    engine.finish(t1, opt.record_outages);
    return {engine.link_down_hours(), std::move(engine.outages())};
}

void sort_outages(std::vector<Outage>& outages) {
    std::sort(outages.begin(), outages.end(), [](const Outage& a, const Outage& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.link < b.link;
    });
}

}  // namespace

SimulationResult simulate(const Scenario& scenario, const SimulationOptions& options) {
    if (options.years < 1) throw ParameterError("years must be >= 1");
    if (options.block_years < 1) throw ParameterError("block_years must be >= 1");
    validate_scenario(scenario);

    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(options.max_seconds));
    SimulationResult result;
    result.penalties = PenaltyTable(options.years, static_cast<int>(scenario.slas.size()));
    result.horizon_hours = options.years * kHoursPerYear;
    const int n_blocks = (options.years + options.block_years - 1) / options.block_years;

    // Blocks own disjoint year rows of the table, so they can write in place.
    std::vector<BlockResult> blocks(static_cast<std::size_t>(n_blocks));
    parallel_for(blocks.size(), options.threads, [&](std::size_t b) {
        blocks[b] = run_random_block(scenario, options, static_cast<int>(b), result.penalties, deadline);
    });

    result.link_down_hours.assign(static_cast<std::size_t>(scenario.topology.n_links()), 0.0);
    for (const BlockResult& b : blocks) {
        for (std::size_t l = 0; l < b.link_down_hours.size(); ++l) result.link_down_hours[l] += b.link_down_hours[l];
        result.outages.insert(result.outages.end(), b.outages.begin(), b.outages.end());
    }
    sort_outages(result.outages);
    return result;
}

SimulationResult simulate_schedule(const Scenario& scenario, const std::vector<Outage>& outages,
                                   int years, bool check_invariants) {
    if (years < 1) throw ParameterError("years must be >= 1");
    validate_scenario(scenario);
    const double horizon = years * kHoursPerYear;

    std::vector<Event> events;
    for (const Outage& o : outages) {
        if (o.link < 0 || o.link >= scenario.topology.n_links()) throw ParameterError("outage on unknown link");
        if (!(o.end > o.start) || o.start < 0.0) throw ParameterError("outage interval must be positive");
        events.push_back({o.start, EventKind::Fail, o.link});
        events.push_back({o.end, EventKind::Repair, o.link});
    }
    std::sort(events.begin(), events.end());

    SimulationResult result;
    result.penalties = PenaltyTable(years, static_cast<int>(scenario.slas.size()));
    result.horizon_hours = horizon;
    Engine engine(scenario, result.penalties, check_invariants);
    std::size_t i = 0;
    while (i < events.size() && events[i].time < horizon) {
        const double now = events[i].time;
        for (; i < events.size() && events[i].time == now; ++i) engine.apply(events[i], true);
        engine.resolve(now);
    }
    engine.finish(horizon, true);
    result.link_down_hours = engine.link_down_hours();
    result.outages = std::move(engine.outages());
    sort_outages(result.outages);
    return result;
}

std::string penalty_table_to_csv(const PenaltyTable& table, bool dense) {
    std::ostringstream out;
    out << "year,sla_id,penalty\n";
    std::size_t rows = 0;
    char buf[64];
    for (int y = 0; y < table.years(); ++y) {
        for (int k = 0; k < table.n_slas(); ++k) {
            const double v = table.at(y, k);
            if (!dense && v == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << y << ',' << k << ',' << buf << '\n';
            ++rows;
        }
    }
    out << "# rows=" << rows << " years=" << table.years() << " slas=" << table.n_slas() << '\n';
    return out.str();
}

PenaltyTable penalty_table_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "year,sla_id,penalty") throw ParseError("penalty CSV: bad header");
    struct Row {
        int year, sla;
        double value;
    };
    std::vector<Row> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            long long n = -1;
            int years = -1, slas = -1;
            if (std::sscanf(line.c_str(), "# rows=%lld years=%d slas=%d", &n, &years, &slas) != 3)
                throw ParseError("penalty CSV: bad footer at line " + std::to_string(line_no));
            if (n != static_cast<long long>(rows.size()))
                throw ParseError("penalty CSV: footer row count does not match");
            PenaltyTable table(years, slas);
            for (const Row& r : rows) {
                if (r.year < 0 || r.year >= years || r.sla < 0 || r.sla >= slas)
                    throw ParseError("penalty CSV: entry outside table dimensions");
                table.at(r.year, r.sla) = r.value;
            }
            return table;
        }
        Row r{};
        char tail = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf%c", &r.year, &r.sla, &r.value, &tail) != 3 ||
            !std::isfinite(r.value) || r.value < 0.0)
            throw ParseError("penalty CSV: bad row at line " + std::to_string(line_no));
        rows.push_back(r);
    }
    throw ParseError("penalty CSV: missing footer");
}

}  // namespace risknet
