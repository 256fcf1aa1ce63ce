#pragma once

#include <limits>
#include <sstream>

#include "scf/latency.hpp"

namespace scf {

struct PolicyEval {
    ReusePolicy policy;
    BufferAssignment assignment;
    BufferRequirements bufs;
    long long dram_fm = 0;
    long long total_dram_bytes = 0;
    long long latency_cycles = 0;
    double latency_ms = 0.0;
    double gops = 0.0;
    bool feasible = true;
    std::string violated;
};

inline PolicyEval evaluate_policy(ReusePolicy policy, const GroupedGraph& gg,
                                  const std::vector<Block>& blocks,
                                  const NetworkGraph& g, const HwConfig& hw,
                                  bool with_latency = true) {
    PolicyEval ev;
    ev.assignment = resolve_assignment(gg, blocks, policy, g, hw);
    ev.policy = std::move(policy);
    ev.bufs = required_buffer_sizes(ev.policy, ev.assignment, gg, blocks, g, hw);
    ev.dram_fm = dram_feature_access(ev.policy, gg, blocks, g, hw);
    ev.total_dram_bytes = ev.dram_fm + total_weight_bytes(g, hw);
    if (hw.bram_budget > 0 && ev.bufs.bram18k_total >= hw.bram_budget) {
        ev.feasible = false;
        ev.violated = "bram18k";
    }
    if (hw.mac_budget > 0 && hw.n_mac() > hw.mac_budget) {
        ev.feasible = false;
        ev.violated = "mac_count";
    }
    if (with_latency) {
        LatencyReport rep =
            simulate_network(ev.policy, ev.assignment, gg, blocks, g, hw);
        ev.latency_cycles = rep.total_cycles;
        ev.latency_ms = rep.seconds * 1e3;
        ev.gops = rep.gops;
    }
    return ev;
}

namespace detail {

// (latency, sram, lexicographic cuts) — deterministic total order
inline bool better(const PolicyEval& a, const std::vector<int>& ca,
                   const PolicyEval& b, const std::vector<int>& cb) {
    if (a.latency_cycles != b.latency_cycles)
        return a.latency_cycles < b.latency_cycles;
    if (a.bufs.sram_total != b.bufs.sram_total)
        return a.bufs.sram_total < b.bufs.sram_total;
    return ca < cb;
}

template <typename Fn>
inline void for_each_cut_tuple(const SegmentPlan& plan, Fn&& fn) {
    std::vector<int> cuts(plan.segments.size(), 0);
    while (true) {
        fn(cuts);
        size_t d = 0;
        while (d < cuts.size()) {
            if (++cuts[d] <= plan.segments[d].n_blocks) break;
            cuts[d] = 0;
            d++;
        }
        if (d == cuts.size()) break;
    }
    if (plan.segments.empty()) fn(cuts);
}

}  // namespace detail

struct SearchResult {
    std::vector<int> cuts;
    PolicyEval eval;
    long long candidates = 0;
};

// Exhaustive search over all cut-point tuples (O(N^k) candidates),
// minimizing simulated latency subject to the BRAM and MAC budgets.
inline SearchResult search_cut_points(const NetworkGraph& g,
                                      const GroupedGraph& gg,
                                      const std::vector<Block>& blocks,
                                      const SegmentPlan& plan,
                                      const HwConfig& hw) {
    SearchResult best;
    bool found = false;
    long long min_bram = std::numeric_limits<long long>::max();
    detail::for_each_cut_tuple(plan, [&](const std::vector<int>& cuts) {
        best.candidates++;
        PolicyEval ev =
            evaluate_policy(make_policy(plan, blocks, cuts), gg, blocks, g, hw);
        min_bram = std::min(min_bram, ev.bufs.bram18k_total);
        if (!ev.feasible) return;
        if (!found || detail::better(ev, cuts, best.eval, best.cuts)) {
            best.cuts = cuts;
            best.eval = std::move(ev);
            found = true;
        }
    });
    if (!found) {
        std::ostringstream msg;
        msg << "no feasible cut-point tuple: smallest candidate needs "
            << min_bram << " BRAM18K against budget " << hw.bram_budget;
        throw InfeasibleError("bram18k", msg.str());
    }
    return best;
}

// Global optimum over all 2^N per-block scheme assignments; the reference
// the coarse-grained cut-point relaxation is measured against.
inline SearchResult exhaustive_policy_oracle(const NetworkGraph& g,
                                             const GroupedGraph& gg,
                                             const std::vector<Block>& blocks,
                                             const HwConfig& hw) {
    const size_t n = blocks.size();
    if (n > 14)
        throw GraphError("exhaustive oracle refuses graphs with more than "
                         "14 blocks (got " +
                         std::to_string(n) + ")");
    SearchResult best;
    bool found = false;
    for (unsigned long mask = 0; mask < (1UL << n); mask++) {
        best.candidates++;
        std::vector<Scheme> schemes(n, Scheme::frame_reuse);
        std::vector<int> key(n, 0);
        for (size_t b = 0; b < n; b++)
            if (mask & (1UL << b)) {
                schemes[b] = Scheme::row_reuse;
                key[b] = 1;
            }
        PolicyEval ev = evaluate_policy(policy_from_schemes(std::move(schemes)),
                                        gg, blocks, g, hw);
        if (!ev.feasible) continue;
        if (!found || detail::better(ev, key, best.eval, best.cuts)) {
            best.cuts = key;
            best.eval = std::move(ev);
            found = true;
        }
    }
    if (!found)
        throw InfeasibleError("bram18k", "no feasible block assignment");
    return best;
}

// Smallest raw SRAM meeting the DRAM-access constraints (weights once,
// features at most once — every cut tuple satisfies both by
// construction, so this is the minimum over the whole tuple space).
inline SearchResult minimum_buffer_search(const NetworkGraph& g,
                                          const GroupedGraph& gg,
                                          const std::vector<Block>& blocks,
                                          const SegmentPlan& plan,
                                          const HwConfig& hw) {
    HwConfig unconstrained = hw;
    unconstrained.bram_budget = 0;
    unconstrained.mac_budget = 0;
    SearchResult best;
    bool found = false;
    detail::for_each_cut_tuple(plan, [&](const std::vector<int>& cuts) {
        best.candidates++;
        PolicyEval ev = evaluate_policy(make_policy(plan, blocks, cuts), gg,
                                        blocks, g, unconstrained,
                                        /*with_latency=*/false);
        bool better_min =
            !found || ev.bufs.sram_total < best.eval.bufs.sram_total ||
            (ev.bufs.sram_total == best.eval.bufs.sram_total &&
             cuts < best.cuts);
        if (better_min) {
            best.cuts = cuts;
            best.eval = std::move(ev);
            found = true;
        }
    });
    return best;
}

}  // namespace scf
