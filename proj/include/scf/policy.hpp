#pragma once

#include <vector>

#include "scf/fusion.hpp"

namespace scf {

// Per-block reuse scheme, encoded as the relative cut position per
// segment. In a decreasing segment the first L_j blocks run row-reuse;
// in an increasing segment the first L_j blocks run frame-reuse. Either
// way the frame side touches the small-feature end, and L_j = 0..N_j
// spans all-frame..all-row for that segment.
struct ReusePolicy {
    std::vector<int> cuts;              // one per segment, 0..N_j
    std::vector<Scheme> block_scheme;   // derived, one per block
    std::vector<bool> forced_row;       // allocator-rejected blocks

    Scheme scheme_of_block(int b) const { return block_scheme[size_t(b)]; }
};

inline ReusePolicy make_policy(const SegmentPlan& plan,
                               const std::vector<Block>& blocks,
                               const std::vector<int>& cuts) {
    ReusePolicy p;
    p.cuts = cuts;
    p.block_scheme.assign(blocks.size(), Scheme::frame_reuse);
    p.forced_row.assign(blocks.size(), false);
    for (size_t s = 0; s < plan.segments.size(); s++) {
        const auto& seg = plan.segments[s];
        int cut = cuts.at(s);
        for (int i = 0; i < seg.n_blocks; i++) {
            bool row = seg.increasing ? (i >= cut) : (i < cut);
            p.block_scheme[size_t(seg.first_block + i)] =
                row ? Scheme::row_reuse : Scheme::frame_reuse;
        }
    }
    return p;
}

inline std::vector<int> all_row_cuts(const SegmentPlan& plan) {
    std::vector<int> cuts;
    for (const auto& seg : plan.segments)
        cuts.push_back(seg.increasing ? 0 : seg.n_blocks);
    return cuts;
}

inline std::vector<int> all_frame_cuts(const SegmentPlan& plan) {
    std::vector<int> cuts;
    for (const auto& seg : plan.segments)
        cuts.push_back(seg.increasing ? seg.n_blocks : 0);
    return cuts;
}

// Direct per-block assignment, used by the exhaustive oracle.
inline ReusePolicy policy_from_schemes(std::vector<Scheme> schemes) {
    ReusePolicy p;
    p.block_scheme = std::move(schemes);
    p.forced_row.assign(p.block_scheme.size(), false);
    return p;
}

inline void apply_forced_row(ReusePolicy& p) {
    for (size_t b = 0; b < p.block_scheme.size(); b++)
        if (p.forced_row[b]) p.block_scheme[b] = Scheme::row_reuse;
}

inline Scheme scheme_of_group(const ReusePolicy& p,
                              const std::vector<Block>& blocks,
                              const std::vector<int>& block_of_group,
                              int group_id) {
    (void)blocks;
    return p.block_scheme[size_t(block_of_group[size_t(group_id)])];
}

// group id -> block id lookup table
inline std::vector<int> group_block_index(const GroupedGraph& gg,
                                          const std::vector<Block>& blocks) {
    std::vector<int> idx(gg.groups.size(), -1);
    for (const auto& b : blocks)
        for (int gi : b.group_ids) idx[size_t(gi)] = b.block_id;
    return idx;
}

}  // namespace scf
