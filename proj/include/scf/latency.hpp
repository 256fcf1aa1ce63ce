#pragma once

#include <vector>

#include "scf/cost_model.hpp"

namespace scf {

struct TraceEvent {
    int layer = 0;
    char dir = 'R';  // 'R' read, 'W' write
    long long bytes = 0;
};

struct GroupTiming {
    int group_id = 0;
    Scheme scheme = Scheme::frame_reuse;
    long long compute_cycles = 0;  // includes the per-group setup
    long long memory_cycles = 0;
    long long total_cycles = 0;
};

struct LatencyReport {
    std::vector<GroupTiming> groups;
    long long total_cycles = 0;
    double seconds = 0.0;
    double gops = 0.0;
    std::vector<TraceEvent> trace;
    long long trace_feature_bytes = 0;
};

namespace detail {

inline long long conv_compute_cycles(const LayerNode& l, const HwConfig& hw) {
    long long tiles = ceil_div(l.out_c, hw.to) * ceil_div(l.in_c, hw.ti);
    long long ops = tiles * l.out_w * l.out_h * l.kernel * l.kernel;
    // the shared MAC array retires double multiplications for normal
    // convolutions, single for depthwise (and the SE scale layer)
    int throughput =
        (l.kind == LayerKind::dwconv || l.kind == LayerKind::scale) ? 1 : 2;
    return ceil_div(ops, throughput);
}

inline long long group_compute_cycles(const NetworkGraph& g,
                                      const NodeGroup& grp,
                                      const HwConfig& hw) {
    if (grp.conv_layer >= 0)
        return conv_compute_cycles(g.layer(grp.conv_layer), hw);
    const LayerNode& head = group_in_layer(g, grp);
    switch (head.kind) {
        case LayerKind::concat:
            return 0;
        case LayerKind::avgpool_global:
            return ceil_div(head.in_c, hw.to) * head.in_w * head.in_h;
        default:
            return ceil_div(head.out_c, hw.to) * head.out_w * head.out_h;
    }
}

}  // namespace detail

// Deterministic cycle and off-chip-traffic model of one group. Compute
// and memory overlap; the per-group total is their max plus a drain of
// one cycle per output row in row-reuse mode (the row pipeline cannot
// hide the final writeback). Row reuse re-reads the weight blocks once
// per output row, frame reuse loads them once.
inline GroupTiming simulate_group(const NodeGroup& grp, Scheme scheme,
                                  const GroupedGraph& gg,
                                  const std::vector<Block>& blocks,
                                  const ReusePolicy& policy,
                                  const NetworkGraph& g, const HwConfig& hw,
                                  std::vector<TraceEvent>* trace = nullptr) {
    const auto blk_of = group_block_index(gg, blocks);
    auto producer_scheme = [&](int producer) {
        return producer < 0
                   ? Scheme::row_reuse
                   : policy.block_scheme[size_t(blk_of[size_t(producer)])];
    };
    GroupTiming t;
    t.group_id = grp.group_id;
    t.scheme = scheme;

    const LayerNode& head = group_in_layer(g, grp);
    const LayerNode& out = group_out_layer(g, grp);
    if (out.out_w * out.out_h == 0) return t;

    GroupOperands op = group_operands(gg, g, grp);
    long long feature_bytes = 0;
    long long weight_bytes = 0;
    auto emit = [&](char dir, long long bytes, int layer) {
        if (bytes <= 0) return;
        feature_bytes += bytes;
        if (trace) trace->push_back({layer, dir, bytes});
    };

    bool is_concat = head.kind == LayerKind::concat;
    if (scheme == Scheme::row_reuse) {
        if (!is_concat) {
            emit('R', group_in_bytes(g, grp, hw), grp.first_layer);
            if (op.shortcut >= 0)
                emit('R', group_out_bytes(g, gg.groups[size_t(op.shortcut)], hw),
                     grp.eltwise_layer >= 0 ? grp.eltwise_layer
                                            : grp.first_layer);
            emit('W', group_out_bytes(g, grp, hw), grp.last_layer);
        }
        if (grp.conv_layer >= 0) {
            const LayerNode& conv = g.layer(grp.conv_layer);
            weight_bytes = weight_size_bytes(conv, hw) * conv.out_h;
        }
    } else {
        if (is_concat) {
            for (size_t i = 0; i < op.concat_srcs.size(); i++) {
                const NodeGroup& src = gg.groups[size_t(op.concat_srcs[i])];
                if (op.concat_long[i] ||
                    producer_scheme(op.concat_srcs[i]) == Scheme::row_reuse)
                    emit('R', group_out_bytes(g, src, hw), grp.first_layer);
            }
        } else if (producer_scheme(op.input) == Scheme::row_reuse &&
                   grp.se_role != SeRole::se_fc1 &&
                   grp.se_role != SeRole::se_fc2) {
            emit('R', group_in_bytes(g, grp, hw), grp.first_layer);
        }
        if (op.shortcut >= 0 &&
            producer_scheme(op.shortcut) == Scheme::row_reuse)
            emit('R', group_out_bytes(g, gg.groups[size_t(op.shortcut)], hw),
                 grp.eltwise_layer >= 0 ? grp.eltwise_layer : grp.first_layer);
        if (output_goes_offchip(gg, g, blk_of, policy, grp.group_id))
            emit('W', group_out_bytes(g, grp, hw), grp.last_layer);
        if (grp.conv_layer >= 0)
            weight_bytes = weight_size_bytes(g.layer(grp.conv_layer), hw);
    }

    t.compute_cycles =
        detail::group_compute_cycles(g, grp, hw) + hw.group_setup_cycles;
    t.memory_cycles =
        ceil_div(feature_bytes + weight_bytes, hw.bus_bytes_per_cycle) +
        hw.group_setup_cycles;
    t.total_cycles = std::max(t.compute_cycles, t.memory_cycles);
    if (scheme == Scheme::row_reuse) t.total_cycles += out.out_h;
    return t;
}

// Sequential composition over all groups; the trace carries every
// off-chip feature event in execution order.
inline LatencyReport simulate_network(const ReusePolicy& policy,
                                      const BufferAssignment& asg,
                                      const GroupedGraph& gg,
                                      const std::vector<Block>& blocks,
                                      const NetworkGraph& g,
                                      const HwConfig& hw) {
    (void)asg;
    const auto blk_of = group_block_index(gg, blocks);
    LatencyReport rep;
    for (const auto& grp : gg.groups) {
        Scheme s = policy.block_scheme[size_t(blk_of[size_t(grp.group_id)])];
        GroupTiming t =
            simulate_group(grp, s, gg, blocks, policy, g, hw, &rep.trace);
        rep.total_cycles += t.total_cycles;
        rep.groups.push_back(t);
    }
    for (const auto& e : rep.trace) rep.trace_feature_bytes += e.bytes;
    rep.seconds = double(rep.total_cycles) / hw.freq_hz;
    rep.gops =
        rep.seconds > 0 ? 2.0 * double(total_macs(g)) / rep.seconds / 1e9 : 0;
    return rep;
}

struct SweepPoint {
    int position = 0;  // blocks on the row side; 0 = all frame
    std::vector<int> cuts;
    BufferRequirements bufs;
    long long dram_fm = 0;
    long long total_dram_bytes = 0;
    long long onchip_fm = 0;
    long long latency_cycles = 0;
    double latency_ms = 0.0;
};

// One curve point per synchronized cut position: all segments move their
// cut together from all-row (position = max depth) to all-frame
// (position 0), which is the 1-D path the trend plots use.
inline std::vector<SweepPoint> sweep_cut_points(const NetworkGraph& g,
                                                const GroupedGraph& gg,
                                                const std::vector<Block>& blocks,
                                                const SegmentPlan& plan,
                                                const HwConfig& hw) {
    int s_max = 0;
    for (const auto& seg : plan.segments) s_max = std::max(s_max, seg.n_blocks);
    std::vector<SweepPoint> points;
    for (int s = s_max; s >= 0; s--) {
        SweepPoint p;
        p.position = s;
        for (const auto& seg : plan.segments) {
            int row_count = std::min(s, seg.n_blocks);
            p.cuts.push_back(seg.increasing ? seg.n_blocks - row_count
                                            : row_count);
        }
        ReusePolicy policy = make_policy(plan, blocks, p.cuts);
        BufferAssignment asg = resolve_assignment(gg, blocks, policy, g, hw);
        p.bufs = required_buffer_sizes(policy, asg, gg, blocks, g, hw);
        p.dram_fm = dram_feature_access(policy, gg, blocks, g, hw);
        p.total_dram_bytes = total_dram(policy, gg, blocks, g, hw);
        p.onchip_fm = onchip_feature_bytes(policy, gg, blocks, g, hw);
        LatencyReport rep = simulate_network(policy, asg, gg, blocks, g, hw);
        p.latency_cycles = rep.total_cycles;
        p.latency_ms = rep.seconds * 1e3;
        points.push_back(std::move(p));
    }
    return points;
}

}  // namespace scf
