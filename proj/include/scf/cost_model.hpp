#pragma once

#include <stdexcept>

#include "scf/allocator.hpp"

namespace scf {

// Per-layer characteristics of the two weight reuse schemes. Frame reuse
// buffers whole frames and reads each weight block once; row reuse
// buffers a sliding window and re-reads the weights once per output row.
struct SchemeCharacteristics {
    long long input_buf_bytes = 0;
    long long output_buf_bytes = 0;
    long long weight_reads = 0;
    long long weight_reuses = 0;
};

inline SchemeCharacteristics scheme_characteristics(const LayerNode& l,
                                                    Scheme scheme,
                                                    const HwConfig& hw) {
    if (!l.conv_bearing())
        throw GraphError("layer " + std::to_string(l.id) +
                         ": reuse characteristics undefined for " +
                         std::string(to_string(l.kind)));
    long long H = l.in_h;
    long long N = l.in_c;
    long long K = l.kernel;
    SchemeCharacteristics c;
    if (scheme == Scheme::frame_reuse) {
        c.input_buf_bytes = 2 * H * H * N * hw.qa_bits / 8;
        c.output_buf_bytes = hw.to * H * H * hw.qs_bits / 8;
        c.weight_reads = 1;
        c.weight_reuses = H * H;
    } else {
        c.input_buf_bytes = (K + 1) * N * H * hw.qa_bits / 8;
        c.output_buf_bytes = hw.to * H * hw.qs_bits / 8;
        c.weight_reads = H;
        c.weight_reuses = H;
    }
    return c;
}

// Number of 18kb tiles for a raw buffer of the given geometry.
inline long long bram18k_count(long long depth_words, long long width_bits) {
    if (depth_words <= 0 || width_bits <= 0)
        throw std::invalid_argument("bram18k_count: zero dimension");
    return ceil_div(depth_words, 1024) * ceil_div(width_bits, 18);
}

// Tiles for a byte-sized buffer split over `banks` banks of `width_bits`.
inline long long bram_tiles(long long bytes, long long width_bits,
                            long long banks) {
    if (bytes <= 0) return 0;
    long long bytes_per_bank = ceil_div(bytes, banks);
    long long words = ceil_div(bytes_per_bank, width_bits / 8);
    return banks * bram18k_count(words, width_bits);
}

struct BufferRequirements {
    long long buff0 = 0, buff1 = 0, buff2 = 0;
    long long weight_buff = 0;
    long long row_buff = 0;
    long long out_buff = 0;
    long long write_buff = 0;
    long long sram_total = 0;
    long long bram18k_total = 0;
};

// Closed-form buffer sizing for a policy: the three physical buffers are
// the max of what the frame-reuse layers park in them, buffer 1 is shared
// with the row-reuse weight preload, and the row/out/write buffers come
// from the widest rows, the largest frame partial-sum plane and the
// widest off-chip writes.
inline BufferRequirements required_buffer_sizes(const ReusePolicy& policy,
                                                const BufferAssignment& asg,
                                                const GroupedGraph& gg,
                                                const std::vector<Block>& blocks,
                                                const NetworkGraph& g,
                                                const HwConfig& hw) {
    const auto blk_of = group_block_index(gg, blocks);
    auto scheme = [&](int grp_id) {
        return policy.block_scheme[size_t(blk_of[size_t(grp_id)])];
    };
    BufferRequirements r;
    long long buff[3] = {0, 0, 0};
    auto bump = [&](int b, long long bytes) {
        if (b >= 0 && b < 3) buff[b] = std::max(buff[b], bytes);
    };
    bool any_row = false, uses_lut = false;

    for (const auto& grp : gg.groups) {
        const GroupAlloc& a = asg.groups[size_t(grp.group_id)];
        for (int lid : grp.layer_ids) {
            Activation act = g.layer(lid).activation;
            if (act == Activation::sigmoid || act == Activation::swish)
                uses_lut = true;
        }
        const LayerNode* conv =
            grp.conv_layer >= 0 ? &g.layer(grp.conv_layer) : nullptr;
        if (conv)
            r.row_buff = std::max(
                r.row_buff, 6LL * conv->in_w * conv->in_c * hw.qa_bytes());

        if (scheme(grp.group_id) == Scheme::row_reuse) {
            any_row = true;
            if (conv) {
                r.weight_buff = std::max(r.weight_buff,
                                         weight_size_bytes(*conv, hw));
                r.out_buff = std::max(
                    r.out_buff, 1LL * conv->out_w * hw.to * hw.qs_bytes());
            }
            r.write_buff =
                std::max(r.write_buff,
                         1LL * group_out_layer(g, grp).out_w * hw.to *
                             hw.qa_bytes());
            continue;
        }

        // frame reuse
        bump(a.in_buf, group_in_bytes(g, grp, hw));
        if (grp.se_role == SeRole::se_gap) {
            long long area = a.se_offset;
            for (int gi : blocks[size_t(blk_of[size_t(grp.group_id)])].group_ids) {
                const NodeGroup& og = gg.groups[size_t(gi)];
                if (og.se_role == SeRole::se_gap ||
                    og.se_role == SeRole::se_fc1 ||
                    og.se_role == SeRole::se_fc2)
                    area += group_out_bytes(g, og, hw);
            }
            bump(a.out_buf, area);
        } else if (grp.se_role != SeRole::se_fc1 &&
                   grp.se_role != SeRole::se_fc2) {
            bump(a.out_buf, group_out_bytes(g, grp, hw));
        }
        if (conv)
            r.out_buff = std::max(r.out_buff, 1LL * conv->out_w *
                                                  conv->out_h * hw.to *
                                                  hw.qs_bytes());
        if (output_goes_offchip(gg, g, blk_of, policy, grp.group_id)) {
            const LayerNode& out = group_out_layer(g, grp);
            r.write_buff = std::max(
                r.write_buff,
                1LL * out.out_w * out.out_h * hw.to * hw.qa_bytes());
        }
    }
    (void)any_row;

    r.buff0 = buff[0];
    r.buff1 = std::max(buff[1], r.weight_buff);
    r.buff2 = buff[2];
    r.sram_total = r.row_buff + r.out_buff + r.write_buff + r.buff0 +
                   r.buff1 + r.buff2;

    r.bram18k_total = bram_tiles(r.buff0, hw.qa_bits, hw.to) +
                      bram_tiles(r.buff1, hw.qa_bits, hw.to) +
                      bram_tiles(r.buff2, hw.qa_bits, hw.to) +
                      bram_tiles(r.row_buff, hw.qa_bits, hw.to) +
                      bram_tiles(r.out_buff, hw.qs_bits, hw.to) +
                      bram_tiles(r.write_buff, hw.qa_bits, hw.to);
    if (uses_lut) r.bram18k_total += hw.to;  // paired activation LUTs
    return r;
}

// Off-chip feature traffic for a policy: row-reuse groups stream their
// inputs and outputs (plus fused shortcut reads), frame-reuse groups only
// touch DRAM at scheme boundaries, spilled concatenation sources and
// terminal outputs. Weights are excluded (loaded exactly once, Eq-style
// total adds them separately).
inline long long dram_feature_access(const ReusePolicy& policy,
                                     const GroupedGraph& gg,
                                     const std::vector<Block>& blocks,
                                     const NetworkGraph& g,
                                     const HwConfig& hw) {
    const auto blk_of = group_block_index(gg, blocks);
    auto scheme = [&](int grp_id) {
        return policy.block_scheme[size_t(blk_of[size_t(grp_id)])];
    };
    auto producer_scheme = [&](int producer) {
        return producer < 0 ? Scheme::row_reuse : scheme(producer);
    };
    long long total = 0;
    for (const auto& grp : gg.groups) {
        GroupOperands op = group_operands(gg, g, grp);
        const LayerNode& head = group_in_layer(g, grp);
        bool is_concat = head.kind == LayerKind::concat;
        if (scheme(grp.group_id) == Scheme::row_reuse) {
            if (is_concat) continue;  // pure redirection
            total += group_in_bytes(g, grp, hw) + group_out_bytes(g, grp, hw);
            if (op.shortcut >= 0)
                total += group_out_bytes(g, gg.groups[size_t(op.shortcut)], hw);
            continue;
        }
        // frame reuse
        if (is_concat) {
            for (size_t i = 0; i < op.concat_srcs.size(); i++) {
                const NodeGroup& src = gg.groups[size_t(op.concat_srcs[i])];
                if (op.concat_long[i] ||
                    producer_scheme(op.concat_srcs[i]) == Scheme::row_reuse)
                    total += group_out_bytes(g, src, hw);
            }
        } else if (producer_scheme(op.input) == Scheme::row_reuse &&
                   grp.se_role != SeRole::se_fc1 &&
                   grp.se_role != SeRole::se_fc2) {
            total += group_in_bytes(g, grp, hw);  // boundary read
        }
        if (op.shortcut >= 0 &&
            producer_scheme(op.shortcut) == Scheme::row_reuse)
            total += group_out_bytes(g, gg.groups[size_t(op.shortcut)], hw);
        if (output_goes_offchip(gg, g, blk_of, policy, grp.group_id))
            total += group_out_bytes(g, grp, hw);
    }
    return total;
}

inline long long total_dram(const ReusePolicy& policy, const GroupedGraph& gg,
                            const std::vector<Block>& blocks,
                            const NetworkGraph& g, const HwConfig& hw) {
    return dram_feature_access(policy, gg, blocks, g, hw) +
           total_weight_bytes(g, hw);
}

// Feature bytes served from the on-chip buffers; grows monotonically as
// blocks move from row to frame reuse.
inline long long onchip_feature_bytes(const ReusePolicy& policy,
                                      const GroupedGraph& gg,
                                      const std::vector<Block>& blocks,
                                      const NetworkGraph& g,
                                      const HwConfig& hw) {
    const auto blk_of = group_block_index(gg, blocks);
    long long total = 0;
    for (const auto& grp : gg.groups) {
        if (policy.block_scheme[size_t(blk_of[size_t(grp.group_id)])] !=
            Scheme::frame_reuse)
            continue;
        GroupOperands op = group_operands(gg, g, grp);
        total += group_in_bytes(g, grp, hw) + group_out_bytes(g, grp, hw);
        if (op.shortcut >= 0)
            total += group_out_bytes(g, gg.groups[size_t(op.shortcut)], hw);
    }
    return total;
}

// Average throughput over peak: peak GOPS is 4 x frequency x DSP count
// (four 8-bit operations per DSP per cycle).
inline double dsp_efficiency(double avg_gops, double freq_hz,
                             long long n_dsp) {
    double peak = 4.0 * (freq_hz / 1e9) * double(n_dsp);
    return peak > 0 ? avg_gops / peak : 0.0;
}

}  // namespace scf
