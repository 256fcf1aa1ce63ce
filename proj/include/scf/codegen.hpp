#pragma once

#include "scf/instruction.hpp"
#include "scf/policy.hpp"

namespace scf {

constexpr long long kDefaultDramBytes = 1LL << 30;

// Addresses of every tensor that has a DRAM copy under the given policy,
// plus per-group weight bases inside the image's weight section.
struct DramMap {
    ImageLayout layout;
    std::vector<long long> weight_base;    // per group; -1 = no weights
    std::vector<long long> feature_base;   // per group output; -1 = on-chip
    long long input_base = 0;              // network input section
    long long end = 0;
};

inline DramMap build_dram_map(const GroupedGraph& gg,
                              const std::vector<Block>& blocks,
                              const ReusePolicy& policy,
                              const NetworkGraph& g, const HwConfig& hw,
                              long long dram_bytes = kDefaultDramBytes) {
    const auto blk_of = group_block_index(gg, blocks);
    DramMap map;
    long long wbytes = total_weight_bytes(g, hw);
    long long ibytes = 1LL * g.in_w * g.in_h * g.in_c * hw.qa_bytes();
    map.layout = image_layout(gg.groups.size(), wbytes, ibytes);
    map.input_base = map.layout.input_offset;

    map.weight_base.assign(gg.groups.size(), -1);
    long long wcur = map.layout.weight_offset;
    for (const auto& grp : gg.groups) {
        if (grp.conv_layer < 0) continue;
        map.weight_base[size_t(grp.group_id)] = wcur;
        wcur += weight_size_bytes(g.layer(grp.conv_layer), hw);
    }

    map.feature_base.assign(gg.groups.size(), -1);
    long long fcur = map.layout.feature_offset;
    // concat destinations first so redirected sources can point into them
    for (const auto& grp : gg.groups) {
        const LayerNode& head = group_in_layer(g, grp);
        bool offchip =
            output_goes_offchip(gg, g, blk_of, policy, grp.group_id);
        if (head.kind == LayerKind::concat || offchip ||
            grp.redirect_concat >= 0) {
            if (grp.redirect_concat >= 0) continue;  // resolved below
            map.feature_base[size_t(grp.group_id)] = fcur;
            fcur += align_up(group_out_bytes(g, grp, hw), 64);
        }
    }
    for (const auto& grp : gg.groups) {
        if (grp.redirect_concat < 0) continue;
        int cg = gg.group_of_layer[size_t(grp.redirect_concat)];
        long long base = map.feature_base[size_t(cg)];
        if (base >= 0)
            map.feature_base[size_t(grp.group_id)] =
                base + grp.redirect_offset * hw.qa_bytes();
    }
    map.end = fcur;
    if (map.end > dram_bytes)
        throw GraphError("address overflow: needs " + std::to_string(map.end) +
                         " bytes of DRAM, configured " +
                         std::to_string(dram_bytes));
    return map;
}

// Exactly one instruction per node group, in execution order, with
// addresses consistent with the image layout.
inline std::vector<Instruction> emit_instructions(
    const GroupedGraph& gg, const std::vector<Block>& blocks,
    const ReusePolicy& policy, const BufferAssignment& asg,
    const NetworkGraph& g, const HwConfig& hw,
    long long dram_bytes = kDefaultDramBytes) {
    const auto blk_of = group_block_index(gg, blocks);
    DramMap map = build_dram_map(gg, blocks, policy, g, hw, dram_bytes);

    std::vector<Instruction> out;
    for (const auto& grp : gg.groups) {
        const GroupAlloc& a = asg.groups[size_t(grp.group_id)];
        GroupOperands op = group_operands(gg, g, grp);
        Scheme scheme =
            policy.block_scheme[size_t(blk_of[size_t(grp.group_id)])];
        const LayerNode& head = group_in_layer(g, grp);
        const LayerNode& tail = group_out_layer(g, grp);
        const LayerNode* conv =
            grp.conv_layer >= 0 ? &g.layer(grp.conv_layer) : nullptr;
        const LayerNode& primary = conv ? *conv : head;

        Instruction in;
        in.opcode = uint8_t(int(primary.kind) + 1);
        in.kernel = uint8_t(primary.kernel);
        in.stride = uint8_t(primary.stride);
        in.scheme = scheme;
        in.in_w = uint16_t(head.in_w);
        in.in_h = uint16_t(head.in_h);
        in.out_w = uint16_t(tail.out_w);
        in.out_h = uint16_t(tail.out_h);
        in.in_c = uint16_t(head.in_c);
        in.out_c = uint16_t(tail.out_c);
        in.alloc_in = uint8_t(a.in_buf);
        in.alloc_out = uint8_t(a.out_buf);
        in.alloc_shortcut = uint8_t(a.sc_buf);
        in.dwconv = primary.kind == LayerKind::dwconv;
        in.fused_pool = grp.pool_layer >= 0 && grp.layer_ids.size() > 1;
        in.fused_eltwise = grp.eltwise_layer >= 0;
        in.fused_upsample =
            grp.upsample_layer >= 0 && grp.layer_ids.size() > 1;
        in.se_role = grp.se_role;
        in.input_staged = a.in_staged;
        for (int lid : grp.layer_ids) {
            Activation act = g.layer(lid).activation;
            if (act != Activation::none) in.activation = act;
        }
        in.quant_shift = uint8_t(primary.quant_shift);
        if (grp.pool_layer >= 0) {
            in.pool_kernel = uint8_t(g.layer(grp.pool_layer).kernel);
            in.pool_stride = uint8_t(g.layer(grp.pool_layer).stride);
        }
        if (grp.upsample_layer >= 0)
            in.upsample_factor =
                uint8_t(g.layer(grp.upsample_layer).upsample_factor);
        in.terminal = is_terminal(g, tail.id);

        long long wb = map.weight_base[size_t(grp.group_id)];
        in.weight_base = wb >= 0 ? uint32_t(wb) : 0;
        // DRAM addresses for off-chip operands, buffer offsets otherwise
        long long in_addr = 0;
        if (a.in_buf == kOffchip || a.in_staged) {
            in_addr = op.input < 0 ? map.input_base
                                   : map.feature_base[size_t(op.input)];
        }
        in.input_base = uint32_t(std::max(in_addr, 0LL));
        long long out_addr = map.feature_base[size_t(grp.group_id)];
        if (a.out_buf != kOffchip && out_addr < 0)
            out_addr = a.se_offset > 0 ? a.se_offset : 0;
        in.output_base = uint32_t(std::max(out_addr, 0LL));
        if (op.shortcut >= 0 && a.sc_buf == kOffchip)
            in.shortcut_base =
                uint32_t(std::max(map.feature_base[size_t(op.shortcut)], 0LL));
        out.push_back(in);
    }
    return out;
}

}  // namespace scf
