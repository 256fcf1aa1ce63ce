#pragma once

#include <map>
#include <set>
#include <vector>

#include "scf/graph.hpp"

namespace scf {

// One accelerator-executable unit: a conv-bearing layer with its fused
// activation/pool/eltwise/upsample chain, or a standalone layer the
// hardware runs on its own. One instruction per group.
struct NodeGroup {
    int group_id = 0;
    std::vector<int> layer_ids;
    int conv_layer = -1;      // conv/dwconv/fc/scale member, if any
    int eltwise_layer = -1;   // fused element-wise member, if any
    int pool_layer = -1;
    int upsample_layer = -1;
    SeRole se_role = SeRole::none;
    int redirect_concat = -1;     // concat layer this output merges into
    long long redirect_offset = 0;  // channel-major byte offset (8-bit)

    int first_layer = 0;
    int last_layer = 0;
};

struct GroupedGraph {
    std::vector<NodeGroup> groups;
    std::vector<int> group_of_layer;

    const NodeGroup& producer_group(const NetworkGraph& g, int layer_id) const {
        return groups[size_t(group_of_layer[size_t(layer_id)])];
    }
};

struct Block {
    int block_id = 0;
    std::vector<int> group_ids;  // contiguous
    BlockKind kind = BlockKind::plain;
    int out_area = 0;            // w*h of the last group's output
    int first_layer = 0;
};

struct SegmentPlan {
    struct Segment {
        int first_block = 0;
        int n_blocks = 0;
        bool increasing = false;
    };
    std::vector<Segment> segments;
    int k() const { return int(segments.size()); }
};

namespace detail {

inline std::vector<std::vector<int>> consumer_map(const NetworkGraph& g) {
    std::vector<std::vector<int>> cons(g.layers.size());
    for (const auto& l : g.layers) {
        if (l.from >= 0) cons[size_t(l.from)].push_back(l.id);
        if (l.shortcut_src) cons[size_t(*l.shortcut_src)].push_back(l.id);
        for (int s : l.concat_srcs) cons[size_t(s)].push_back(l.id);
    }
    return cons;
}

}  // namespace detail

inline const LayerNode& group_in_layer(const NetworkGraph& g,
                                       const NodeGroup& grp) {
    return g.layer(grp.first_layer);
}

inline const LayerNode& group_out_layer(const NetworkGraph& g,
                                        const NodeGroup& grp) {
    return g.layer(grp.last_layer);
}

inline long long group_in_bytes(const NetworkGraph& g, const NodeGroup& grp,
                                const HwConfig& hw) {
    return in_size_bytes(group_in_layer(g, grp), hw);
}

inline long long group_out_bytes(const NetworkGraph& g, const NodeGroup& grp,
                                 const HwConfig& hw) {
    return out_size_bytes(group_out_layer(g, grp), hw);
}

// Fuses layers into node groups. A conv-bearing layer absorbs the
// activation / 2D-pool / element-wise / upsample chain that immediately
// follows it, as long as each intermediate tensor has no other consumer.
// Upsample is fused last. With fuse=false every layer becomes a
// singleton group (used to quantify the fusion savings).
inline GroupedGraph fuse_groups(const NetworkGraph& g, bool fuse = true) {
    auto cons = detail::consumer_map(g);
    GroupedGraph out;
    out.group_of_layer.assign(g.layers.size(), -1);

    size_t i = 0;
    while (i < g.layers.size()) {
        const LayerNode& head = g.layers[i];
        NodeGroup grp;
        grp.group_id = int(out.groups.size());
        grp.layer_ids.push_back(head.id);
        grp.first_layer = grp.last_layer = head.id;
        if (head.conv_bearing()) grp.conv_layer = head.id;
        if (head.kind == LayerKind::maxpool) grp.pool_layer = head.id;
        if (head.kind == LayerKind::upsample) grp.upsample_layer = head.id;
        if (head.kind == LayerKind::eltwise_add) grp.eltwise_layer = head.id;

        if (fuse && head.conv_bearing()) {
            size_t j = i + 1;
            while (j < g.layers.size()) {
                const LayerNode& cand = g.layers[j];
                if (cand.from != int(j) - 1) break;
                if (cons[j - 1].size() != 1) break;  // branch point
                bool ok = false;
                switch (cand.kind) {
                    case LayerKind::activation:
                        ok = grp.upsample_layer < 0;
                        break;
                    case LayerKind::maxpool:
                        ok = grp.pool_layer < 0 && grp.upsample_layer < 0;
                        break;
                    case LayerKind::eltwise_add:
                        ok = grp.eltwise_layer < 0 && grp.upsample_layer < 0;
                        break;
                    case LayerKind::upsample:
                        ok = grp.upsample_layer < 0;
                        break;
                    default:
                        ok = false;
                }
                if (!ok) break;
                grp.layer_ids.push_back(cand.id);
                grp.last_layer = cand.id;
                if (cand.kind == LayerKind::maxpool) grp.pool_layer = cand.id;
                if (cand.kind == LayerKind::eltwise_add)
                    grp.eltwise_layer = cand.id;
                if (cand.kind == LayerKind::upsample)
                    grp.upsample_layer = cand.id;
                j++;
            }
            i = j;
        } else {
            i++;
        }
        for (int id : grp.layer_ids) out.group_of_layer[size_t(id)] = grp.group_id;
        out.groups.push_back(std::move(grp));
    }

    // Squeeze-and-excitation role tags, anchored at scale layers.
    for (const auto& l : g.layers) {
        if (l.kind != LayerKind::scale || !l.shortcut_src) continue;
        int scale_grp = out.group_of_layer[size_t(l.id)];
        out.groups[size_t(scale_grp)].se_role = SeRole::se_scale;
        const LayerNode& fc2 = g.layer(*l.shortcut_src);
        if (fc2.kind != LayerKind::fc) continue;
        out.groups[size_t(out.group_of_layer[size_t(fc2.id)])].se_role =
            SeRole::se_fc2;
        if (fc2.from < 0) continue;
        const LayerNode& fc1 = g.layer(fc2.from);
        if (fc1.kind != LayerKind::fc) continue;
        out.groups[size_t(out.group_of_layer[size_t(fc1.id)])].se_role =
            SeRole::se_fc1;
        if (fc1.from < 0) continue;
        const LayerNode& gap = g.layer(fc1.from);
        if (gap.kind == LayerKind::avgpool_global)
            out.groups[size_t(out.group_of_layer[size_t(gap.id)])].se_role =
                SeRole::se_gap;
    }

    // Row-reuse concat merging: sources write straight into the concat
    // destination, so record the redirection target and channel offset.
    for (const auto& l : g.layers) {
        if (l.kind != LayerKind::concat) continue;
        long long off = 0;
        for (int s : l.concat_srcs) {
            const LayerNode& src = g.layer(s);
            NodeGroup& sg = out.groups[size_t(out.group_of_layer[size_t(s)])];
            if (sg.redirect_concat < 0) {
                sg.redirect_concat = l.id;
                sg.redirect_offset = off;
            }
            off += 1LL * src.out_w * src.out_h * src.out_c;
        }
    }
    return out;
}

// Partition the groups into blocks: residual spans (entry tensor through
// the fused element-wise that consumes it, downsample branch included),
// squeeze-excitation clusters, and singleton plain blocks for the rest.
inline std::vector<Block> detect_blocks(const GroupedGraph& gg,
                                        const NetworkGraph& g) {
    const auto& groups = gg.groups;
    std::vector<int> block_of(groups.size(), -1);
    std::vector<Block> blocks;

    auto claim_range = [&](int first, int last, BlockKind kind) {
        Block b;
        b.kind = kind;
        for (int gi = first; gi <= last; gi++) {
            if (block_of[size_t(gi)] != -1)
                throw GraphError("overlapping residual ranges at group " +
                                 std::to_string(gi));
            block_of[size_t(gi)] = 0;  // provisional; renumbered below
            b.group_ids.push_back(gi);
        }
        blocks.push_back(std::move(b));
    };

    auto first_consumer_group = [&](int tensor_layer) {
        for (const auto& grp : groups) {
            if (grp.first_layer <= tensor_layer) continue;
            const LayerNode& in = group_in_layer(g, grp);
            if (in.from == tensor_layer) return grp.group_id;
        }
        return -1;
    };

    auto primary_consumers = [&](int tensor_layer) {
        int n = 0;
        for (const auto& grp : groups)
            if (grp.first_layer > tensor_layer &&
                group_in_layer(g, grp).from == tensor_layer)
                n++;
        return n;
    };

    // Residual blocks, in order of their closing eltwise.
    for (const auto& grp : groups) {
        int elt = grp.eltwise_layer;
        if (elt < 0) continue;
        const LayerNode& e = g.layer(elt);
        int sc = *e.shortcut_src;
        int entry = sc;
        const LayerNode& scl = g.layer(sc);
        if (scl.conv_bearing() && scl.kernel == 1 && scl.from >= 0 &&
            primary_consumers(scl.from) >= 2) {
            // projection shortcut: the block entry is the tensor feeding
            // both the main path and the projection conv
            entry = scl.from;
        }
        int start = first_consumer_group(entry);
        if (start < 0 || start > grp.group_id) continue;
        bool has_se = false;
        for (int gi = start; gi <= grp.group_id; gi++)
            if (groups[size_t(gi)].se_role != SeRole::none) has_se = true;
        claim_range(start, grp.group_id,
                    has_se ? BlockKind::residual_se : BlockKind::residual);
    }

    // Non-residual squeeze-excitation clusters stay atomic so the reuse
    // scheme cannot switch inside the pooled branch.
    for (const auto& grp : groups) {
        if (grp.se_role != SeRole::se_scale || block_of[size_t(grp.group_id)] != -1)
            continue;
        const LayerNode& scale = g.layer(grp.conv_layer);
        int lo = grp.group_id, hi = grp.group_id;
        if (scale.from >= 0) {
            // the depthwise group feeding the scale, plus its 1x1 expand
            // conv when the block has one
            int dw_grp = gg.group_of_layer[size_t(scale.from)];
            lo = std::min(lo, dw_grp);
            int dw_in = group_in_layer(g, groups[size_t(dw_grp)]).from;
            if (dw_in >= 0) {
                int eg = gg.group_of_layer[size_t(dw_in)];
                const NodeGroup& e = groups[size_t(eg)];
                if (e.conv_layer >= 0) {
                    const LayerNode& ec = g.layer(e.conv_layer);
                    if (ec.kind == LayerKind::conv && ec.kernel == 1)
                        lo = std::min(lo, eg);
                }
            }
        }
        // projection conv consuming the scale output
        int proj = first_consumer_group(grp.last_layer);
        if (proj >= 0) hi = std::max(hi, proj);
        claim_range(lo, hi, BlockKind::plain);
    }

    for (const auto& grp : groups)
        if (block_of[size_t(grp.group_id)] == -1)
            claim_range(grp.group_id, grp.group_id, BlockKind::plain);

    // Renumber in execution order of the first group.
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& a, const Block& b) {
                  return a.group_ids.front() < b.group_ids.front();
              });
    for (size_t i = 0; i < blocks.size(); i++) {
        Block& b = blocks[i];
        b.block_id = int(i);
        const NodeGroup& last = gg.groups[size_t(b.group_ids.back())];
        const LayerNode& out = group_out_layer(g, last);
        b.out_area = out.out_w * out.out_h;
        b.first_layer = gg.groups[size_t(b.group_ids.front())].first_layer;
    }
    return blocks;
}

// Segments are maximal monotone runs of block output area. Plateaus join
// the current run; an all-equal graph counts as one decreasing run.
inline SegmentPlan infer_segments(const std::vector<Block>& blocks) {
    SegmentPlan plan;
    if (blocks.empty()) return plan;
    int start = 0;
    int dir = 0;  // 0 unknown, -1 decreasing, +1 increasing
    for (size_t i = 1; i <= blocks.size(); i++) {
        int step = 0;
        if (i < blocks.size()) {
            long long prev = blocks[i - 1].out_area;
            long long cur = blocks[i].out_area;
            step = cur < prev ? -1 : (cur > prev ? +1 : 0);
        }
        bool close = i == blocks.size() || (dir != 0 && step != 0 && step != dir);
        if (!close) {
            if (step != 0 && dir == 0) dir = step;
            continue;
        }
        plan.segments.push_back(
            {start, int(i) - start, dir > 0});
        start = int(i);
        dir = step;
    }
    return plan;
}

inline int block_of_group(const std::vector<Block>& blocks, int group_id) {
    for (const auto& b : blocks)
        for (int gi : b.group_ids)
            if (gi == group_id) return b.block_id;
    return -1;
}

}  // namespace scf
