#pragma once

#include <array>
#include <string>
#include <vector>

#include "scf/policy.hpp"

namespace scf {

constexpr int kOffchip = 3;
constexpr int kNoBuffer = 15;

struct GroupAlloc {
    int in_buf = kNoBuffer;
    int out_buf = kNoBuffer;
    int sc_buf = kNoBuffer;
    bool in_staged = false;     // input read from DRAM into in_buf here
    long long se_offset = -1;   // pooled-branch offset inside out_buf
};

struct BufferAssignment {
    std::vector<GroupAlloc> groups;
};

// Producer groups of every operand a group reads.
struct GroupOperands {
    int input = -1;                  // producer group id; -1 = network input
    int shortcut = -1;               // eltwise second operand, if any
    int vector = -1;                 // squeeze-excitation scale vector
    std::vector<int> concat_srcs;    // producer group ids
    std::vector<bool> concat_long;   // parallel: spilled to DRAM
};

inline GroupOperands group_operands(const GroupedGraph& gg,
                                    const NetworkGraph& g,
                                    const NodeGroup& grp) {
    GroupOperands op;
    const LayerNode& head = group_in_layer(g, grp);
    if (head.kind == LayerKind::concat) {
        for (size_t i = 0; i < head.concat_srcs.size(); i++) {
            op.concat_srcs.push_back(
                gg.group_of_layer[size_t(head.concat_srcs[i])]);
            op.concat_long.push_back(head.concat_long_path[i]);
        }
        op.input = op.concat_srcs.empty() ? -1 : op.concat_srcs.front();
        return op;
    }
    op.input = head.from >= 0 ? gg.group_of_layer[size_t(head.from)] : -1;
    if (grp.eltwise_layer >= 0) {
        const LayerNode& e = g.layer(grp.eltwise_layer);
        op.shortcut = gg.group_of_layer[size_t(*e.shortcut_src)];
    } else if (head.kind == LayerKind::eltwise_add) {
        op.shortcut = gg.group_of_layer[size_t(*head.shortcut_src)];
    }
    if (head.kind == LayerKind::scale && head.shortcut_src)
        op.vector = gg.group_of_layer[size_t(*head.shortcut_src)];
    return op;
}

// True when the group's output also gets a DRAM copy: row-reuse output,
// terminal output, input of a row-reuse consumer, or a long-path
// concatenation source.
inline bool output_goes_offchip(const GroupedGraph& gg, const NetworkGraph& g,
                                const std::vector<int>& blk_of,
                                const ReusePolicy& policy, int group_id) {
    if (policy.block_scheme[size_t(blk_of[size_t(group_id)])] ==
        Scheme::row_reuse)
        return true;
    bool any_consumer = false;
    for (const auto& c : gg.groups) {
        GroupOperands op = group_operands(gg, g, c);
        bool reads = op.input == group_id || op.shortcut == group_id ||
                     op.vector == group_id;
        for (size_t i = 0; i < op.concat_srcs.size(); i++) {
            if (op.concat_srcs[i] != group_id) continue;
            reads = true;
            if (op.concat_long[i]) return true;  // spill
        }
        if (!reads) continue;
        any_consumer = true;
        if (policy.block_scheme[size_t(blk_of[size_t(c.group_id)])] ==
            Scheme::row_reuse)
            return true;  // boundary write for a row consumer
    }
    return !any_consumer;  // terminal output
}

// Reuse-aware static allocation over the three physical buffers. Frame
// tensors ping-pong through the lowest free slot; residual entries stay
// resident until their eltwise consumes them; the squeeze-excitation
// pooled branch shares the entry buffer at an aligned offset; row-reuse
// groups live off-chip. Throws LivenessError when a span needs more than
// three live frame tensors.
inline BufferAssignment assign_buffers(const GroupedGraph& gg,
                                       const std::vector<Block>& blocks,
                                       const ReusePolicy& policy,
                                       const NetworkGraph& g,
                                       const HwConfig& hw) {
    const auto blk_of = group_block_index(gg, blocks);
    BufferAssignment asg;
    asg.groups.assign(gg.groups.size(), GroupAlloc{});

    auto scheme = [&](int grp_id) {
        return policy.block_scheme[size_t(blk_of[size_t(grp_id)])];
    };

    // Remaining on-chip readers per tensor (tensor == producing group id;
    // -1 is the network input, tracked separately).
    std::vector<int> refs(gg.groups.size(), 0);
    int input_refs = 0;
    std::vector<GroupOperands> ops;
    ops.reserve(gg.groups.size());
    for (const auto& grp : gg.groups) ops.push_back(group_operands(gg, g, grp));

    auto count_read = [&](int tensor, int consumer, bool long_path) {
        if (long_path) return;  // reads the DRAM spill
        if (scheme(consumer) == Scheme::row_reuse) return;  // DRAM read
        if (tensor < 0)
            input_refs++;
        else
            refs[size_t(tensor)]++;
    };
    for (const auto& grp : gg.groups) {
        const GroupOperands& op = ops[size_t(grp.group_id)];
        if (!op.concat_srcs.empty()) {
            for (size_t i = 0; i < op.concat_srcs.size(); i++)
                count_read(op.concat_srcs[i], grp.group_id, op.concat_long[i]);
        } else if (op.input >= -1) {
            count_read(op.input, grp.group_id, false);
        }
        if (op.shortcut >= 0) count_read(op.shortcut, grp.group_id, false);
        if (op.vector >= 0) count_read(op.vector, grp.group_id, false);
    }

    // slot -> tensor id (-2 free, -1 network input)
    std::array<int, 3> slot{-2, -2, -2};
    std::vector<int> slot_of(gg.groups.size() + 1, kNoBuffer);
    int input_slot = kNoBuffer;
    // Entry pins: SE blocks keep their entry buffer (and its vector area)
    // untouched until the block closes.
    std::vector<int> pin_until(3, -1);  // group id the pin expires after

    auto tensor_slot = [&](int tensor) {
        return tensor < 0 ? input_slot : slot_of[size_t(tensor)];
    };
    auto release = [&](int tensor, int consumer, bool long_path) {
        if (long_path || scheme(consumer) == Scheme::row_reuse) return;
        int& r = tensor < 0 ? input_refs : refs[size_t(tensor)];
        if (--r > 0) return;
        int s = tensor_slot(tensor);
        if (s >= 0 && s < 3 && slot[size_t(s)] == tensor) slot[size_t(s)] = -2;
    };
    auto grab_slot = [&](int tensor, int group_id, int avoid) {
        for (int s = 0; s < 3; s++) {
            if (slot[size_t(s)] != -2 || s == avoid) continue;
            if (pin_until[size_t(s)] >= group_id) continue;
            slot[size_t(s)] = tensor;
            if (tensor < 0)
                input_slot = s;
            else
                slot_of[size_t(tensor)] = s;
            return s;
        }
        throw LivenessError(
            blk_of[size_t(group_id)],
            "block " + std::to_string(blk_of[size_t(group_id)]) +
                ": more than three simultaneously live frame tensors at "
                "group " +
                std::to_string(group_id));
    };

    for (const auto& grp : gg.groups) {
        GroupAlloc& a = asg.groups[size_t(grp.group_id)];
        const GroupOperands& op = ops[size_t(grp.group_id)];

        if (scheme(grp.group_id) == Scheme::row_reuse) {
            a.in_buf = kOffchip;
            a.out_buf = kOffchip;
            if (op.shortcut >= 0) a.sc_buf = kOffchip;
            for (int srcs : op.concat_srcs) (void)srcs;
            // tensors it consumed from on-chip producers were already
            // excluded from refcounts (the producer wrote a DRAM copy)
            continue;
        }

        const Block& blk = blocks[size_t(blk_of[size_t(grp.group_id)])];
        bool se_block = false;
        for (int gi : blk.group_ids)
            if (gg.groups[size_t(gi)].se_role != SeRole::none) se_block = true;

        // input operand
        if (grp.se_role == SeRole::se_fc1 || grp.se_role == SeRole::se_fc2) {
            // reads the previous vector from the shared vector area
            int pg = op.input;
            a.in_buf = pg >= 0 ? asg.groups[size_t(pg)].out_buf : kNoBuffer;
        } else if (tensor_slot(op.input) != kNoBuffer) {
            a.in_buf = tensor_slot(op.input);
        } else {
            // boundary: producer is row-reuse, spilled, or the network
            // input; stage the tensor into a buffer
            a.in_buf = grab_slot(op.input, grp.group_id, -1);
            a.in_staged = true;
        }

        // shortcut operand
        if (op.shortcut >= 0) {
            int s = tensor_slot(op.shortcut);
            a.sc_buf = s == kNoBuffer ? kOffchip : s;
        }

        // output placement
        if (grp.se_role == SeRole::se_gap || grp.se_role == SeRole::se_fc1 ||
            grp.se_role == SeRole::se_fc2) {
            // pooled branch and FC vectors share the block entry buffer
            // at an offset past the live input
            int entry_slot = a.in_buf;
            if (grp.se_role == SeRole::se_gap) {
                const NodeGroup& entry_grp =
                    gg.groups[size_t(blk.group_ids.front())];
                GroupOperands eop = ops[size_t(entry_grp.group_id)];
                int es = tensor_slot(eop.input);
                if (es != kNoBuffer) entry_slot = es;
                long long entry_bytes =
                    eop.input < 0
                        ? 1LL * g.in_w * g.in_h * g.in_c * hw.qa_bytes()
                        : group_out_bytes(
                              g, gg.groups[size_t(eop.input)], hw);
                a.se_offset = align_up(entry_bytes, hw.to);
            }
            a.out_buf = entry_slot;
            slot_of[size_t(grp.group_id)] = entry_slot;  // vector area
            // vectors never block the rotation; keep slot occupancy as-is
            if (a.out_buf >= 0 && a.out_buf < 3)
                pin_until[size_t(a.out_buf)] =
                    std::max(pin_until[size_t(a.out_buf)],
                             blk.group_ids.back());
        } else {
            a.out_buf = grab_slot(grp.group_id, grp.group_id, a.in_buf);
            if (se_block && grp.group_id == blk.group_ids.front() &&
                a.in_buf >= 0 && a.in_buf < 3) {
                // hold the entry buffer (hosting the vector area) until
                // the block closes
                pin_until[size_t(a.in_buf)] =
                    std::max(pin_until[size_t(a.in_buf)],
                             blk.group_ids.back());
            }
        }

        // consumption
        if (!op.concat_srcs.empty()) {
            for (size_t i = 0; i < op.concat_srcs.size(); i++)
                release(op.concat_srcs[i], grp.group_id, op.concat_long[i]);
        } else {
            release(op.input, grp.group_id, false);
        }
        if (op.shortcut >= 0) release(op.shortcut, grp.group_id, false);
        if (op.vector >= 0) release(op.vector, grp.group_id, false);
        // a terminal tensor frees its slot immediately
        if (refs[size_t(grp.group_id)] == 0 &&
            grp.se_role != SeRole::se_gap && grp.se_role != SeRole::se_fc1 &&
            grp.se_role != SeRole::se_fc2) {
            int s = slot_of[size_t(grp.group_id)];
            if (s >= 0 && s < 3 && slot[size_t(s)] == grp.group_id)
                slot[size_t(s)] = -2;
        }
    }
    return asg;
}

// Allocation with fallback: a block the three-buffer liveness check
// rejects is forced to row reuse (recorded in the policy) instead of
// failing the whole candidate.
inline BufferAssignment resolve_assignment(const GroupedGraph& gg,
                                           const std::vector<Block>& blocks,
                                           ReusePolicy& policy,
                                           const NetworkGraph& g,
                                           const HwConfig& hw) {
    for (size_t attempt = 0; attempt <= blocks.size(); attempt++) {
        try {
            return assign_buffers(gg, blocks, policy, g, hw);
        } catch (const LivenessError& e) {
            policy.forced_row[size_t(e.block_id)] = true;
            apply_forced_row(policy);
        }
    }
    throw GraphError("buffer allocation did not converge");
}

struct Violation {
    int group_id = -1;
    int buffer = -1;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;
    std::array<long long, 3> peak_bytes{0, 0, 0};
    bool ok() const { return violations.empty(); }
};

// Replays the network with a three-slot memory and checks every
// assignment invariant: frame in != out, no write over live data, no
// read before write. Returns violations instead of throwing; per-buffer
// peak footprint falls out as a side product.
inline ValidationResult validate_assignment(const BufferAssignment& asg,
                                            const GroupedGraph& gg,
                                            const std::vector<Block>& blocks,
                                            const ReusePolicy& policy,
                                            const NetworkGraph& g,
                                            const HwConfig& hw) {
    ValidationResult res;
    const auto blk_of = group_block_index(gg, blocks);
    auto scheme = [&](int grp_id) {
        return policy.block_scheme[size_t(blk_of[size_t(grp_id)])];
    };
    std::array<int, 3> slot{-2, -2, -2};
    std::vector<int> refs(gg.groups.size(), 0);
    int input_refs = 0;
    std::vector<GroupOperands> ops;
    for (const auto& grp : gg.groups) ops.push_back(group_operands(gg, g, grp));
    for (const auto& grp : gg.groups) {
        if (scheme(grp.group_id) == Scheme::row_reuse) continue;
        const GroupOperands& op = ops[size_t(grp.group_id)];
        auto count = [&](int t, bool lp) {
            if (lp) return;
            if (t < 0)
                input_refs++;
            else if (asg.groups[size_t(grp.group_id)].in_buf != kOffchip)
                refs[size_t(t)]++;
        };
        if (!op.concat_srcs.empty())
            for (size_t i = 0; i < op.concat_srcs.size(); i++)
                count(op.concat_srcs[i], op.concat_long[i]);
        else
            count(op.input, false);
        if (op.shortcut >= 0 &&
            asg.groups[size_t(grp.group_id)].sc_buf != kOffchip)
            refs[size_t(op.shortcut)]++;
        if (op.vector >= 0) refs[size_t(op.vector)]++;
    }

    auto tensor_bytes = [&](int t) {
        return t < 0 ? 1LL * g.in_w * g.in_h * g.in_c * hw.qa_bytes()
                     : group_out_bytes(g, gg.groups[size_t(t)], hw);
    };

    for (const auto& grp : gg.groups) {
        const GroupAlloc& a = asg.groups[size_t(grp.group_id)];
        const GroupOperands& op = ops[size_t(grp.group_id)];
        if (scheme(grp.group_id) == Scheme::row_reuse) continue;
        bool is_vec = grp.se_role == SeRole::se_gap ||
                      grp.se_role == SeRole::se_fc1 ||
                      grp.se_role == SeRole::se_fc2;

        if (a.in_buf >= 0 && a.in_buf < 3) {
            if (a.in_staged) {
                if (slot[size_t(a.in_buf)] >= -1 &&
                    slot[size_t(a.in_buf)] != op.input)
                    res.violations.push_back(
                        {grp.group_id, a.in_buf,
                         "group " + std::to_string(grp.group_id) +
                             ": stages input over live buffer " +
                             std::to_string(a.in_buf)});
                slot[size_t(a.in_buf)] = op.input;
                res.peak_bytes[size_t(a.in_buf)] =
                    std::max(res.peak_bytes[size_t(a.in_buf)],
                             tensor_bytes(op.input));
            } else if (!is_vec && slot[size_t(a.in_buf)] != op.input) {
                res.violations.push_back(
                    {grp.group_id, a.in_buf,
                     "group " + std::to_string(grp.group_id) +
                         ": reads buffer " + std::to_string(a.in_buf) +
                         " before its input was written there"});
            }
        }
        if (a.sc_buf >= 0 && a.sc_buf < 3 && slot[size_t(a.sc_buf)] != op.shortcut)
            res.violations.push_back(
                {grp.group_id, a.sc_buf,
                 "group " + std::to_string(grp.group_id) +
                     ": shortcut not resident in buffer " +
                     std::to_string(a.sc_buf)});

        if (a.out_buf >= 0 && a.out_buf < 3 && !is_vec) {
            if (a.out_buf == a.in_buf)
                res.violations.push_back(
                    {grp.group_id, a.out_buf,
                     "group " + std::to_string(grp.group_id) +
                         ": frame input and output share buffer " +
                         std::to_string(a.out_buf)});
            int occupant = slot[size_t(a.out_buf)];
            bool occupant_live =
                occupant == -1 ? input_refs > 0
                               : (occupant >= 0 && refs[size_t(occupant)] > 0);
            if (occupant >= -1 && occupant_live && occupant != grp.group_id)
                res.violations.push_back(
                    {grp.group_id, a.out_buf,
                     "group " + std::to_string(grp.group_id) +
                         ": writes over live tensor of group " +
                         std::to_string(occupant) + " in buffer " +
                         std::to_string(a.out_buf)});
            slot[size_t(a.out_buf)] = grp.group_id;
            res.peak_bytes[size_t(a.out_buf)] =
                std::max(res.peak_bytes[size_t(a.out_buf)],
                         tensor_bytes(grp.group_id));
        }

        auto consume = [&](int t, bool lp, bool offchip) {
            if (lp || offchip) return;
            int& r = t < 0 ? input_refs : refs[size_t(t)];
            if (r > 0) r--;
        };
        if (!op.concat_srcs.empty())
            for (size_t i = 0; i < op.concat_srcs.size(); i++)
                consume(op.concat_srcs[i], op.concat_long[i], false);
        else
            consume(op.input, false, a.in_buf == kOffchip);
        if (op.shortcut >= 0) consume(op.shortcut, false, a.sc_buf == kOffchip);
        if (op.vector >= 0) consume(op.vector, false, false);
    }
    return res;
}

}  // namespace scf
