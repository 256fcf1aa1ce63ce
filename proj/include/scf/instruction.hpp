#pragma once

#include <array>
#include <cstring>

#include "scf/allocator.hpp"

namespace scf {

// One 11-word instruction per node group.
//
//   w0  opcode[7:0] | kernel[15:8] | stride[19:16] | scheme[23:20]
//   w1  in_w[15:0]  | in_h[31:16]
//   w2  out_w[15:0] | out_h[31:16]
//   w3  in_c[15:0]  | out_c[31:16]
//   w4  alloc_in[3:0] | alloc_out[7:4] | alloc_shortcut[11:8] | flags[31:12]
//       flags: 12 dwconv, 13 fused_pool, 14 fused_eltwise, 15 upsample,
//              18:16 se_role, 19 input staged from DRAM
//   w5  weight base address
//   w6  input base address / buffer offset
//   w7  output base address / buffer offset
//   w8  shortcut base address
//   w9  activation[7:0] | quant_shift[15:8]
//   w10 pool kernel[3:0] | pool stride[7:4] | upsample factor[11:8] |
//       terminal[12]
//
// Little-endian words; reserved bits are zero and checked on decode.
struct Instruction {
    uint8_t opcode = 0;  // LayerKind of the primary layer + 1
    uint8_t kernel = 1;
    uint8_t stride = 1;
    Scheme scheme = Scheme::frame_reuse;
    uint16_t in_w = 0, in_h = 0, out_w = 0, out_h = 0;
    uint16_t in_c = 0, out_c = 0;
    uint8_t alloc_in = kNoBuffer, alloc_out = kNoBuffer,
            alloc_shortcut = kNoBuffer;
    bool dwconv = false, fused_pool = false, fused_eltwise = false,
         fused_upsample = false;
    SeRole se_role = SeRole::none;
    bool input_staged = false;
    uint32_t weight_base = 0;
    uint32_t input_base = 0;
    uint32_t output_base = 0;
    uint32_t shortcut_base = 0;
    Activation activation = Activation::none;
    uint8_t quant_shift = 7;
    uint8_t pool_kernel = 0, pool_stride = 0;
    uint8_t upsample_factor = 0;
    bool terminal = false;

    bool operator==(const Instruction&) const = default;
};

constexpr int kInstructionWords = 11;
constexpr int kInstructionBytes = kInstructionWords * 4;

inline std::array<uint32_t, kInstructionWords> encode_instruction(
    const Instruction& in) {
    std::array<uint32_t, kInstructionWords> w{};
    w[0] = uint32_t(in.opcode) | uint32_t(in.kernel) << 8 |
           (uint32_t(in.stride) & 0xF) << 16 |
           (in.scheme == Scheme::row_reuse ? 1u : 0u) << 20;
    w[1] = uint32_t(in.in_w) | uint32_t(in.in_h) << 16;
    w[2] = uint32_t(in.out_w) | uint32_t(in.out_h) << 16;
    w[3] = uint32_t(in.in_c) | uint32_t(in.out_c) << 16;
    uint32_t flags = (in.dwconv ? 1u << 12 : 0) |
                     (in.fused_pool ? 1u << 13 : 0) |
                     (in.fused_eltwise ? 1u << 14 : 0) |
                     (in.fused_upsample ? 1u << 15 : 0) |
                     uint32_t(in.se_role) << 16 |
                     (in.input_staged ? 1u << 19 : 0);
    w[4] = uint32_t(in.alloc_in) | uint32_t(in.alloc_out) << 4 |
           uint32_t(in.alloc_shortcut) << 8 | flags;
    w[5] = in.weight_base;
    w[6] = in.input_base;
    w[7] = in.output_base;
    w[8] = in.shortcut_base;
    w[9] = uint32_t(in.activation) | uint32_t(in.quant_shift) << 8;
    w[10] = uint32_t(in.pool_kernel) | uint32_t(in.pool_stride) << 4 |
            uint32_t(in.upsample_factor) << 8 |
            (in.terminal ? 1u << 12 : 0);
    return w;
}

struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what)
        : std::runtime_error(what) {}
};

inline Instruction decode_instruction(
    const std::array<uint32_t, kInstructionWords>& w) {
    Instruction in;
    in.opcode = uint8_t(w[0] & 0xFF);
    if (in.opcode < 1 || in.opcode > 10)
        throw DecodeError("bad opcode " + std::to_string(in.opcode));
    if (w[0] & 0xFF000000u || (w[0] >> 21) & 0x7)
        throw DecodeError("reserved bits set in w0");
    in.kernel = uint8_t((w[0] >> 8) & 0xFF);
    in.stride = uint8_t((w[0] >> 16) & 0xF);
    in.scheme = (w[0] >> 20) & 1 ? Scheme::row_reuse : Scheme::frame_reuse;
    in.in_w = uint16_t(w[1]);
    in.in_h = uint16_t(w[1] >> 16);
    in.out_w = uint16_t(w[2]);
    in.out_h = uint16_t(w[2] >> 16);
    in.in_c = uint16_t(w[3]);
    in.out_c = uint16_t(w[3] >> 16);
    in.alloc_in = uint8_t(w[4] & 0xF);
    in.alloc_out = uint8_t((w[4] >> 4) & 0xF);
    in.alloc_shortcut = uint8_t((w[4] >> 8) & 0xF);
    in.dwconv = w[4] & (1u << 12);
    in.fused_pool = w[4] & (1u << 13);
    in.fused_eltwise = w[4] & (1u << 14);
    in.fused_upsample = w[4] & (1u << 15);
    uint32_t se = (w[4] >> 16) & 0x7;
    if (se > 4) throw DecodeError("bad se_role");
    in.se_role = SeRole(se);
    in.input_staged = w[4] & (1u << 19);
    if (w[4] >> 20) throw DecodeError("reserved bits set in w4");
    in.weight_base = w[5];
    in.input_base = w[6];
    in.output_base = w[7];
    in.shortcut_base = w[8];
    uint32_t act = w[9] & 0xFF;
    if (act > 4) throw DecodeError("bad activation");
    in.activation = Activation(act);
    in.quant_shift = uint8_t((w[9] >> 8) & 0xFF);
    if (w[9] >> 16) throw DecodeError("reserved bits set in w9");
    in.pool_kernel = uint8_t(w[10] & 0xF);
    in.pool_stride = uint8_t((w[10] >> 4) & 0xF);
    in.upsample_factor = uint8_t((w[10] >> 8) & 0xF);
    in.terminal = w[10] & (1u << 12);
    if (w[10] >> 13) throw DecodeError("reserved bits set in w10");
    return in;
}

// DRAM map of a packed image: header, instruction stream, weights, input,
// then the off-chip feature region. 64-byte section alignment.
struct ImageLayout {
    long long header_bytes = 64;
    long long instr_offset = 64;
    long long weight_offset = 0;
    long long input_offset = 0;
    long long feature_offset = 0;  // first byte past the image
    long long weight_bytes = 0;
    long long input_bytes = 0;
};

inline ImageLayout image_layout(size_t n_instructions, long long weight_bytes,
                                long long input_bytes) {
    ImageLayout lay;
    lay.weight_offset = align_up(
        lay.instr_offset + 1LL * kInstructionBytes * (long long)n_instructions,
        64);
    lay.weight_bytes = weight_bytes;
    lay.input_offset = align_up(lay.weight_offset + weight_bytes, 64);
    lay.input_bytes = input_bytes;
    lay.feature_offset = align_up(lay.input_offset + input_bytes, 4096);
    return lay;
}

}  // namespace scf
