#pragma once

#include <cstring>

#include "scf/codegen.hpp"

namespace scf {

constexpr uint32_t kImageMagic = 0x49464353;  // "SCFI"
constexpr uint32_t kImageVersion = 1;

// Deterministic weight fill for functional tests and reproducible images.
inline std::vector<uint8_t> generate_weights(const NetworkGraph& g,
                                             const HwConfig& hw,
                                             uint64_t seed = 0x5cf0c0de) {
    std::vector<uint8_t> blob(size_t(total_weight_bytes(g, hw)));
    uint64_t s = seed;
    for (auto& b : blob) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        b = uint8_t(s);
    }
    return blob;
}

// header (64 B): magic, version, n_instructions, reserved,
//                u64 offset/size pairs for the three sections
// followed by the instruction, weight and input sections, 64-B aligned.
inline std::vector<uint8_t> pack_image(
    const std::vector<Instruction>& instructions,
    const std::vector<uint8_t>& weights, const std::vector<uint8_t>& input) {
    ImageLayout lay = image_layout(instructions.size(),
                                   (long long)weights.size(),
                                   (long long)input.size());
    std::vector<uint8_t> img(size_t(
        align_up(lay.input_offset + (long long)input.size(), 64)));

    auto put32 = [&](size_t off, uint32_t v) {
        std::memcpy(img.data() + off, &v, 4);
    };
    auto put64 = [&](size_t off, uint64_t v) {
        std::memcpy(img.data() + off, &v, 8);
    };
    put32(0, kImageMagic);
    put32(4, kImageVersion);
    put32(8, uint32_t(instructions.size()));
    put32(12, 0);
    put64(16, uint64_t(lay.instr_offset));
    put64(24, uint64_t(instructions.size()) * kInstructionBytes);
    put64(32, uint64_t(lay.weight_offset));
    put64(40, weights.size());
    put64(48, uint64_t(lay.input_offset));
    put64(56, input.size());

    size_t off = size_t(lay.instr_offset);
    for (const auto& in : instructions) {
        auto words = encode_instruction(in);
        std::memcpy(img.data() + off, words.data(), kInstructionBytes);
        off += kInstructionBytes;
    }
    if (!weights.empty())
        std::memcpy(img.data() + size_t(lay.weight_offset), weights.data(),
                    weights.size());
    if (!input.empty())
        std::memcpy(img.data() + size_t(lay.input_offset), input.data(),
                    input.size());
    return img;
}

struct UnpackedImage {
    std::vector<Instruction> instructions;
    std::vector<uint8_t> weights;
    std::vector<uint8_t> input;
};

inline UnpackedImage unpack_image(const std::vector<uint8_t>& img) {
    if (img.size() < 64) throw DecodeError("image shorter than its header");
    auto get32 = [&](size_t off) {
        uint32_t v;
        std::memcpy(&v, img.data() + off, 4);
        return v;
    };
    auto get64 = [&](size_t off) {
        uint64_t v;
        std::memcpy(&v, img.data() + off, 8);
        return v;
    };
    if (get32(0) != kImageMagic) throw DecodeError("bad image magic");
    if (get32(4) != kImageVersion) throw DecodeError("unsupported version");
    UnpackedImage out;
    uint32_t n = get32(8);
    uint64_t ioff = get64(16);
    uint64_t woff = get64(32), wlen = get64(40);
    uint64_t xoff = get64(48), xlen = get64(56);
    if (ioff + uint64_t(n) * kInstructionBytes > img.size() ||
        woff + wlen > img.size() || xoff + xlen > img.size())
        throw DecodeError("section out of bounds");
    for (uint32_t i = 0; i < n; i++) {
        std::array<uint32_t, kInstructionWords> words;
        std::memcpy(words.data(), img.data() + ioff + i * kInstructionBytes,
                    kInstructionBytes);
        out.instructions.push_back(decode_instruction(words));
    }
    out.weights.assign(img.begin() + long(woff), img.begin() + long(woff + wlen));
    out.input.assign(img.begin() + long(xoff), img.begin() + long(xoff + xlen));
    return out;
}

}  // namespace scf
