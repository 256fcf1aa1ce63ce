#pragma once

#include <cmath>
#include <utility>

#include "scf/fusion.hpp"

namespace scf {

// Two signed 9x9 products sharing the operand `i`, computed through one
// wide multiplication the way the packed DSP path does: W1 sits 18 bits
// above W0, and the borrow a negative low product steals from the high
// half is repaired by adding back bit 17 of the low half.
inline std::pair<int32_t, int32_t> double_mac(int32_t i, int32_t w0,
                                              int32_t w1) {
    auto check = [](int32_t v, const char* name) {
        if (v < -256 || v > 255)
            throw std::out_of_range(std::string(name) +
                                    " outside signed 9-bit range");
    };
    check(i, "I");
    check(w0, "W0");
    check(w1, "W1");
    int64_t packed = (int64_t(w1) << 18) + w0;
    int64_t wide = int64_t(i) * packed;
    int64_t lo = wide & 0x3FFFF;
    int32_t m0 = int32_t(lo >= (1 << 17) ? lo - (1 << 18) : lo);
    int32_t m1 = int32_t((wide >> 18) + ((lo >> 17) & 1));
    return {m0, m1};
}

struct Tensor {
    int w = 0, h = 0, c = 0;
    std::vector<int8_t> data;

    Tensor() = default;
    Tensor(int w_, int h_, int c_) : w(w_), h(h_), c(c_) {
        data.assign(size_t(w) * h * c, 0);
    }
    int8_t& at(int x, int y, int ch) {
        return data[(size_t(ch) * h + y) * w + x];
    }
    int8_t at(int x, int y, int ch) const {
        return data[(size_t(ch) * h + y) * w + x];
    }
    int8_t get(int x, int y, int ch) const {  // zero padding
        if (x < 0 || y < 0 || x >= w || y >= h) return 0;
        return at(x, y, ch);
    }
};

struct ConvWeights {
    std::vector<int8_t> w;      // [oc][ic][ky][kx]; depthwise: [c][ky][kx]
    std::vector<int32_t> bias;  // per output channel
};

inline int8_t saturate8(int32_t v) {
    if (v > 127) return 127;
    if (v < -128) return -128;
    return int8_t(v);
}

// round half away from zero, then saturate to 8 bits
inline int8_t requantize(int32_t acc, int shift) {
    if (shift <= 0) return saturate8(acc);
    int32_t half = 1 << (shift - 1);
    int32_t r = acc >= 0 ? (acc + half) >> shift : -((-acc + half) >> shift);
    return saturate8(r);
}

// 8-bit look-up activations: one 256-entry table per kind. Sigmoid maps
// Q4.3 inputs to Q0.7; swish keeps the Q4.3 scale so its output range
// fits (sigmoid saturates at 127/128 by construction).
inline const std::array<int8_t, 256>& lut_table(Activation kind) {
    static const std::array<int8_t, 256> sigmoid_tab = [] {
        std::array<int8_t, 256> t{};
        for (int i = 0; i < 256; i++) {
            double x = double(int8_t(i)) / 8.0;
            double s = 1.0 / (1.0 + std::exp(-x));
            t[size_t(i)] = saturate8(int32_t(std::lround(s * 128.0)));
        }
        return t;
    }();
    static const std::array<int8_t, 256> swish_tab = [] {
        std::array<int8_t, 256> t{};
        for (int i = 0; i < 256; i++) {
            double x = double(int8_t(i)) / 8.0;
            double s = x / (1.0 + std::exp(-x));
            t[size_t(i)] = saturate8(int32_t(std::lround(s * 8.0)));
        }
        return t;
    }();
    if (kind == Activation::sigmoid) return sigmoid_tab;
    if (kind == Activation::swish) return swish_tab;
    throw GraphError("no look-up table for this activation");
}

inline int8_t lut_activation(Activation kind, int8_t x) {
    return lut_table(kind)[size_t(uint8_t(x))];
}

inline int8_t apply_activation(Activation act, int8_t x) {
    switch (act) {
        case Activation::none:
            return x;
        case Activation::relu:
            return x < 0 ? int8_t(0) : x;
        case Activation::leaky: {
            if (x >= 0) return x;
            int32_t v = x;
            return int8_t(-((-v + 4) >> 3));  // slope 1/8
        }
        case Activation::sigmoid:
        case Activation::swish:
            return lut_activation(act, x);
    }
    return x;
}

namespace detail {

// Convolution accumulators; normal convolutions route output-channel
// pairs through the packed double_mac path, depthwise uses the single
// path. Both must match a plain integer loop nest bit-exactly.
inline std::vector<int32_t> conv_accumulate(const LayerNode& l,
                                            const Tensor& in,
                                            const ConvWeights& wt) {
    int ow = l.out_w, oh = l.out_h, oc = l.out_c, ic = l.in_c, k = l.kernel;
    int pad = (k - 1) / 2;
    std::vector<int32_t> acc(size_t(ow) * oh * oc);
    if (l.kind == LayerKind::dwconv) {
        for (int ch = 0; ch < oc; ch++)
            for (int y = 0; y < oh; y++)
                for (int x = 0; x < ow; x++) {
                    int32_t a = wt.bias[size_t(ch)];
                    for (int ky = 0; ky < k; ky++)
                        for (int kx = 0; kx < k; kx++) {
                            int32_t iv = in.get(x * l.stride + kx - pad,
                                                y * l.stride + ky - pad, ch);
                            int32_t wv =
                                wt.w[(size_t(ch) * k + ky) * k + kx];
                            a += iv * wv;  // single-MAC path
                        }
                    acc[(size_t(ch) * oh + y) * ow + x] = a;
                }
        return acc;
    }
    auto wat = [&](int o, int i, int ky, int kx) {
        return int32_t(wt.w[((size_t(o) * ic + i) * k + ky) * k + kx]);
    };
    for (int o = 0; o < oc; o += 2) {
        bool pair = o + 1 < oc;
        for (int y = 0; y < oh; y++)
            for (int x = 0; x < ow; x++) {
                int32_t a0 = wt.bias[size_t(o)];
                int32_t a1 = pair ? wt.bias[size_t(o) + 1] : 0;
                for (int i = 0; i < ic; i++)
                    for (int ky = 0; ky < k; ky++)
                        for (int kx = 0; kx < k; kx++) {
                            int32_t iv = in.get(x * l.stride + kx - pad,
                                                y * l.stride + ky - pad, i);
                            auto [m0, m1] = double_mac(
                                iv, wat(o, i, ky, kx),
                                pair ? wat(o + 1, i, ky, kx) : 0);
                            a0 += m0;
                            a1 += m1;
                        }
                acc[(size_t(o) * oh + y) * ow + x] = a0;
                if (pair) acc[((size_t(o) + 1) * oh + y) * ow + x] = a1;
            }
    }
    return acc;
}

}  // namespace detail

// Executes one fused group on 8-bit data: quantized convolution (32-bit
// accumulate, per-layer shift, saturate), then the activation / pool /
// eltwise / upsample chain in group order.
inline Tensor conv_reference(const NetworkGraph& g, const NodeGroup& grp,
                             const Tensor& input, const ConvWeights& weights,
                             const Tensor* shortcut = nullptr,
                             const Tensor* scale_vector = nullptr) {
    Tensor cur = input;
    for (int lid : grp.layer_ids) {
        const LayerNode& l = g.layer(lid);
        if (cur.w != l.in_w || cur.h != l.in_h || cur.c != l.in_c)
            throw GraphError("layer " + std::to_string(lid) +
                             ": tensor shape mismatch");
        switch (l.kind) {
            case LayerKind::conv:
            case LayerKind::dwconv:
            case LayerKind::fc: {
                auto acc = detail::conv_accumulate(l, cur, weights);
                Tensor out(l.out_w, l.out_h, l.out_c);
                for (size_t i = 0; i < acc.size(); i++)
                    out.data[i] = requantize(acc[i], l.quant_shift);
                cur = std::move(out);
                break;
            }
            case LayerKind::scale: {
                if (!scale_vector)
                    throw GraphError("scale layer without its vector");
                Tensor out(l.out_w, l.out_h, l.out_c);
                for (int ch = 0; ch < l.out_c; ch++)
                    for (int y = 0; y < l.out_h; y++)
                        for (int x = 0; x < l.out_w; x++)
                            out.at(x, y, ch) = requantize(
                                int32_t(cur.at(x, y, ch)) *
                                    scale_vector->at(0, 0, ch),
                                7);  // vector in Q0.7
                cur = std::move(out);
                break;
            }
            case LayerKind::activation:
                break;  // applied below via l.activation
            case LayerKind::maxpool: {
                Tensor out(l.out_w, l.out_h, l.out_c);
                for (int ch = 0; ch < l.out_c; ch++)
                    for (int y = 0; y < l.out_h; y++)
                        for (int x = 0; x < l.out_w; x++) {
                            int32_t m = -128;
                            for (int ky = 0; ky < l.kernel; ky++)
                                for (int kx = 0; kx < l.kernel; kx++) {
                                    int sx = x * l.stride + kx;
                                    int sy = y * l.stride + ky;
                                    if (sx < cur.w && sy < cur.h)
                                        m = std::max(
                                            m, int32_t(cur.at(sx, sy, ch)));
                                }
                            out.at(x, y, ch) = int8_t(m);
                        }
                cur = std::move(out);
                break;
            }
            case LayerKind::avgpool_global: {
                Tensor out(1, 1, l.out_c);
                for (int ch = 0; ch < l.out_c; ch++) {
                    int64_t sum = 0;
                    for (int y = 0; y < cur.h; y++)
                        for (int x = 0; x < cur.w; x++)
                            sum += cur.at(x, y, ch);
                    int64_t n = int64_t(cur.w) * cur.h;
                    int64_t r = sum >= 0 ? (sum + n / 2) / n
                                         : -((-sum + n / 2) / n);
                    out.at(0, 0, ch) = saturate8(int32_t(r));
                }
                cur = std::move(out);
                break;
            }
            case LayerKind::eltwise_add: {
                if (!shortcut)
                    throw GraphError("eltwise layer without shortcut tensor");
                for (size_t i = 0; i < cur.data.size(); i++)
                    cur.data[i] = saturate8(int32_t(cur.data[i]) +
                                            int32_t(shortcut->data[i]));
                break;
            }
            case LayerKind::upsample: {
                int f = l.upsample_factor;
                Tensor out(l.out_w, l.out_h, l.out_c);
                for (int ch = 0; ch < l.out_c; ch++)
                    for (int y = 0; y < l.out_h; y++)
                        for (int x = 0; x < l.out_w; x++)
                            out.at(x, y, ch) = cur.at(x / f, y / f, ch);
                cur = std::move(out);
                break;
            }
            case LayerKind::concat:
                throw GraphError("concat is not executed through a group");
        }
        if (l.activation != Activation::none)
            for (auto& v : cur.data) v = apply_activation(l.activation, v);
    }
    return cur;
}

}  // namespace scf
