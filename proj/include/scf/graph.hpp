#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scf/common.hpp"

namespace scf {

struct LayerNode {
    int id = 0;
    LayerKind kind = LayerKind::conv;
    int from = -1;  // primary input layer id; -1 = network input
    int in_w = 0, in_h = 0, in_c = 0;
    int out_w = 0, out_h = 0, out_c = 0;
    int kernel = 1;
    int stride = 1;
    int upsample_factor = 2;
    Activation activation = Activation::none;
    bool batchnorm_folded = false;
    int quant_shift = 7;
    std::optional<int> shortcut_src;    // eltwise second input / scale vector
    std::vector<int> concat_srcs;
    std::vector<bool> concat_long_path;  // parallel to concat_srcs

    bool conv_bearing() const {
        return kind == LayerKind::conv || kind == LayerKind::dwconv ||
               kind == LayerKind::fc || kind == LayerKind::scale;
    }
};

struct NetworkGraph {
    std::string name;
    int in_w = 0, in_h = 0, in_c = 0;
    double declared_gop = 0.0;
    std::vector<LayerNode> layers;

    const LayerNode& layer(int id) const { return layers.at(size_t(id)); }
};

inline const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::dwconv: return "dwconv";
        case LayerKind::fc: return "fc";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::avgpool_global: return "avgpool_global";
        case LayerKind::eltwise_add: return "eltwise_add";
        case LayerKind::concat: return "concat";
        case LayerKind::upsample: return "upsample";
        case LayerKind::activation: return "activation";
        case LayerKind::scale: return "scale";
    }
    return "?";
}

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::none: return "none";
        case Activation::relu: return "relu";
        case Activation::leaky: return "leaky";
        case Activation::sigmoid: return "sigmoid";
        case Activation::swish: return "swish";
    }
    return "?";
}

inline const char* to_string(Scheme s) {
    return s == Scheme::row_reuse ? "row" : "frame";
}

namespace detail {

inline LayerKind parse_kind(const std::string& s, int id) {
    if (s == "conv") return LayerKind::conv;
    if (s == "dwconv") return LayerKind::dwconv;
    if (s == "fc") return LayerKind::fc;
    if (s == "maxpool") return LayerKind::maxpool;
    if (s == "avgpool_global") return LayerKind::avgpool_global;
    if (s == "eltwise_add") return LayerKind::eltwise_add;
    if (s == "concat") return LayerKind::concat;
    if (s == "upsample") return LayerKind::upsample;
    if (s == "activation") return LayerKind::activation;
    if (s == "scale") return LayerKind::scale;
    throw ParseError("layer " + std::to_string(id) + ": unknown layer kind '" +
                     s + "'");
}

inline Activation parse_activation(const std::string& s, int id) {
    if (s == "none") return Activation::none;
    if (s == "relu") return Activation::relu;
    if (s == "leaky") return Activation::leaky;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "swish") return Activation::swish;
    throw ParseError("layer " + std::to_string(id) +
                     ": unknown activation '" + s + "'");
}

}  // namespace detail

// Propagates shapes from the network input through every layer and checks
// the structural invariants (topological ids, eltwise/concat shape
// agreement). Throws ParseError/GraphError with the offending layer id.
inline void propagate_shapes(NetworkGraph& g) {
    auto shape_of = [&](int src, const LayerNode& at) {
        if (src < 0) return std::array<int, 3>{g.in_w, g.in_h, g.in_c};
        if (src >= at.id)
            throw GraphError("layer " + std::to_string(at.id) +
                             ": input id " + std::to_string(src) +
                             " does not precede it (cycle)");
        const LayerNode& p = g.layers[size_t(src)];
        return std::array<int, 3>{p.out_w, p.out_h, p.out_c};
    };
    for (auto& l : g.layers) {
        auto in = shape_of(l.from, l);
        l.in_w = in[0];
        l.in_h = in[1];
        l.in_c = in[2];
        switch (l.kind) {
            case LayerKind::conv:
                l.out_w = int(ceil_div(l.in_w, l.stride));
                l.out_h = int(ceil_div(l.in_h, l.stride));
                break;
            case LayerKind::dwconv:
            case LayerKind::maxpool:
                l.out_w = int(ceil_div(l.in_w, l.stride));
                l.out_h = int(ceil_div(l.in_h, l.stride));
                l.out_c = l.in_c;
                break;
            case LayerKind::avgpool_global:
                l.out_w = l.out_h = 1;
                l.out_c = l.in_c;
                break;
            case LayerKind::fc:
                l.out_w = l.out_h = 1;
                break;
            case LayerKind::eltwise_add: {
                if (!l.shortcut_src)
                    throw GraphError("layer " + std::to_string(l.id) +
                                     ": eltwise_add without shortcut source");
                auto sc = shape_of(*l.shortcut_src, l);
                if (sc != in)
                    throw GraphError(
                        "layer " + std::to_string(l.id) +
                        ": eltwise shape mismatch (" + std::to_string(in[0]) +
                        "x" + std::to_string(in[1]) + "x" +
                        std::to_string(in[2]) + " vs shortcut " +
                        std::to_string(sc[0]) + "x" + std::to_string(sc[1]) +
                        "x" + std::to_string(sc[2]) + ")");
                l.out_w = l.in_w;
                l.out_h = l.in_h;
                l.out_c = l.in_c;
                break;
            }
            case LayerKind::concat: {
                if (l.concat_srcs.empty())
                    throw GraphError("layer " + std::to_string(l.id) +
                                     ": concat without sources");
                int c = 0;
                auto first = shape_of(l.concat_srcs[0], l);
                for (int s : l.concat_srcs) {
                    auto sh = shape_of(s, l);
                    if (sh[0] != first[0] || sh[1] != first[1])
                        throw GraphError("layer " + std::to_string(l.id) +
                                         ": concat source " +
                                         std::to_string(s) +
                                         " disagrees in width/height");
                    c += sh[2];
                }
                l.in_w = first[0];
                l.in_h = first[1];
                l.in_c = shape_of(l.concat_srcs[0], l)[2];
                l.out_w = first[0];
                l.out_h = first[1];
                l.out_c = c;
                break;
            }
            case LayerKind::upsample:
                l.out_w = l.in_w * l.upsample_factor;
                l.out_h = l.in_h * l.upsample_factor;
                l.out_c = l.in_c;
                break;
            case LayerKind::activation:
            case LayerKind::scale:
                l.out_w = l.in_w;
                l.out_h = l.in_h;
                l.out_c = l.in_c;
                break;
        }
    }
}

// A concatenation source with a long on-chip lifetime is flagged so the
// allocator can spill it: anything that is not the direct predecessor of
// the concat counts as long-path.
inline void flag_long_path_sources(NetworkGraph& g) {
    for (auto& l : g.layers) {
        if (l.kind != LayerKind::concat) continue;
        l.concat_long_path.clear();
        for (int s : l.concat_srcs)
            l.concat_long_path.push_back(s != l.id - 1);
    }
}

inline NetworkGraph parse_network(const nlohmann::json& doc,
                                  int input_w = 0, int input_h = 0) {
    NetworkGraph g;
    try {
        g.name = doc.at("name").get<std::string>();
        const auto& in = doc.at("input");
        g.in_w = in.at("width").get<int>();
        g.in_h = in.at("height").get<int>();
        g.in_c = in.at("channels").get<int>();
        g.declared_gop = doc.value("declared_gop", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed network document: ") +
                         e.what());
    }
    if (input_w > 0) g.in_w = input_w;
    if (input_h > 0) g.in_h = input_h;

    int next_id = 0;
    for (const auto& jl : doc.at("layers")) {
        LayerNode l;
        l.id = jl.value("id", next_id);
        if (l.id != next_id)
            throw ParseError("layer " + std::to_string(l.id) +
                             ": ids must be dense and ordered");
        next_id++;
        l.kind = detail::parse_kind(jl.at("kind").get<std::string>(), l.id);
        l.from = jl.value("from", l.id - 1);
        l.kernel = jl.value("kernel", l.kind == LayerKind::maxpool ? 2 : 1);
        l.stride = jl.value("stride", l.kind == LayerKind::maxpool ? 2 : 1);
        l.upsample_factor = jl.value("factor", 2);
        l.out_c = jl.value("out_channels", 0);
        l.quant_shift = jl.value("quant_shift", 7);
        l.batchnorm_folded = jl.value("batchnorm", false);
        if (jl.contains("activation"))
            l.activation = detail::parse_activation(
                jl["activation"].get<std::string>(), l.id);
        if (jl.contains("shortcut"))
            l.shortcut_src = jl["shortcut"].get<int>();
        if (jl.contains("vector")) l.shortcut_src = jl["vector"].get<int>();
        if (jl.contains("sources"))
            l.concat_srcs = jl["sources"].get<std::vector<int>>();
        if ((l.kind == LayerKind::conv || l.kind == LayerKind::fc) &&
            l.out_c <= 0)
            throw ParseError("layer " + std::to_string(l.id) +
                             ": conv/fc requires out_channels");
        g.layers.push_back(std::move(l));
    }
    propagate_shapes(g);
    flag_long_path_sources(g);
    return g;
}

inline NetworkGraph parse_network(const std::string& text, int input_w = 0,
                                  int input_h = 0) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_network(doc, input_w, input_h);
}

// Canonical serialization; parse(serialize(g)) == g on the canonical form.
inline std::string serialize_network(const NetworkGraph& g) {
    nlohmann::json doc;
    doc["name"] = g.name;
    doc["input"] = {{"width", g.in_w}, {"height", g.in_h},
                    {"channels", g.in_c}};
    doc["declared_gop"] = g.declared_gop;
    auto& jls = doc["layers"] = nlohmann::json::array();
    for (const auto& l : g.layers) {
        nlohmann::json jl;
        jl["id"] = l.id;
        jl["kind"] = to_string(l.kind);
        if (l.from != l.id - 1) jl["from"] = l.from;
        if (l.kind == LayerKind::conv || l.kind == LayerKind::fc)
            jl["out_channels"] = l.out_c;
        if (l.kind == LayerKind::conv || l.kind == LayerKind::dwconv ||
            l.kind == LayerKind::maxpool) {
            jl["kernel"] = l.kernel;
            jl["stride"] = l.stride;
        }
        if (l.kind == LayerKind::upsample) jl["factor"] = l.upsample_factor;
        if (l.activation != Activation::none)
            jl["activation"] = to_string(l.activation);
        if (l.batchnorm_folded) jl["batchnorm"] = true;
        if (l.quant_shift != 7) jl["quant_shift"] = l.quant_shift;
        if (l.shortcut_src) {
            if (l.kind == LayerKind::scale)
                jl["vector"] = *l.shortcut_src;
            else
                jl["shortcut"] = *l.shortcut_src;
        }
        if (!l.concat_srcs.empty()) jl["sources"] = l.concat_srcs;
        jls.push_back(std::move(jl));
    }
    return doc.dump(1) + "\n";
}

// ---- sizes and operation counts ----

inline long long in_size_bytes(const LayerNode& l, const HwConfig& hw) {
    return 1LL * l.in_w * l.in_h * l.in_c * hw.qa_bytes();
}

inline long long out_size_bytes(const LayerNode& l, const HwConfig& hw) {
    return 1LL * l.out_w * l.out_h * l.out_c * hw.qa_bytes();
}

// Weights at the activation word width plus one 32-bit bias/scale word per
// output channel (folded batch norm included).
inline long long weight_size_bytes(const LayerNode& l, const HwConfig& hw) {
    switch (l.kind) {
        case LayerKind::conv:
            return 1LL * l.kernel * l.kernel * l.in_c * l.out_c *
                       hw.qa_bytes() +
                   4LL * l.out_c;
        case LayerKind::dwconv:
            return 1LL * l.kernel * l.kernel * l.in_c * hw.qa_bytes() +
                   4LL * l.in_c;
        case LayerKind::fc:
            return 1LL * l.in_c * l.out_c * hw.qa_bytes() + 4LL * l.out_c;
        default:
            return 0;  // scale reads its vector from the SE branch
    }
}

inline long long layer_macs(const LayerNode& l) {
    switch (l.kind) {
        case LayerKind::conv:
            return 1LL * l.kernel * l.kernel * l.in_c * l.out_c * l.out_w *
                   l.out_h;
        case LayerKind::dwconv:
            return 1LL * l.kernel * l.kernel * l.in_c * l.out_w * l.out_h;
        case LayerKind::fc:
            return 1LL * l.in_c * l.out_c;
        case LayerKind::scale:
            return 1LL * l.in_c * l.out_w * l.out_h;
        default:
            return 0;
    }
}

inline long long total_macs(const NetworkGraph& g) {
    long long t = 0;
    for (const auto& l : g.layers) t += layer_macs(l);
    return t;
}

inline long long total_weight_bytes(const NetworkGraph& g,
                                    const HwConfig& hw) {
    long long t = 0;
    for (const auto& l : g.layers) t += weight_size_bytes(l, hw);
    return t;
}

// Traffic when every layer reads its primary input and writes its output
// from/to DRAM exactly once and weights are loaded once: the reference
// point for off-chip reduction numbers.
inline long long baseline_dram(const NetworkGraph& g, const HwConfig& hw) {
    long long t = 0;
    for (const auto& l : g.layers)
        t += in_size_bytes(l, hw) + out_size_bytes(l, hw);
    return t + total_weight_bytes(g, hw);
}

inline bool is_terminal(const NetworkGraph& g, int id) {
    for (const auto& l : g.layers) {
        if (l.from == id) return false;
        if (l.shortcut_src && *l.shortcut_src == id) return false;
        for (int s : l.concat_srcs)
            if (s == id) return false;
    }
    return true;
}

}  // namespace scf
