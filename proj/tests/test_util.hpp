#pragma once

#include <fstream>
#include <sstream>

#include "scf/fusion.hpp"
#include "scf/policy.hpp"

namespace scft {

inline scf::NetworkGraph load_model(const std::string& name,
                                    int input_size = 0) {
    std::string path = std::string(SCF_MODELS_DIR) + "/" + name + ".json";
    std::ifstream f(path);
    if (!f) throw std::runtime_error("missing model file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return scf::parse_network(ss.str(), input_size, input_size);
}

// Small programmatic graph builder for synthetic test nets.
struct GraphBuilder {
    nlohmann::json doc;

    explicit GraphBuilder(int w, int h, int c, const std::string& name = "t") {
        doc["name"] = name;
        doc["input"] = {{"width", w}, {"height", h}, {"channels", c}};
        doc["layers"] = nlohmann::json::array();
    }
    int add(nlohmann::json layer) {
        int id = int(doc["layers"].size());
        layer["id"] = id;
        doc["layers"].push_back(std::move(layer));
        return id;
    }
    int conv(int out_c, int k = 3, int stride = 1,
             const std::string& act = "relu", int from = -2) {
        nlohmann::json l{{"kind", "conv"}, {"out_channels", out_c},
                         {"kernel", k},   {"stride", stride},
                         {"activation", act}};
        if (from != -2) l["from"] = from;
        return add(std::move(l));
    }
    int eltwise(int shortcut, int from = -2) {
        nlohmann::json l{{"kind", "eltwise_add"}, {"shortcut", shortcut}};
        if (from != -2) l["from"] = from;
        return add(std::move(l));
    }
    int maxpool(int k = 2, int s = 2) {
        return add({{"kind", "maxpool"}, {"kernel", k}, {"stride", s}});
    }
    scf::NetworkGraph build() { return scf::parse_network(doc); }
};

struct Bundle {
    scf::NetworkGraph graph;
    scf::GroupedGraph groups;
    std::vector<scf::Block> blocks;
    scf::SegmentPlan plan;
};

inline Bundle bundle_of(scf::NetworkGraph g, bool fuse = true) {
    Bundle b;
    b.graph = std::move(g);
    b.groups = scf::fuse_groups(b.graph, fuse);
    b.blocks = scf::detect_blocks(b.groups, b.graph);
    b.plan = scf::infer_segments(b.blocks);
    return b;
}

inline Bundle load_bundle(const std::string& name, int input_size = 0) {
    return bundle_of(load_model(name, input_size));
}

}  // namespace scft
