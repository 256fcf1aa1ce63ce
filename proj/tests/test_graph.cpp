#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace scf;

TEST(Parse, Yolov2Structure) {
    NetworkGraph g = scft::load_model("yolov2");
    EXPECT_EQ(g.layers.size(), 21u);  // 16 conv + 5 pool
    int convs = 0;
    for (const auto& l : g.layers) convs += l.kind == LayerKind::conv;
    EXPECT_EQ(convs, 16);
    EXPECT_EQ(g.in_w, 416);
    auto b = scft::bundle_of(g);
    for (const auto& blk : b.blocks) EXPECT_EQ(blk.kind, BlockKind::plain);
    // final feature map of the detection trunk
    EXPECT_EQ(g.layers.back().out_w, 13);
    EXPECT_EQ(g.layers.back().out_c, 1024);
}

TEST(Parse, SingleConvIdentityScale) {
    scft::GraphBuilder gb(1, 1, 1);
    gb.conv(7, 1, 1, "none");
    NetworkGraph g = gb.build();
    ASSERT_EQ(g.layers.size(), 1u);
    EXPECT_EQ(g.layers[0].out_w, 1);
    EXPECT_EQ(g.layers[0].out_h, 1);
    EXPECT_EQ(g.layers[0].out_c, 7);
}

TEST(Parse, Resnet50Counts) {
    // hand count of the public bottleneck table: 1 stem + per-stage
    // 3*(3,4,6,3) + 4 projection convs = 53; 16 residual blocks
    auto b = scft::load_bundle("resnet50");
    int convs = 0;
    for (const auto& l : b.graph.layers) convs += l.kind == LayerKind::conv;
    EXPECT_EQ(convs, 53);
    int residual = 0;
    for (const auto& blk : b.blocks)
        residual += blk.kind == BlockKind::residual;
    EXPECT_EQ(residual, 16);
}

TEST(Parse, RoundTripIdentity) {
    for (const char* name : {"yolov2", "resnet50", "yolov3",
                             "efficientnet_b1", "toy3"}) {
        NetworkGraph g = scft::load_model(name);
        std::string s1 = serialize_network(g);
        NetworkGraph g2 = parse_network(s1);
        std::string s2 = serialize_network(g2);
        EXPECT_EQ(s1, s2) << name;
        ASSERT_EQ(g.layers.size(), g2.layers.size());
        for (size_t i = 0; i < g.layers.size(); i++) {
            EXPECT_EQ(g.layers[i].out_w, g2.layers[i].out_w);
            EXPECT_EQ(g.layers[i].out_c, g2.layers[i].out_c);
        }
    }
}

TEST(Parse, MacsMatchDeclaredGop) {
    for (const char* name :
         {"yolov2", "vgg16_conv", "resnet50", "resnet152", "yolov3",
          "retinanet", "efficientnet_b1"}) {
        NetworkGraph g = scft::load_model(name);
        ASSERT_GT(g.declared_gop, 0.0) << name;
        double gop = 2.0 * double(total_macs(g)) / 1e9;
        EXPECT_NEAR(gop, g.declared_gop, 0.01 * g.declared_gop) << name;
    }
}

TEST(Parse, EltwiseShapeMismatch) {
    scft::GraphBuilder gb(8, 8, 3);
    gb.conv(16);
    gb.conv(32);
    gb.eltwise(0);  // 16 vs 32 channels
    EXPECT_THROW(gb.build(), GraphError);
}

TEST(Parse, UnknownKindNamesLayer) {
    scft::GraphBuilder gb(8, 8, 3);
    gb.add({{"kind", "deconv"}});
    try {
        gb.build();
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("deconv"), std::string::npos);
    }
}

TEST(Parse, ForwardReferenceIsCycleError) {
    scft::GraphBuilder gb(8, 8, 3);
    gb.conv(16, 3, 1, "relu", 1);  // consumes a later layer
    gb.conv(16);
    EXPECT_THROW(gb.build(), GraphError);
}

TEST(Parse, ConcatWidthMismatch) {
    scft::GraphBuilder gb(8, 8, 3);
    gb.conv(8);
    gb.conv(8, 3, 2, "relu", 0);
    gb.add({{"kind", "concat"}, {"sources", {0, 1}}});
    EXPECT_THROW(gb.build(), GraphError);
}

TEST(Parse, LongPathConcatFlag) {
    NetworkGraph g = scft::load_model("yolov3");
    int concats = 0;
    for (const auto& l : g.layers) {
        if (l.kind != LayerKind::concat) continue;
        concats++;
        ASSERT_EQ(l.concat_srcs.size(), 2u);
        EXPECT_FALSE(l.concat_long_path[0]);  // upsample output just before
        EXPECT_TRUE(l.concat_long_path[1]);   // backbone tap far behind
    }
    EXPECT_EQ(concats, 2);
}

TEST(Segments, ClassificationNetsHaveOneCutPoint) {
    for (const char* name : {"resnet50", "resnet152", "efficientnet_b1",
                             "vgg16_conv", "yolov2"}) {
        auto b = scft::load_bundle(name);
        EXPECT_EQ(b.plan.k(), 1) << name;
        EXPECT_FALSE(b.plan.segments[0].increasing) << name;
    }
}

TEST(Segments, DetectorsWithFeaturePyramidsHaveTwo) {
    for (const char* name : {"yolov3", "retinanet"}) {
        auto b = scft::load_bundle(name);
        EXPECT_EQ(b.plan.k(), 2) << name;
        EXPECT_FALSE(b.plan.segments[0].increasing) << name;
        EXPECT_TRUE(b.plan.segments[1].increasing) << name;
    }
}

// synthetic area sequences for the multi-path feature-network families
namespace {
std::vector<Block> blocks_from_areas(const std::vector<int>& areas) {
    std::vector<Block> blocks;
    for (size_t i = 0; i < areas.size(); i++) {
        Block b;
        b.block_id = int(i);
        b.out_area = areas[i];
        blocks.push_back(b);
    }
    return blocks;
}
}  // namespace

TEST(Segments, PathAggregationStyles) {
    // top-down + bottom-up feature fusion: three monotone runs
    EXPECT_EQ(infer_segments(blocks_from_areas({64, 16, 4, 16, 64, 16, 4}))
                  .k(),
              3);
    // bidirectional pyramid with r repeated stacks: 2r+1 runs
    for (int r = 1; r <= 3; r++) {
        std::vector<int> areas{64, 16, 4};
        for (int i = 0; i < r; i++) {
            areas.insert(areas.end(), {16, 64});
            areas.insert(areas.end(), {16, 4});
        }
        areas.pop_back();
        EXPECT_EQ(infer_segments(blocks_from_areas(areas)).k(), 2 * r + 1)
            << "repeats " << r;
    }
}

TEST(Segments, MonotoneGraphsAlwaysSingleSegment) {
    // any nonincreasing area sequence yields k = 1
    for (int seed = 1; seed <= 20; seed++) {
        uint32_t s = uint32_t(seed) * 2654435761u;
        std::vector<int> areas;
        int cur = 4096;
        for (int i = 0; i < 10; i++) {
            areas.push_back(cur);
            s = s * 1664525u + 1013904223u;
            if (s % 3 == 0 && cur > 1) cur /= 4;
        }
        EXPECT_EQ(infer_segments(blocks_from_areas(areas)).k(), 1);
    }
}

TEST(Fusion, MacMultisetPreserved) {
    for (const char* name : {"yolov2", "resnet50", "yolov3"}) {
        NetworkGraph g = scft::load_model(name);
        GroupedGraph gg = fuse_groups(g);
        long long conv_macs = 0, grouped = 0;
        for (const auto& l : g.layers) conv_macs += layer_macs(l);
        std::set<int> seen;
        for (const auto& grp : gg.groups)
            for (int lid : grp.layer_ids) {
                EXPECT_TRUE(seen.insert(lid).second)
                    << "layer in two groups";
                grouped += layer_macs(g.layer(lid));
            }
        EXPECT_EQ(seen.size(), g.layers.size());
        EXPECT_EQ(conv_macs, grouped);
    }
}
