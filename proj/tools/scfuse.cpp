// Command-line driver: compile, optimize, sweep, simulate and report on
// network description files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "scf/image.hpp"
#include "scf/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string model;
    std::string out_dir;
    int input_size = 0;
    int ti = 64, to = 64;
    int qa = 8;
    long long bram_budget = 0;
    long long mac_budget = 0;
    int bus_bytes = 96;
    double freq_mhz = 200.0;
    bool no_fusion = false;
    uint64_t seed = 0x5cf0c0de;
};

struct Compiled {
    scf::NetworkGraph graph;
    scf::GroupedGraph groups;
    std::vector<scf::Block> blocks;
    scf::SegmentPlan plan;
    scf::HwConfig hw;
};

Compiled load(const Options& opt) {
    std::ifstream f(opt.model);
    if (!f) throw scf::ParseError("cannot open model file " + opt.model);
    std::stringstream ss;
    ss << f.rdbuf();
    Compiled c;
    c.graph = scf::parse_network(ss.str(), opt.input_size, opt.input_size);
    c.groups = scf::fuse_groups(c.graph, !opt.no_fusion);
    c.blocks = scf::detect_blocks(c.groups, c.graph);
    c.plan = scf::infer_segments(c.blocks);
    c.hw.ti = opt.ti;
    c.hw.to = opt.to;
    c.hw.qa_bits = opt.qa;
    c.hw.bram_budget = opt.bram_budget;
    c.hw.mac_budget = opt.mac_budget;
    c.hw.bus_bytes_per_cycle = opt.bus_bytes;
    c.hw.freq_hz = opt.freq_mhz * 1e6;
    return c;
}

fs::path out_path(const Options& opt, const std::string& name) {
    fs::path dir = opt.out_dir;
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

void write_file(const fs::path& p, const std::vector<uint8_t>& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
}

// Machine-readable record of what produced the artifacts (no timestamps;
// outputs stay byte-identical across runs).
void write_sidecar(const Options& opt, const std::string& command) {
    std::ostringstream os;
    os << "command=" << command << "\nmodel=" << opt.model
       << "\ninput_size=" << opt.input_size << "\nti=" << opt.ti
       << "\nto=" << opt.to << "\nqa=" << opt.qa
       << "\nbram_budget=" << opt.bram_budget
       << "\nbus_bytes=" << opt.bus_bytes << "\n";
    write_file(out_path(opt, command + ".meta"), os.str());
}

int run_compile(const Options& opt) {
    Compiled c = load(opt);
    // all-frame when it fits, otherwise the search picks the policy
    scf::SearchResult best = scf::search_cut_points(c.graph, c.groups,
                                                    c.blocks, c.plan, c.hw);
    auto instructions =
        scf::emit_instructions(c.groups, c.blocks, best.eval.policy,
                               best.eval.assignment, c.graph, c.hw);
    auto weights = scf::generate_weights(c.graph, c.hw, opt.seed);
    std::vector<uint8_t> input(
        size_t(1LL * c.graph.in_w * c.graph.in_h * c.graph.in_c *
               c.hw.qa_bytes()));
    auto image = scf::pack_image(instructions, weights, input);
    write_file(out_path(opt, c.graph.name + ".img"), image);
    write_file(out_path(opt, c.graph.name + "_alloc.csv"),
               scf::cost_report_csv(best.eval.policy, best.eval.assignment,
                                    c.groups, c.blocks, c.graph, c.hw));
    write_sidecar(opt, "compile");
    std::cout << "image: " << image.size() << " bytes, "
              << instructions.size() << " instructions\n";
    return 0;
}

int run_optimize(const Options& opt) {
    Compiled c = load(opt);
    scf::SearchResult best = scf::search_cut_points(c.graph, c.groups,
                                                    c.blocks, c.plan, c.hw);
    std::string summary =
        scf::summary_text("optimize", c.graph, c.hw, best.eval, best.cuts);
    write_file(out_path(opt, c.graph.name + "_optimize.txt"), summary);
    write_file(out_path(opt, c.graph.name + "_alloc.csv"),
               scf::cost_report_csv(best.eval.policy, best.eval.assignment,
                                    c.groups, c.blocks, c.graph, c.hw));
    write_sidecar(opt, "optimize");
    std::cout << summary;
    return 0;
}

int run_sweep(const Options& opt) {
    Compiled c = load(opt);
    auto points =
        scf::sweep_cut_points(c.graph, c.groups, c.blocks, c.plan, c.hw);
    std::string csv = scf::sweep_csv(points);
    write_file(out_path(opt, c.graph.name + "_sweep.csv"), csv);
    write_sidecar(opt, "sweep");
    std::cout << csv;
    return 0;
}

int run_simulate(const Options& opt) {
    Compiled c = load(opt);
    scf::SearchResult best = scf::search_cut_points(c.graph, c.groups,
                                                    c.blocks, c.plan, c.hw);
    scf::LatencyReport rep =
        scf::simulate_network(best.eval.policy, best.eval.assignment,
                              c.groups, c.blocks, c.graph, c.hw);
    write_file(out_path(opt, c.graph.name + "_trace.txt"),
               scf::trace_text(rep.trace));
    std::ostringstream os;
    os << "group,scheme,compute_cycles,memory_cycles,total_cycles\n";
    for (const auto& t : rep.groups)
        os << t.group_id << ',' << scf::to_string(t.scheme) << ','
           << t.compute_cycles << ',' << t.memory_cycles << ','
           << t.total_cycles << '\n';
    write_file(out_path(opt, c.graph.name + "_latency.csv"), os.str());
    write_sidecar(opt, "simulate");
    std::cout << "cycles: " << rep.total_cycles
              << " ms: " << scf::fmt(rep.seconds * 1e3, 4)
              << " gops: " << scf::fmt(rep.gops, 1)
              << " trace_bytes: " << rep.trace_feature_bytes << "\n";
    return 0;
}

int run_report(const Options& opt) {
    Compiled c = load(opt);
    scf::SearchResult best = scf::search_cut_points(c.graph, c.groups,
                                                    c.blocks, c.plan, c.hw);
    long long base = scf::baseline_dram(c.graph, c.hw);
    std::ostringstream os;
    os << scf::summary_text("report", c.graph, c.hw, best.eval, best.cuts);
    os << "baseline_vs_total: " << scf::fmt(scf::to_mb(base), 3) << " MB -> "
       << scf::fmt(scf::to_mb(best.eval.total_dram_bytes), 3) << " MB\n";
    write_file(out_path(opt, c.graph.name + "_report.txt"), os.str());
    write_sidecar(opt, "report");
    std::cout << os.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reuse-aware scheduling compiler for CNN accelerators"};
    app.require_subcommand(1);
    Options opt;
    if (const char* env = std::getenv("SCFUSE_OUT_DIR")) opt.out_dir = env;
    if (opt.out_dir.empty()) opt.out_dir = ".";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--model", opt.model, "network description file")
            ->required();
        sub->add_option("--input-size", opt.input_size,
                        "override the square input resolution");
        sub->add_option("--ti", opt.ti, "input-channel parallelism");
        sub->add_option("--to", opt.to, "output-channel parallelism");
        sub->add_option("--qa", opt.qa, "activation bit width");
        sub->add_option("--bram-budget", opt.bram_budget,
                        "BRAM18K budget (0 = unconstrained)");
        sub->add_option("--mac-budget", opt.mac_budget,
                        "MAC count budget (0 = unconstrained)");
        sub->add_option("--bus-bytes", opt.bus_bytes,
                        "off-chip bus bytes per cycle");
        sub->add_option("--freq-mhz", opt.freq_mhz, "accelerator clock");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_flag("--no-fusion", opt.no_fusion,
                      "disable node-group fusion");
        sub->add_option("--seed", opt.seed, "weight fill seed");
    };
    auto* compile = app.add_subcommand("compile", "emit a deployable image");
    auto* optimize =
        app.add_subcommand("optimize", "search cut-points for min latency");
    auto* sweep = app.add_subcommand("sweep", "emit per-cut-point curves");
    auto* simulate =
        app.add_subcommand("simulate", "cycle model + off-chip trace");
    auto* report = app.add_subcommand("report", "comparison vs baseline");
    for (auto* sub : {compile, optimize, sweep, simulate, report})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);
    try {
        if (app.got_subcommand(compile)) return run_compile(opt);
        if (app.got_subcommand(optimize)) return run_optimize(opt);
        if (app.got_subcommand(sweep)) return run_sweep(opt);
        if (app.got_subcommand(simulate)) return run_simulate(opt);
        if (app.got_subcommand(report)) return run_report(opt);
    } catch (const scf::InfeasibleError& e) {
        std::cerr << "error: {\"kind\":\"infeasible\",\"constraint\":\""
                  << e.tightest_constraint << "\",\"message\":\"" << e.what()
                  << "\"}\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: {\"kind\":\"error\",\"message\":\"" << e.what()
                  << "\"}\n";
        return 2;
    }
    return 0;
}
