#pragma once

#include <cstdio>
#include <sstream>

#include "scf/optimizer.hpp"

namespace scf {

inline double to_mb(long long bytes) { return double(bytes) / (1 << 20); }

inline std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

// Per-layer allocation and traffic rows; one line per layer, stable order.
inline std::string cost_report_csv(const ReusePolicy& policy,
                                   const BufferAssignment& asg,
                                   const GroupedGraph& gg,
                                   const std::vector<Block>& blocks,
                                   const NetworkGraph& g, const HwConfig& hw) {
    const auto blk_of = group_block_index(gg, blocks);
    std::ostringstream os;
    os << "layer,kind,group,block,scheme,alloc_in,alloc_out,alloc_shortcut,"
          "se_offset,in_bytes,out_bytes,weight_bytes,macs\n";
    auto alloc_name = [](int a) {
        if (a == kOffchip) return std::string("offchip");
        if (a == kNoBuffer) return std::string("-");
        return std::to_string(a);
    };
    for (const auto& l : g.layers) {
        int grp = gg.group_of_layer[size_t(l.id)];
        const GroupAlloc& a = asg.groups[size_t(grp)];
        Scheme s = policy.block_scheme[size_t(blk_of[size_t(grp)])];
        os << l.id << ',' << to_string(l.kind) << ',' << grp << ','
           << blk_of[size_t(grp)] << ',' << to_string(s) << ','
           << alloc_name(a.in_buf) << ',' << alloc_name(a.out_buf) << ','
           << alloc_name(a.sc_buf) << ','
           << (a.se_offset >= 0 ? std::to_string(a.se_offset) : "-") << ','
           << in_size_bytes(l, hw) << ',' << out_size_bytes(l, hw) << ','
           << weight_size_bytes(l, hw) << ',' << layer_macs(l) << '\n';
    }
    return os.str();
}

inline std::string summary_text(const std::string& command,
                                const NetworkGraph& g, const HwConfig& hw,
                                const PolicyEval& ev,
                                const std::vector<int>& cuts) {
    long long baseline = baseline_dram(g, hw);
    std::ostringstream os;
    os << "command: " << command << "\n";
    os << "network: " << g.name << " " << g.in_w << "x" << g.in_h << "x"
       << g.in_c << "\n";
    os << "hw: ti=" << hw.ti << " to=" << hw.to << " qa=" << hw.qa_bits
       << " freq_mhz=" << fmt(hw.freq_hz / 1e6, 1)
       << " bus_bytes=" << hw.bus_bytes_per_cycle
       << " bram_budget=" << hw.bram_budget << "\n";
    os << "cut_points:";
    for (int c : cuts) os << ' ' << c;
    if (cuts.empty()) os << " (per-block)";
    os << "\n";
    int forced = 0;
    for (bool f : ev.policy.forced_row) forced += f;
    if (forced) os << "forced_row_blocks: " << forced << "\n";
    os << "buffers_bytes: buff0=" << ev.bufs.buff0
       << " buff1=" << ev.bufs.buff1 << " buff2=" << ev.bufs.buff2
       << " weight=" << ev.bufs.weight_buff << " row=" << ev.bufs.row_buff
       << " out=" << ev.bufs.out_buff << " write=" << ev.bufs.write_buff
       << "\n";
    os << "sram_total_bytes: " << ev.bufs.sram_total << " ("
       << fmt(to_mb(ev.bufs.sram_total), 3) << " MB)\n";
    os << "bram18k_total: " << ev.bufs.bram18k_total << "\n";
    os << "dram_feature_bytes: " << ev.dram_fm << " ("
       << fmt(to_mb(ev.dram_fm), 3) << " MB)\n";
    os << "weight_bytes: " << total_weight_bytes(g, hw) << " ("
       << fmt(to_mb(total_weight_bytes(g, hw)), 3) << " MB)\n";
    os << "total_dram_bytes: " << ev.total_dram_bytes << " ("
       << fmt(to_mb(ev.total_dram_bytes), 3) << " MB)\n";
    os << "baseline_dram_bytes: " << baseline << " ("
       << fmt(to_mb(baseline), 3) << " MB)\n";
    os << "offchip_reduction_pct: "
       << fmt(100.0 * (1.0 - double(ev.total_dram_bytes) / double(baseline)),
              2)
       << "\n";
    if (ev.latency_cycles > 0) {
        os << "latency_cycles: " << ev.latency_cycles << "\n";
        os << "latency_ms: " << fmt(ev.latency_ms, 4) << "\n";
        os << "gops: " << fmt(ev.gops, 1) << "\n";
        os << "mac_efficiency_pct: "
           << fmt(100.0 * dsp_efficiency(ev.gops, hw.freq_hz, hw.n_dsp()), 2)
           << "\n";
    }
    return os.str();
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream os;
    os << "position,cuts,sram_bytes,bram18k,dram_fm_bytes,total_dram_bytes,"
          "onchip_fm_bytes,latency_cycles,latency_ms\n";
    for (const auto& p : points) {
        os << p.position << ',';
        for (size_t i = 0; i < p.cuts.size(); i++)
            os << (i ? "|" : "") << p.cuts[i];
        os << ',' << p.bufs.sram_total << ',' << p.bufs.bram18k_total << ','
           << p.dram_fm << ',' << p.total_dram_bytes << ',' << p.onchip_fm
           << ',' << p.latency_cycles << ',' << fmt(p.latency_ms, 4) << '\n';
    }
    return os.str();
}

inline std::string trace_text(const std::vector<TraceEvent>& trace) {
    std::ostringstream os;
    for (const auto& e : trace)
        os << e.layer << ' ' << e.dir << ' ' << e.bytes << '\n';
    return os.str();
}

}  // namespace scf
