#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace scf {

enum class LayerKind {
    conv,
    dwconv,
    fc,
    maxpool,
    avgpool_global,
    eltwise_add,
    concat,
    upsample,
    activation,
    scale,
};

enum class Activation { none, relu, leaky, sigmoid, swish };

enum class Scheme { row_reuse, frame_reuse };

enum class SeRole { none, se_gap, se_fc1, se_fc2, se_scale };

enum class BlockKind { plain, residual, residual_se };

// Parallelism factors and memory geometry of the target accelerator.
// ti/to are the input/output channel parallelism (equal by construction,
// one bank per lane). n_mac() follows the shared double-MAC arithmetic:
// one cycle retires a ti x to kernel-position slice at two
// multiplications per shared MAC.
struct HwConfig {
    int ti = 64;
    int to = 64;
    int qa_bits = 8;   // activation width
    int qs_bits = 32;  // partial-sum width
    double freq_hz = 200e6;
    int bus_bytes_per_cycle = 96;  // one DDR4-2400 channel at 200 MHz
    int group_setup_cycles = 100;
    long long bram_budget = 0;  // 0 = unconstrained
    long long mac_budget = 0;   // 0 = unconstrained

    long long n_mac() const { return 2LL * ti * to; }
    // physical shared-MAC units (each retires two multiplications)
    long long n_dsp() const { return 1LL * ti * to / 2; }
    int qa_bytes() const { return qa_bits / 8; }
    int qs_bytes() const { return qs_bits / 8; }
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct GraphError : std::runtime_error {
    explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a residual span needs more than three simultaneously live
// frame tensors; carries the offending block so the optimizer can force
// that block to row reuse.
struct LivenessError : std::runtime_error {
    int block_id;
    LivenessError(int block, const std::string& what)
        : std::runtime_error(what), block_id(block) {}
};

struct InfeasibleError : std::runtime_error {
    std::string tightest_constraint;
    InfeasibleError(std::string constraint, const std::string& what)
        : std::runtime_error(what),
          tightest_constraint(std::move(constraint)) {}
};

inline long long ceil_div(long long a, long long b) {
    return (a + b - 1) / b;
}

inline long long align_up(long long v, long long a) {
    return ceil_div(v, a) * a;
}

}  // namespace scf
