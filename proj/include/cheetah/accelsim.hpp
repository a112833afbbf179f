#pragma once

#include "cheetah/ptune.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace cheetah {

class ConfigOutOfBounds : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class UnknownNode : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class Kernel : std::uint8_t { he_add, he_mult, swap, intt, decompose, ntt, simd_mult, compose };
inline constexpr std::size_t kKernelCount = 8;

const char* to_string(Kernel k);

struct KernelCost {
    double latency_us = 0;
    double power_mw = 0;
    double area_mm2 = 0;
    double energy_nj = 0;
};

/// Per-kernel costs measured at one ring degree (40nm unless scaled).
struct CostTable {
    std::size_t reference_n = 4096;
    std::array<KernelCost, kKernelCount> kernels{};

    const KernelCost& operator[](Kernel k) const { return kernels[static_cast<std::size_t>(k)]; }
    KernelCost& operator[](Kernel k) { return kernels[static_cast<std::size_t>(k)]; }

    /// Throws std::invalid_argument on non-positive entries or energy off latency*power by more than 10%.
    void validate() const;
    /// Latency/energy of `k` at ring degree n; n for elementwise kernels, n log n for (I)NTT.
    double scale_factor(Kernel k, std::size_t n) const;
    /// Power and energy times `power`, area times `area`.
    CostTable scaled(double power, double area) const;

    static CostTable defaults();
    static CostTable from_json(const std::string& text);
    std::string to_json() const;
};

struct TechScale {
    double power = 1;
    double area = 1;
};

/// Known nodes: 40, 16, 5 (nm). Direct 40->5 factors take precedence over the composed hops.
TechScale technology_factor(int from_nm, int to_nm);

struct AcceleratorConfig {
    int num_pes = 8;
    int lanes_per_pe = 512;
    int ntt_parallel_factor = 0; // 0: one NTT unit per decomposed digit
    TechScale technology{};
    double io_bandwidth_gbps = 512;
    bool io_bound = false;

    void validate() const; // throws ConfigOutOfBounds
};

struct LayerWork {
    std::string name;
    std::size_t n = 0;
    int l_ct = 1;
    u64 output_cts = 0;
    u64 partials_per_output_ct = 0;
    int reduction_depth = 0;
    bool rotates = true;   // false when no partial needs a rotation
    u64 input_cts = 0;
};

LayerWork layer_work(const LayerSpec& layer, const HeParams& params, Schedule schedule = Schedule::pa);

struct LaneTimes {
    std::array<double, kKernelCount> us{}; // per kernel along the lane's critical path
    double total = 0;
};

LaneTimes lane_breakdown(std::size_t n, int l_ct, bool rotates, int ntt_parallel_factor, const CostTable& costs);
/// Latency of one partial through a lane, in microseconds.
double lane_latency(const HeParams& params, const CostTable& costs, int ntt_parallel_factor = 0, bool rotates = true);

struct LayerSim {
    std::string name;
    double latency_ms = 0;
    double energy_mj = 0;
    u64 lane_invocations = 0;
    double io_utilization = 0;
};

struct SimResult {
    AcceleratorConfig config;
    double latency_ms = 0;
    double energy_mj = 0;
    double power_w = 0;
    double area_mm2 = 0;
    double io_utilization = 0; // busiest layer
    u64 lane_invocations = 0;
    std::vector<LayerSim> layers;
    std::array<double, kKernelCount> kernel_ms{}; // time share along the critical path

    /// HE_Rotate groups swap, decompose, SIMD mult and compose; NTT groups INTT and NTT.
    double rotate_ms() const;
    double ntt_ms() const;
};

SimResult simulate(const std::vector<LayerWork>& network, const AcceleratorConfig& config,
                   const CostTable& costs = CostTable::defaults());

struct SweepRange {
    int lo = 0;
    int hi = 0;
    bool pow2 = true; // powers of two inside [lo, hi], otherwise every integer
    std::vector<int> values() const;
};

/// Non-dominated configs under (power, latency), ordered by increasing latency.
std::vector<SimResult> dse(const std::vector<LayerWork>& network, const SweepRange& pes, const SweepRange& lanes,
                           const CostTable& costs = CostTable::defaults(), const AcceleratorConfig& base = {},
                           unsigned threads = 0);

std::vector<SimResult> pareto_front(std::vector<SimResult> points);

/// Frontier point with the smallest energy-delay product; the design a network is "optimized for".
const SimResult& select_design(const std::vector<SimResult>& front);

struct CrossRun {
    SimResult result;
    SimResult reference; // the network's own frontier point at no more power
    double increase = 0; // fractional latency increase over the reference
};

CrossRun cross_model_run(const std::vector<LayerWork>& network, const AcceleratorConfig& config,
                         const CostTable& costs = CostTable::defaults(), const SweepRange& pes = {2, 1024},
                         const SweepRange& lanes = {4, 8192});

SimResult scale_technology(const SimResult& r, int from_nm, int to_nm);

std::string to_json(const SimResult& r);
std::string to_json(const std::vector<SimResult>& rs);
std::string to_csv(const std::vector<SimResult>& rs);

} // namespace cheetah
