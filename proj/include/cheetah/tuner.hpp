#pragma once

#include "cheetah/netdesc.hpp"
#include "cheetah/ptune.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cheetah {

class NoFeasibleParams : public std::runtime_error {
  public:
    explicit NoFeasibleParams(const std::string& what, std::optional<std::size_t> layer = std::nullopt)
        : std::runtime_error(what), layer_(layer)
    {
    }
    std::optional<std::size_t> layer() const { return layer_; }

  private:
    std::optional<std::size_t> layer_;
};

class InvalidGrid : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct BitRange {
    int lo = 0;
    int hi = -1;
    bool empty() const { return lo > hi; }
    friend bool operator==(const BitRange&, const BitRange&) = default;
};

/// Largest admissible q in bits per ring degree (128-bit classical security).
std::map<std::size_t, int> default_security_table();

struct ParamGrid {
    std::vector<std::size_t> n_choices = {1024, 2048, 4096, 8192, 16384};
    BitRange t_bits{15, 25};
    BitRange q_bits{40, 60};
    BitRange w_bits{1, 60}; // clipped to t_bits per point
    BitRange a_bits{1, 60}; // clipped to q_bits per point
    bool enforce_security = true;
    std::map<std::size_t, int> security = default_security_table();

    /// Throws InvalidGrid on empty ranges, q_bits > 60 or bad ring degrees.
    void validate() const;
};

/// q_bits <= max_q_bits(n); degrees between table entries use the entry below.
bool security_floor(std::size_t n, int q_bits, const std::map<std::size_t, int>& table = default_security_table());

struct GridPoint {
    std::uint32_t n = 0;
    std::uint8_t t_bits = 0;
    std::uint8_t q_bits = 0;
    std::uint8_t w_bits = 0;
    std::uint8_t a_bits = 0;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Prime moduli are generated once per (n, bits) and reused.
HeParams to_params(const GridPoint& p);

struct Candidate {
    GridPoint point;
    double budget_bits = 0;
    u64 int_mults = 0;
    bool feasible = false; // budget_bits > 0 and the layout fits
    bool secure = false;

    bool admissible() const { return feasible && secure; }
};

struct Exploration {
    std::vector<Candidate> candidates; // grid order
    std::size_t skipped = 0;           // points without NTT-friendly primes
};

struct TuneOptions {
    Schedule schedule = Schedule::pa;
    int min_t_bits = 0; // per-layer plaintext width
    unsigned threads = 0; // 0: hardware concurrency
};

/// Grid points in deterministic order (n, t, q, w, a); counts points without primes.
std::vector<GridPoint> enumerate_grid(const ParamGrid& grid, std::size_t* skipped = nullptr);

Exploration explore(const LayerSpec& layer, const ParamGrid& grid, const TuneOptions& opt = {});

/// Cheapest admissible candidate; ties go to more budget, then smaller n, then smaller q.
const Candidate& select_optimal(const std::vector<Candidate>& candidates);

struct LayerChoice {
    std::string name;
    LayerSpec spec;
    GridPoint point;
    HeParams params;
    double budget_bits = 0;
    OpCounts counts;
};

struct Baseline {
    GridPoint point;
    std::vector<u64> layer_int_mults;
    u64 total_int_mults = 0;
};

struct TuningResult {
    std::string network;
    Schedule schedule = Schedule::pa;
    std::vector<LayerChoice> layers;
    u64 total_int_mults = 0;
    std::optional<Baseline> baseline; // best single feasible parameter set for every layer
    std::size_t points_per_layer = 0;
};

TuningResult tune_network(const NetworkSpec& net, const ParamGrid& grid, const TuneOptions& opt = {});
TuningResult tune_network(const std::vector<LayerSpec>& layers, const ParamGrid& grid, const TuneOptions& opt = {});

std::string to_json(const TuningResult& r);

} // namespace cheetah
