#pragma once

#include "cheetah/scheduler.hpp"

#include <vector>

namespace cheetah {

/// Uniform values in [0, t).
std::vector<u64> random_plain(std::size_t count, u64 t, Rng& rng);

std::size_t input_size(const LayerSpec& l);
std::size_t weight_size(const LayerSpec& l);

/// Caps a layer for quick encrypted runs: w <= max_w, channels <= max_c, FC sides <= max_fc.
LayerSpec desk_shape(const LayerSpec& l, int max_w = 16, int max_c = 8, int max_fc = 256);

struct TrialOutcome {
    bool correct = false;
    double measured_budget = 0; // smallest over output ciphertexts
    OpCounts traced;            // from the schedule trace
    OpCounts model;             // perf_model for the same geometry
    HeOpCounts measured;        // library counters during execution
    std::vector<u64> decoded;
    std::vector<u64> expected;

    bool counts_match() const
    {
        return traced == model && measured.mult == model.he_mult && measured.rotate == model.he_rotate &&
               measured.add == model.he_add && measured.ntt == model.ntt;
    }
};

/// Keys and layout for one layer; each trial draws fresh inputs, weights and encryption noise.
class LayerHarness {
  public:
    LayerHarness(const LayerSpec& spec, const ContextPtr& ctx, std::uint64_t key_seed);

    TrialOutcome run(Schedule schedule, std::uint64_t seed) const;
    /// Same as run, on caller-chosen data.
    TrialOutcome run(Schedule schedule, const std::vector<u64>& input, const std::vector<u64>& weights,
                     std::uint64_t seed) const;

    const LayerSpec& spec() const { return spec_; }
    const LayerSetup& setup() const { return setup_; }
    const ContextPtr& context() const { return ctx_; }

  private:
    LayerSpec spec_;
    ContextPtr ctx_;
    LayerSetup setup_;
    SecretKey sk_;
    GaloisKeySet keys_;
};

} // namespace cheetah
