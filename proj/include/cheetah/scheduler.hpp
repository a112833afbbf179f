#pragma once

#include "cheetah/bfv.hpp"
#include "cheetah/ptune.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cheetah {

/// Element <-> slot map for the ciphertexts of one side of a layer.
/// Elements are flattened (channel, row, col) for images, plain indices for vectors.
class PackedLayout {
  public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    PackedLayout() = default;
    PackedLayout(std::size_t n, std::size_t elements, std::vector<std::vector<std::size_t>> slot_elements);

    std::size_t n() const { return n_; }
    std::size_t ct_count() const { return slot_elements_.size(); }
    std::size_t element_count() const { return elements_; }
    /// Element stored at (ct, slot), or npos for an unused slot.
    std::size_t element_at(std::size_t ct, std::size_t slot) const { return slot_elements_[ct][slot]; }
    /// First (ct, slot) holding the element.
    std::pair<std::size_t, std::size_t> home(std::size_t element) const { return home_[element]; }
    /// Number of slots that hold the element (> 1 for replicated inputs).
    std::size_t copies(std::size_t element) const { return copies_[element]; }

    std::vector<std::vector<u64>> pack(const std::vector<u64>& values) const;
    std::vector<u64> unpack(const std::vector<std::vector<u64>>& slots) const;

  private:
    std::size_t n_ = 0;
    std::size_t elements_ = 0;
    std::vector<std::vector<std::size_t>> slot_elements_;
    std::vector<std::pair<std::size_t, std::size_t>> home_;
    std::vector<std::size_t> copies_;
};

/// Geometry and both slot maps of one layer.
struct LayerSetup {
    LayerSpec spec;
    LayerGeometry geo;
    PackedLayout input;
    PackedLayout output;
};

LayerSetup plan_layer(const LayerSpec& spec, std::size_t n);

/// Output-aligned diagonals: out[s] += weights[s] * in[s + shift].
struct DiagonalBlock {
    std::size_t out_ct = 0;
    std::size_t in_ct = 0;
    std::map<SlotShift, std::vector<u64>> diagonals;
};

struct DiagonalPlan {
    std::size_t n = 0;
    std::size_t in_cts = 0;
    std::size_t out_cts = 0;
    std::vector<DiagonalBlock> blocks; // grouped by out_ct, ascending
    std::vector<SlotShift> tail;       // rotate-and-sum applied to every output ct
};

/// Weights: conv c_o x c_i x f x f, dense n_o x n_i row-major; all mod t.
DiagonalPlan build_diagonals(const LayerSetup& setup, const std::vector<u64>& weights);

/// Every non-identity slot shift the layer's schedule needs, sorted.
std::vector<SlotShift> rotation_shifts(const LayerSpec& spec, std::size_t n);
std::vector<SlotShift> rotation_shifts(const DiagonalPlan& plan);

struct FilterEntry {
    std::size_t out_ct = 0;
    std::size_t in_ct = 0;
    SlotShift shift;
    std::vector<Plaintext> digits; // decomposed weights, l_pt of them
    std::vector<PreparedPlaintext> prepared;
};

struct FilterPlaintexts {
    Schedule schedule = Schedule::pa;
    std::size_t in_cts = 0;
    std::size_t out_cts = 0;
    std::vector<FilterEntry> entries; // grouped by out_ct
    std::vector<SlotShift> tail;
};

/// PA masks are aligned to the unrotated input, IA masks to the rotated one.
FilterPlaintexts encode_filters(const DiagonalPlan& plan, Schedule schedule, const ContextPtr& ctx);
FilterPlaintexts encode_filters(const LayerSetup& setup, const std::vector<u64>& weights, Schedule schedule,
                                const ContextPtr& ctx);

/// Client input: per input ct, encryptions of W^i x for every plaintext digit i.
struct EncryptedActivations {
    std::vector<std::vector<Ciphertext>> digits;
};

EncryptedActivations pack_activations(const std::vector<u64>& values, const PackedLayout& layout,
                                      const SecretKey& sk, Rng& rng);
std::vector<u64> unpack_outputs(const std::vector<Ciphertext>& cts, const PackedLayout& layout, const SecretKey& sk);

enum class TraceOpKind : std::uint8_t { input, mult, rotate, add };

const char* to_string(TraceOpKind k);

struct TraceOp {
    TraceOpKind kind = TraceOpKind::input;
    std::size_t id = 0;
    std::vector<std::size_t> operands;
    std::optional<SlotShift> step;
    std::size_t level = 0; // longest dependency chain from the inputs
    std::optional<double> budget_bits;
};

struct ScheduleTrace {
    Schedule schedule = Schedule::pa;
    std::vector<TraceOp> ops;
    std::vector<std::size_t> outputs; // op ids of the layer outputs

    std::size_t count(TraceOpKind k) const;
    std::size_t critical_path() const;
    OpCounts counts(const HeParams& params) const;
    /// One JSON object per line: id, op, operands, step, level, budget_bits.
    std::string to_json_lines() const;
};

struct LayerResult {
    std::vector<Ciphertext> outputs;
    ScheduleTrace trace;
};

/// Runs the layer. With `meter` set, every op records its measured budget.
LayerResult run_layer(const EncryptedActivations& inputs, const FilterPlaintexts& filters, const GaloisKeySet& keys,
                      const SecretKey* meter = nullptr);
inline LayerResult conv_layer(const EncryptedActivations& inputs, const FilterPlaintexts& filters,
                              const GaloisKeySet& keys, const SecretKey* meter = nullptr)
{
    return run_layer(inputs, filters, keys, meter);
}
inline LayerResult fc_layer(const EncryptedActivations& inputs, const FilterPlaintexts& filters,
                            const GaloisKeySet& keys, const SecretKey* meter = nullptr)
{
    return run_layer(inputs, filters, keys, meter);
}

/// Plaintext references: same-padding stride-1 cross-correlation, and W x, mod t.
std::vector<u64> conv_reference(const LayerSpec& spec, const std::vector<u64>& image, const std::vector<u64>& weights,
                                u64 t);
std::vector<u64> fc_reference(const LayerSpec& spec, const std::vector<u64>& x, const std::vector<u64>& weights, u64 t);
std::vector<u64> layer_reference(const LayerSpec& spec, const std::vector<u64>& input, const std::vector<u64>& weights,
                                 u64 t);

/// Worst-case model noise of the layer under the schedule, before calibration.
double predict_noise_delta(Schedule schedule, const LayerSpec& layer, const HeParams& params);

} // namespace cheetah
