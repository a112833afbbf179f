#pragma once

#include "cheetah/bfv.hpp"

#include <optional>
#include <string>

namespace cheetah {

class LayoutError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class LayerKind : std::uint8_t { cnn, fc };

/// Stride-1, same-padding convolution (w, f_w, c_i, c_o) or dense layer (n_i, n_o).
struct LayerSpec {
    LayerKind kind = LayerKind::cnn;
    int w = 0;
    int f_w = 0;
    int c_i = 0;
    int c_o = 0;
    int n_i = 0;
    int n_o = 0;

    static LayerSpec cnn(int w, int f_w, int c_i, int c_o) { return {LayerKind::cnn, w, f_w, c_i, c_o, 0, 0}; }
    static LayerSpec fc(int n_i, int n_o) { return {LayerKind::fc, 0, 0, 0, 0, n_i, n_o}; }

    void validate() const; // throws std::invalid_argument
    std::string describe() const;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class Schedule : std::uint8_t { pa, ia };

const char* to_string(Schedule s);

enum class LayoutCase : std::uint8_t {
    cnn_multi_channel,  // n >= w^2, several channels per ct
    cnn_single_channel, // one channel per ct, sheared rows
    cnn_split,          // n < w^2, each channel split into row pieces
    fc_small,           // n >= n_i, n >= n_o
    fc_wide_out,        // n >= n_i, n < n_o
    fc_wide_in,         // n < n_i, n >= n_o
    fc_blocked,         // n < n_i, n < n_o
};

const char* to_string(LayoutCase c);

/// Ciphertext geometry of a layer at ring degree n; everything the
/// schedules and the models need to count work.
struct LayerGeometry {
    LayoutCase layout = LayoutCase::fc_small;
    std::size_t n = 0;

    std::size_t in_cts = 0;
    std::size_t out_cts = 0;
    std::size_t total_diagonals = 0;      // summed over all (in ct, out ct) pairs
    std::size_t unrotated_diagonals = 0;  // diagonals with zero shift
    std::size_t tail_rotations = 0;       // rotate-and-sum steps per output ct
    std::size_t max_diagonals_per_out = 0;
    std::size_t max_unrotated_per_out = 0;

    // cnn
    std::size_t channels_per_ct = 1; // power of two
    std::size_t block_stride = 0;    // column stride between channel blocks
    std::size_t shear = 0;           // column offset per image row (sheared layouts)
    std::vector<std::size_t> piece_rows;

    // fc
    std::size_t t_size = 1; // replicated input subgroup
    std::size_t b_size = 1; // output summation subgroup
    std::size_t padded_in = 0;
    std::size_t padded_out = 0;

    /// Ratio used by the closed-form tables: n/w^2 or w^2/n (cnn only).
    double c_n = 1.0;
};

LayerGeometry plan_geometry(const LayerSpec& layer, std::size_t n);

struct OpCounts {
    u64 he_mult = 0;
    u64 he_rotate = 0;
    u64 he_add = 0;
    u64 ntt = 0;
    u64 int_mults = 0;

    friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

/// Integer multiplies per modular multiply outside NTT butterflies.
inline constexpr u64 kIntMultsPerModMul = 6;
/// Integer multiplies per Harvey butterfly.
inline constexpr u64 kIntMultsPerButterfly = 3;

/// Exact counts of the implemented schedule.
OpCounts perf_model(const LayerSpec& layer, const HeParams& params, Schedule schedule = Schedule::pa);
OpCounts perf_model(const LayerGeometry& geo, const HeParams& params, Schedule schedule = Schedule::pa);

/// The closed-form table as printed, with ceilings on fractional terms.
OpCounts closed_form_counts(const LayerSpec& layer, const HeParams& params);

u64 int_mult_reduction(const OpCounts& counts, const HeParams& params);

/// Per-output-ciphertext noise structure: how many multiplied partials and
/// rotations feed the worst output.
struct NoiseShape {
    double mult_terms = 0;     // partial products
    double pre_rot_terms = 0;  // rotations applied before a multiply (IA)
    double post_rot_terms = 0; // rotations applied to partials or in the tail
    std::size_t tail_levels = 0;
    std::size_t pre_tail_mults = 0;
    std::size_t pre_tail_rots = 0;
};

NoiseShape noise_shape(const LayerGeometry& geo, Schedule schedule);

struct NoiseEstimate {
    double worst_case = 0;      // closed-form bound, unscaled
    double output_variance = 0; // variance of the worst output coefficient
    double scaling = 1;         // c, output_noise / worst_case
    double output_noise = 0;    // c * worst_case
    double budget_bits = 0;
    bool feasible = false;
};

double fresh_noise_bound(const HeParams& p);   // v0 = 2 n B^2
double eta_mult(const HeParams& p);            // n l_pt W / 2
double eta_rotate(const HeParams& p);          // l_ct A B n / 2
double budget_ceiling_bits(const HeParams& p); // log2(q / 2t)

/// Tail multiplier k with 2n exp(-k^2) = target, so every coefficient meets the target jointly.
double tail_multiplier(std::size_t n, double target = 1e-10);

NoiseEstimate noise_model(const LayerSpec& layer, const HeParams& params, Schedule schedule = Schedule::pa,
                          std::optional<double> v0 = std::nullopt);
NoiseEstimate noise_model(const LayerGeometry& geo, const HeParams& params, Schedule schedule = Schedule::pa,
                          std::optional<double> v0 = std::nullopt);

/// Closed-form worst-case output noise of the noise table, as printed.
double table_v_noise(const LayerSpec& layer, const HeParams& params, std::optional<double> v0 = std::nullopt);

/// 2 exp(-q^2 / (4 t^2 sigma_y^2)).
double failure_probability(const HeParams& params, double sigma_y);

/// c such that c * worst_case is the noise level reached with failure bound 1e-10.
double calibrate_scaling(const HeParams& params, const LayerSpec& layer, Schedule schedule = Schedule::pa);

/// Worst-case noise of one rotated partial: eta_M v0 + eta_A (PA) or eta_M (v0 + eta_A) (IA).
double partial_noise(Schedule schedule, double eta_m, double eta_a, double v0);

} // namespace cheetah
