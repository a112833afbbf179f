#include "cheetah/ptune.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace cheetah {

namespace {

std::size_t pow2_ceil(std::size_t x) { return std::bit_ceil(std::max<std::size_t>(x, 1)); }
std::size_t pow2_floor(std::size_t x) { return x == 0 ? 0 : std::bit_floor(x); }
std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }
std::size_t log2_exact(std::size_t x) { return static_cast<std::size_t>(std::countr_zero(x)); }

u64 ceil_frac(u128 num, u128 den) { return static_cast<u64>((num + den - 1) / den); }

// ceil(log2(x)) for x > 1, 0 otherwise
u64 clog2(double x) { return x <= 1.0 ? 0 : static_cast<u64>(std::ceil(std::log2(x) - 1e-12)); }

void plan_cnn(const LayerSpec& l, std::size_t n, LayerGeometry& g)
{
    const std::size_t w = static_cast<std::size_t>(l.w);
    const std::size_t f = static_cast<std::size_t>(l.f_w);
    const std::size_t fr = f / 2;
    const std::size_t ci = static_cast<std::size_t>(l.c_i);
    const std::size_t co = static_cast<std::size_t>(l.c_o);
    const std::size_t half = n / 2;
    const std::size_t area = w * w;
    g.c_n = area <= n ? static_cast<double>(n) / static_cast<double>(area)
                      : static_cast<double>(area) / static_cast<double>(n);

    const std::size_t cap = area <= n ? pow2_floor(n / area) : 0;
    const std::size_t c_eff = std::min(cap, pow2_ceil(std::min(ci, co)));
    if (c_eff >= 2) {
        g.layout = LayoutCase::cnn_multi_channel;
        g.channels_per_ct = c_eff;
        g.block_stride = n / c_eff;
        g.in_cts = ceil_div(ci, c_eff);
        g.out_cts = ceil_div(co, c_eff);
        const std::size_t per_pair = c_eff * f * f;
        g.total_diagonals = g.in_cts * g.out_cts * per_pair;
        g.unrotated_diagonals = g.in_cts * g.out_cts;
        g.max_diagonals_per_out = g.in_cts * per_pair;
        g.max_unrotated_per_out = g.in_cts;
        return;
    }

    // one channel per ciphertext: rows sheared so each parity class of rows is contiguous
    const std::size_t alpha = (w + 1) / 2;
    const std::size_t row_pitch = 2 * alpha;
    if (row_pitch > half) {
        throw LayoutError("image row of width " + std::to_string(w) + " does not fit n=" + std::to_string(n));
    }
    const std::size_t h_max = 2 * (half / row_pitch);
    g.channels_per_ct = 1;
    g.shear = alpha;
    if (h_max >= w) {
        g.layout = LayoutCase::cnn_single_channel;
        g.piece_rows = {w};
        g.in_cts = ci;
        g.out_cts = co;
        g.total_diagonals = ci * co * f * f;
        g.unrotated_diagonals = ci * co;
        g.max_diagonals_per_out = ci * f * f;
        g.max_unrotated_per_out = ci;
        return;
    }
    const std::size_t pieces = ceil_div(w, h_max);
    const std::size_t base = w / pieces;
    // a piece must be taller than the filter radius, or a neighbour tap would need a zero shift
    if (base <= fr) {
        throw LayoutError("row pieces of height " + std::to_string(base) + " are not taller than the filter radius");
    }
    g.layout = LayoutCase::cnn_split;
    g.piece_rows.assign(pieces, base);
    for (std::size_t i = 0; i < w % pieces; ++i) {
        ++g.piece_rows[i];
    }
    g.in_cts = ci * pieces;
    g.out_cts = co * pieces;
    const std::size_t per_channel_pair = pieces * f * f + 2 * (pieces - 1) * fr * f;
    g.total_diagonals = ci * co * per_channel_pair;
    g.unrotated_diagonals = ci * co * pieces;
    const std::size_t neighbours = std::min<std::size_t>(2, pieces - 1);
    g.max_diagonals_per_out = ci * (f * f + neighbours * fr * f);
    g.max_unrotated_per_out = ci;
}

void plan_fc(const LayerSpec& l, std::size_t n, LayerGeometry& g)
{
    const std::size_t ni = static_cast<std::size_t>(l.n_i);
    const std::size_t no = static_cast<std::size_t>(l.n_o);
    g.padded_in = pow2_ceil(ni);
    g.padded_out = pow2_ceil(no);
    if (ni <= n && no <= n) {
        g.layout = LayoutCase::fc_small;
        g.t_size = g.padded_in;
        g.b_size = n / g.padded_out;
        const std::size_t d = g.b_size <= g.t_size ? g.t_size / g.b_size : 1;
        g.in_cts = g.out_cts = 1;
        g.total_diagonals = g.max_diagonals_per_out = d;
        g.unrotated_diagonals = g.max_unrotated_per_out = 1;
        g.tail_rotations = log2_exact(g.b_size);
    } else if (ni <= n) {
        g.layout = LayoutCase::fc_wide_out;
        g.t_size = g.padded_in;
        g.in_cts = 1;
        g.out_cts = ceil_div(no, n);
        g.total_diagonals = g.t_size * g.out_cts;
        g.unrotated_diagonals = g.out_cts;
        g.max_diagonals_per_out = g.t_size;
        g.max_unrotated_per_out = 1;
    } else if (no <= n) {
        g.layout = LayoutCase::fc_wide_in;
        g.t_size = n;
        g.b_size = n / g.padded_out;
        g.in_cts = ceil_div(ni, n);
        g.out_cts = 1;
        g.total_diagonals = g.max_diagonals_per_out = g.in_cts * g.padded_out;
        g.unrotated_diagonals = g.max_unrotated_per_out = g.in_cts;
        g.tail_rotations = log2_exact(g.b_size);
    } else {
        g.layout = LayoutCase::fc_blocked;
        g.t_size = n;
        g.in_cts = ceil_div(ni, n);
        g.out_cts = ceil_div(no, n);
        g.total_diagonals = g.in_cts * g.out_cts * n;
        g.unrotated_diagonals = g.in_cts * g.out_cts;
        g.max_diagonals_per_out = g.in_cts * n;
        g.max_unrotated_per_out = g.in_cts;
    }
}

} // namespace

void LayerSpec::validate() const
{
    if (kind == LayerKind::cnn) {
        if (w <= 0 || f_w <= 0 || c_i <= 0 || c_o <= 0) {
            throw std::invalid_argument("cnn layer dimensions must be positive");
        }
        if (f_w % 2 == 0 || f_w > w) {
            throw std::invalid_argument("filter width must be odd and at most w");
        }
    } else if (n_i <= 0 || n_o <= 0) {
        throw std::invalid_argument("fc layer dimensions must be positive");
    }
}

std::string LayerSpec::describe() const
{
    if (kind == LayerKind::cnn) {
        return "cnn(w=" + std::to_string(w) + ",f=" + std::to_string(f_w) + ",ci=" + std::to_string(c_i) +
               ",co=" + std::to_string(c_o) + ")";
    }
    return "fc(ni=" + std::to_string(n_i) + ",no=" + std::to_string(n_o) + ")";
}

const char* to_string(Schedule s) { return s == Schedule::pa ? "PA" : "IA"; }

const char* to_string(LayoutCase c)
{
    switch (c) {
    case LayoutCase::cnn_multi_channel:
        return "cnn_multi_channel";
    case LayoutCase::cnn_single_channel:
        return "cnn_single_channel";
    case LayoutCase::cnn_split:
        return "cnn_split";
    case LayoutCase::fc_small:
        return "fc_small";
    case LayoutCase::fc_wide_out:
        return "fc_wide_out";
    case LayoutCase::fc_wide_in:
        return "fc_wide_in";
    case LayoutCase::fc_blocked:
        return "fc_blocked";
    }
    return "?";
}

LayerGeometry plan_geometry(const LayerSpec& layer, std::size_t n)
{
    layer.validate();
    if (n < 4 || !std::has_single_bit(n)) {
        throw LayoutError("ring degree must be a power of two >= 4");
    }
    LayerGeometry g;
    g.n = n;
    if (layer.kind == LayerKind::cnn) {
        plan_cnn(layer, n, g);
    } else {
        plan_fc(layer, n, g);
    }
    return g;
}

// ---------------------------------------------------------------- performance

OpCounts perf_model(const LayerGeometry& g, const HeParams& params, Schedule schedule)
{
    const u64 l_pt = static_cast<u64>(params.l_pt());
    const u64 rotated = g.total_diagonals - g.unrotated_diagonals;
    OpCounts c;
    c.he_mult = l_pt * g.total_diagonals;
    const u64 align = schedule == Schedule::pa ? rotated : l_pt * rotated;
    c.he_rotate = align + g.out_cts * g.tail_rotations;
    c.he_add = g.total_diagonals * (l_pt - 1) + (g.total_diagonals - g.out_cts) + g.out_cts * g.tail_rotations;
    c.ntt = c.he_rotate * static_cast<u64>(params.l_ct() + 1);
    c.int_mults = int_mult_reduction(c, params);
    return c;
}

OpCounts perf_model(const LayerSpec& layer, const HeParams& params, Schedule schedule)
{
    return perf_model(plan_geometry(layer, params.n), params, schedule);
}

OpCounts closed_form_counts(const LayerSpec& l, const HeParams& params)
{
    const u128 n = params.n;
    const u128 l_pt = static_cast<u128>(params.l_pt());
    OpCounts c;
    if (l.kind == LayerKind::cnn) {
        const u128 w2 = static_cast<u128>(l.w) * static_cast<u128>(l.w);
        const u128 f2 = static_cast<u128>(l.f_w) * static_cast<u128>(l.f_w);
        const u128 cc = static_cast<u128>(l.c_i) * static_cast<u128>(l.c_o);
        if (n >= w2) {
            // divide by c_n = n / w^2
            c.he_mult = ceil_frac(l_pt * cc * f2 * w2, n);
            c.he_rotate = ceil_frac(cc * f2 * w2, n);
        } else {
            // 2 c_n - 1 = (2 w^2 - n) / n
            c.he_mult = ceil_frac(l_pt * (2 * w2 - n) * cc * f2, n);
            c.he_rotate = ceil_frac((2 * w2 - n) * cc * (f2 - 1), n);
        }
    } else {
        const u128 ni = static_cast<u128>(l.n_i);
        const u128 no = static_cast<u128>(l.n_o);
        const double ratio = static_cast<double>(params.n) / static_cast<double>(l.n_o);
        c.he_mult = ceil_frac(l_pt * ni * no, n);
        if (n >= ni && n >= no) {
            c.he_rotate = ceil_frac(ni * no, n) - 1 + clog2(ratio);
        } else if (n >= ni) {
            c.he_rotate = ceil_frac((ni - 1) * no, n);
        } else if (n >= no) {
            c.he_rotate = ceil_frac((no + clog2(ratio)) * ni, n);
        } else {
            c.he_rotate = ceil_frac((n - 1) * ni * no, n * n);
        }
    }
    c.ntt = c.he_rotate * static_cast<u64>(params.l_ct() + 1);
    c.int_mults = int_mult_reduction(c, params);
    return c;
}

u64 int_mult_reduction(const OpCounts& counts, const HeParams& params)
{
    const u64 n = params.n;
    const u64 l_ct = static_cast<u64>(params.l_ct());
    const u64 log_n = static_cast<u64>(std::countr_zero(params.n));
    const u64 per_mult = 2 * n * kIntMultsPerModMul;
    const u64 per_rotate = 2 * l_ct * n * kIntMultsPerModMul + (l_ct + 1) * (n * log_n / 2) * kIntMultsPerButterfly;
    return counts.he_mult * per_mult + counts.he_rotate * per_rotate;
}

// ---------------------------------------------------------------- noise

double fresh_noise_bound(const HeParams& p)
{
    const double b = p.noise_bound();
    return 2.0 * static_cast<double>(p.n) * b * b;
}

double eta_mult(const HeParams& p)
{
    return static_cast<double>(p.n) * p.l_pt() * static_cast<double>(p.w_dcmp) / 2.0;
}

double eta_rotate(const HeParams& p)
{
    return p.l_ct() * static_cast<double>(p.a_dcmp) * p.noise_bound() * static_cast<double>(p.n) / 2.0;
}

double budget_ceiling_bits(const HeParams& p)
{
    return std::log2(static_cast<double>(p.q.value()) / (2.0 * static_cast<double>(p.t.value())));
}

double tail_multiplier(std::size_t n, double target) { return std::sqrt(std::log(2.0 * static_cast<double>(n) / target)); }

NoiseShape noise_shape(const LayerGeometry& g, Schedule schedule)
{
    NoiseShape s;
    const double copies = std::ldexp(1.0, static_cast<int>(g.tail_rotations));
    const double m = static_cast<double>(g.max_diagonals_per_out);
    const double r = static_cast<double>(g.max_diagonals_per_out - g.max_unrotated_per_out);
    s.tail_levels = g.tail_rotations;
    s.pre_tail_mults = g.max_diagonals_per_out;
    s.pre_tail_rots = g.max_diagonals_per_out - g.max_unrotated_per_out;
    s.mult_terms = copies * m;
    if (schedule == Schedule::pa) {
        s.post_rot_terms = copies * r + copies - 1;
    } else {
        s.pre_rot_terms = copies * r;
        s.post_rot_terms = copies - 1;
    }
    return s;
}

NoiseEstimate noise_model(const LayerGeometry& g, const HeParams& p, Schedule schedule, std::optional<double> v0)
{
    const NoiseShape s = noise_shape(g, schedule);
    const double v_fresh = v0.value_or(fresh_noise_bound(p));
    const double em = eta_mult(p);
    const double ea = eta_rotate(p);

    NoiseEstimate e;
    e.worst_case = s.mult_terms * em * v_fresh + s.pre_rot_terms * em * ea + s.post_rot_terms * ea;

    // variance of one coefficient, independent-sum rule
    const double n = static_cast<double>(p.n);
    const double t = static_cast<double>(p.t.value());
    const double q = static_cast<double>(p.q.value());
    const double w_eff = p.l_pt() == 1 ? t : std::min(static_cast<double>(p.w_dcmp), t);
    const double a_eff = std::min(static_cast<double>(p.a_dcmp), q);
    const double var_fresh = p.sigma * p.sigma;
    const double var_rot = n * p.l_ct() * (a_eff * a_eff / 3.0) * var_fresh;
    auto var_mult = [&](double v) { return n * p.l_pt() * (w_eff * w_eff / 12.0) * (v + 1.0 / 12.0); };

    const double m = static_cast<double>(s.pre_tail_mults);
    const double r = static_cast<double>(s.pre_tail_rots);
    double var = schedule == Schedule::pa ? m * var_mult(var_fresh) + r * var_rot
                                          : (m - r) * var_mult(var_fresh) + r * var_mult(var_fresh + var_rot);
    // rotate-and-sum adds an automorphic image of the same noise, so treat the halves as fully correlated
    for (std::size_t i = 0; i < s.tail_levels; ++i) {
        var = 4.0 * var + var_rot;
    }
    e.output_variance = var;

    const double threshold = tail_multiplier(p.n) * std::sqrt(var);
    e.scaling = e.worst_case > 0 ? std::min(1.0, threshold / e.worst_case) : 1.0;
    e.output_noise = e.scaling * e.worst_case;
    e.budget_bits = budget_ceiling_bits(p) - std::log2(std::max(e.output_noise, 1.0));
    e.feasible = e.budget_bits > 0.0;
    return e;
}

NoiseEstimate noise_model(const LayerSpec& layer, const HeParams& params, Schedule schedule, std::optional<double> v0)
{
    return noise_model(plan_geometry(layer, params.n), params, schedule, v0);
}

double table_v_noise(const LayerSpec& l, const HeParams& p, std::optional<double> v0)
{
    const double v = v0.value_or(fresh_noise_bound(p));
    const double em = eta_mult(p);
    const double ea = eta_rotate(p);
    const double n = static_cast<double>(p.n);
    if (l.kind == LayerKind::cnn) {
        const double f = l.f_w;
        const double ci = l.c_i;
        const double w2 = static_cast<double>(l.w) * l.w;
        if (n >= w2) {
            const double cn = n / w2;
            return f * f * ci * em * v + ea * ci * (f * f - 1 + (cn - 1) / cn);
        }
        return (2 * f - 1) * f * ci * em * v + ea * ci * (2 * f + 1) * (f - 1);
    }
    const double ni = l.n_i;
    if (n >= ni) {
        return ni * em * v + ea * (ni - 1);
    }
    return ni * em * v + ea * ni * (n - 1) / n;
}

double failure_probability(const HeParams& params, double sigma_y)
{
    if (sigma_y <= 0.0) {
        return 0.0;
    }
    const double q = static_cast<double>(params.q.value());
    const double t = static_cast<double>(params.t.value());
    return 2.0 * std::exp(-(q * q) / (4.0 * t * t * sigma_y * sigma_y));
}

double calibrate_scaling(const HeParams& params, const LayerSpec& layer, Schedule schedule)
{
    return noise_model(layer, params, schedule).scaling;
}

double partial_noise(Schedule schedule, double eta_m, double eta_a, double v0)
{
    return schedule == Schedule::pa ? eta_m * v0 + eta_a : eta_m * (v0 + eta_a);
}

} // namespace cheetah
