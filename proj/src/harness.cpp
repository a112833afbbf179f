#include "cheetah/harness.hpp"

#include <algorithm>
#include <limits>

namespace cheetah {

std::vector<u64> random_plain(std::size_t count, u64 t, Rng& rng)
{
    std::uniform_int_distribution<u64> dist(0, t - 1);
    std::vector<u64> v(count);
    for (auto& x : v) {
        x = dist(rng);
    }
    return v;
}

std::size_t input_size(const LayerSpec& l)
{
    return l.kind == LayerKind::cnn ? static_cast<std::size_t>(l.c_i) * l.w * l.w : static_cast<std::size_t>(l.n_i);
}

std::size_t weight_size(const LayerSpec& l)
{
    return l.kind == LayerKind::cnn ? static_cast<std::size_t>(l.c_o) * l.c_i * l.f_w * l.f_w
                                    : static_cast<std::size_t>(l.n_o) * l.n_i;
}

LayerSpec desk_shape(const LayerSpec& l, int max_w, int max_c, int max_fc)
{
    if (l.kind == LayerKind::fc) {
        return LayerSpec::fc(std::min(l.n_i, max_fc), std::min(l.n_o, max_fc));
    }
    const int w = std::min(l.w, max_w);
    int f = std::min(l.f_w, w);
    if (f % 2 == 0) {
        f = std::max(1, f - 1);
    }
    return LayerSpec::cnn(w, f, std::min(l.c_i, max_c), std::min(l.c_o, max_c));
}

LayerHarness::LayerHarness(const LayerSpec& spec, const ContextPtr& ctx, std::uint64_t key_seed)
    : spec_(spec), ctx_(ctx), setup_(plan_layer(spec, ctx->params().n))
{
    auto [sk, keys] = keygen(ctx, rotation_shifts(spec, ctx->params().n), key_seed);
    sk_ = std::move(sk);
    keys_ = std::move(keys);
}

TrialOutcome LayerHarness::run(Schedule schedule, std::uint64_t seed) const
{
    Rng rng(seed);
    const u64 t = ctx_->params().t.value();
    const std::vector<u64> x = random_plain(input_size(spec_), t, rng);
    const std::vector<u64> w = random_plain(weight_size(spec_), t, rng);
    return run(schedule, x, w, seed + 1);
}

TrialOutcome LayerHarness::run(Schedule schedule, const std::vector<u64>& input, const std::vector<u64>& weights,
                               std::uint64_t seed) const
{
    const HeParams& p = ctx_->params();
    Rng rng(seed);
    TrialOutcome out;
    const EncryptedActivations in = pack_activations(input, setup_.input, sk_, rng);
    const FilterPlaintexts filters = encode_filters(setup_, weights, schedule, ctx_);
    reset_he_op_counts();
    const LayerResult res = run_layer(in, filters, keys_);
    out.measured = he_op_counts();
    out.traced = res.trace.counts(p);
    out.model = perf_model(setup_.geo, p, schedule);
    out.decoded = unpack_outputs(res.outputs, setup_.output, sk_);
    out.expected = layer_reference(spec_, input, weights, p.t.value());
    out.correct = out.decoded == out.expected;
    out.measured_budget = std::numeric_limits<double>::infinity();
    for (const auto& ct : res.outputs) {
        out.measured_budget = std::min(out.measured_budget, noise_report(ct, sk_).budget_bits);
    }
    return out;
}

} // namespace cheetah
