#include "cheetah/scheduler.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

namespace cheetah {

namespace {

// ---------------------------------------------------------------- slot group Z2 x Z_{n/2}

struct SlotGroup {
    std::size_t n;
    std::size_t half;

    explicit SlotGroup(std::size_t n_) : n(n_), half(n_ / 2) {}

    std::size_t row(std::size_t s) const { return s / half; }
    std::size_t col(std::size_t s) const { return s % half; }
    std::size_t slot(std::size_t r, std::size_t c) const { return r * half + c % half; }

    std::size_t add(std::size_t s, const SlotShift& g) const
    {
        return slot(row(s) ^ (g.row_swap ? 1 : 0), col(s) + g.steps);
    }
    std::size_t sub(std::size_t s, const SlotShift& g) const
    {
        return slot(row(s) ^ (g.row_swap ? 1 : 0), col(s) + half - g.steps);
    }
    // g with to = from + g
    SlotShift between(std::size_t from, std::size_t to) const
    {
        return SlotShift{row(from) != row(to), (col(to) + half - col(from)) % half};
    }

    // subgroup of size m: {0} for m = 1, else {(r, j n/m)}
    std::size_t label(std::size_t s, std::size_t m) const { return m == 1 ? s : col(s) % (n / m); }
    std::size_t index_within(std::size_t s, std::size_t m) const
    {
        return m == 1 ? 0 : row(s) + 2 * (col(s) / (n / m));
    }
    std::size_t rep(std::size_t s, std::size_t m) const { return m == 1 ? s : col(s) % (n / m); }
    std::vector<SlotShift> elements(std::size_t m) const
    {
        if (m == 1) {
            return {SlotShift{}};
        }
        std::vector<SlotShift> out;
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t j = 0; j < m / 2; ++j) {
                out.push_back(SlotShift{r == 1, j * (n / m)});
            }
        }
        return out;
    }
    // rotate-and-sum chain that sums over the subgroup of size m
    std::vector<SlotShift> fold(std::size_t m) const
    {
        std::vector<SlotShift> out;
        if (m < 2) {
            return out;
        }
        out.push_back(SlotShift{true, 0});
        for (std::size_t h = m / 4; h >= 1; h /= 2) {
            out.push_back(SlotShift{false, h * (n / m)});
        }
        return out;
    }
};

constexpr std::size_t npos = PackedLayout::npos;

// ---------------------------------------------------------------- image placement

struct ImagePlacement {
    const LayerGeometry& geo;
    SlotGroup grp;
    std::size_t w;
    std::vector<std::size_t> piece_start;

    ImagePlacement(const LayerGeometry& g, std::size_t w_) : geo(g), grp(g.n), w(w_)
    {
        std::size_t acc = 0;
        for (std::size_t h : geo.piece_rows) {
            piece_start.push_back(acc);
            acc += h;
        }
    }

    std::size_t pieces() const { return std::max<std::size_t>(geo.piece_rows.size(), 1); }

    std::size_t piece_of(std::size_t r) const
    {
        std::size_t p = 0;
        while (p + 1 < piece_start.size() && piece_start[p + 1] <= r) {
            ++p;
        }
        return p;
    }

    // (ct, slot) of pixel (ch, r, c); channels past the real count are virtual padding
    std::pair<std::size_t, std::size_t> place(std::size_t ch, std::size_t r, std::size_t c) const
    {
        if (geo.layout == LayoutCase::cnn_multi_channel) {
            const std::size_t j = ch % geo.channels_per_ct;
            return {ch / geo.channels_per_ct, grp.slot(j % 2, (j / 2) * geo.block_stride + r * w + c)};
        }
        const std::size_t p = piece_of(r);
        const std::size_t lr = r - piece_start[p];
        return {ch * pieces() + p, grp.slot(lr % 2, lr * geo.shear + c)};
    }

    std::size_t virtual_channels(std::size_t cts) const
    {
        return geo.layout == LayoutCase::cnn_multi_channel ? cts * geo.channels_per_ct : cts / pieces();
    }
};

PackedLayout image_layout(const LayerGeometry& geo, std::size_t w, std::size_t channels)
{
    const ImagePlacement pl(geo, w);
    const std::size_t cts = geo.layout == LayoutCase::cnn_multi_channel
                                ? (channels + geo.channels_per_ct - 1) / geo.channels_per_ct
                                : channels * pl.pieces();
    std::vector<std::vector<std::size_t>> map(cts, std::vector<std::size_t>(geo.n, npos));
    for (std::size_t ch = 0; ch < channels; ++ch) {
        for (std::size_t r = 0; r < w; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
                auto [ct, s] = pl.place(ch, r, c);
                map[ct][s] = (ch * w + r) * w + c;
            }
        }
    }
    return PackedLayout(geo.n, channels * w * w, std::move(map));
}

PackedLayout vector_layout(const LayerGeometry& geo, std::size_t len, bool input)
{
    const SlotGroup grp(geo.n);
    const std::size_t n = geo.n;
    // more than n entries: plain blocks of n; otherwise replicated inputs, folded outputs
    const bool flat = len > n;
    const std::size_t cts = flat ? (len + n - 1) / n : 1;
    std::vector<std::vector<std::size_t>> map(cts, std::vector<std::size_t>(n, npos));
    for (std::size_t ct = 0; ct < cts; ++ct) {
        for (std::size_t s = 0; s < n; ++s) {
            std::size_t e = npos;
            if (flat) {
                e = ct * n + s;
            } else if (input) {
                e = grp.index_within(s, geo.t_size);
            } else {
                e = grp.label(s, geo.b_size);
            }
            map[ct][s] = e < len ? e : npos;
        }
    }
    return PackedLayout(n, len, std::move(map));
}

// ---------------------------------------------------------------- diagonal construction

using BlockMap = std::map<std::pair<std::size_t, std::size_t>, std::map<SlotShift, std::vector<u64>>>;

std::vector<u64>& diagonal(BlockMap& blocks, std::size_t o, std::size_t i, const SlotShift& g, std::size_t n)
{
    auto& d = blocks[{o, i}][g];
    if (d.empty()) {
        d.assign(n, 0);
    }
    return d;
}

void build_conv(const LayerSetup& setup, const std::vector<u64>* weights, BlockMap& blocks)
{
    const LayerSpec& l = setup.spec;
    const LayerGeometry& geo = setup.geo;
    const std::size_t w = static_cast<std::size_t>(l.w);
    const std::size_t f = static_cast<std::size_t>(l.f_w);
    const long fr = static_cast<long>(f / 2);
    const std::size_t ci = static_cast<std::size_t>(l.c_i);
    const std::size_t co = static_cast<std::size_t>(l.c_o);
    const ImagePlacement pl(geo, w);
    const SlotGroup& grp = pl.grp;
    const std::size_t vci = pl.virtual_channels(geo.in_cts);
    const std::size_t vco = pl.virtual_channels(geo.out_cts);

    for (std::size_t oc = 0; oc < vco; ++oc) {
        for (std::size_t ic = 0; ic < vci; ++ic) {
            for (long dr = -fr; dr <= fr; ++dr) {
                for (long dc = -fr; dc <= fr; ++dc) {
                    u64 wt = 0;
                    if (weights != nullptr && oc < co && ic < ci) {
                        const std::size_t idx =
                            ((oc * ci + ic) * f + static_cast<std::size_t>(dr + fr)) * f + static_cast<std::size_t>(dc + fr);
                        wt = (*weights)[idx];
                    }
                    for (std::size_t r = 0; r < w; ++r) {
                        const long rr = static_cast<long>(r) + dr;
                        if (rr < 0 || rr >= static_cast<long>(w)) {
                            continue;
                        }
                        for (std::size_t c = 0; c < w; ++c) {
                            const long cc = static_cast<long>(c) + dc;
                            if (cc < 0 || cc >= static_cast<long>(w)) {
                                continue;
                            }
                            auto [out_ct, out_slot] = pl.place(oc, r, c);
                            auto [in_ct, in_slot] = pl.place(ic, static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
                            const SlotShift g = grp.between(out_slot, in_slot);
                            diagonal(blocks, out_ct, in_ct, g, geo.n)[out_slot] = wt;
                        }
                    }
                }
            }
        }
    }
}

void build_fc(const LayerSetup& setup, const std::vector<u64>* weights, BlockMap& blocks)
{
    const LayerGeometry& geo = setup.geo;
    const std::size_t n = geo.n;
    const SlotGroup grp(n);
    const std::size_t ni = static_cast<std::size_t>(setup.spec.n_i);
    const std::size_t no = static_cast<std::size_t>(setup.spec.n_o);
    auto weight = [&](std::size_t o, std::size_t k) -> u64 {
        if (weights == nullptr || o >= no || k >= ni) {
            return 0;
        }
        return (*weights)[o * ni + k];
    };

    switch (geo.layout) {
    case LayoutCase::fc_small: {
        const std::size_t ts = geo.t_size;
        const std::size_t bs = geo.b_size;
        std::vector<SlotShift> d;
        if (bs > ts) {
            d = {SlotShift{}};
        } else if (bs == 1) {
            d = grp.elements(ts);
        } else {
            for (std::size_t j = 0; j < ts / bs; ++j) {
                d.push_back(SlotShift{false, j * (n / ts)});
            }
        }
        for (const SlotShift& g : d) {
            auto& diag = diagonal(blocks, 0, 0, g, n);
            for (std::size_t s = 0; s < n; ++s) {
                // when the fold covers several copies of the input, count only one
                if (bs > ts && grp.label(s, ts) != grp.label(grp.rep(s, bs), ts)) {
                    continue;
                }
                diag[s] = weight(grp.label(s, bs), grp.index_within(grp.add(s, g), ts));
            }
        }
        break;
    }
    case LayoutCase::fc_wide_out:
        for (std::size_t oc = 0; oc < geo.out_cts; ++oc) {
            for (const SlotShift& g : grp.elements(geo.t_size)) {
                auto& diag = diagonal(blocks, oc, 0, g, n);
                for (std::size_t s = 0; s < n; ++s) {
                    diag[s] = weight(oc * n + s, grp.index_within(grp.add(s, g), geo.t_size));
                }
            }
        }
        break;
    case LayoutCase::fc_wide_in: {
        const std::size_t bs = geo.b_size;
        std::vector<SlotShift> d;
        if (bs == 1) {
            d = grp.elements(n);
        } else {
            for (std::size_t j = 0; j < geo.padded_out; ++j) {
                d.push_back(SlotShift{false, j});
            }
        }
        for (std::size_t ic = 0; ic < geo.in_cts; ++ic) {
            for (const SlotShift& g : d) {
                auto& diag = diagonal(blocks, 0, ic, g, n);
                for (std::size_t s = 0; s < n; ++s) {
                    diag[s] = weight(grp.label(s, bs), ic * n + grp.add(s, g));
                }
            }
        }
        break;
    }
    case LayoutCase::fc_blocked:
        for (std::size_t oc = 0; oc < geo.out_cts; ++oc) {
            for (std::size_t ic = 0; ic < geo.in_cts; ++ic) {
                for (const SlotShift& g : grp.elements(n)) {
                    auto& diag = diagonal(blocks, oc, ic, g, n);
                    for (std::size_t s = 0; s < n; ++s) {
                        diag[s] = weight(oc * n + s, ic * n + grp.add(s, g));
                    }
                }
            }
        }
        break;
    default:
        break;
    }
}

DiagonalPlan make_plan(const LayerSetup& setup, const std::vector<u64>* weights)
{
    DiagonalPlan plan;
    plan.n = setup.geo.n;
    plan.in_cts = setup.geo.in_cts;
    plan.out_cts = setup.geo.out_cts;
    BlockMap blocks;
    if (setup.spec.kind == LayerKind::cnn) {
        build_conv(setup, weights, blocks);
    } else {
        build_fc(setup, weights, blocks);
        plan.tail = SlotGroup(plan.n).fold(setup.geo.b_size);
    }
    for (auto& [key, diags] : blocks) {
        plan.blocks.push_back(DiagonalBlock{key.first, key.second, std::move(diags)});
    }
    return plan;
}

} // namespace

// ---------------------------------------------------------------- layouts

PackedLayout::PackedLayout(std::size_t n, std::size_t elements, std::vector<std::vector<std::size_t>> slot_elements)
    : n_(n), elements_(elements), slot_elements_(std::move(slot_elements)), home_(elements, {npos, npos}),
      copies_(elements, 0)
{
    for (std::size_t ct = 0; ct < slot_elements_.size(); ++ct) {
        for (std::size_t s = 0; s < n_; ++s) {
            const std::size_t e = slot_elements_[ct][s];
            if (e == npos) {
                continue;
            }
            if (copies_[e]++ == 0) {
                home_[e] = {ct, s};
            }
        }
    }
}

std::vector<std::vector<u64>> PackedLayout::pack(const std::vector<u64>& values) const
{
    if (values.size() != elements_) {
        throw std::invalid_argument("pack: expected " + std::to_string(elements_) + " values");
    }
    std::vector<std::vector<u64>> out(slot_elements_.size(), std::vector<u64>(n_, 0));
    for (std::size_t ct = 0; ct < out.size(); ++ct) {
        for (std::size_t s = 0; s < n_; ++s) {
            const std::size_t e = slot_elements_[ct][s];
            if (e != npos) {
                out[ct][s] = values[e];
            }
        }
    }
    return out;
}

std::vector<u64> PackedLayout::unpack(const std::vector<std::vector<u64>>& slots) const
{
    if (slots.size() != slot_elements_.size()) {
        throw std::invalid_argument("unpack: ciphertext count does not match the layout");
    }
    std::vector<u64> out(elements_, 0);
    for (std::size_t e = 0; e < elements_; ++e) {
        out[e] = slots[home_[e].first][home_[e].second];
    }
    return out;
}

LayerSetup plan_layer(const LayerSpec& spec, std::size_t n)
{
    LayerSetup s;
    s.spec = spec;
    s.geo = plan_geometry(spec, n);
    if (spec.kind == LayerKind::cnn) {
        s.input = image_layout(s.geo, static_cast<std::size_t>(spec.w), static_cast<std::size_t>(spec.c_i));
        s.output = image_layout(s.geo, static_cast<std::size_t>(spec.w), static_cast<std::size_t>(spec.c_o));
    } else {
        s.input = vector_layout(s.geo, static_cast<std::size_t>(spec.n_i), true);
        s.output = vector_layout(s.geo, static_cast<std::size_t>(spec.n_o), false);
    }
    return s;
}

DiagonalPlan build_diagonals(const LayerSetup& setup, const std::vector<u64>& weights)
{
    const LayerSpec& l = setup.spec;
    const std::size_t expected = l.kind == LayerKind::cnn
                                     ? static_cast<std::size_t>(l.c_o) * l.c_i * l.f_w * l.f_w
                                     : static_cast<std::size_t>(l.n_o) * l.n_i;
    if (weights.size() != expected) {
        throw std::invalid_argument("build_diagonals: expected " + std::to_string(expected) + " weights");
    }
    return make_plan(setup, &weights);
}

std::vector<SlotShift> rotation_shifts(const DiagonalPlan& plan)
{
    std::set<SlotShift> shifts(plan.tail.begin(), plan.tail.end());
    for (const auto& b : plan.blocks) {
        for (const auto& [g, d] : b.diagonals) {
            shifts.insert(g);
        }
    }
    shifts.erase(SlotShift{});
    return {shifts.begin(), shifts.end()};
}

std::vector<SlotShift> rotation_shifts(const LayerSpec& spec, std::size_t n)
{
    return rotation_shifts(make_plan(plan_layer(spec, n), nullptr));
}

// ---------------------------------------------------------------- filters

FilterPlaintexts encode_filters(const DiagonalPlan& plan, Schedule schedule, const ContextPtr& ctx)
{
    if (ctx->params().n != plan.n) {
        throw ParamMismatch("encode_filters: plan and context disagree on n");
    }
    const SlotGroup grp(plan.n);
    FilterPlaintexts fp;
    fp.schedule = schedule;
    fp.in_cts = plan.in_cts;
    fp.out_cts = plan.out_cts;
    fp.tail = plan.tail;
    for (const auto& b : plan.blocks) {
        for (const auto& [g, d] : b.diagonals) {
            std::vector<u64> slots = d;
            if (schedule == Schedule::pa) {
                // multiply before rotating: weight for output s sits at input slot s + g
                for (std::size_t s = 0; s < plan.n; ++s) {
                    slots[grp.add(s, g)] = d[s];
                }
            }
            FilterEntry e;
            e.out_ct = b.out_ct;
            e.in_ct = b.in_ct;
            e.shift = g;
            e.digits = decompose_plaintext(encode(slots, ctx));
            for (const auto& dg : e.digits) {
                e.prepared.push_back(prepare_plain(dg));
            }
            fp.entries.push_back(std::move(e));
        }
    }
    return fp;
}

FilterPlaintexts encode_filters(const LayerSetup& setup, const std::vector<u64>& weights, Schedule schedule,
                                const ContextPtr& ctx)
{
    return encode_filters(build_diagonals(setup, weights), schedule, ctx);
}

// ---------------------------------------------------------------- activations

EncryptedActivations pack_activations(const std::vector<u64>& values, const PackedLayout& layout,
                                      const SecretKey& sk, Rng& rng)
{
    const u64 t = sk.ctx->params().t.value();
    for (u64 v : values) {
        if (v >= t) {
            throw ValueOutOfRange("pack_activations: value " + std::to_string(v) + " >= t");
        }
    }
    EncryptedActivations out;
    for (const auto& slots : layout.pack(values)) {
        out.digits.push_back(encrypt_scaled_digits(encode(slots, sk.ctx), sk, rng));
    }
    return out;
}

std::vector<u64> unpack_outputs(const std::vector<Ciphertext>& cts, const PackedLayout& layout, const SecretKey& sk)
{
    std::vector<std::vector<u64>> slots;
    slots.reserve(cts.size());
    for (const auto& ct : cts) {
        slots.push_back(decode(decrypt(ct, sk)));
    }
    return layout.unpack(slots);
}

// ---------------------------------------------------------------- execution

const char* to_string(TraceOpKind k)
{
    switch (k) {
    case TraceOpKind::input:
        return "input";
    case TraceOpKind::mult:
        return "mult";
    case TraceOpKind::rotate:
        return "rotate";
    case TraceOpKind::add:
        return "add";
    }
    return "?";
}

std::size_t ScheduleTrace::count(TraceOpKind k) const
{
    return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [k](const TraceOp& op) { return op.kind == k; }));
}

std::size_t ScheduleTrace::critical_path() const
{
    std::size_t m = 0;
    for (const auto& op : ops) {
        m = std::max(m, op.level);
    }
    return m;
}

OpCounts ScheduleTrace::counts(const HeParams& params) const
{
    OpCounts c;
    c.he_mult = count(TraceOpKind::mult);
    c.he_rotate = count(TraceOpKind::rotate);
    c.he_add = count(TraceOpKind::add);
    c.ntt = c.he_rotate * static_cast<u64>(params.l_ct() + 1);
    c.int_mults = int_mult_reduction(c, params);
    return c;
}

std::string ScheduleTrace::to_json_lines() const
{
    std::ostringstream os;
    for (const auto& op : ops) {
        nlohmann::json j;
        j["id"] = op.id;
        j["op"] = to_string(op.kind);
        j["operands"] = op.operands;
        if (op.step) {
            j["step"] = {op.step->row_swap ? 1 : 0, op.step->steps};
        } else {
            j["step"] = nullptr;
        }
        j["level"] = op.level;
        if (op.budget_bits) {
            j["budget_bits"] = *op.budget_bits;
        } else {
            j["budget_bits"] = nullptr;
        }
        os << j.dump() << '\n';
    }
    return os.str();
}

namespace {

struct Value {
    Ciphertext ct;
    std::size_t id;
};

class Recorder {
  public:
    Recorder(ScheduleTrace& trace, const SecretKey* meter) : trace_(trace), meter_(meter) {}

    Value input(Ciphertext ct) { return emit(TraceOpKind::input, std::move(ct), {}, std::nullopt); }

    Value mult(const Value& a, const PreparedPlaintext& p)
    {
        return emit(TraceOpKind::mult, he_mult_plain(a.ct, p), {a.id}, std::nullopt);
    }
    Value rotate(const Value& a, const SlotShift& g, const GaloisKeySet& keys)
    {
        if (g == SlotShift{}) {
            return a;
        }
        return emit(TraceOpKind::rotate, he_rotate(a.ct, g, keys), {a.id}, g);
    }
    Value add(const Value& a, const Value& b) { return emit(TraceOpKind::add, he_add(a.ct, b.ct), {a.id, b.id}, std::nullopt); }

    // balanced binary tree
    Value sum(std::vector<Value> vals)
    {
        while (vals.size() > 1) {
            std::vector<Value> next;
            for (std::size_t i = 0; i + 1 < vals.size(); i += 2) {
                next.push_back(add(vals[i], vals[i + 1]));
            }
            if (vals.size() % 2 == 1) {
                next.push_back(std::move(vals.back()));
            }
            vals = std::move(next);
        }
        return std::move(vals.front());
    }

  private:
    Value emit(TraceOpKind kind, Ciphertext ct, std::vector<std::size_t> operands, std::optional<SlotShift> step)
    {
        TraceOp op;
        op.kind = kind;
        op.id = trace_.ops.size();
        for (std::size_t o : operands) {
            op.level = std::max(op.level, trace_.ops[o].level + 1);
        }
        op.operands = std::move(operands);
        op.step = step;
        if (meter_ != nullptr) {
            op.budget_bits = noise_report(ct, *meter_).budget_bits;
        }
        trace_.ops.push_back(std::move(op));
        return Value{std::move(ct), trace_.ops.back().id};
    }

    ScheduleTrace& trace_;
    const SecretKey* meter_;
};

} // namespace

LayerResult run_layer(const EncryptedActivations& inputs, const FilterPlaintexts& filters, const GaloisKeySet& keys,
                      const SecretKey* meter)
{
    if (inputs.digits.size() != filters.in_cts) {
        throw std::invalid_argument("run_layer: expected " + std::to_string(filters.in_cts) + " input ciphertexts");
    }
    LayerResult res;
    res.trace.schedule = filters.schedule;
    Recorder rec(res.trace, meter);

    std::vector<std::vector<Value>> in;
    for (const auto& digits : inputs.digits) {
        std::vector<Value> row;
        for (const auto& ct : digits) {
            row.push_back(rec.input(ct));
        }
        in.push_back(std::move(row));
    }

    std::vector<std::vector<Value>> partials(filters.out_cts);
    for (const FilterEntry& e : filters.entries) {
        const auto& x = in[e.in_ct];
        if (x.size() != e.prepared.size()) {
            throw DigitCountMismatch("run_layer: input and weight digit counts differ");
        }
        std::vector<Value> products;
        if (filters.schedule == Schedule::pa) {
            for (std::size_t d = 0; d < x.size(); ++d) {
                products.push_back(rec.mult(x[d], e.prepared[d]));
            }
            partials[e.out_ct].push_back(rec.rotate(rec.sum(std::move(products)), e.shift, keys));
        } else {
            for (std::size_t d = 0; d < x.size(); ++d) {
                products.push_back(rec.mult(rec.rotate(x[d], e.shift, keys), e.prepared[d]));
            }
            partials[e.out_ct].push_back(rec.sum(std::move(products)));
        }
    }

    for (auto& ps : partials) {
        if (ps.empty()) {
            throw std::logic_error("run_layer: output ciphertext without partials");
        }
        Value acc = rec.sum(std::move(ps));
        for (const SlotShift& g : filters.tail) {
            acc = rec.add(acc, rec.rotate(acc, g, keys));
        }
        res.trace.outputs.push_back(acc.id);
        res.outputs.push_back(std::move(acc.ct));
    }
    return res;
}

// ---------------------------------------------------------------- references

std::vector<u64> conv_reference(const LayerSpec& l, const std::vector<u64>& image, const std::vector<u64>& weights,
                                u64 t)
{
    const long w = l.w;
    const long f = l.f_w;
    const long fr = f / 2;
    std::vector<u64> out(static_cast<std::size_t>(l.c_o * w * w), 0);
    for (long o = 0; o < l.c_o; ++o) {
        for (long r = 0; r < w; ++r) {
            for (long c = 0; c < w; ++c) {
                u128 acc = 0;
                for (long i = 0; i < l.c_i; ++i) {
                    for (long dr = -fr; dr <= fr; ++dr) {
                        for (long dc = -fr; dc <= fr; ++dc) {
                            const long rr = r + dr;
                            const long cc = c + dc;
                            if (rr < 0 || rr >= w || cc < 0 || cc >= w) {
                                continue;
                            }
                            const u64 wt = weights[static_cast<std::size_t>(((o * l.c_i + i) * f + dr + fr) * f + dc + fr)];
                            const u64 x = image[static_cast<std::size_t>((i * w + rr) * w + cc)];
                            acc = (acc + static_cast<u128>(wt) * x) % t;
                        }
                    }
                }
                out[static_cast<std::size_t>((o * w + r) * w + c)] = static_cast<u64>(acc);
            }
        }
    }
    return out;
}

std::vector<u64> fc_reference(const LayerSpec& l, const std::vector<u64>& x, const std::vector<u64>& weights, u64 t)
{
    const std::size_t ni = static_cast<std::size_t>(l.n_i);
    std::vector<u64> out(static_cast<std::size_t>(l.n_o), 0);
    for (std::size_t o = 0; o < out.size(); ++o) {
        u128 acc = 0;
        for (std::size_t k = 0; k < ni; ++k) {
            acc = (acc + static_cast<u128>(weights[o * ni + k]) * x[k]) % t;
        }
        out[o] = static_cast<u64>(acc);
    }
    return out;
}

std::vector<u64> layer_reference(const LayerSpec& spec, const std::vector<u64>& input, const std::vector<u64>& weights,
                                 u64 t)
{
    return spec.kind == LayerKind::cnn ? conv_reference(spec, input, weights, t) : fc_reference(spec, input, weights, t);
}

double predict_noise_delta(Schedule schedule, const LayerSpec& layer, const HeParams& params)
{
    return noise_model(layer, params, schedule).worst_case;
}

} // namespace cheetah
