#include "cheetah/bfv.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace cheetah {

namespace {

thread_local HeOpCounts op_counts;

bool is_pow2(u64 x) { return x != 0 && (x & (x - 1)) == 0; }

int log2_exact(u64 x) { return std::countr_zero(x); }

u64 from_signed(std::int64_t x, u64 m)
{
    if (x >= 0) {
        return static_cast<u64>(x) % m;
    }
    u64 r = static_cast<u64>(-(x + 1)) % m; // avoid overflow on INT64_MIN
    return m - 1 - r;
}

std::int64_t centered(u64 x, u64 m) { return x > m / 2 ? -static_cast<std::int64_t>(m - x) : static_cast<std::int64_t>(x); }

void require_same(const ContextPtr& a, const ContextPtr& b, const char* what)
{
    if (!a || !b) {
        throw ParamMismatch(std::string(what) + ": missing context");
    }
    if (a != b && !(a->params() == b->params())) {
        throw ParamMismatch(std::string(what) + ": operands use different parameters");
    }
}

std::vector<u64> sample_uniform(std::size_t n, const Modulus& q, Rng& rng)
{
    std::uniform_int_distribution<u64> dist(0, q.value() - 1);
    std::vector<u64> v(n);
    for (auto& x : v) {
        x = dist(rng);
    }
    return v;
}

std::vector<u64> sample_ternary(std::size_t n, const Modulus& q, Rng& rng)
{
    std::uniform_int_distribution<int> dist(-1, 1);
    std::vector<u64> v(n);
    for (auto& x : v) {
        x = from_signed(dist(rng), q.value());
    }
    return v;
}

// rounded continuous normal, resampled outside [-B, B]
std::vector<u64> sample_error(std::size_t n, double sigma, const Modulus& q, Rng& rng)
{
    std::normal_distribution<double> dist(0.0, sigma);
    const double bound = 6.0 * sigma;
    std::vector<u64> v(n);
    for (auto& x : v) {
        double e;
        do {
            e = std::round(dist(rng));
        } while (std::abs(e) > bound);
        x = from_signed(static_cast<std::int64_t>(e), q.value());
    }
    return v;
}

// round(q * m / t) mod q
u64 scale_up(u64 m, u64 q, u64 t)
{
    u64 r = static_cast<u64>((static_cast<u128>(q) * m + t / 2) / t);
    return r >= q ? r - q : r;
}

// round(t * x / q) mod t
u64 scale_down(u64 x, u64 q, u64 t)
{
    u64 r = static_cast<u64>((static_cast<u128>(t) * x + q / 2) / q);
    return r % t;
}

void add_inplace(std::vector<u64>& a, const std::vector<u64>& b, const Modulus& q)
{
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = mod_add(a[i], b[i], q);
    }
}

void mul_acc(std::vector<u64>& acc, const std::vector<u64>& a, const std::vector<u64>& b, const Modulus& q)
{
    for (std::size_t i = 0; i < acc.size(); ++i) {
        acc[i] = mod_add(acc[i], mod_mul(a[i], b[i], q), q);
    }
}

std::vector<u64> mul(const std::vector<u64>& a, const std::vector<u64>& b, const Modulus& q)
{
    std::vector<u64> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = mod_mul(a[i], b[i], q);
    }
    return out;
}

std::vector<u64> permute(const std::vector<u64>& v, const std::vector<std::size_t>& perm)
{
    std::vector<u64> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        out[k] = v[perm[k]];
    }
    return out;
}

// c0 + c1*s in coefficient form
std::vector<u64> phase(const Ciphertext& ct, const SecretKey& sk)
{
    require_same(ct.ctx, sk.ctx, "decrypt");
    const auto& q = ct.ctx->params().q;
    Ciphertext e = to_evaluation(ct);
    std::vector<u64> x = mul(e.c1, sk.s, q);
    add_inplace(x, e.c0, q);
    ntt_inverse_inplace(x, ct.ctx->q_tables());
    return x;
}

} // namespace

// ---------------------------------------------------------------- params

HeParams HeParams::from_bits(std::size_t n, int t_bits, int q_bits, int w_bits, int a_bits, double sigma)
{
    if (w_bits < 1 || w_bits > 63 || a_bits < 1 || a_bits > 63) {
        throw InvalidParams("decomposition bit sizes must be in [1, 63]");
    }
    HeParams p;
    p.n = n;
    p.t = generate_ntt_prime(t_bits, n);
    p.q = generate_ntt_prime(q_bits, n);
    p.w_dcmp = u64{1} << w_bits;
    p.a_dcmp = u64{1} << a_bits;
    p.sigma = sigma;
    p.validate();
    return p;
}

int HeParams::l_pt() const
{
    int bits = static_cast<int>(std::bit_width(t.value() - 1));
    int w = log2_exact(w_dcmp);
    return std::max(1, (bits + w - 1) / w);
}

int HeParams::l_ct() const
{
    int bits = static_cast<int>(std::bit_width(q.value() - 1));
    int a = log2_exact(a_dcmp);
    return std::max(1, (bits + a - 1) / a);
}

void HeParams::validate() const
{
    if (n < 2 || !is_pow2(n)) {
        throw InvalidParams("n must be a power of two >= 2");
    }
    const u64 two_n = 2 * static_cast<u64>(n);
    if (t.value() == 0 || !is_prime(t.value()) || t.value() % two_n != 1) {
        throw InvalidParams("t must be prime and 1 mod 2n");
    }
    if (q.value() == 0 || !is_prime(q.value()) || q.value() % two_n != 1) {
        throw InvalidParams("q must be prime and 1 mod 2n");
    }
    if (q.value() <= t.value()) {
        throw InvalidParams("q must exceed t");
    }
    if (!is_pow2(w_dcmp) || w_dcmp < 2 || std::bit_width(w_dcmp) - 1 > std::bit_width(t.value())) {
        throw InvalidParams("w_dcmp must be a power of two in [2, 2^bits(t)]");
    }
    if (!is_pow2(a_dcmp) || a_dcmp < 2 || std::bit_width(a_dcmp) - 1 > std::bit_width(q.value())) {
        throw InvalidParams("a_dcmp must be a power of two in [2, 2^bits(q)]");
    }
    if (!(sigma > 0.0)) {
        throw InvalidParams("sigma must be positive");
    }
}

// ---------------------------------------------------------------- context

BfvContext::BfvContext(const HeParams& params)
    : params_((params.validate(), params)), q_tables_(params.n, params.q), t_tables_(params.n, params.t),
      slot_pos_(params.n)
{
    const std::size_t n = params.n;
    const std::size_t half = n / 2;
    const u64 two_n = 2 * static_cast<u64>(n);
    const int log_n = std::countr_zero(n);
    u64 e = 1;
    for (std::size_t c = 0; c < half; ++c) {
        slot_pos_[c] = bit_reverse((e - 1) / 2, log_n);
        slot_pos_[half + c] = bit_reverse((two_n - e - 1) / 2, log_n);
        e = e * 3 % two_n;
    }
}

std::shared_ptr<const BfvContext> BfvContext::create(const HeParams& params)
{
    return std::make_shared<const BfvContext>(params);
}

std::vector<std::size_t> BfvContext::galois_permutation(u64 galois_elt) const
{
    const std::size_t n = params_.n;
    const u64 two_n = 2 * static_cast<u64>(n);
    const int log_n = std::countr_zero(n);
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < n; ++k) {
        u64 e = 2 * static_cast<u64>(bit_reverse(k, log_n)) + 1;
        u64 ge = static_cast<u64>(static_cast<u128>(galois_elt) * e % two_n);
        perm[k] = bit_reverse((ge - 1) / 2, log_n);
    }
    return perm;
}

u64 galois_element(const SlotShift& shift, std::size_t n)
{
    const u64 two_n = 2 * static_cast<u64>(n);
    u64 g = 1;
    for (std::size_t i = 0; i < shift.steps; ++i) {
        g = g * 3 % two_n;
    }
    return shift.row_swap ? two_n - g : g;
}

SlotShift column_shift(long long k, std::size_t n)
{
    const long long half = static_cast<long long>(n / 2);
    long long r = k % half;
    if (r < 0) {
        r += half;
    }
    return SlotShift{false, static_cast<std::size_t>(r)};
}

HeOpCounts he_op_counts() noexcept { return op_counts; }
void reset_he_op_counts() noexcept { op_counts = HeOpCounts{}; }

// ---------------------------------------------------------------- keys

std::pair<SecretKey, GaloisKeySet> keygen(const ContextPtr& ctx, const std::vector<SlotShift>& shifts,
                                          std::uint64_t seed)
{
    const HeParams& p = ctx->params();
    const auto& q = p.q;
    Rng rng(seed);
    SecretKey sk{ctx, sample_ternary(p.n, q, rng)};
    ntt_forward_inplace(sk.s, ctx->q_tables());

    GaloisKeySet gk{ctx, {}};
    for (const auto& raw : shifts) {
        gk.keys.emplace(SlotShift{raw.row_swap, raw.steps % p.row_size()}, KeySwitchKey{});
    }
    const int l_ct = p.l_ct();
    const int a_bits = log2_exact(p.a_dcmp);
    for (auto& [shift, key] : gk.keys) {
        auto s_rot = permute(sk.s, ctx->galois_permutation(galois_element(shift, p.n)));
        for (int i = 0; i < l_ct; ++i) {
            auto a = sample_uniform(p.n, q, rng);
            auto e = sample_error(p.n, p.sigma, q, rng);
            ntt_forward_inplace(e, ctx->q_tables());
            const u64 a_pow = mod_pow(2, static_cast<u64>(a_bits) * static_cast<u64>(i), q);
            std::vector<u64> k0(p.n);
            for (std::size_t j = 0; j < p.n; ++j) {
                u64 v = mod_sub(e[j], mod_mul(a[j], sk.s[j], q), q);
                k0[j] = mod_add(v, mod_mul(a_pow, s_rot[j], q), q);
            }
            key.k0.push_back(std::move(k0));
            key.k1.push_back(std::move(a));
        }
    }
    return {std::move(sk), std::move(gk)};
}

std::pair<SecretKey, GaloisKeySet> keygen(const ContextPtr& ctx, const std::vector<long long>& column_steps,
                                          std::uint64_t seed)
{
    std::vector<SlotShift> shifts;
    shifts.reserve(column_steps.size());
    for (long long k : column_steps) {
        shifts.push_back(column_shift(k, ctx->params().n));
    }
    return keygen(ctx, shifts, seed);
}

// ---------------------------------------------------------------- encoding

Plaintext encode(const std::vector<u64>& values, const ContextPtr& ctx)
{
    const HeParams& p = ctx->params();
    if (values.size() > p.n) {
        throw ValueOutOfRange("encode: more values than slots");
    }
    std::vector<u64> evals(p.n, 0);
    for (std::size_t s = 0; s < values.size(); ++s) {
        if (values[s] >= p.t.value()) {
            throw ValueOutOfRange("encode: value " + std::to_string(values[s]) + " not below t");
        }
        evals[ctx->slot_position(s)] = values[s];
    }
    ntt_inverse_inplace(evals, ctx->t_tables());
    return Plaintext{ctx, std::move(evals), Representation::coefficient};
}

Plaintext encode_signed(const std::vector<std::int64_t>& values, const ContextPtr& ctx)
{
    const u64 t = ctx->params().t.value();
    std::vector<u64> u(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        u[i] = from_signed(values[i], t);
    }
    return encode(u, ctx);
}

std::vector<u64> decode(const Plaintext& pt)
{
    Plaintext e = to_evaluation(pt);
    std::vector<u64> out(e.poly.size());
    for (std::size_t s = 0; s < out.size(); ++s) {
        out[s] = e.poly[pt.ctx->slot_position(s)];
    }
    return out;
}

std::vector<std::int64_t> decode_signed(const Plaintext& pt)
{
    const u64 t = pt.ctx->params().t.value();
    auto u = decode(pt);
    std::vector<std::int64_t> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = centered(u[i], t);
    }
    return out;
}

Plaintext to_evaluation(const Plaintext& pt)
{
    if (pt.rep == Representation::evaluation) {
        return pt;
    }
    return Plaintext{pt.ctx, ntt_forward(pt.poly, pt.ctx->t_tables()), Representation::evaluation};
}

Plaintext to_coefficient(const Plaintext& pt)
{
    if (pt.rep == Representation::coefficient) {
        return pt;
    }
    return Plaintext{pt.ctx, ntt_inverse(pt.poly, pt.ctx->t_tables()), Representation::coefficient};
}

// ---------------------------------------------------------------- encryption

Ciphertext encrypt(const Plaintext& pt, const SecretKey& sk, Rng& rng)
{
    require_same(pt.ctx, sk.ctx, "encrypt");
    const auto& ctx = sk.ctx;
    const HeParams& p = ctx->params();
    const auto& q = p.q;
    Plaintext m = to_coefficient(pt);

    auto a = sample_uniform(p.n, q, rng);
    auto body = sample_error(p.n, p.sigma, q, rng);
    for (std::size_t i = 0; i < p.n; ++i) {
        body[i] = mod_add(body[i], scale_up(m.poly[i], q.value(), p.t.value()), q);
    }
    ntt_forward_inplace(body, ctx->q_tables());
    for (std::size_t i = 0; i < p.n; ++i) {
        body[i] = mod_sub(body[i], mod_mul(a[i], sk.s[i], q), q);
    }
    return Ciphertext{ctx, std::move(body), std::move(a), Representation::evaluation};
}

Plaintext decrypt(const Ciphertext& ct, const SecretKey& sk)
{
    const HeParams& p = ct.ctx->params();
    auto x = phase(ct, sk);
    for (auto& v : x) {
        v = scale_down(v, p.q.value(), p.t.value());
    }
    return Plaintext{ct.ctx, std::move(x), Representation::coefficient};
}

NoiseReport noise_report(const Ciphertext& ct, const SecretKey& sk, const std::optional<Plaintext>& expected)
{
    const HeParams& p = ct.ctx->params();
    const u64 qv = p.q.value();
    const u64 tv = p.t.value();
    auto x = phase(ct, sk);
    std::vector<u64> m;
    if (expected) {
        require_same(ct.ctx, expected->ctx, "noise_report");
        m = to_coefficient(*expected).poly;
    } else {
        m.resize(p.n);
        for (std::size_t i = 0; i < p.n; ++i) {
            m[i] = scale_down(x[i], qv, tv);
        }
    }
    u64 worst = 0;
    for (std::size_t i = 0; i < p.n; ++i) {
        u64 v = mod_sub(x[i], scale_up(m[i], qv, tv), p.q);
        worst = std::max(worst, static_cast<u64>(std::llabs(centered(v, qv))));
    }
    NoiseReport r;
    r.noise_inf = static_cast<double>(worst);
    r.budget_bits = std::log2(static_cast<double>(qv) / (2.0 * static_cast<double>(tv))) -
                    std::log2(static_cast<double>(worst) + 1.0);
    r.failed = r.budget_bits < 0.0;
    return r;
}

Ciphertext to_evaluation(const Ciphertext& ct)
{
    if (ct.rep == Representation::evaluation) {
        return ct;
    }
    const auto& tab = ct.ctx->q_tables();
    return Ciphertext{ct.ctx, ntt_forward(ct.c0, tab), ntt_forward(ct.c1, tab), Representation::evaluation};
}

Ciphertext to_coefficient(const Ciphertext& ct)
{
    if (ct.rep == Representation::coefficient) {
        return ct;
    }
    const auto& tab = ct.ctx->q_tables();
    return Ciphertext{ct.ctx, ntt_inverse(ct.c0, tab), ntt_inverse(ct.c1, tab), Representation::coefficient};
}

// ---------------------------------------------------------------- operators

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b)
{
    require_same(a.ctx, b.ctx, "he_add");
    if (a.rep != b.rep) {
        throw ParamMismatch("he_add: representations differ");
    }
    const auto& q = a.ctx->params().q;
    Ciphertext out = a;
    add_inplace(out.c0, b.c0, q);
    add_inplace(out.c1, b.c1, q);
    ++op_counts.add;
    return out;
}

PreparedPlaintext prepare_plain(const Plaintext& pt)
{
    const HeParams& p = pt.ctx->params();
    Plaintext c = to_coefficient(pt);
    std::vector<u64> lifted(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        lifted[i] = from_signed(centered(c.poly[i], p.t.value()), p.q.value());
    }
    ntt_forward_inplace(lifted, pt.ctx->q_tables());
    return PreparedPlaintext{pt.ctx, std::move(lifted)};
}

Ciphertext he_mult_plain(const Ciphertext& ct, const PreparedPlaintext& pt)
{
    require_same(ct.ctx, pt.ctx, "he_mult_plain");
    if (ct.rep != Representation::evaluation) {
        throw ParamMismatch("he_mult_plain: ciphertext must be in evaluation form");
    }
    const auto& q = ct.ctx->params().q;
    Ciphertext out{ct.ctx, mul(ct.c0, pt.evals, q), mul(ct.c1, pt.evals, q), Representation::evaluation};
    ++op_counts.mult;
    op_counts.scalar_mul += 2 * ct.c0.size();
    return out;
}

Ciphertext he_mult_plain(const Ciphertext& ct, const Plaintext& pt) { return he_mult_plain(ct, prepare_plain(pt)); }

std::vector<Plaintext> decompose_plaintext(const Plaintext& pt)
{
    const HeParams& p = pt.ctx->params();
    const int l = p.l_pt();
    const auto w = static_cast<std::int64_t>(p.w_dcmp);
    Plaintext c = to_coefficient(pt);
    std::vector<Plaintext> digits(l, Plaintext{pt.ctx, std::vector<u64>(p.n, 0), Representation::coefficient});
    for (std::size_t j = 0; j < p.n; ++j) {
        std::int64_t x = centered(c.poly[j], p.t.value());
        for (int i = 0; i + 1 < l; ++i) {
            std::int64_t d = ((x % w) + w) % w; // [0, W)
            if (d >= w / 2) {
                d -= w;
            }
            digits[i].poly[j] = from_signed(d, p.t.value());
            x = (x - d) / w;
        }
        digits[l - 1].poly[j] = from_signed(x, p.t.value());
    }
    return digits;
}

Ciphertext he_mult_plain_decomposed(const std::vector<Ciphertext>& ct_digits, const std::vector<Plaintext>& pt_digits)
{
    if (ct_digits.empty() || ct_digits.size() != pt_digits.size()) {
        throw DigitCountMismatch("he_mult_plain_decomposed: digit lists differ in length");
    }
    const int l = ct_digits.front().ctx->params().l_pt();
    if (static_cast<int>(ct_digits.size()) != l) {
        throw DigitCountMismatch("he_mult_plain_decomposed: expected " + std::to_string(l) + " digits");
    }
    Ciphertext acc = he_mult_plain(ct_digits[0], pt_digits[0]);
    for (std::size_t i = 1; i < ct_digits.size(); ++i) {
        acc = he_add(acc, he_mult_plain(ct_digits[i], pt_digits[i]));
    }
    return acc;
}

std::vector<Ciphertext> encrypt_scaled_digits(const Plaintext& pt, const SecretKey& sk, Rng& rng)
{
    const HeParams& p = pt.ctx->params();
    Plaintext c = to_coefficient(pt);
    std::vector<Ciphertext> out;
    u64 scale = 1;
    for (int i = 0; i < p.l_pt(); ++i) {
        Plaintext scaled = c;
        for (auto& v : scaled.poly) {
            v = mod_mul(v, scale, p.t);
        }
        out.push_back(encrypt(scaled, sk, rng));
        scale = mod_mul(scale, p.w_dcmp % p.t.value(), p.t);
    }
    return out;
}

Ciphertext he_rotate(const Ciphertext& ct, const SlotShift& raw, const GaloisKeySet& keys)
{
    require_same(ct.ctx, keys.ctx, "he_rotate");
    const HeParams& p = ct.ctx->params();
    const SlotShift shift{raw.row_swap, raw.steps % p.row_size()};
    if (!shift.row_swap && shift.steps == 0) {
        return ct;
    }
    auto it = keys.keys.find(shift);
    if (it == keys.keys.end()) {
        throw MissingGaloisKey("no Galois key for shift (" + std::to_string(shift.row_swap) + ", " +
                               std::to_string(shift.steps) + ")");
    }
    if (ct.rep != Representation::evaluation) {
        throw ParamMismatch("he_rotate: ciphertext must be in evaluation form");
    }
    const auto& q = p.q;
    const auto& tab = ct.ctx->q_tables();
    const auto perm = ct.ctx->galois_permutation(galois_element(shift, p.n));

    // Swap
    Ciphertext out{ct.ctx, permute(ct.c0, perm), {}, Representation::evaluation};
    auto c1 = permute(ct.c1, perm);
    // INTT, Decompose, NTT
    ntt_inverse_inplace(c1, tab);
    auto digits = decompose_poly(c1, q, p.a_dcmp);
    // SIMDMult and Compose
    out.c1.assign(p.n, 0);
    for (std::size_t i = 0; i < digits.size(); ++i) {
        ntt_forward_inplace(digits[i], tab);
        mul_acc(out.c0, digits[i], it->second.k0[i], q);
        mul_acc(out.c1, digits[i], it->second.k1[i], q);
    }
    ++op_counts.rotate;
    op_counts.ntt += 1 + digits.size();
    op_counts.scalar_mul += 2 * digits.size() * p.n;
    return out;
}

Ciphertext he_rotate(const Ciphertext& ct, long long column_step, const GaloisKeySet& keys)
{
    return he_rotate(ct, column_shift(column_step, ct.ctx->params().n), keys);
}

std::vector<std::vector<u64>> decompose_poly(const std::vector<u64>& poly, const Modulus& q, u64 base)
{
    if (!is_pow2(base) || base < 2) {
        throw std::invalid_argument("decompose_poly: base must be a power of two >= 2");
    }
    const int b = log2_exact(base);
    const int bits = static_cast<int>(std::bit_width(q.value() - 1));
    const int l = std::max(1, (bits + b - 1) / b);
    std::vector<std::vector<u64>> digits(l, std::vector<u64>(poly.size()));
    for (std::size_t j = 0; j < poly.size(); ++j) {
        u64 x = poly[j];
        for (int i = 0; i < l; ++i) {
            digits[i][j] = x & (base - 1);
            x = b >= 64 ? 0 : x >> b;
        }
    }
    return digits;
}

std::vector<u64> compose_digits(const std::vector<std::vector<u64>>& digits, const Modulus& q, u64 base)
{
    if (digits.empty()) {
        return {};
    }
    std::vector<u64> out(digits.front().size(), 0);
    const u64 step = base % q.value();
    for (std::size_t i = digits.size(); i-- > 0;) {
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] = mod_add(mod_mul(out[j], step, q), digits[i][j] % q.value(), q);
        }
    }
    return out;
}

// ---------------------------------------------------------------- serialization

namespace {

enum class Kind : std::uint32_t { params = 1, ciphertext = 2, secret_key = 3, galois_keys = 4 };

void put_u32(std::ostream& os, std::uint32_t v)
{
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, u64 v)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is)
{
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw SerializationError("truncated input");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
}

u64 get_u64(std::istream& is)
{
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) {
        throw SerializationError("truncated input");
    }
    u64 v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<u64>(b[i]) << (8 * i);
    }
    return v;
}

void put_words(std::ostream& os, const std::vector<u64>& v)
{
    put_u64(os, v.size());
    for (u64 x : v) {
        put_u64(os, x);
    }
}

std::vector<u64> get_words(std::istream& is, std::size_t expected)
{
    u64 len = get_u64(is);
    if (len != expected) {
        throw SerializationError("unexpected vector length " + std::to_string(len));
    }
    std::vector<u64> v(len);
    for (auto& x : v) {
        x = get_u64(is);
    }
    return v;
}

void put_header(std::ostream& os, Kind kind)
{
    os.write("CHHE", 4);
    put_u32(os, kSerialVersion);
    put_u32(os, static_cast<std::uint32_t>(kind));
}

void get_header(std::istream& is, Kind kind)
{
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "CHHE", 4) != 0) {
        throw SerializationError("bad magic");
    }
    if (std::uint32_t v = get_u32(is); v != kSerialVersion) {
        throw SerializationError("unsupported version " + std::to_string(v));
    }
    if (get_u32(is) != static_cast<std::uint32_t>(kind)) {
        throw SerializationError("unexpected object kind");
    }
}

void put_params_body(std::ostream& os, const HeParams& p)
{
    put_words(os, {p.n, p.t.value(), p.q.value(), p.w_dcmp, p.a_dcmp, std::bit_cast<u64>(p.sigma)});
}

HeParams get_params_body(std::istream& is)
{
    auto w = get_words(is, 6);
    HeParams p;
    try {
        p.n = w[0];
        p.t = Modulus(w[1]);
        p.q = Modulus(w[2]);
    } catch (const std::invalid_argument& e) {
        throw SerializationError(std::string("bad modulus: ") + e.what());
    }
    p.w_dcmp = w[3];
    p.a_dcmp = w[4];
    p.sigma = std::bit_cast<double>(w[5]);
    return p;
}

void check_params(std::istream& is, const ContextPtr& ctx)
{
    if (!(get_params_body(is) == ctx->params())) {
        throw ParamMismatch("serialized object uses different parameters");
    }
}

} // namespace

void save_params(std::ostream& os, const HeParams& p)
{
    put_header(os, Kind::params);
    put_params_body(os, p);
}

HeParams load_params(std::istream& is)
{
    get_header(is, Kind::params);
    HeParams p = get_params_body(is);
    p.validate();
    return p;
}

void save_ciphertext(std::ostream& os, const Ciphertext& ct)
{
    put_header(os, Kind::ciphertext);
    put_params_body(os, ct.ctx->params());
    put_u32(os, static_cast<std::uint32_t>(ct.rep));
    put_words(os, ct.c0);
    put_words(os, ct.c1);
}

Ciphertext load_ciphertext(std::istream& is, const ContextPtr& ctx)
{
    get_header(is, Kind::ciphertext);
    check_params(is, ctx);
    auto rep = get_u32(is);
    if (rep > 1) {
        throw SerializationError("bad representation tag");
    }
    const std::size_t n = ctx->params().n;
    Ciphertext ct{ctx, get_words(is, n), get_words(is, n), static_cast<Representation>(rep)};
    for (std::size_t i = 0; i < n; ++i) {
        if (ct.c0[i] >= ctx->params().q.value() || ct.c1[i] >= ctx->params().q.value()) {
            throw SerializationError("ciphertext coefficient out of range");
        }
    }
    return ct;
}

void save_secret_key(std::ostream& os, const SecretKey& sk)
{
    put_header(os, Kind::secret_key);
    put_params_body(os, sk.ctx->params());
    put_words(os, sk.s);
}

SecretKey load_secret_key(std::istream& is, const ContextPtr& ctx)
{
    get_header(is, Kind::secret_key);
    check_params(is, ctx);
    return SecretKey{ctx, get_words(is, ctx->params().n)};
}

void save_galois_keys(std::ostream& os, const GaloisKeySet& gk)
{
    put_header(os, Kind::galois_keys);
    put_params_body(os, gk.ctx->params());
    put_u64(os, gk.keys.size());
    for (const auto& [shift, key] : gk.keys) {
        put_u64(os, shift.row_swap ? 1 : 0);
        put_u64(os, shift.steps);
        put_u64(os, key.k0.size());
        for (std::size_t i = 0; i < key.k0.size(); ++i) {
            put_words(os, key.k0[i]);
            put_words(os, key.k1[i]);
        }
    }
}

GaloisKeySet load_galois_keys(std::istream& is, const ContextPtr& ctx)
{
    get_header(is, Kind::galois_keys);
    check_params(is, ctx);
    const std::size_t n = ctx->params().n;
    GaloisKeySet gk{ctx, {}};
    const u64 count = get_u64(is);
    for (u64 k = 0; k < count; ++k) {
        SlotShift s{get_u64(is) != 0, static_cast<std::size_t>(get_u64(is))};
        const u64 l = get_u64(is);
        if (l != static_cast<u64>(ctx->params().l_ct())) {
            throw SerializationError("key digit count does not match l_ct");
        }
        KeySwitchKey key;
        for (u64 i = 0; i < l; ++i) {
            key.k0.push_back(get_words(is, n));
            key.k1.push_back(get_words(is, n));
        }
        gk.keys.emplace(s, std::move(key));
    }
    return gk;
}

} // namespace cheetah
