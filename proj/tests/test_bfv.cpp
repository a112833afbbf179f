#include "cheetah/bfv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace cheetah;

namespace {

std::vector<u64> random_slots(std::size_t n, u64 t, Rng& rng)
{
    std::uniform_int_distribution<u64> dist(0, t - 1);
    std::vector<u64> v(n);
    for (auto& x : v) {
        x = dist(rng);
    }
    return v;
}

// slot translation on the 2 x n/2 torus: new[r][c] = old[r ^ b][c + k]
std::vector<u64> shift_oracle(const std::vector<u64>& a, bool row_swap, std::size_t k)
{
    const std::size_t half = a.size() / 2;
    std::vector<u64> out(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        std::size_t r = s / half;
        std::size_t c = s % half;
        out[s] = a[((r ^ (row_swap ? 1 : 0)) * half) + (c + k) % half];
    }
    return out;
}

class BfvTest : public ::testing::Test {
  protected:
    // n=2048, 19-bit t, 60-bit q, no plaintext decomposition, A = 2^20
    void SetUp() override
    {
        ctx = BfvContext::create(HeParams::from_bits(2048, 19, 60, 19, 20));
        auto keys = keygen(ctx, std::vector<SlotShift>{{false, 1}, {false, 5}, {false, 1019}, {true, 0}, {true, 3}}, 42);
        sk = keys.first;
        gk = keys.second;
    }
    u64 t() const { return ctx->params().t.value(); }
    std::size_t n() const { return ctx->params().n; }

    ContextPtr ctx;
    SecretKey sk;
    GaloisKeySet gk;
    Rng rng{7};
};

} // namespace

TEST(HeParamsTest, DerivedDigitCounts)
{
    auto p = HeParams::from_bits(2048, 19, 60, 10, 22);
    EXPECT_EQ(p.l_pt(), 2);
    EXPECT_EQ(p.l_ct(), 3);
    EXPECT_DOUBLE_EQ(p.noise_bound(), 6 * 3.2);
    auto p1 = HeParams::from_bits(2048, 19, 60, 19, 60);
    EXPECT_EQ(p1.l_pt(), 1);
    EXPECT_EQ(p1.l_ct(), 1);
}

TEST(HeParamsTest, RejectsBadParams)
{
    auto p = HeParams::from_bits(1024, 18, 50, 4, 10);
    auto bad = p;
    bad.n = 1000;
    EXPECT_THROW(bad.validate(), InvalidParams);
    bad = p;
    bad.q = p.t;
    EXPECT_THROW(bad.validate(), InvalidParams);
    bad = p;
    bad.w_dcmp = 3;
    EXPECT_THROW(bad.validate(), InvalidParams);
    bad = p;
    bad.t = Modulus(65539); // prime, but 65539 != 1 mod 2048
    EXPECT_THROW(bad.validate(), InvalidParams);
}

TEST_F(BfvTest, KeygenDeterministic)
{
    auto [sk2, gk2] = keygen(ctx, std::vector<SlotShift>{{false, 1}, {false, 5}, {false, 1019}, {true, 0}, {true, 3}}, 42);
    EXPECT_EQ(sk2.s, sk.s);
    ASSERT_EQ(gk2.size(), gk.size());
    for (const auto& [shift, key] : gk.keys) {
        EXPECT_EQ(gk2.keys.at(shift).k0, key.k0);
        EXPECT_EQ(gk2.keys.at(shift).k1, key.k1);
    }
    auto [sk3, gk3] = keygen(ctx, std::vector<SlotShift>{}, 43);
    EXPECT_EQ(gk3.size(), 0u);
    EXPECT_NE(sk3.s, sk.s);
}

TEST_F(BfvTest, SecretKeyIsTernary)
{
    auto coeffs = ntt_inverse(sk.s, ctx->q_tables());
    const u64 q = ctx->params().q.value();
    for (u64 c : coeffs) {
        EXPECT_TRUE(c == 0 || c == 1 || c == q - 1);
    }
}

TEST_F(BfvTest, EncodeDecodeRoundTrip)
{
    for (int i = 0; i < 100; ++i) {
        auto v = random_slots(n(), t(), rng);
        ASSERT_EQ(decode(encode(v, ctx)), v);
    }
    std::vector<u64> short_v{1, 2, 3};
    auto d = decode(encode(short_v, ctx));
    EXPECT_EQ(d[2], 3u);
    EXPECT_EQ(d[3], 0u);
    EXPECT_THROW(encode({t()}, ctx), ValueOutOfRange);
    EXPECT_THROW(encode(std::vector<u64>(n() + 1, 0), ctx), ValueOutOfRange);
}

TEST_F(BfvTest, EncodeZeroIsZeroPlaintext)
{
    auto pt = encode(std::vector<u64>(n(), 0), ctx);
    for (u64 c : pt.poly) {
        EXPECT_EQ(c, 0u);
    }
}

TEST_F(BfvTest, SignedEncoding)
{
    std::vector<std::int64_t> v{-1, 5, -static_cast<std::int64_t>(t() / 2), 0};
    auto d = decode_signed(encode_signed(v, ctx));
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_EQ(d[i], v[i]);
    }
    EXPECT_EQ(decode(encode_signed({-1}, ctx))[0], t() - 1);
}

TEST_F(BfvTest, EncryptDecryptRoundTrip)
{
    for (int i = 0; i < 20; ++i) {
        auto v = random_slots(n(), t(), rng);
        auto ct = encrypt(encode(v, ctx), sk, rng);
        ASSERT_EQ(decode(decrypt(ct, sk)), v);
    }
}

TEST_F(BfvTest, FreshEncryptionsDifferButDecryptEqual)
{
    auto pt = encode(random_slots(n(), t(), rng), ctx);
    auto a = encrypt(pt, sk, rng);
    auto b = encrypt(pt, sk, rng);
    EXPECT_NE(a.c0, b.c0);
    EXPECT_EQ(decrypt(a, sk).poly, decrypt(b, sk).poly);
}

TEST_F(BfvTest, FreshNoiseWithinBound)
{
    const double b = ctx->params().noise_bound();
    const double v0 = 2.0 * static_cast<double>(n()) * b * b;
    const double q = static_cast<double>(ctx->params().q.value());
    for (int i = 0; i < 50; ++i) {
        auto pt = encode(random_slots(n(), t(), rng), ctx);
        auto r = noise_report(encrypt(pt, sk, rng), sk, pt);
        EXPECT_FALSE(r.failed);
        EXPECT_LE(r.noise_inf, v0);
        // fresh noise is a single clamped sample
        EXPECT_LE(r.noise_inf, std::floor(b));
        EXPECT_NEAR(r.budget_bits, std::log2(q / (2.0 * t())) - std::log2(r.noise_inf + 1), 1e-9);
        EXPECT_GT(r.budget_bits, 0.0);
    }
}

TEST_F(BfvTest, AddMatchesPlaintextOracle)
{
    for (int i = 0; i < 20; ++i) {
        auto a = random_slots(n(), t(), rng);
        auto b = random_slots(n(), t(), rng);
        auto ct = he_add(encrypt(encode(a, ctx), sk, rng), encrypt(encode(b, ctx), sk, rng));
        auto d = decode(decrypt(ct, sk));
        for (std::size_t s = 0; s < n(); ++s) {
            ASSERT_EQ(d[s], (a[s] + b[s]) % t());
        }
    }
}

TEST_F(BfvTest, AddZeroAndNoise)
{
    auto v = random_slots(n(), t(), rng);
    auto pt = encode(v, ctx);
    auto ct = encrypt(pt, sk, rng);
    auto zero = encrypt(encode({}, ctx), sk, rng);
    auto sum = he_add(ct, zero);
    EXPECT_EQ(decode(decrypt(sum, sk)), v);
    auto before = noise_report(ct, sk, pt);
    auto after = noise_report(sum, sk, pt);
    EXPECT_LE(before.budget_bits - after.budget_bits, 1.0);
    EXPECT_LE(after.noise_inf, before.noise_inf + noise_report(zero, sk).noise_inf);
}

TEST_F(BfvTest, AddAssociativeDecryptions)
{
    auto a = encrypt(encode(random_slots(n(), t(), rng), ctx), sk, rng);
    auto b = encrypt(encode(random_slots(n(), t(), rng), ctx), sk, rng);
    auto c = encrypt(encode(random_slots(n(), t(), rng), ctx), sk, rng);
    EXPECT_EQ(decrypt(he_add(he_add(a, b), c), sk).poly, decrypt(he_add(a, he_add(b, c)), sk).poly);
}

TEST_F(BfvTest, MultPlainIdentityAndOracle)
{
    auto a = random_slots(n(), t(), rng);
    auto ct = encrypt(encode(a, ctx), sk, rng);
    auto ones = encode(std::vector<u64>(n(), 1), ctx);
    EXPECT_EQ(decode(decrypt(he_mult_plain(ct, ones), sk)), a);

    for (int i = 0; i < 10; ++i) {
        auto x = random_slots(n(), t(), rng);
        auto w = random_slots(n(), t(), rng);
        auto d = decode(decrypt(he_mult_plain(encrypt(encode(x, ctx), sk, rng), encode(w, ctx)), sk));
        for (std::size_t s = 0; s < n(); ++s) {
            ASSERT_EQ(d[s], static_cast<u64>(static_cast<u128>(x[s]) * w[s] % t()));
        }
    }
}

TEST_F(BfvTest, MultPlainNoiseGrowthWithinModel)
{
    const auto& p = ctx->params();
    ASSERT_EQ(p.l_pt(), 1);
    const double eta_m = static_cast<double>(n()) * p.l_pt() * static_cast<double>(p.w_dcmp) / 2.0;
    for (int i = 0; i < 10; ++i) {
        auto x = encode(random_slots(n(), t(), rng), ctx);
        auto w = encode(random_slots(n(), t(), rng), ctx);
        auto ct = encrypt(x, sk, rng);
        auto before = noise_report(ct, sk, x);
        auto prod = he_mult_plain(ct, w);
        auto expected = encode(decode(decrypt(prod, sk)), ctx);
        auto after = noise_report(prod, sk, expected);
        EXPECT_LE(after.noise_inf, eta_m * (before.noise_inf + 1));
        EXPECT_LE(after.budget_bits, before.budget_bits);
    }
}

TEST_F(BfvTest, MultPlainConsumesLogOfScalar)
{
    // constant slot vector c is the constant polynomial c, so the noise scales by c
    auto x = encode(random_slots(n(), t(), rng), ctx);
    auto ct = encrypt(x, sk, rng);
    auto fresh = noise_report(ct, sk, x);
    for (int k = 2; k <= 16; k += 2) {
        const u64 c = u64{1} << k;
        auto prod = he_mult_plain(ct, encode(std::vector<u64>(n(), c), ctx));
        auto r = noise_report(prod, sk);
        EXPECT_NEAR(fresh.budget_bits - r.budget_bits, k, 1.0) << "k=" << k;
    }
}

TEST_F(BfvTest, DecomposedSingleDigitEqualsPlainMult)
{
    auto x = encode(random_slots(n(), t(), rng), ctx);
    auto w = encode(random_slots(n(), t(), rng), ctx);
    auto ct = encrypt(x, sk, rng);
    auto digits = decompose_plaintext(w);
    ASSERT_EQ(digits.size(), 1u);
    auto a = he_mult_plain_decomposed({ct}, digits);
    auto b = he_mult_plain(ct, w);
    EXPECT_EQ(a.c0, b.c0);
    EXPECT_EQ(a.c1, b.c1);
    EXPECT_THROW(he_mult_plain_decomposed({ct, ct}, digits), DigitCountMismatch);
}

TEST(BfvDecomposed, TwoDigitProductAndLowerNoise)
{
    Rng rng(99);
    auto ctx2 = BfvContext::create(HeParams::from_bits(2048, 19, 60, 10, 20));
    auto ctx1 = BfvContext::create(HeParams::from_bits(2048, 19, 60, 19, 20));
    ASSERT_EQ(ctx2->params().l_pt(), 2);
    const u64 t = ctx2->params().t.value();
    ASSERT_EQ(t, ctx1->params().t.value());
    auto sk2 = keygen(ctx2, std::vector<SlotShift>{}, 5).first;
    auto sk1 = SecretKey{ctx1, sk2.s};

    int wins = 0;
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<u64> big(t / 2 - 1000, t / 2);
        std::vector<u64> x(2048), w(2048);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng() % t;
            w[i] = big(rng);
        }
        auto xd = encrypt_scaled_digits(encode(x, ctx2), sk2, rng);
        auto prod2 = he_mult_plain_decomposed(xd, decompose_plaintext(encode(w, ctx2)));
        auto d = decode(decrypt(prod2, sk2));
        for (std::size_t s = 0; s < x.size(); ++s) {
            ASSERT_EQ(d[s], static_cast<u64>(static_cast<u128>(x[s]) * w[s] % t));
        }
        auto prod1 = he_mult_plain(encrypt(encode(x, ctx1), sk1, rng), encode(w, ctx1));
        auto expected1 = encode(d, ctx1);
        auto expected2 = encode(d, ctx2);
        if (noise_report(prod2, sk2, expected2).noise_inf < noise_report(prod1, sk1, expected1).noise_inf) {
            ++wins;
        }
    }
    EXPECT_EQ(wins, 10);
}

TEST_F(BfvTest, RotateIdentityAndOracle)
{
    auto v = random_slots(n(), t(), rng);
    auto ct = encrypt(encode(v, ctx), sk, rng);
    EXPECT_EQ(decode(decrypt(he_rotate(ct, 0, gk), sk)), v);
    for (const auto& [shift, key] : gk.keys) {
        auto d = decode(decrypt(he_rotate(ct, shift, gk), sk));
        EXPECT_EQ(d, shift_oracle(v, shift.row_swap, shift.steps)) << shift.row_swap << "," << shift.steps;
    }
    // negative steps wrap around the row
    EXPECT_EQ(decode(decrypt(he_rotate(ct, -5, gk), sk)), shift_oracle(v, false, n() / 2 - 5));
}

TEST_F(BfvTest, RotateRoundTrip)
{
    auto v = random_slots(n(), t(), rng);
    auto ct = encrypt(encode(v, ctx), sk, rng);
    auto r = he_rotate(he_rotate(ct, 5, gk), static_cast<long long>(n() / 2 - 5), gk);
    EXPECT_EQ(decode(decrypt(r, sk)), v);
    auto rr = he_rotate(he_rotate(ct, SlotShift{true, 0}, gk), SlotShift{true, 0}, gk);
    EXPECT_EQ(decode(decrypt(rr, sk)), v);
}

TEST_F(BfvTest, RotateMissingKey) { EXPECT_THROW(he_rotate(encrypt(encode({1}, ctx), sk, rng), 2, gk), MissingGaloisKey); }

TEST_F(BfvTest, RotateOpCounts)
{
    auto ct = encrypt(encode({1, 2}, ctx), sk, rng);
    reset_he_op_counts();
    reset_ntt_butterfly_count();
    he_rotate(ct, 1, gk);
    const auto c = he_op_counts();
    const u64 l = static_cast<u64>(ctx->params().l_ct());
    EXPECT_EQ(c.rotate, 1u);
    EXPECT_EQ(c.ntt, l + 1);
    EXPECT_EQ(c.scalar_mul, 2 * l * n());
    EXPECT_EQ(ntt_butterfly_count(), (l + 1) * n() * 11 / 2);
}

TEST(BfvRotateNoise, AdditiveAcrossBudgets)
{
    // log2(q/2t) ~ 45 bits, so inputs with 10..30 bit budgets carry noise above the key-switch term
    auto ctx = BfvContext::create(HeParams::from_bits(2048, 14, 60, 14, 2));
    auto [sk, gk] = keygen(ctx, std::vector<long long>{1}, 3);
    Rng rng(17);
    const u64 t = ctx->params().t.value();
    std::vector<u64> v(2048);
    for (auto& x : v) {
        x = rng() % t;
    }
    auto ct = encrypt(encode(v, ctx), sk, rng);
    auto scalar = encode(std::vector<u64>(2048, 1u << 10), ctx);

    std::vector<double> drops;
    Ciphertext cur = ct;
    for (int level = 0; level < 4; ++level) {
        auto before = noise_report(cur, sk);
        if (before.budget_bits >= 10.0 && before.budget_bits <= 30.0) {
            auto after = noise_report(he_rotate(cur, 1, gk), sk);
            EXPECT_LE(after.budget_bits, before.budget_bits);
            drops.push_back(before.budget_bits - after.budget_bits);
        }
        cur = he_mult_plain(cur, scalar);
    }
    ASSERT_GE(drops.size(), 2u);
    const auto [lo, hi] = std::minmax_element(drops.begin(), drops.end());
    EXPECT_LT(*hi - *lo, 1.0);
}

TEST_F(BfvTest, ForcedOverflowDetected)
{
    auto x = random_slots(n(), t(), rng);
    auto ct = encrypt(encode(x, ctx), sk, rng);
    std::vector<u64> expected = x;
    bool failed = false;
    for (int i = 0; i < 20 && !failed; ++i) {
        auto w = random_slots(n(), t(), rng);
        ct = he_mult_plain(ct, encode(w, ctx));
        for (std::size_t s = 0; s < n(); ++s) {
            expected[s] = static_cast<u64>(static_cast<u128>(expected[s]) * w[s] % t());
        }
        auto r = noise_report(ct, sk, encode(expected, ctx));
        if (r.failed) {
            failed = true;
            EXPECT_NE(decode(decrypt(ct, sk)), expected);
        } else {
            ASSERT_EQ(decode(decrypt(ct, sk)), expected);
        }
    }
    EXPECT_TRUE(failed);
}

TEST_F(BfvTest, BudgetNeverIncreases)
{
    auto pt = encode(random_slots(n(), t(), rng), ctx);
    auto ct = encrypt(pt, sk, rng);
    double b = noise_report(ct, sk).budget_bits;
    for (int i = 0; i < 6; ++i) {
        Ciphertext next = i % 3 == 0   ? he_rotate(ct, 1, gk)
                          : i % 3 == 1 ? he_add(ct, ct)
                                       : he_mult_plain(ct, encode(std::vector<u64>(n(), 3), ctx));
        double nb = noise_report(next, sk).budget_bits;
        EXPECT_LE(nb, b + 1e-9);
        b = nb;
        ct = next;
    }
}

TEST_F(BfvTest, RepresentationRoundTripKeepsNoise)
{
    auto pt = encode(random_slots(n(), t(), rng), ctx);
    auto ct = encrypt(pt, sk, rng);
    auto coeff = to_coefficient(ct);
    EXPECT_EQ(coeff.rep, Representation::coefficient);
    auto back = to_evaluation(coeff);
    EXPECT_EQ(back.c0, ct.c0);
    EXPECT_EQ(back.c1, ct.c1);
    EXPECT_DOUBLE_EQ(noise_report(coeff, sk).budget_bits, noise_report(ct, sk).budget_bits);
    EXPECT_THROW(he_add(ct, coeff), ParamMismatch);
}

TEST_F(BfvTest, MismatchedContextsRejected)
{
    auto other = BfvContext::create(HeParams::from_bits(2048, 18, 60, 18, 20));
    auto sk2 = keygen(other, std::vector<SlotShift>{}, 1).first;
    auto a = encrypt(encode({1}, ctx), sk, rng);
    auto b = encrypt(encode({1}, other), sk2, rng);
    EXPECT_THROW(he_add(a, b), ParamMismatch);
}

TEST(DecomposePoly, RoundTripAndDigitRange)
{
    Rng rng(1);
    Modulus q = generate_ntt_prime(60, 2048);
    std::vector<u64> p(2048);
    for (auto& x : p) {
        x = rng() % q.value();
    }
    auto d = decompose_poly(p, q, u64{1} << 22);
    ASSERT_EQ(d.size(), 3u);
    for (const auto& digit : d) {
        for (u64 c : digit) {
            ASSERT_LT(c, u64{1} << 22);
        }
    }
    EXPECT_EQ(compose_digits(d, q, u64{1} << 22), p);

    auto single = decompose_poly(p, q, u64{1} << 60);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0], p);

    auto zero = decompose_poly(std::vector<u64>(16, 0), q, 1024);
    for (const auto& digit : zero) {
        for (u64 c : digit) {
            EXPECT_EQ(c, 0u);
        }
    }
}

TEST_F(BfvTest, SerializationRoundTrip)
{
    std::stringstream ps;
    save_params(ps, ctx->params());
    EXPECT_EQ(load_params(ps), ctx->params());

    auto ct = encrypt(encode(random_slots(n(), t(), rng), ctx), sk, rng);
    std::stringstream cs;
    save_ciphertext(cs, ct);
    auto ct2 = load_ciphertext(cs, ctx);
    EXPECT_EQ(ct2.c0, ct.c0);
    EXPECT_EQ(ct2.c1, ct.c1);

    std::stringstream ks;
    save_secret_key(ks, sk);
    save_galois_keys(ks, gk);
    auto sk2 = load_secret_key(ks, ctx);
    auto gk2 = load_galois_keys(ks, ctx);
    EXPECT_EQ(sk2.s, sk.s);
    EXPECT_EQ(decode(decrypt(he_rotate(ct2, 1, gk2), sk2)), decode(decrypt(he_rotate(ct, 1, gk), sk)));

    std::stringstream junk("not a container");
    EXPECT_THROW(load_params(junk), SerializationError);
    std::stringstream wrong;
    save_params(wrong, ctx->params());
    EXPECT_THROW(load_ciphertext(wrong, ctx), SerializationError);
}
