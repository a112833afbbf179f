#include "cheetah/modarith.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace cheetah {

namespace {

thread_local u64 butterfly_counter = 0;

inline u64 hi64(u128 x) noexcept { return static_cast<u64>(x >> 64); }

inline u64 shoup_precompute(u64 w, u64 q) noexcept
{
    return static_cast<u64>((static_cast<u128>(w) << 64) / q);
}

// x * w mod q in [0, 2q); three word multiplications.
inline u64 mul_shoup_lazy(u64 x, u64 w, u64 w_shoup, u64 q) noexcept
{
    u64 quot = hi64(static_cast<u128>(x) * w_shoup);
    return x * w - quot * q;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

} // namespace

Modulus::Modulus(u64 value) : value_(value)
{
    if (value < 2 || value >= (u64{1} << 60)) {
        throw std::invalid_argument("modulus must be in [2, 2^60), got " + std::to_string(value));
    }
    // floor(2^128 / value)
    ratio_ = std::has_single_bit(value) ? u128{1} << (128 - std::countr_zero(value)) : ~u128{0} / value;
}

int Modulus::bit_count() const noexcept { return static_cast<int>(std::bit_width(value_)); }

u64 barrett_reduce(u128 x, const Modulus& m) noexcept
{
    const u64 in0 = static_cast<u64>(x);
    const u64 in1 = hi64(x);
    const u64 r0 = static_cast<u64>(m.barrett_factor());
    const u64 r1 = hi64(m.barrett_factor());

    // high 64 bits of the 256-bit product x * ratio, up to a small error
    u64 carry = hi64(static_cast<u128>(in0) * r0);
    u128 t = static_cast<u128>(in0) * r1;
    u128 acc = static_cast<u128>(static_cast<u64>(t)) + carry;
    u64 tmp1 = static_cast<u64>(acc);
    u64 tmp3 = hi64(t) + hi64(acc);
    t = static_cast<u128>(in1) * r0;
    acc = static_cast<u128>(tmp1) + static_cast<u64>(t);
    carry = hi64(t) + hi64(acc);
    const u64 quotient = in1 * r1 + tmp3 + carry;

    u64 r = in0 - quotient * m.value();
    return r >= m.value() ? r - m.value() : r;
}

u64 mod_pow(u64 base, u64 exponent, const Modulus& m) noexcept
{
    u64 result = 1 % m.value();
    base %= m.value();
    while (exponent != 0) {
        if (exponent & 1) {
            result = mod_mul(result, base, m);
        }
        base = mod_mul(base, base, m);
        exponent >>= 1;
    }
    return result;
}

u64 mod_inverse(u64 a, const Modulus& m)
{
    if (a % m.value() == 0) {
        throw std::invalid_argument("zero has no inverse");
    }
    return mod_pow(a, m.value() - 2, m);
}

bool is_prime(u64 n) noexcept
{
    if (n < 2) {
        return false;
    }
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) {
            return n == p;
        }
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    auto powmod = [n](u64 b, u64 e) {
        u128 r = 1;
        u128 x = b % n;
        while (e) {
            if (e & 1) {
                r = r * x % n;
            }
            x = x * x % n;
            e >>= 1;
        }
        return static_cast<u64>(r);
    };
    // This witness set is deterministic for all 64-bit n.
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod(a, d);
        if (x == 1 || x == n - 1) {
            continue;
        }
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = static_cast<u64>(static_cast<u128>(x) * x % n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) {
            return false;
        }
    }
    return true;
}

u64 find_primitive_2n_root(std::size_t n, const Modulus& m)
{
    const u64 q = m.value();
    const u64 two_n = 2 * static_cast<u64>(n);
    if (!is_power_of_two(n) || (q - 1) % two_n != 0) {
        throw NoRootError("modulus " + std::to_string(q) + " is not 1 mod " + std::to_string(two_n));
    }
    const u64 cofactor = (q - 1) / two_n;
    u64 psi = 0;
    for (u64 g = 2; g < q; ++g) {
        u64 cand = mod_pow(g, cofactor, m);
        // order divides 2n (a power of two), so it is exactly 2n iff cand^n = -1
        if (mod_pow(cand, n, m) == q - 1) {
            psi = cand;
            break;
        }
    }
    if (psi == 0) {
        throw NoRootError("no primitive root found");
    }
    // the primitive 2n-th roots are exactly the odd powers of psi
    const u64 psi_sq = mod_mul(psi, psi, m);
    u64 best = psi;
    u64 cur = psi;
    for (u64 k = 1; k < n; ++k) {
        cur = mod_mul(cur, psi_sq, m);
        best = std::min(best, cur);
    }
    return best;
}

std::vector<Modulus> generate_ntt_primes(int bits, std::size_t n, std::size_t count)
{
    if (bits < 2 || bits > 60 || !is_power_of_two(n)) {
        throw std::invalid_argument("generate_ntt_prime: bits must be in [2, 60] and n a power of two");
    }
    const u64 step = 2 * static_cast<u64>(n);
    const u64 upper = (u64{1} << bits) - 1;
    const u64 lower = u64{1} << (bits - 1);
    std::vector<Modulus> out;
    if (upper < step + 1) {
        throw NoPrimeFound("no " + std::to_string(bits) + "-bit prime is 1 mod " + std::to_string(step));
    }
    u64 cand = upper - (upper - 1) % step;
    while (cand >= lower && out.size() < count) {
        if (is_prime(cand)) {
            out.emplace_back(cand);
        }
        if (cand < step) {
            break;
        }
        cand -= step;
    }
    if (out.empty()) {
        throw NoPrimeFound("no " + std::to_string(bits) + "-bit prime is 1 mod " + std::to_string(step));
    }
    return out;
}

Modulus generate_ntt_prime(int bits, std::size_t n) { return generate_ntt_primes(bits, n, 1).front(); }

std::size_t bit_reverse(std::size_t x, int bits) noexcept
{
    std::size_t r = 0;
    for (int i = 0; i < bits; ++i) {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    return r;
}

NttTables::NttTables(std::size_t n, const Modulus& modulus)
    : n_(n), log_n_(std::countr_zero(n)), modulus_(modulus), root_(find_primitive_2n_root(n, modulus)),
      n_inv_(mod_inverse(n % modulus.value(), modulus)), fwd_(n), inv_(n), fwd_shoup_(n), inv_shoup_(n)
{
    const u64 q = modulus_.value();
    const u64 root_inv = mod_inverse(root_, modulus_);
    u64 p = 1;
    u64 pi = 1;
    std::vector<u64> powers(n), inv_powers(n);
    for (std::size_t i = 0; i < n; ++i) {
        powers[i] = p;
        inv_powers[i] = pi;
        p = mod_mul(p, root_, modulus_);
        pi = mod_mul(pi, root_inv, modulus_);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = bit_reverse(i, log_n_);
        fwd_[i] = powers[r];
        inv_[i] = inv_powers[r];
        fwd_shoup_[i] = shoup_precompute(fwd_[i], q);
        inv_shoup_[i] = shoup_precompute(inv_[i], q);
    }
}

void ntt_forward_inplace(std::span<u64> a, const NttTables& tables)
{
    const std::size_t n = tables.n();
    if (a.size() != n) {
        throw LengthMismatchError("ntt_forward: expected length " + std::to_string(n));
    }
    const u64 q = tables.modulus().value();
    const u64 two_q = 2 * q;
    auto roots = tables.forward_roots();
    auto roots_shoup = tables.forward_roots_shoup();

    std::size_t t = n;
    for (std::size_t m = 1; m < n; m <<= 1) {
        t >>= 1;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j1 = 2 * i * t;
            const u64 w = roots[m + i];
            const u64 ws = roots_shoup[m + i];
            for (std::size_t j = j1; j < j1 + t; ++j) {
                u64 u = a[j];
                if (u >= two_q) {
                    u -= two_q;
                }
                const u64 v = mul_shoup_lazy(a[j + t], w, ws, q);
                a[j] = u + v;
                a[j + t] = u + two_q - v;
            }
        }
        butterfly_counter += n / 2;
    }
    for (auto& x : a) {
        if (x >= two_q) {
            x -= two_q;
        }
        if (x >= q) {
            x -= q;
        }
    }
}

void ntt_inverse_inplace(std::span<u64> a, const NttTables& tables)
{
    const std::size_t n = tables.n();
    if (a.size() != n) {
        throw LengthMismatchError("ntt_inverse: expected length " + std::to_string(n));
    }
    const u64 q = tables.modulus().value();
    const u64 two_q = 2 * q;
    auto roots = tables.inverse_roots();
    auto roots_shoup = tables.inverse_roots_shoup();

    std::size_t t = 1;
    for (std::size_t m = n; m > 1; m >>= 1) {
        const std::size_t h = m / 2;
        std::size_t j1 = 0;
        for (std::size_t i = 0; i < h; ++i) {
            const u64 w = roots[h + i];
            const u64 ws = roots_shoup[h + i];
            for (std::size_t j = j1; j < j1 + t; ++j) {
                const u64 u = a[j];
                const u64 v = a[j + t];
                u64 s = u + v;
                if (s >= two_q) {
                    s -= two_q;
                }
                a[j] = s;
                a[j + t] = mul_shoup_lazy(u + two_q - v, w, ws, q);
            }
            j1 += 2 * t;
        }
        t <<= 1;
        butterfly_counter += n / 2;
    }
    const u64 ninv = tables.n_inverse();
    const u64 ninv_shoup = shoup_precompute(ninv, q);
    for (auto& x : a) {
        x = mul_shoup_lazy(x, ninv, ninv_shoup, q);
        if (x >= q) {
            x -= q;
        }
    }
}

std::vector<u64> ntt_forward(std::span<const u64> coeffs, const NttTables& tables)
{
    std::vector<u64> out(coeffs.begin(), coeffs.end());
    ntt_forward_inplace(out, tables);
    return out;
}

std::vector<u64> ntt_inverse(std::span<const u64> evals, const NttTables& tables)
{
    std::vector<u64> out(evals.begin(), evals.end());
    ntt_inverse_inplace(out, tables);
    return out;
}

u64 ntt_butterfly_count() noexcept { return butterfly_counter; }
void reset_ntt_butterfly_count() noexcept { butterfly_counter = 0; }

} // namespace cheetah
