#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cheetah {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

class NoRootError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class NoPrimeFound : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class LengthMismatchError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A word-sized prime modulus with its Barrett constant floor(2^128 / value).
class Modulus {
  public:
    Modulus() = default;
    explicit Modulus(u64 value);

    u64 value() const noexcept { return value_; }
    u128 barrett_factor() const noexcept { return ratio_; }
    int bit_count() const noexcept;

    friend bool operator==(const Modulus& a, const Modulus& b) noexcept { return a.value_ == b.value_; }

  private:
    u64 value_ = 0;
    u128 ratio_ = 0;
};

/// x mod m for x < m^2, using the 128-bit Barrett constant. Five word
/// multiplications per call.
u64 barrett_reduce(u128 x, const Modulus& m) noexcept;

inline u64 mod_mul(u64 a, u64 b, const Modulus& m) noexcept
{
    return barrett_reduce(static_cast<u128>(a) * b, m);
}

inline u64 mod_add(u64 a, u64 b, const Modulus& m) noexcept
{
    u64 s = a + b;
    return s >= m.value() ? s - m.value() : s;
}

inline u64 mod_sub(u64 a, u64 b, const Modulus& m) noexcept
{
    return a >= b ? a - b : a + m.value() - b;
}

inline u64 mod_neg(u64 a, const Modulus& m) noexcept { return a == 0 ? 0 : m.value() - a; }

u64 mod_pow(u64 base, u64 exponent, const Modulus& m) noexcept;

/// Inverse of a modulo a prime m; a must be nonzero.
u64 mod_inverse(u64 a, const Modulus& m);

/// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime(u64 n) noexcept;

/// Smallest element of multiplicative order exactly 2n modulo m.
/// Throws NoRootError unless m = 1 mod 2n.
u64 find_primitive_2n_root(std::size_t n, const Modulus& m);

/// Largest prime p with bit length `bits` and p = 1 mod 2n.
Modulus generate_ntt_prime(int bits, std::size_t n);

/// All primes (largest first, up to `count`) with bit length `bits` and p = 1 mod 2n.
std::vector<Modulus> generate_ntt_primes(int bits, std::size_t n, std::size_t count);

/// Precomputed twiddles for the negacyclic NTT of length n over Z_q.
///
/// Forward transform is Cooley-Tukey on natural-order input producing
/// bit-reversed evaluations a(psi^(2*bitrev(k)+1)); the inverse is
/// Gentleman-Sande on bit-reversed input. Both use Harvey butterflies with
/// Shoup precomputation and lazy reduction.
class NttTables {
  public:
    NttTables(std::size_t n, const Modulus& modulus);

    std::size_t n() const noexcept { return n_; }
    int log_n() const noexcept { return log_n_; }
    const Modulus& modulus() const noexcept { return modulus_; }
    u64 root() const noexcept { return root_; }
    u64 n_inverse() const noexcept { return n_inv_; }

    std::span<const u64> forward_roots() const noexcept { return fwd_; }
    std::span<const u64> inverse_roots() const noexcept { return inv_; }
    std::span<const u64> forward_roots_shoup() const noexcept { return fwd_shoup_; }
    std::span<const u64> inverse_roots_shoup() const noexcept { return inv_shoup_; }

  private:
    std::size_t n_;
    int log_n_;
    Modulus modulus_;
    u64 root_;
    u64 n_inv_;
    std::vector<u64> fwd_;
    std::vector<u64> inv_;
    std::vector<u64> fwd_shoup_;
    std::vector<u64> inv_shoup_;
};

void ntt_forward_inplace(std::span<u64> values, const NttTables& tables);
void ntt_inverse_inplace(std::span<u64> values, const NttTables& tables);

std::vector<u64> ntt_forward(std::span<const u64> coeffs, const NttTables& tables);
std::vector<u64> ntt_inverse(std::span<const u64> evals, const NttTables& tables);

/// Number of butterflies executed by NTT calls on the current thread.
u64 ntt_butterfly_count() noexcept;
void reset_ntt_butterfly_count() noexcept;

std::size_t bit_reverse(std::size_t x, int bits) noexcept;

} // namespace cheetah
