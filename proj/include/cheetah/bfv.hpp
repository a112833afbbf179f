#pragma once

#include "cheetah/modarith.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace cheetah {

using Rng = std::mt19937_64;

class InvalidParams : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};
class ParamMismatch : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};
class ValueOutOfRange : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};
class MissingGaloisKey : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};
class DigitCountMismatch : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};
class SerializationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultSigma = 3.2;

struct HeParams {
    std::size_t n = 0;
    Modulus t;
    Modulus q;
    u64 w_dcmp = 0;
    u64 a_dcmp = 0;
    double sigma = kDefaultSigma;

    /// Builds params from bit sizes, picking the largest NTT-friendly primes.
    static HeParams from_bits(std::size_t n, int t_bits, int q_bits, int w_bits, int a_bits,
                              double sigma = kDefaultSigma);

    /// Number of base-W digits needed for values in [0, t).
    int l_pt() const;
    /// Number of base-A digits needed for values in [0, q).
    int l_ct() const;
    /// Clamp bound on encryption noise samples, 6 sigma.
    double noise_bound() const { return 6.0 * sigma; }
    std::size_t slot_count() const { return n; }
    /// Slots per row of the 2 x n/2 slot matrix.
    std::size_t row_size() const { return n / 2; }

    /// Throws InvalidParams if any invariant fails.
    void validate() const;

    friend bool operator==(const HeParams&, const HeParams&) = default;
};

/// Shared precomputation for one parameter set.
class BfvContext {
  public:
    static std::shared_ptr<const BfvContext> create(const HeParams& params);

    const HeParams& params() const noexcept { return params_; }
    const NttTables& q_tables() const noexcept { return q_tables_; }
    const NttTables& t_tables() const noexcept { return t_tables_; }

    /// NTT position (bit-reversed evaluation index) holding slot s.
    std::size_t slot_position(std::size_t slot) const { return slot_pos_[slot]; }

    /// perm with new[k] = old[perm[k]] applying x -> x^galois_elt in evaluation form.
    std::vector<std::size_t> galois_permutation(u64 galois_elt) const;

    explicit BfvContext(const HeParams& params);

  private:
    HeParams params_;
    NttTables q_tables_;
    NttTables t_tables_;
    std::vector<std::size_t> slot_pos_;
};

using ContextPtr = std::shared_ptr<const BfvContext>;

enum class Representation : std::uint8_t { coefficient = 0, evaluation = 1 };

struct Plaintext {
    ContextPtr ctx;
    std::vector<u64> poly; // mod t
    Representation rep = Representation::coefficient;
};

struct Ciphertext {
    ContextPtr ctx;
    std::vector<u64> c0; // mod q
    std::vector<u64> c1;
    Representation rep = Representation::evaluation;
};

/// A plaintext lifted to Z_q with centered coefficients and moved to
/// evaluation form, ready for pointwise products.
struct PreparedPlaintext {
    ContextPtr ctx;
    std::vector<u64> evals;
};

struct SecretKey {
    ContextPtr ctx;
    std::vector<u64> s; // evaluation form mod q
};

/// Translation of the 2 x n/2 slot torus: new[r][c] = old[r ^ row_swap][c + steps].
struct SlotShift {
    bool row_swap = false;
    std::size_t steps = 0;

    friend auto operator<=>(const SlotShift&, const SlotShift&) = default;
};

/// (-1)^row_swap * 3^steps mod 2n.
u64 galois_element(const SlotShift& shift, std::size_t n);

/// Column rotation by k (negative allowed), reduced mod n/2.
SlotShift column_shift(long long k, std::size_t n);

struct KeySwitchKey {
    std::vector<std::vector<u64>> k0; // l_ct polys, evaluation form
    std::vector<std::vector<u64>> k1;
};

struct GaloisKeySet {
    ContextPtr ctx;
    std::map<SlotShift, KeySwitchKey> keys;

    bool contains(const SlotShift& s) const { return keys.count(s) != 0; }
    std::size_t size() const { return keys.size(); }
};

struct NoiseReport {
    double budget_bits = 0.0;
    double noise_inf = 0.0; // ||v||_inf of the invariant noise
    bool failed = false;
};

/// Per-thread counts of executed homomorphic operators.
struct HeOpCounts {
    u64 add = 0;
    u64 mult = 0;
    u64 rotate = 0;
    u64 ntt = 0;        // forward + inverse transforms inside operators
    u64 scalar_mul = 0; // pointwise modular multiplications inside operators

    friend bool operator==(const HeOpCounts&, const HeOpCounts&) = default;
};
HeOpCounts he_op_counts() noexcept;
void reset_he_op_counts() noexcept;

// keys

std::pair<SecretKey, GaloisKeySet> keygen(const ContextPtr& ctx, const std::vector<SlotShift>& shifts,
                                          std::uint64_t seed);
std::pair<SecretKey, GaloisKeySet> keygen(const ContextPtr& ctx, const std::vector<long long>& column_steps,
                                          std::uint64_t seed);

// encoding: slot i lives at (row i / (n/2), column i % (n/2))

Plaintext encode(const std::vector<u64>& values, const ContextPtr& ctx);
/// Signed entries, mapped to [0, t).
Plaintext encode_signed(const std::vector<std::int64_t>& values, const ContextPtr& ctx);
std::vector<u64> decode(const Plaintext& pt);
/// Centered representatives in (-t/2, t/2].
std::vector<std::int64_t> decode_signed(const Plaintext& pt);

Plaintext to_evaluation(const Plaintext& pt);
Plaintext to_coefficient(const Plaintext& pt);

// encryption

Ciphertext encrypt(const Plaintext& pt, const SecretKey& sk, Rng& rng);
Plaintext decrypt(const Ciphertext& ct, const SecretKey& sk);
/// Budget against the decrypted plaintext, or against `expected` if given
/// (which also catches wrap-around after overflow).
NoiseReport noise_report(const Ciphertext& ct, const SecretKey& sk,
                         const std::optional<Plaintext>& expected = std::nullopt);

Ciphertext to_evaluation(const Ciphertext& ct);
Ciphertext to_coefficient(const Ciphertext& ct);

// operators

Ciphertext he_add(const Ciphertext& a, const Ciphertext& b);
PreparedPlaintext prepare_plain(const Plaintext& pt);
Ciphertext he_mult_plain(const Ciphertext& ct, const Plaintext& pt);
Ciphertext he_mult_plain(const Ciphertext& ct, const PreparedPlaintext& pt);

/// Balanced base-W digits of the centered coefficients of pt; l_pt plaintexts.
std::vector<Plaintext> decompose_plaintext(const Plaintext& pt);
/// ct_digits[i] must encrypt W^i * x.
Ciphertext he_mult_plain_decomposed(const std::vector<Ciphertext>& ct_digits, const std::vector<Plaintext>& pt_digits);
/// Client-side helper: encryptions of W^i * x, i < l_pt.
std::vector<Ciphertext> encrypt_scaled_digits(const Plaintext& pt, const SecretKey& sk, Rng& rng);

Ciphertext he_rotate(const Ciphertext& ct, const SlotShift& shift, const GaloisKeySet& keys);
Ciphertext he_rotate(const Ciphertext& ct, long long column_step, const GaloisKeySet& keys);

/// Unsigned base-`base` digits, each in [0, base); count = ceil(bits(q-1) / log2(base)).
std::vector<std::vector<u64>> decompose_poly(const std::vector<u64>& poly, const Modulus& q, u64 base);
std::vector<u64> compose_digits(const std::vector<std::vector<u64>>& digits, const Modulus& q, u64 base);

// binary container: magic "CHHE", u32 version, u32 kind, then length-prefixed little-endian u64 words

inline constexpr std::uint32_t kSerialVersion = 1;

void save_params(std::ostream& os, const HeParams& p);
HeParams load_params(std::istream& is);
void save_ciphertext(std::ostream& os, const Ciphertext& ct);
Ciphertext load_ciphertext(std::istream& is, const ContextPtr& ctx);
void save_secret_key(std::ostream& os, const SecretKey& sk);
SecretKey load_secret_key(std::istream& is, const ContextPtr& ctx);
void save_galois_keys(std::ostream& os, const GaloisKeySet& gk);
GaloisKeySet load_galois_keys(std::istream& is, const ContextPtr& ctx);

} // namespace cheetah
