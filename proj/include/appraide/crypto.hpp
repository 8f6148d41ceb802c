#pragma once

// Textbook RSA over GMP integers, SHA-256 digests and a hybrid
// RSA + AES-256-GCM envelope. Everything that draws randomness takes an
// explicit Rng so that simulator runs are reproducible from a seed.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace appraide::crypto {

using BigInt = mpz_class;

class CryptoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an envelope fails authentication (wrong key or tampering).
class IntegrityError : public CryptoError {
public:
    using CryptoError::CryptoError;
};

/// Seeded generator. Wraps mt19937_64 and only ever consumes raw 64-bit
/// outputs, so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    std::string bytes(std::size_t count);
    BigInt random_bits(unsigned bits);
    /// Uniform in [0, bound). bound must be positive.
    BigInt below(const BigInt& bound);
    /// Uniform in [0, bound) for small integer bounds.
    std::uint64_t below_u64(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

struct PublicKey {
    BigInt n;
    BigInt e;

    bool operator==(const PublicKey& other) const { return n == other.n && e == other.e; }
};

struct PrivateKey {
    BigInt n;
    BigInt d;
};

struct KeyPair {
    BigInt modulus_n;
    BigInt public_e;
    BigInt private_d;
    // Factors are kept when known so validity can be checked exactly.
    std::optional<BigInt> prime_p;
    std::optional<BigInt> prime_q;

    PublicKey public_key() const { return {modulus_n, public_e}; }
    PrivateKey private_key() const { return {modulus_n, private_d}; }
};

/// Checks n = p*q for distinct primes and e*d = 1 mod (p-1)(q-1). When the
/// factors are not stored, n is factored by trial division (toy sizes only);
/// moduli too large to factor fall back to a sampled roundtrip check.
bool is_valid_keypair(const KeyPair& keys);

KeyPair generate_keypair(unsigned bit_length, Rng& rng);
KeyPair generate_keypair(unsigned bit_length, std::uint64_t rng_seed);

inline constexpr std::size_t kDigestSize = 32;

struct Digest {
    std::array<std::uint8_t, kDigestSize> bytes{};

    std::string hex() const;
    BigInt to_integer() const;
    bool operator==(const Digest&) const = default;
};

/// SHA-256.
Digest hash(std::string_view data);

struct Signature {
    BigInt value;
    bool operator==(const Signature& other) const { return value == other.value; }
};

/// Hash-then-sign: S = (H(m) mod n)^d mod n.
Signature sign(const PrivateKey& key, std::string_view message);
/// Never throws; returns false on any mismatch or out-of-range value.
bool verify(const PublicKey& key, std::string_view message, const Signature& sig);

struct Envelope {
    BigInt wrapped_key;
    std::string body;   // AES-256-GCM ciphertext followed by the 16-byte tag
    std::string nonce;  // 12 bytes

    bool operator==(const Envelope& other) const {
        return wrapped_key == other.wrapped_key && body == other.body && nonce == other.nonce;
    }
};

Envelope encrypt_envelope(const PublicKey& key, std::string_view plaintext, Rng& rng);
/// Throws IntegrityError if the envelope was not produced for this key or
/// was modified.
std::string decrypt_envelope(const PrivateKey& key, const Envelope& envelope);

// Codecs used by every file and wire format.
std::string to_hex(const BigInt& value);
BigInt from_hex(std::string_view text);
std::string bytes_to_hex(std::string_view bytes);
std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace appraide::crypto
