#include "appraide/crypto.hpp"

#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace appraide::crypto {

namespace {

constexpr std::size_t kNonceSize = 12;
constexpr std::size_t kTagSize = 16;
constexpr std::string_view kEnvelopeKeyLabel = "appraide/envelope/v1|";

struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus) {
    BigInt result;
    mpz_powm(result.get_mpz_t(), base.get_mpz_t(), exponent.get_mpz_t(), modulus.get_mpz_t());
    return result;
}

BigInt random_prime(unsigned bits, Rng& rng) {
    for (;;) {
        BigInt candidate = rng.random_bits(bits);
        mpz_setbit(candidate.get_mpz_t(), bits - 1);
        mpz_setbit(candidate.get_mpz_t(), bits - 2);
        mpz_setbit(candidate.get_mpz_t(), 0);
        BigInt prime;
        mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
        if (mpz_sizeinbase(prime.get_mpz_t(), 2) == bits) {
            return prime;
        }
    }
}

BigInt gcd(const BigInt& a, const BigInt& b) {
    BigInt g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

std::array<std::uint8_t, 32> envelope_key(const BigInt& session_key) {
    std::string material(kEnvelopeKeyLabel);
    material += to_hex(session_key);
    return hash(material).bytes;
}

}  // namespace

std::string Rng::bytes(std::size_t count) {
    std::string out;
    out.reserve(count);
    while (out.size() < count) {
        std::uint64_t word = next_u64();
        for (int i = 0; i < 8 && out.size() < count; ++i) {
            out.push_back(static_cast<char>(word & 0xff));
            word >>= 8;
        }
    }
    return out;
}

BigInt Rng::random_bits(unsigned bits) {
    BigInt value = 0;
    unsigned produced = 0;
    while (produced < bits) {
        BigInt word;
        const std::uint64_t raw = next_u64();
        mpz_import(word.get_mpz_t(), 1, 1, sizeof(raw), 0, 0, &raw);
        value = (value << 64) | word;
        produced += 64;
    }
    if (produced > bits) {
        value >>= (produced - bits);
    }
    return value;
}

BigInt Rng::below(const BigInt& bound) {
    if (bound <= 0) {
        throw std::invalid_argument("Rng::below: bound must be positive");
    }
    const auto bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
    for (;;) {
        BigInt candidate = random_bits(bits);
        if (candidate < bound) {
            return candidate;
        }
    }
}

std::uint64_t Rng::below_u64(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("Rng::below_u64: bound must be positive");
    }
    std::uint64_t mask = bound - 1;
    for (int shift = 1; shift < 64; shift <<= 1) {
        mask |= mask >> shift;
    }
    for (;;) {
        const std::uint64_t candidate = next_u64() & mask;
        if (candidate < bound) {
            return candidate;
        }
    }
}

KeyPair generate_keypair(unsigned bit_length, Rng& rng) {
    if (bit_length < 16) {
        throw std::invalid_argument("generate_keypair: bit_length must be at least 16");
    }
    const unsigned p_bits = (bit_length + 1) / 2;
    const unsigned q_bits = bit_length - p_bits;
    for (;;) {
        BigInt p = random_prime(p_bits, rng);
        BigInt q = random_prime(q_bits, rng);
        if (p == q) {
            continue;
        }
        const BigInt phi = (p - 1) * (q - 1);
        BigInt e = 65537;
        if (e >= phi || gcd(e, phi) != 1) {
            e = 3;
            while (gcd(e, phi) != 1) {
                e += 2;
            }
        }
        if (e >= phi) {
            continue;
        }
        BigInt d;
        mpz_invert(d.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t());
        return KeyPair{p * q, e, d, p, q};
    }
}

KeyPair generate_keypair(unsigned bit_length, std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    return generate_keypair(bit_length, rng);
}

bool is_valid_keypair(const KeyPair& keys) {
    const BigInt& n = keys.modulus_n;
    if (n < 6 || keys.public_e <= 1 || keys.private_d <= 0) {
        return false;
    }
    std::optional<BigInt> p = keys.prime_p;
    std::optional<BigInt> q = keys.prime_q;
    if (!p || !q) {
        if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 48) {
            const unsigned long small = n.get_ui();
            for (unsigned long f = 2; f * f <= small; ++f) {
                if (small % f == 0) {
                    p = BigInt(f);
                    q = BigInt(small / f);
                    break;
                }
            }
            if (!p) {
                return false;  // n is prime
            }
        } else {
            Rng probe(0x5eed);
            for (int i = 0; i < 8; ++i) {
                const BigInt m = probe.below(n);
                if (mod_pow(mod_pow(m, keys.public_e, n), keys.private_d, n) != m) {
                    return false;
                }
            }
            return true;
        }
    }
    if (*p == *q || *p * *q != n) {
        return false;
    }
    if (mpz_probab_prime_p(p->get_mpz_t(), 30) == 0 || mpz_probab_prime_p(q->get_mpz_t(), 30) == 0) {
        return false;
    }
    const BigInt phi = (*p - 1) * (*q - 1);
    return (keys.public_e * keys.private_d) % phi == 1;
}

std::string Digest::hex() const {
    return bytes_to_hex(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

BigInt Digest::to_integer() const {
    BigInt value;
    mpz_import(value.get_mpz_t(), bytes.size(), 1, 1, 0, 0, bytes.data());
    return value;
}

Digest hash(std::string_view data) {
    Digest digest;
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest.bytes.data(), &length, EVP_sha256(), nullptr) != 1 ||
        length != kDigestSize) {
        throw CryptoError("SHA-256 failed");
    }
    return digest;
}

Signature sign(const PrivateKey& key, std::string_view message) {
    const BigInt representative = hash(message).to_integer() % key.n;
    return Signature{mod_pow(representative, key.d, key.n)};
}

bool verify(const PublicKey& key, std::string_view message, const Signature& sig) {
    if (key.n <= 0 || sig.value < 0 || sig.value >= key.n) {
        return false;
    }
    const BigInt representative = hash(message).to_integer() % key.n;
    return mod_pow(sig.value, key.e, key.n) == representative;
}

Envelope encrypt_envelope(const PublicKey& key, std::string_view plaintext, Rng& rng) {
    if (key.n <= 3) {
        throw CryptoError("encrypt_envelope: modulus too small");
    }
    const BigInt session = 2 + rng.below(key.n - 3);
    Envelope env;
    env.wrapped_key = mod_pow(session, key.e, key.n);
    env.nonce = rng.bytes(kNonceSize);

    const auto aes_key = envelope_key(session);
    const std::string aad = to_hex(env.wrapped_key);
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    std::string out(plaintext.size() + kTagSize, '\0');
    int len = 0;
    int total = 0;
    auto* out_ptr = reinterpret_cast<unsigned char*>(out.data());
    const bool ok =
        ctx && EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) == 1 &&
        EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, aes_key.data(),
                           reinterpret_cast<const unsigned char*>(env.nonce.data())) == 1 &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, reinterpret_cast<const unsigned char*>(aad.data()),
                          static_cast<int>(aad.size())) == 1 &&
        EVP_EncryptUpdate(ctx.get(), out_ptr, &len, reinterpret_cast<const unsigned char*>(plaintext.data()),
                          static_cast<int>(plaintext.size())) == 1 &&
        (total = len, EVP_EncryptFinal_ex(ctx.get(), out_ptr + total, &len) == 1) &&
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagSize, out_ptr + plaintext.size()) == 1;
    if (!ok) {
        throw CryptoError("AES-256-GCM encryption failed");
    }
    env.body = std::move(out);
    return env;
}

std::string decrypt_envelope(const PrivateKey& key, const Envelope& envelope) {
    if (envelope.wrapped_key <= 0 || envelope.wrapped_key >= key.n) {
        throw IntegrityError("envelope key out of range for this modulus");
    }
    if (envelope.nonce.size() != kNonceSize || envelope.body.size() < kTagSize) {
        throw IntegrityError("malformed envelope");
    }
    const BigInt session = mod_pow(envelope.wrapped_key, key.d, key.n);
    const auto aes_key = envelope_key(session);
    const std::string aad = to_hex(envelope.wrapped_key);
    const std::size_t cipher_len = envelope.body.size() - kTagSize;

    CipherCtx ctx(EVP_CIPHER_CTX_new());
    std::string out(cipher_len, '\0');
    std::string tag = envelope.body.substr(cipher_len);
    int len = 0;
    auto* out_ptr = reinterpret_cast<unsigned char*>(out.data());
    const bool setup =
        ctx && EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) == 1 &&
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceSize, nullptr) == 1 &&
        EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, aes_key.data(),
                           reinterpret_cast<const unsigned char*>(envelope.nonce.data())) == 1 &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, reinterpret_cast<const unsigned char*>(aad.data()),
                          static_cast<int>(aad.size())) == 1 &&
        EVP_DecryptUpdate(ctx.get(), out_ptr, &len, reinterpret_cast<const unsigned char*>(envelope.body.data()),
                          static_cast<int>(cipher_len)) == 1 &&
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagSize, tag.data()) == 1;
    if (!setup) {
        throw CryptoError("AES-256-GCM setup failed");
    }
    int final_len = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out_ptr + len, &final_len) != 1) {
        throw IntegrityError("envelope authentication failed");
    }
    return out;
}

std::string to_hex(const BigInt& value) {
    return value.get_str(16);
}

BigInt from_hex(std::string_view text) {
    if (text.empty()) {
        throw std::invalid_argument("from_hex: empty string");
    }
    for (char c : text) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
        if (!ok) {
            throw std::invalid_argument("from_hex: invalid digit in '" + std::string(text) + "'");
        }
    }
    return BigInt(std::string(text), 16);
}

std::string bytes_to_hex(std::string_view bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(kDigits[c >> 4]);
        out.push_back(kDigits[c & 0x0f]);
    }
    return out;
}

std::string base64_encode(std::string_view bytes) {
    if (bytes.empty()) {
        return {};
    }
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                        reinterpret_cast<const unsigned char*>(bytes.data()),
                                        static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.empty()) {
        return {};
    }
    if (text.size() % 4 != 0) {
        throw std::invalid_argument("base64_decode: length is not a multiple of 4");
    }
    std::string out(text.size() / 4 * 3, '\0');
    const int written = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                        reinterpret_cast<const unsigned char*>(text.data()),
                                        static_cast<int>(text.size()));
    if (written < 0) {
        throw std::invalid_argument("base64_decode: invalid input");
    }
    std::size_t padding = 0;
    if (text.back() == '=') {
        ++padding;
        if (text[text.size() - 2] == '=') {
            ++padding;
        }
    }
    out.resize(static_cast<std::size_t>(written) - padding);
    return out;
}

}  // namespace appraide::crypto
