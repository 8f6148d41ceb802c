#pragma once

// Anonymous credentials: RSA blind signatures on pseudonyms, learner
// credentials built on them, the revocation list that prevents reuse, and
// blind digital certificates.

#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "appraide/crypto.hpp"

namespace appraide::credentials {

using crypto::BigInt;

class CredentialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BlindingState {
    BigInt r;
    BigInt r_inverse;
    BigInt signer_modulus;
};

struct BlindedValue {
    BigInt t;
    BlindingState state;
};

/// t = u * r^e mod N with a fresh r coprime to N. Throws CredentialError
/// unless 0 < u < N.
BlindedValue blind(const BigInt& u, const crypto::PublicKey& signer, crypto::Rng& rng);
/// Same with a caller-chosen blinding factor. r must be a unit mod N.
BlindedValue blind_with_factor(const BigInt& u, const crypto::PublicKey& signer, const BigInt& r);
/// t' = t^d mod N. The signer only ever sees t.
BigInt sign_blinded(const BigInt& t, const crypto::PrivateKey& signer);
/// s = t' * r^-1 mod N.
BigInt unblind(const BigInt& t_prime, const BlindingState& state);

/// The issuing system. Its transcript records every value it was shown so
/// tests can check that pseudonyms never reach it in the clear.
class Issuer {
public:
    explicit Issuer(crypto::KeyPair keys) : keys_(std::move(keys)) {}

    const crypto::KeyPair& keys() const { return keys_; }
    crypto::PublicKey public_key() const { return keys_.public_key(); }
    const std::vector<std::string>& transcript() const { return transcript_; }

    crypto::Signature sign_attestation(std::string_view attestation);
    BigInt sign_blinded_value(const BigInt& t);

private:
    crypto::KeyPair keys_;
    std::vector<std::string> transcript_;
};

struct AnonymousCredential {
    BigInt pseudonym_u;
    std::string message_m;
    crypto::Signature inner_signature;
    BigInt blind_signature_s;

    bool operator==(const AnonymousCredential& other) const {
        return pseudonym_u == other.pseudonym_u && message_m == other.message_m &&
               inner_signature == other.inner_signature && blind_signature_s == other.blind_signature_s;
    }
};

/// Maps M = u || m || S_SK(m) into [1, N-1]: SHA-256 over length-prefixed
/// fields, reduced mod (N-1), plus one. Zero is excluded so s = 0 can never
/// verify.
BigInt encode_credential_message(const BigInt& u, std::string_view m, const crypto::Signature& inner,
                                 const BigInt& modulus);

AnonymousCredential issue_credential(const BigInt& pseudonym_u, std::string_view attestation_m, Issuer& issuer,
                                     crypto::Rng& rng);

bool verify_credential(const AnonymousCredential& cred, const crypto::PublicKey& issuer);

/// Revocation of Anonymous Credentials List. Append-only.
class Racl {
public:
    /// Atomic check-then-insert. Returns false if u was already present.
    bool insert_if_absent(const BigInt& u);
    bool contains(const BigInt& u) const;
    std::size_t size() const;
    std::vector<BigInt> entries() const;

private:
    mutable std::mutex mutex_;
    std::set<BigInt> used_pseudonyms_;
};

enum class PresentationOutcome { Accepted, BadSignature, AlreadyUsed };

std::string_view to_string(PresentationOutcome outcome);

/// Two steps: signature check, then RACL lookup. On acceptance u is
/// inserted into the list; on rejection the list is unchanged.
PresentationOutcome present_credential(const AnonymousCredential& cred, const crypto::PublicKey& issuer,
                                       Racl& racl);

struct BlindDigitalCertificate {
    crypto::Envelope encrypted_identity_y;
    crypto::PublicKey holder_public_key;
    crypto::Signature ca_signature;
};

struct IssuedBdc {
    BlindDigitalCertificate certificate;
    crypto::KeyPair holder_keys;
};

/// Bytes the CA signs: z = [y, PK].
std::string bdc_signed_payload(const crypto::Envelope& y, const crypto::PublicKey& holder_public);

IssuedBdc create_bdc(std::string_view identity_p, crypto::Rng& rng, const crypto::KeyPair& ca_keys,
                     unsigned holder_key_bits = 512);

enum class RevealOutcome { Revealed, BadCaSignature, DecryptionFailure };

std::string_view to_string(RevealOutcome outcome);

struct RevealResult {
    RevealOutcome outcome;
    std::string identity;  // set only when outcome == Revealed
};

RevealResult reveal_bdc(const BlindDigitalCertificate& bdc, const crypto::KeyPair& holder_keys,
                        const crypto::PublicKey& ca_public);

// Text format: one "key=value" per line, '#' comments, hex integers and
// base64 octet strings.
std::string serialize_credential(const AnonymousCredential& cred, const crypto::PublicKey& issuer);
struct ParsedCredential {
    AnonymousCredential credential;
    crypto::PublicKey issuer;
};
ParsedCredential parse_credential(std::string_view text);

}  // namespace appraide::credentials
