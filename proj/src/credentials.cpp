#include "appraide/credentials.hpp"

#include <map>
#include <sstream>

namespace appraide::credentials {

using crypto::from_hex;
using crypto::to_hex;

namespace {

BigInt mod_pow(const BigInt& base, const BigInt& exponent, const BigInt& modulus) {
    BigInt result;
    mpz_powm(result.get_mpz_t(), base.get_mpz_t(), exponent.get_mpz_t(), modulus.get_mpz_t());
    return result;
}

void append_field(std::string& out, std::string_view field) {
    const auto size = static_cast<std::uint32_t>(field.size());
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<char>((size >> shift) & 0xff));
    }
    out.append(field);
}

}  // namespace

BlindedValue blind_with_factor(const BigInt& u, const crypto::PublicKey& signer, const BigInt& r) {
    if (u <= 0 || u >= signer.n) {
        throw CredentialError("blind: value must satisfy 0 < u < N");
    }
    BlindingState state{r, 0, signer.n};
    if (r <= 0 || mpz_invert(state.r_inverse.get_mpz_t(), r.get_mpz_t(), signer.n.get_mpz_t()) == 0) {
        throw CredentialError("blind: factor is not invertible mod N");
    }
    const BigInt t = (u * mod_pow(r, signer.e, signer.n)) % signer.n;
    return BlindedValue{t, std::move(state)};
}

BlindedValue blind(const BigInt& u, const crypto::PublicKey& signer, crypto::Rng& rng) {
    if (u <= 0 || u >= signer.n) {
        throw CredentialError("blind: value must satisfy 0 < u < N");
    }
    for (;;) {
        const BigInt r = 1 + rng.below(signer.n - 1);
        BigInt g;
        mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), signer.n.get_mpz_t());
        if (g == 1) {
            return blind_with_factor(u, signer, r);
        }
    }
}

BigInt sign_blinded(const BigInt& t, const crypto::PrivateKey& signer) {
    return mod_pow(t, signer.d, signer.n);
}

BigInt unblind(const BigInt& t_prime, const BlindingState& state) {
    return (t_prime * state.r_inverse) % state.signer_modulus;
}

crypto::Signature Issuer::sign_attestation(std::string_view attestation) {
    transcript_.push_back("attestation:" + std::string(attestation));
    return crypto::sign(keys_.private_key(), attestation);
}

BigInt Issuer::sign_blinded_value(const BigInt& t) {
    transcript_.push_back("blinded:" + to_hex(t));
    return sign_blinded(t, keys_.private_key());
}

BigInt encode_credential_message(const BigInt& u, std::string_view m, const crypto::Signature& inner,
                                 const BigInt& modulus) {
    if (modulus <= 2) {
        throw CredentialError("encode: modulus too small");
    }
    std::string material;
    append_field(material, to_hex(u));
    append_field(material, m);
    append_field(material, to_hex(inner.value));
    return crypto::hash(material).to_integer() % (modulus - 1) + 1;
}

AnonymousCredential issue_credential(const BigInt& pseudonym_u, std::string_view attestation_m, Issuer& issuer,
                                     crypto::Rng& rng) {
    // Steps 2-3: the issuer signs the attestation in the clear.
    const crypto::Signature inner = issuer.sign_attestation(attestation_m);
    // Step 4: the learner forms M and blinds it.
    const crypto::PublicKey pub = issuer.public_key();
    const BigInt message = encode_credential_message(pseudonym_u, attestation_m, inner, pub.n);
    const BlindedValue blinded = blind(message, pub, rng);
    // Step 5: blind signature, unblinded by the learner.
    const BigInt t_prime = issuer.sign_blinded_value(blinded.t);
    return AnonymousCredential{pseudonym_u, std::string(attestation_m), inner, unblind(t_prime, blinded.state)};
}

bool verify_credential(const AnonymousCredential& cred, const crypto::PublicKey& issuer) {
    if (!crypto::verify(issuer, cred.message_m, cred.inner_signature)) {
        return false;
    }
    if (cred.blind_signature_s <= 0 || cred.blind_signature_s >= issuer.n) {
        return false;
    }
    const BigInt expected = encode_credential_message(cred.pseudonym_u, cred.message_m, cred.inner_signature, issuer.n);
    return mod_pow(cred.blind_signature_s, issuer.e, issuer.n) == expected;
}

bool Racl::insert_if_absent(const BigInt& u) {
    std::lock_guard lock(mutex_);
    return used_pseudonyms_.insert(u).second;
}

bool Racl::contains(const BigInt& u) const {
    std::lock_guard lock(mutex_);
    return used_pseudonyms_.count(u) != 0;
}

std::size_t Racl::size() const {
    std::lock_guard lock(mutex_);
    return used_pseudonyms_.size();
}

std::vector<BigInt> Racl::entries() const {
    std::lock_guard lock(mutex_);
    return {used_pseudonyms_.begin(), used_pseudonyms_.end()};
}

std::string_view to_string(PresentationOutcome outcome) {
    switch (outcome) {
        case PresentationOutcome::Accepted: return "accept";
        case PresentationOutcome::BadSignature: return "bad-signature";
        case PresentationOutcome::AlreadyUsed: return "already-used";
    }
    return "unknown";
}

PresentationOutcome present_credential(const AnonymousCredential& cred, const crypto::PublicKey& issuer,
                                       Racl& racl) {
    if (!verify_credential(cred, issuer)) {
        return PresentationOutcome::BadSignature;
    }
    return racl.insert_if_absent(cred.pseudonym_u) ? PresentationOutcome::Accepted
                                                   : PresentationOutcome::AlreadyUsed;
}

std::string bdc_signed_payload(const crypto::Envelope& y, const crypto::PublicKey& holder_public) {
    std::string z = "bdc/v1";
    append_field(z, to_hex(y.wrapped_key));
    append_field(z, y.nonce);
    append_field(z, y.body);
    append_field(z, to_hex(holder_public.n));
    append_field(z, to_hex(holder_public.e));
    return z;
}

IssuedBdc create_bdc(std::string_view identity_p, crypto::Rng& rng, const crypto::KeyPair& ca_keys,
                     unsigned holder_key_bits) {
    crypto::KeyPair holder = crypto::generate_keypair(holder_key_bits, rng);
    crypto::Envelope y = crypto::encrypt_envelope(holder.public_key(), identity_p, rng);
    const crypto::Signature ca_sig = crypto::sign(ca_keys.private_key(), bdc_signed_payload(y, holder.public_key()));
    return IssuedBdc{BlindDigitalCertificate{std::move(y), holder.public_key(), ca_sig}, std::move(holder)};
}

std::string_view to_string(RevealOutcome outcome) {
    switch (outcome) {
        case RevealOutcome::Revealed: return "revealed";
        case RevealOutcome::BadCaSignature: return "bad-ca-signature";
        case RevealOutcome::DecryptionFailure: return "decryption-failure";
    }
    return "unknown";
}

RevealResult reveal_bdc(const BlindDigitalCertificate& bdc, const crypto::KeyPair& holder_keys,
                        const crypto::PublicKey& ca_public) {
    const std::string z = bdc_signed_payload(bdc.encrypted_identity_y, bdc.holder_public_key);
    if (!crypto::verify(ca_public, z, bdc.ca_signature)) {
        return {RevealOutcome::BadCaSignature, {}};
    }
    try {
        return {RevealOutcome::Revealed,
                crypto::decrypt_envelope(holder_keys.private_key(), bdc.encrypted_identity_y)};
    } catch (const crypto::IntegrityError&) {
        return {RevealOutcome::DecryptionFailure, {}};
    }
}

std::string serialize_credential(const AnonymousCredential& cred, const crypto::PublicKey& issuer) {
    std::ostringstream out;
    out << "# anonymous credential\n"
        << "issuer_n=" << to_hex(issuer.n) << '\n'
        << "issuer_e=" << to_hex(issuer.e) << '\n'
        << "pseudonym_u=" << to_hex(cred.pseudonym_u) << '\n'
        << "message_m=" << crypto::base64_encode(cred.message_m) << '\n'
        << "inner_signature=" << to_hex(cred.inner_signature.value) << '\n'
        << "blind_signature_s=" << to_hex(cred.blind_signature_s) << '\n';
    return out.str();
}

ParsedCredential parse_credential(std::string_view text) {
    std::map<std::string, std::string, std::less<>> fields;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw CredentialError("credential line without '=': " + line);
        }
        fields[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto field = [&](std::string_view key) -> const std::string& {
        const auto it = fields.find(key);
        if (it == fields.end()) {
            throw CredentialError("credential is missing field " + std::string(key));
        }
        return it->second;
    };
    try {
        ParsedCredential parsed;
        parsed.issuer = {from_hex(field("issuer_n")), from_hex(field("issuer_e"))};
        parsed.credential.pseudonym_u = from_hex(field("pseudonym_u"));
        parsed.credential.message_m = crypto::base64_decode(field("message_m"));
        parsed.credential.inner_signature = {from_hex(field("inner_signature"))};
        parsed.credential.blind_signature_s = from_hex(field("blind_signature_s"));
        return parsed;
    } catch (const std::invalid_argument& e) {
        throw CredentialError(std::string("malformed credential: ") + e.what());
    }
}

}  // namespace appraide::credentials
