#include "appraide/messaging.hpp"

#include <stdexcept>

namespace appraide::messaging {

namespace {

constexpr std::string_view kMagic = "APM1";

void put_field(std::string& out, std::string_view field) {
    const auto size = static_cast<std::uint32_t>(field.size());
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<char>((size >> shift) & 0xff));
    }
    out.append(field);
}

std::string_view take_field(std::string_view& in) {
    if (in.size() < 4) {
        throw std::invalid_argument("wire: truncated length");
    }
    std::uint32_t size = 0;
    for (int i = 0; i < 4; ++i) {
        size = (size << 8) | static_cast<std::uint8_t>(in[i]);
    }
    in.remove_prefix(4);
    if (in.size() < size) {
        throw std::invalid_argument("wire: truncated field");
    }
    std::string_view field = in.substr(0, size);
    in.remove_prefix(size);
    return field;
}

}  // namespace

std::string_view to_string(ReceiveOutcome outcome) {
    switch (outcome) {
        case ReceiveOutcome::Delivered: return "delivered";
        case ReceiveOutcome::RejectIntegrity: return "integrity";
        case ReceiveOutcome::RejectWrongRecipient: return "wrong-recipient";
    }
    return "unknown";
}

SignedMessage compose_signed(const UserId& sender, const crypto::PrivateKey& sender_key, const UserId& receiver,
                             const crypto::PublicKey& receiver_key, std::string_view body, crypto::Rng& rng) {
    const crypto::Digest digest = crypto::hash(body);
    const std::string_view digest_bytes(reinterpret_cast<const char*>(digest.bytes.data()), digest.bytes.size());
    const crypto::Signature sig = crypto::sign(sender_key, digest_bytes);
    std::string signed_text;
    put_field(signed_text, body);
    put_field(signed_text, crypto::to_hex(sig.value));
    return SignedMessage{sender, receiver, crypto::encrypt_envelope(receiver_key, signed_text, rng)};
}

ReceiveResult open_signed(const UserId& receiver, const crypto::PrivateKey& receiver_key,
                          const crypto::PublicKey& sender_key, const SignedMessage& msg) {
    if (msg.receiver != receiver) {
        return {ReceiveOutcome::RejectWrongRecipient, {}};
    }
    try {
        const std::string plain = crypto::decrypt_envelope(receiver_key, msg.wire);
        std::string_view rest = plain;
        std::string body(take_field(rest));
        const crypto::Signature sig{crypto::from_hex(take_field(rest))};
        if (!rest.empty()) {
            return {};
        }
        const crypto::Digest digest = crypto::hash(body);
        const std::string_view digest_bytes(reinterpret_cast<const char*>(digest.bytes.data()),
                                            digest.bytes.size());
        if (!crypto::verify(sender_key, digest_bytes, sig)) {
            return {};
        }
        return {ReceiveOutcome::Delivered, std::move(body)};
    } catch (const crypto::IntegrityError&) {
        return {};
    } catch (const std::invalid_argument&) {
        return {};
    }
}

ReceiveResult Mailbox::receive(const crypto::PublicKey& sender_key, const SignedMessage& msg, std::int64_t now) {
    ReceiveResult result = open_signed(owner_, key_, sender_key, msg);
    if (result.outcome == ReceiveOutcome::Delivered) {
        messages_.push_back({msg.sender, result.body, now});
    }
    return result;
}

std::string encode_wire(const SignedMessage& msg) {
    std::string out(kMagic);
    put_field(out, msg.sender.str());
    put_field(out, msg.receiver.str());
    put_field(out, crypto::to_hex(msg.wire.wrapped_key));
    put_field(out, msg.wire.nonce);
    put_field(out, msg.wire.body);
    return out;
}

SignedMessage decode_wire(std::string_view bytes) {
    if (bytes.substr(0, kMagic.size()) != kMagic) {
        throw std::invalid_argument("wire: bad magic");
    }
    bytes.remove_prefix(kMagic.size());
    // Every field must be in canonical form, so no two byte strings decode
    // to the same message.
    SignedMessage msg;
    try {
        const std::string_view sender = take_field(bytes);
        const std::string_view receiver = take_field(bytes);
        msg.sender = UserId::parse(sender);
        msg.receiver = UserId::parse(receiver);
        if (msg.sender.str() != sender || msg.receiver.str() != receiver) {
            throw std::invalid_argument("wire: non-canonical user id");
        }
    } catch (const profile::ProfileError& e) {
        throw std::invalid_argument(std::string("wire: ") + e.what());
    }
    const std::string_view key_hex = take_field(bytes);
    msg.wire.wrapped_key = crypto::from_hex(key_hex);
    if (crypto::to_hex(msg.wire.wrapped_key) != key_hex) {
        throw std::invalid_argument("wire: non-canonical key");
    }
    msg.wire.nonce = std::string(take_field(bytes));
    msg.wire.body = std::string(take_field(bytes));
    if (!bytes.empty()) {
        throw std::invalid_argument("wire: trailing bytes");
    }
    return msg;
}

}  // namespace appraide::messaging
