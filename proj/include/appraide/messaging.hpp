#pragma once

// Sign-then-encrypt messages between two principals.

#include <string>
#include <vector>

#include "appraide/crypto.hpp"
#include "appraide/profile.hpp"

namespace appraide::messaging {

using profile::UserId;

struct SignedMessage {
    UserId sender;
    UserId receiver;
    crypto::Envelope wire;  // E_receiver(body || S_sender(H(body)))
};

/// Digest of the body, signed with the sender's private key, appended to the
/// body; the whole is sealed for the receiver.
SignedMessage compose_signed(const UserId& sender, const crypto::PrivateKey& sender_key, const UserId& receiver,
                             const crypto::PublicKey& receiver_key, std::string_view body, crypto::Rng& rng);

enum class ReceiveOutcome { Delivered, RejectIntegrity, RejectWrongRecipient };

std::string_view to_string(ReceiveOutcome outcome);

struct ReceiveResult {
    ReceiveOutcome outcome = ReceiveOutcome::RejectIntegrity;
    std::string body;  // set only when Delivered
};

/// Pure check: decrypt, recompute the digest, verify against sender_key.
ReceiveResult open_signed(const UserId& receiver, const crypto::PrivateKey& receiver_key,
                          const crypto::PublicKey& sender_key, const SignedMessage& msg);

struct StoredMessage {
    UserId sender;
    std::string body;
    std::int64_t received_at = 0;
};

/// The receiver's local message base. Only authenticated messages land here.
class Mailbox {
public:
    Mailbox(UserId owner, crypto::PrivateKey key) : owner_(std::move(owner)), key_(std::move(key)) {}

    ReceiveResult receive(const crypto::PublicKey& sender_key, const SignedMessage& msg, std::int64_t now);
    const std::vector<StoredMessage>& messages() const { return messages_; }

private:
    UserId owner_;
    crypto::PrivateKey key_;
    std::vector<StoredMessage> messages_;
};

// Wire format (see docs/wire.md): length-prefixed fields, hex integers.
std::string encode_wire(const SignedMessage& msg);
/// Throws std::invalid_argument on truncated or malformed input.
SignedMessage decode_wire(std::string_view bytes);

}  // namespace appraide::messaging
