#pragma once

// Placement and encryption of publications, access and duplication control,
// feed rendering, re-sharing, and signed deletion records.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "appraide/crypto.hpp"
#include "appraide/profile.hpp"
#include "appraide/record.hpp"

namespace appraide::privacy {

using profile::AudienceSpec;
using profile::ContentKey;
using profile::Publication;
using profile::PublicationMetadata;
using profile::UserId;
using profile::UserSet;

class PrivacyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ReplicaForm { Clear, Encrypted };

std::string_view to_string(ReplicaForm form);

/// One planned copy. `to_server` entries carry no holder.
struct Placement {
    bool to_server = false;
    UserId holder;
    ReplicaForm form = ReplicaForm::Clear;

    bool operator==(const Placement&) const = default;
};

/// Where a publication goes and in which form:
///   MeOnly      nowhere (owner keeps it clear)
///   class       encrypted on every friend of the owner
///   person list clear on the listed persons only
///   Public      clear on the server only
/// Blocked and removed users never appear.
std::vector<Placement> plan_placement(const PublicationMetadata& metadata, const profile::Profile& owner);

struct ReplicaRecord {
    UserId holder;
    ReplicaForm form = ReplicaForm::Clear;
    std::string class_id;          // set when Encrypted
    std::uint32_t key_version = 0;  // set when Encrypted
    PublicationMetadata metadata;
    std::string clear_body;       // set when Clear
    crypto::Envelope sealed_body;  // set when Encrypted
    std::int64_t received_at = 0;

    ContentKey key() const { return profile::key_of(metadata); }
};

ReplicaRecord make_clear_replica(const Publication& pub, const UserId& holder, std::int64_t now);
/// Seals the body under the class's current public key. The name of the
/// audience list is stripped from the copy.
ReplicaRecord make_encrypted_replica(const Publication& pub, const profile::ConnectionClass& cls,
                                     const UserId& holder, std::int64_t now, crypto::Rng& rng);

/// Metadata-only check: owner, or named by the audience (any viewer for
/// Public), and admitted by the origin of a re-share.
bool audience_admits(const PublicationMetadata& metadata, const UserId& viewer);

enum class AccessOutcome { Allow, DenyNotAuthorized, DenyUnknownContent };

std::string_view to_string(AccessOutcome outcome);

struct AccessResult {
    AccessOutcome outcome = AccessOutcome::DenyUnknownContent;
    std::string plaintext;                  // empty unless Allow
    std::optional<ReplicaRecord> duplicate;  // copy to store on the requester
};

/// Access to a publication held by its owner. `pub` is null for unknown ids.
/// A denied friend still gets the encrypted copy when the content is class
/// content, since every friend is a duplication peer.
AccessResult handle_access_request(const UserId& requester, const Publication* pub, const profile::Profile& owner,
                                   std::int64_t now, crypto::Rng& rng);

/// Access to a replica stored on a peer other than the owner.
AccessResult handle_replica_access(const UserId& requester, const ReplicaRecord* replica);

/// Feed rendering on the viewer's machine. The metadata check runs before
/// any key lookup: holding a class key is never enough on its own.
std::optional<std::string> render_feed_item(const UserId& viewer, const ReplicaRecord& replica,
                                            const profile::KeyRing& keyring, const UserSet& hidden_owners = {});

enum class ReshareOutcome { Created, DenyNoDistribution, DenyNotAuthorized };

std::string_view to_string(ReshareOutcome outcome);

struct ReshareResult {
    ReshareOutcome outcome = ReshareOutcome::DenyNotAuthorized;
    std::optional<Publication> publication;
};

/// Derived publication owned by `resharer` and carrying the origin. Viewers
/// of the result are new-audience members that the original also admitted.
/// Private originals cannot be re-shared to Public, and the derived copy of
/// a private original is itself not redistributable.
ReshareResult reshare(const UserId& resharer, const Publication& original, const AudienceSpec& new_audience,
                      std::uint64_t new_content_id);

/// Everyone in `candidates` that `audience_admits` lets through.
UserSet admitted_viewers(const PublicationMetadata& metadata, const UserSet& candidates);

// ------------------------------------------------------------ deletion

enum class DeletionScope { Content, Account };

std::string_view to_string(DeletionScope scope);

struct DeletionRequest {
    UserId owner;
    DeletionScope scope = DeletionScope::Content;
    std::uint64_t content_id = 0;  // ignored for Account scope
    crypto::Signature owner_signature;
    UserSet pending_holders;  // holders that have not received it yet

    ContentKey target() const { return {owner, content_id}; }
};

/// Bytes the owner signs: owner, scope and content id.
std::string deletion_payload(const UserId& owner, DeletionScope scope, std::uint64_t content_id);

DeletionRequest make_deletion_request(const UserId& owner, const crypto::PrivateKey& owner_key, DeletionScope scope,
                                      std::uint64_t content_id, UserSet pending_holders);
bool verify_deletion_request(const DeletionRequest& request, const crypto::PublicKey& owner_key);

struct DeletionConfirmation {
    UserId owner;
    DeletionScope scope = DeletionScope::Content;
    std::uint64_t content_id = 0;
    UserId confirming_holder;
    crypto::Signature holder_signature;
};

std::string confirmation_payload(const DeletionConfirmation& confirmation);
DeletionConfirmation make_confirmation(const DeletionRequest& request, const UserId& holder,
                                       const crypto::PrivateKey& holder_key);
bool verify_confirmation(const DeletionConfirmation& confirmation, const crypto::PublicKey& holder_key);

Record encode_deletion_request(const DeletionRequest& request);
DeletionRequest decode_deletion_request(const Record& record);
Record encode_confirmation(const DeletionConfirmation& confirmation);
DeletionConfirmation decode_confirmation(const Record& record);

/// Replicas held by one peer plus tombstones of deleted content.
class ReplicaStore {
public:
    /// Refuses content that has a tombstone. Returns false if refused.
    bool put(ReplicaRecord replica);
    const ReplicaRecord* find(const ContentKey& key) const;
    bool contains(const ContentKey& key) const { return find(key) != nullptr; }
    const std::map<ContentKey, ReplicaRecord>& replicas() const { return replicas_; }
    const std::set<ContentKey>& tombstones() const { return tombstones_; }
    bool is_tombstoned(const ContentKey& key) const;

    /// Verifies the owner's signature and deletes what it names. Returns
    /// false (and deletes nothing) when the signature does not verify.
    bool apply_deletion(const DeletionRequest& request, const crypto::PublicKey& owner_key);

private:
    std::map<ContentKey, ReplicaRecord> replicas_;
    std::set<ContentKey> tombstones_;
    UserSet deleted_accounts_;
};

/// The owner-side log of where each publication was copied.
class ReplicationLog {
public:
    /// Returns false when holder already had the content.
    bool record(const ContentKey& key, const UserId& holder);
    bool has(const ContentKey& key, const UserId& holder) const;
    UserSet holders(const ContentKey& key) const;
    UserSet all_holders() const;
    void forget(const ContentKey& key);
    const std::map<ContentKey, UserSet>& entries() const { return holders_; }

private:
    std::map<ContentKey, UserSet> holders_;
};

}  // namespace appraide::privacy
