#include "appraide/privacy.hpp"

#include <algorithm>

namespace appraide::privacy {

using profile::ClassAudience;
using profile::Distribution;
using profile::MeOnly;
using profile::PersonList;

std::string_view to_string(ReplicaForm form) {
    return form == ReplicaForm::Clear ? "clear" : "encrypted";
}

std::string_view to_string(AccessOutcome outcome) {
    switch (outcome) {
        case AccessOutcome::Allow: return "allow";
        case AccessOutcome::DenyNotAuthorized: return "not-authorized";
        case AccessOutcome::DenyUnknownContent: return "unknown-content";
    }
    return "unknown";
}

std::string_view to_string(ReshareOutcome outcome) {
    switch (outcome) {
        case ReshareOutcome::Created: return "created";
        case ReshareOutcome::DenyNoDistribution: return "no-distribution";
        case ReshareOutcome::DenyNotAuthorized: return "not-authorized";
    }
    return "unknown";
}

std::string_view to_string(DeletionScope scope) {
    return scope == DeletionScope::Content ? "content" : "account";
}

std::vector<Placement> plan_placement(const PublicationMetadata& metadata, const profile::Profile& owner) {
    std::vector<Placement> plan;
    if (std::holds_alternative<profile::Public>(metadata.audience)) {
        plan.push_back({true, {}, ReplicaForm::Clear});
    } else if (const auto* cls = std::get_if<ClassAudience>(&metadata.audience)) {
        if (!owner.has_class(cls->class_id)) {
            throw PrivacyError("unknown connection class " + cls->class_id);
        }
        for (const auto& peer : owner.friends()) {
            if (!owner.is_excluded(peer) && peer != owner.owner()) {
                plan.push_back({false, peer, ReplicaForm::Encrypted});
            }
        }
    } else if (const auto* list = std::get_if<PersonList>(&metadata.audience)) {
        // Clear copies only for persons the origin of a re-share also admits.
        for (const auto& person : list->persons) {
            if (!owner.is_excluded(person) && person != owner.owner() && audience_admits(metadata, person)) {
                plan.push_back({false, person, ReplicaForm::Clear});
            }
        }
    }
    return plan;
}

ReplicaRecord make_clear_replica(const Publication& pub, const UserId& holder, std::int64_t now) {
    ReplicaRecord r;
    r.holder = holder;
    r.form = ReplicaForm::Clear;
    r.metadata = pub.metadata;
    r.metadata.audience = profile::strip_for_duplication(pub.metadata.audience);
    r.clear_body = pub.body;
    r.received_at = now;
    return r;
}

ReplicaRecord make_encrypted_replica(const Publication& pub, const profile::ConnectionClass& cls,
                                     const UserId& holder, std::int64_t now, crypto::Rng& rng) {
    ReplicaRecord r;
    r.holder = holder;
    r.form = ReplicaForm::Encrypted;
    r.class_id = cls.class_id;
    r.key_version = cls.current_key().version;
    r.metadata = pub.metadata;
    r.metadata.audience = profile::strip_for_duplication(pub.metadata.audience);
    r.sealed_body = crypto::encrypt_envelope(cls.current_key().keys.public_key(), pub.body, rng);
    r.received_at = now;
    return r;
}

bool audience_admits(const PublicationMetadata& metadata, const UserId& viewer) {
    if (viewer == metadata.owner) {
        return true;
    }
    if (std::holds_alternative<MeOnly>(metadata.audience)) {
        return false;
    }
    if (!profile::is_public(metadata.audience) && !profile::audience_ids(metadata.audience).count(viewer)) {
        return false;
    }
    if (metadata.via && metadata.via->allowed && !metadata.via->allowed->count(viewer)) {
        return false;
    }
    return true;
}

UserSet admitted_viewers(const PublicationMetadata& metadata, const UserSet& candidates) {
    UserSet out;
    for (const auto& c : candidates) {
        if (audience_admits(metadata, c)) {
            out.insert(c);
        }
    }
    return out;
}

AccessResult handle_access_request(const UserId& requester, const Publication* pub, const profile::Profile& owner,
                                   std::int64_t now, crypto::Rng& rng) {
    AccessResult result;
    if (pub == nullptr) {
        result.outcome = AccessOutcome::DenyUnknownContent;
        return result;
    }
    const auto& m = pub->metadata;
    const bool excluded = owner.is_excluded(requester);
    const bool allowed = !excluded && audience_admits(m, requester);
    const auto* cls = std::get_if<ClassAudience>(&m.audience);
    const bool duplication_peer = !excluded && owner.friends().count(requester) && requester != owner.owner();

    if (cls && duplication_peer) {
        result.duplicate = make_encrypted_replica(*pub, owner.find_class(cls->class_id), requester, now, rng);
    }
    if (!allowed) {
        result.outcome = AccessOutcome::DenyNotAuthorized;
        return result;
    }
    result.outcome = AccessOutcome::Allow;
    result.plaintext = pub->body;
    if (std::holds_alternative<PersonList>(m.audience) && requester != owner.owner()) {
        result.duplicate = make_clear_replica(*pub, requester, now);
    }
    return result;
}

AccessResult handle_replica_access(const UserId& requester, const ReplicaRecord* replica) {
    AccessResult result;
    if (replica == nullptr) {
        return result;
    }
    if (!audience_admits(replica->metadata, requester)) {
        result.outcome = AccessOutcome::DenyNotAuthorized;
        return result;
    }
    result.outcome = AccessOutcome::Allow;
    // A peer never hands out plaintext it holds only in sealed form; the
    // requester decrypts its own copy with the class key.
    if (replica->form == ReplicaForm::Clear) {
        result.plaintext = replica->clear_body;
    }
    ReplicaRecord copy = *replica;
    copy.holder = requester;
    if (copy.form == ReplicaForm::Clear && !std::holds_alternative<PersonList>(copy.metadata.audience)) {
        // Only person-list content travels clear between peers.
        return result;
    }
    result.duplicate = std::move(copy);
    return result;
}

std::optional<std::string> render_feed_item(const UserId& viewer, const ReplicaRecord& replica,
                                            const profile::KeyRing& keyring, const UserSet& hidden_owners) {
    const auto& m = replica.metadata;
    if (viewer != m.owner && hidden_owners.count(m.owner)) {
        return std::nullopt;
    }
    if (!audience_admits(m, viewer)) {
        return std::nullopt;
    }
    if (replica.form == ReplicaForm::Clear) {
        return replica.clear_body;
    }
    const crypto::KeyPair* keys = keyring.find(m.owner, replica.class_id, replica.key_version);
    if (keys == nullptr) {
        return std::nullopt;
    }
    try {
        return crypto::decrypt_envelope(keys->private_key(), replica.sealed_body);
    } catch (const crypto::IntegrityError&) {
        return std::nullopt;
    }
}

ReshareResult reshare(const UserId& resharer, const Publication& original, const AudienceSpec& new_audience,
                      std::uint64_t new_content_id) {
    const auto& om = original.metadata;
    ReshareResult result;
    if (!audience_admits(om, resharer)) {
        result.outcome = ReshareOutcome::DenyNotAuthorized;
        return result;
    }
    const bool original_public = profile::is_public(om.audience) && !(om.via && om.via->allowed);
    if (om.rights.distribution == Distribution::None) {
        result.outcome = ReshareOutcome::DenyNoDistribution;
        return result;
    }
    if (!original_public && profile::is_public(new_audience)) {
        result.outcome = ReshareOutcome::DenyNoDistribution;
        return result;
    }

    profile::Origin origin;
    origin.original_owner = om.via ? om.via->original_owner : om.owner;
    origin.original_content_id = om.via ? om.via->original_content_id : om.content_id;
    if (!original_public) {
        UserSet allowed = profile::audience_ids(om.audience);
        allowed.insert(om.owner);
        if (om.via && om.via->allowed) {
            UserSet narrowed;
            std::set_intersection(allowed.begin(), allowed.end(), om.via->allowed->begin(), om.via->allowed->end(),
                                  std::inserter(narrowed, narrowed.end()));
            allowed = std::move(narrowed);
        }
        if (om.rights.distribution == Distribution::Restricted) {
            UserSet narrowed;
            std::set_intersection(allowed.begin(), allowed.end(), om.rights.restricted_to.begin(),
                                  om.rights.restricted_to.end(), std::inserter(narrowed, narrowed.end()));
            allowed = std::move(narrowed);
        }
        origin.allowed = std::move(allowed);
    }

    Publication derived;
    derived.metadata.owner = resharer;
    derived.metadata.content_id = new_content_id;
    derived.metadata.publication_type = om.publication_type;
    derived.metadata.science = om.science;
    derived.metadata.level = om.level;
    derived.metadata.audience = new_audience;
    derived.metadata.rights = profile::default_rights(new_audience);
    if (!original_public) {
        derived.metadata.rights.distribution = Distribution::None;
    }
    derived.metadata.via = std::move(origin);
    derived.body = original.body;
    result.outcome = ReshareOutcome::Created;
    result.publication = std::move(derived);
    return result;
}

// ------------------------------------------------------------ deletion

std::string deletion_payload(const UserId& owner, DeletionScope scope, std::uint64_t content_id) {
    std::string p = "appraide/delete/v1|" + owner.str() + "|" + std::string(to_string(scope)) + "|";
    p += scope == DeletionScope::Content ? std::to_string(content_id) : "*";
    return p;
}

DeletionRequest make_deletion_request(const UserId& owner, const crypto::PrivateKey& owner_key, DeletionScope scope,
                                      std::uint64_t content_id, UserSet pending_holders) {
    DeletionRequest req;
    req.owner = owner;
    req.scope = scope;
    req.content_id = scope == DeletionScope::Content ? content_id : 0;
    req.owner_signature = crypto::sign(owner_key, deletion_payload(owner, scope, req.content_id));
    req.pending_holders = std::move(pending_holders);
    return req;
}

bool verify_deletion_request(const DeletionRequest& request, const crypto::PublicKey& owner_key) {
    return crypto::verify(owner_key, deletion_payload(request.owner, request.scope, request.content_id),
                          request.owner_signature);
}

std::string confirmation_payload(const DeletionConfirmation& c) {
    return "appraide/delete-confirm/v1|" + deletion_payload(c.owner, c.scope, c.content_id) + "|" +
           c.confirming_holder.str();
}

DeletionConfirmation make_confirmation(const DeletionRequest& request, const UserId& holder,
                                       const crypto::PrivateKey& holder_key) {
    DeletionConfirmation c{request.owner, request.scope, request.content_id, holder, {}};
    c.holder_signature = crypto::sign(holder_key, confirmation_payload(c));
    return c;
}

bool verify_confirmation(const DeletionConfirmation& confirmation, const crypto::PublicKey& holder_key) {
    return crypto::verify(holder_key, confirmation_payload(confirmation), confirmation.holder_signature);
}

namespace {

DeletionScope parse_scope(std::string_view text) {
    if (text == "content") {
        return DeletionScope::Content;
    }
    if (text == "account") {
        return DeletionScope::Account;
    }
    throw RecordError("unknown deletion scope " + std::string(text));
}

}  // namespace

Record encode_deletion_request(const DeletionRequest& request) {
    Record r("deletion-request");
    r.set("owner", request.owner.str());
    r.set("scope", std::string(to_string(request.scope)));
    r.set("content", request.content_id);
    r.set("signature", crypto::to_hex(request.owner_signature.value));
    for (const auto& h : request.pending_holders) {
        r.add("pending", h.str());
    }
    return r;
}

DeletionRequest decode_deletion_request(const Record& record) {
    if (record.type() != "deletion-request") {
        throw RecordError("not a deletion request: " + record.type());
    }
    DeletionRequest req;
    try {
        req.owner = UserId::parse(record.get("owner"));
        req.scope = parse_scope(record.get("scope"));
        req.content_id = record.get_u64("content");
        req.owner_signature.value = crypto::from_hex(record.get("signature"));
        for (const auto& h : record.get_all("pending")) {
            req.pending_holders.insert(UserId::parse(h));
        }
    } catch (const std::invalid_argument& e) {
        throw RecordError(std::string("malformed deletion request: ") + e.what());
    } catch (const profile::ProfileError& e) {
        throw RecordError(std::string("malformed deletion request: ") + e.what());
    }
    return req;
}

Record encode_confirmation(const DeletionConfirmation& c) {
    Record r("deletion-confirmation");
    r.set("owner", c.owner.str());
    r.set("scope", std::string(to_string(c.scope)));
    r.set("content", c.content_id);
    r.set("holder", c.confirming_holder.str());
    r.set("signature", crypto::to_hex(c.holder_signature.value));
    return r;
}

DeletionConfirmation decode_confirmation(const Record& record) {
    if (record.type() != "deletion-confirmation") {
        throw RecordError("not a deletion confirmation: " + record.type());
    }
    DeletionConfirmation c;
    try {
        c.owner = UserId::parse(record.get("owner"));
        c.scope = parse_scope(record.get("scope"));
        c.content_id = record.get_u64("content");
        c.confirming_holder = UserId::parse(record.get("holder"));
        c.holder_signature.value = crypto::from_hex(record.get("signature"));
    } catch (const std::invalid_argument& e) {
        throw RecordError(std::string("malformed confirmation: ") + e.what());
    } catch (const profile::ProfileError& e) {
        throw RecordError(std::string("malformed confirmation: ") + e.what());
    }
    return c;
}

// -------------------------------------------------------------- stores

bool ReplicaStore::is_tombstoned(const ContentKey& key) const {
    return tombstones_.count(key) || deleted_accounts_.count(key.owner);
}

bool ReplicaStore::put(ReplicaRecord replica) {
    const ContentKey key = replica.key();
    if (is_tombstoned(key)) {
        return false;
    }
    replicas_[key] = std::move(replica);
    return true;
}

const ReplicaRecord* ReplicaStore::find(const ContentKey& key) const {
    const auto it = replicas_.find(key);
    return it == replicas_.end() ? nullptr : &it->second;
}

bool ReplicaStore::apply_deletion(const DeletionRequest& request, const crypto::PublicKey& owner_key) {
    if (!verify_deletion_request(request, owner_key)) {
        return false;
    }
    if (request.scope == DeletionScope::Content) {
        replicas_.erase(request.target());
        tombstones_.insert(request.target());
        return true;
    }
    deleted_accounts_.insert(request.owner);
    for (auto it = replicas_.begin(); it != replicas_.end();) {
        it = it->first.owner == request.owner ? replicas_.erase(it) : std::next(it);
    }
    return true;
}

bool ReplicationLog::record(const ContentKey& key, const UserId& holder) {
    return holders_[key].insert(holder).second;
}

bool ReplicationLog::has(const ContentKey& key, const UserId& holder) const {
    const auto it = holders_.find(key);
    return it != holders_.end() && it->second.count(holder);
}

UserSet ReplicationLog::holders(const ContentKey& key) const {
    const auto it = holders_.find(key);
    return it == holders_.end() ? UserSet{} : it->second;
}

UserSet ReplicationLog::all_holders() const {
    UserSet out;
    for (const auto& [key, holders] : holders_) {
        out.insert(holders.begin(), holders.end());
    }
    return out;
}

void ReplicationLog::forget(const ContentKey& key) { holders_.erase(key); }

}  // namespace appraide::privacy
