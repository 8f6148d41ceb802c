#pragma once

// User identities, connection classes with per-class key rings, publication
// metadata and default privacy settings.

#include <boost/rational.hpp>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "appraide/crypto.hpp"

namespace appraide::profile {

class ProfileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Role { Apprenant, Enseignant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

/// Identity is (role, number). The pseudonym travels along for display but
/// is not part of equality: audience lists only carry "Role_number".
struct UserId {
    Role role = Role::Apprenant;
    std::uint32_t number = 0;
    std::string pseudonym;

    /// "Apprenant_5484"
    std::string str() const;
    static UserId parse(std::string_view text);

    bool operator==(const UserId& other) const { return role == other.role && number == other.number; }
    std::strong_ordering operator<=>(const UserId& other) const {
        if (auto c = role <=> other.role; c != 0) {
            return c;
        }
        return number <=> other.number;
    }
};

using UserSet = std::set<UserId>;

inline constexpr std::size_t kMinPseudonymLength = 4;

// ---------------------------------------------------------------- audience

struct MeOnly {
    bool operator==(const MeOnly&) const = default;
};

/// Audience bound to one connection class. `members` is the id list captured
/// when the publication was made; `name` is dropped on duplication.
struct ClassAudience {
    std::string class_id;
    std::string name;
    UserSet members;
    bool operator==(const ClassAudience&) const = default;
};

struct PersonList {
    UserSet persons;
    bool operator==(const PersonList&) const = default;
};

struct Public {
    bool operator==(const Public&) const = default;
};

using AudienceSpec = std::variant<MeOnly, ClassAudience, PersonList, Public>;

bool is_public(const AudienceSpec& audience);
/// Ids named by the audience (class members or listed persons).
UserSet audience_ids(const AudienceSpec& audience);
/// Copy with the list name removed, as it travels to other peers.
AudienceSpec strip_for_duplication(const AudienceSpec& audience);

// ------------------------------------------------------------------ rights

enum class Distribution { None, Allowed, Restricted };
enum class Protection { Clear, Encrypted };

struct AccessRights {
    Distribution distribution = Distribution::None;
    UserSet restricted_to;  // only meaningful for Restricted
    Protection replication_protection = Protection::Clear;
    bool duplication_authorized = true;
    bool operator==(const AccessRights&) const = default;
};

enum class PublicationType { DemandeAide, Information, Document, Statut };
enum class Level { Primaire, CEM, Lycee };

std::string_view to_string(PublicationType type);
std::string_view to_string(Level level);
PublicationType parse_publication_type(std::string_view text);
Level parse_level(std::string_view text);

/// Provenance of a re-shared publication ("Bob via Alice").
struct Origin {
    UserId original_owner;
    std::uint64_t original_content_id = 0;
    /// Viewers admitted by the original; nullopt when the original was Public.
    std::optional<UserSet> allowed;
    bool operator==(const Origin&) const = default;
};

struct PublicationMetadata {
    UserId owner;
    std::uint64_t content_id = 0;
    PublicationType publication_type = PublicationType::Statut;
    std::string science;
    Level level = Level::Lycee;
    AudienceSpec audience = MeOnly{};
    AccessRights rights;
    std::optional<Origin> via;

    bool operator==(const PublicationMetadata& other) const;
};

/// Default rights for an audience: Public content may be redistributed and
/// is stored clear; class content is encrypted; the rest stays clear and
/// non-distributable.
AccessRights default_rights(const AudienceSpec& audience);

struct Publication {
    PublicationMetadata metadata;
    std::string body;
};

struct ContentKey {
    UserId owner;
    std::uint64_t content_id = 0;
    std::string str() const { return owner.str() + "#" + std::to_string(content_id); }
    bool operator==(const ContentKey& other) const = default;
    std::strong_ordering operator<=>(const ContentKey& other) const = default;
};

inline ContentKey key_of(const PublicationMetadata& m) { return {m.owner, m.content_id}; }

// --------------------------------------------------------------- XML codec

class MetadataError : public std::runtime_error {
public:
    enum class Kind { MalformedDocument, UnknownElement };
    MetadataError(Kind kind, std::string element, const std::string& message)
        : std::runtime_error(message), kind_(kind), element_(std::move(element)) {}
    Kind kind() const { return kind_; }
    const std::string& element() const { return element_; }

private:
    Kind kind_;
    std::string element_;
};

std::string serialize_metadata(const PublicationMetadata& metadata);
PublicationMetadata parse_metadata(std::string_view xml);

// ------------------------------------------------------ connection classes

struct ClassKeyVersion {
    std::uint32_t version = 0;
    crypto::KeyPair keys;
};

struct ConnectionClass {
    std::string class_id;  // "CC2"
    std::string key;       // short handle used by scenarios, e.g. "enseignants"
    std::string name;      // "Mes enseignants"
    UserSet members;
    UserSet former_members;
    std::vector<ClassKeyVersion> key_versions;  // rotated on removal

    const ClassKeyVersion& current_key() const { return key_versions.back(); }
};

/// A class key travelling to a member.
struct KeyDelivery {
    UserId owner;
    UserId member;
    std::string class_id;
    std::uint32_t version = 0;
    crypto::KeyPair keys;
};

struct KeyRingEntry {
    UserId owner;
    std::string class_id;
    std::uint32_t version = 0;
    bool operator==(const KeyRingEntry&) const = default;
    std::strong_ordering operator<=>(const KeyRingEntry&) const = default;
};

/// Class keys a user has received from other owners.
class KeyRing {
public:
    void store(const KeyDelivery& delivery);
    const crypto::KeyPair* find(const UserId& owner, std::string_view class_id, std::uint32_t version) const;
    void forget_owner(const UserId& owner);
    std::size_t size() const { return keys_.size(); }
    const std::map<KeyRingEntry, crypto::KeyPair>& entries() const { return keys_; }

private:
    std::map<KeyRingEntry, crypto::KeyPair> keys_;
};

// ------------------------------------------------------------- settings

enum class ContentCategory {
    Identite,
    AttributsDemographiques,
    ActivitesReseautage,
    ActivitesApprentissage,
    CriteresComparaison,
    Interets,
    Publications,
    Certifications,
    Connexions,
};

struct DefaultAudience {
    bool me_only = false;
    std::vector<std::string> class_names;  // e.g. {"Camarades", "Famille"}

    /// Display label: "Moi-seulement", "Famille", "Camarades et Famille".
    std::string label() const;
    bool operator==(const DefaultAudience&) const = default;
};

struct SettingRow {
    ContentCategory category;
    std::string content_type;  // table wording
    Protection protection;
    DefaultAudience audience;

    /// "Droits d'accès (Clair)" or "Droits d'accès + Chiffrement".
    std::string protection_label() const;
};

struct ProfileSettings {
    std::vector<SettingRow> rows;
    const SettingRow& row(ContentCategory category) const;
};

/// The privacy assistant's defaults for a new account.
ProfileSettings default_settings();

// -------------------------------------------------------------- profiles

struct SelfTestResult {
    UserId owner;
    std::string test_id;
    boost::rational<std::int64_t> score;
    std::int64_t taken_at = 0;
};

/// Parses "0.85", "17/20" or "1".
boost::rational<std::int64_t> parse_score(std::string_view text);
std::string format_score(const boost::rational<std::int64_t>& score);

struct DefaultClassSpec {
    std::string_view class_id;
    std::string_view key;
    std::string_view name;
};

/// Named lists every account starts with.
const std::vector<DefaultClassSpec>& default_classes();

class Profile {
public:
    Profile(UserId owner, crypto::Rng& rng, unsigned key_bits);

    const UserId& owner() const { return owner_; }

    const UserSet& friends() const { return friends_; }
    const UserSet& blocked() const { return blocked_; }
    const UserSet& removed() const { return removed_; }
    const UserSet& subscribers() const { return subscribers_; }
    const ProfileSettings& settings() const { return settings_; }

    void add_friend(const UserId& user);
    void add_subscriber(const UserId& user) { subscribers_.insert(user); }
    /// Blocking wins over every audience: the user leaves all classes (with
    /// key rotation) and the friend set.
    std::vector<KeyDelivery> block(const UserId& user, crypto::Rng& rng);
    void mark_removed(const UserId& user);
    bool is_excluded(const UserId& user) const { return blocked_.count(user) || removed_.count(user); }

    /// Accepts a class id ("CC3") or a short key ("camarades").
    const ConnectionClass& find_class(std::string_view id_or_key) const;
    bool has_class(std::string_view id_or_key) const;
    const std::map<std::string, ConnectionClass>& classes() const { return classes_; }

    /// Adds member and returns the key delivery; empty when already a member.
    std::vector<KeyDelivery> assign_to_class(const UserId& member, std::string_view class_ref);
    /// Removes member, rotates the class key and returns deliveries of the
    /// new key to the remaining members. No-op when member is absent.
    std::vector<KeyDelivery> remove_from_class(const UserId& member, std::string_view class_ref, crypto::Rng& rng);

    /// Audience for a new publication addressed to a class: captures current
    /// members, excluding blocked users.
    ClassAudience class_audience(std::string_view class_ref) const;

    void record_self_test(SelfTestResult result);
    const std::vector<SelfTestResult>& self_tests() const { return self_tests_; }

private:
    ConnectionClass& find_class_mut(std::string_view id_or_key);

    UserId owner_;
    unsigned key_bits_;
    UserSet friends_;
    UserSet blocked_;
    UserSet removed_;
    UserSet subscribers_;
    std::map<std::string, ConnectionClass> classes_;
    ProfileSettings settings_;
    std::vector<SelfTestResult> self_tests_;
};

}  // namespace appraide::profile
