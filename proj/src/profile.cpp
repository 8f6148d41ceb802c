#include "appraide/profile.hpp"

#include <algorithm>
#include <charconv>

namespace appraide::profile {

namespace {

std::string lower_ascii(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ProfileError("not an integer: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

std::string_view to_string(Role role) {
    return role == Role::Apprenant ? "Apprenant" : "Enseignant";
}

Role parse_role(std::string_view text) {
    const std::string lowered = lower_ascii(text);
    if (lowered == "apprenant") {
        return Role::Apprenant;
    }
    if (lowered == "enseignant") {
        return Role::Enseignant;
    }
    throw ProfileError("unknown role '" + std::string(text) + "'");
}

std::string UserId::str() const {
    return std::string(to_string(role)) + "_" + std::to_string(number);
}

UserId UserId::parse(std::string_view text) {
    const auto sep = text.find('_');
    if (sep == std::string_view::npos) {
        throw ProfileError("user id without role prefix: '" + std::string(text) + "'");
    }
    UserId id;
    id.role = parse_role(text.substr(0, sep));
    const std::int64_t number = parse_int(text.substr(sep + 1));
    if (number < 0 || number > UINT32_MAX) {
        throw ProfileError("user id number out of range: '" + std::string(text) + "'");
    }
    id.number = static_cast<std::uint32_t>(number);
    return id;
}

bool is_public(const AudienceSpec& audience) {
    return std::holds_alternative<Public>(audience);
}

UserSet audience_ids(const AudienceSpec& audience) {
    if (const auto* cls = std::get_if<ClassAudience>(&audience)) {
        return cls->members;
    }
    if (const auto* list = std::get_if<PersonList>(&audience)) {
        return list->persons;
    }
    return {};
}

AudienceSpec strip_for_duplication(const AudienceSpec& audience) {
    if (const auto* cls = std::get_if<ClassAudience>(&audience)) {
        ClassAudience stripped = *cls;
        stripped.name.clear();
        return stripped;
    }
    return audience;
}

std::string_view to_string(PublicationType type) {
    switch (type) {
        case PublicationType::DemandeAide: return "demande d'aide";
        case PublicationType::Information: return "information";
        case PublicationType::Document: return "document";
        case PublicationType::Statut: return "statut";
    }
    return "statut";
}

std::string_view to_string(Level level) {
    switch (level) {
        case Level::Primaire: return "Primaire";
        case Level::CEM: return "CEM";
        case Level::Lycee: return "Lycée";
    }
    return "Lycée";
}

PublicationType parse_publication_type(std::string_view text) {
    const std::string lowered = lower_ascii(text);
    if (lowered == "demande d'aide" || lowered == "demande-aide" || lowered == "demande_aide") {
        return PublicationType::DemandeAide;
    }
    if (lowered == "information") {
        return PublicationType::Information;
    }
    if (lowered == "document") {
        return PublicationType::Document;
    }
    if (lowered == "statut") {
        return PublicationType::Statut;
    }
    throw ProfileError("unknown publication type '" + std::string(text) + "'");
}

Level parse_level(std::string_view text) {
    const std::string lowered = lower_ascii(text);
    if (lowered == "primaire") {
        return Level::Primaire;
    }
    if (lowered == "cem") {
        return Level::CEM;
    }
    if (lowered == "lycee" || lowered == "lycée") {
        return Level::Lycee;
    }
    throw ProfileError("unknown level '" + std::string(text) + "'");
}

bool PublicationMetadata::operator==(const PublicationMetadata& other) const {
    return owner == other.owner && owner.pseudonym == other.owner.pseudonym && content_id == other.content_id &&
           publication_type == other.publication_type && science == other.science && level == other.level &&
           audience == other.audience && rights == other.rights && via == other.via;
}

AccessRights default_rights(const AudienceSpec& audience) {
    AccessRights rights;
    if (std::holds_alternative<Public>(audience)) {
        rights.distribution = Distribution::Allowed;
    } else if (std::holds_alternative<ClassAudience>(audience)) {
        rights.replication_protection = Protection::Encrypted;
    } else if (std::holds_alternative<MeOnly>(audience)) {
        rights.duplication_authorized = false;
    }
    return rights;
}

// ----------------------------------------------------------------- KeyRing

void KeyRing::store(const KeyDelivery& delivery) {
    keys_[KeyRingEntry{delivery.owner, delivery.class_id, delivery.version}] = delivery.keys;
}

const crypto::KeyPair* KeyRing::find(const UserId& owner, std::string_view class_id, std::uint32_t version) const {
    const auto it = keys_.find(KeyRingEntry{owner, std::string(class_id), version});
    return it == keys_.end() ? nullptr : &it->second;
}

void KeyRing::forget_owner(const UserId& owner) {
    std::erase_if(keys_, [&](const auto& entry) { return entry.first.owner == owner; });
}

// ---------------------------------------------------------------- settings

std::string DefaultAudience::label() const {
    if (me_only) {
        return "Moi-seulement";
    }
    std::string out;
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        if (i > 0) {
            out += " et ";
        }
        out += class_names[i];
    }
    return out;
}

std::string SettingRow::protection_label() const {
    return protection == Protection::Clear ? "Droits d'accès (Clair)" : "Droits d'accès + Chiffrement";
}

const SettingRow& ProfileSettings::row(ContentCategory category) const {
    for (const auto& r : rows) {
        if (r.category == category) {
            return r;
        }
    }
    throw ProfileError("settings row missing");
}

ProfileSettings default_settings() {
    using C = ContentCategory;
    const DefaultAudience famille{false, {"Famille"}};
    const DefaultAudience amis{false, {"Amis"}};
    const DefaultAudience me{true, {}};
    return ProfileSettings{{
        {C::Identite, "Identité", Protection::Clear, famille},
        {C::AttributsDemographiques, "Attributs démographiques", Protection::Clear, famille},
        {C::ActivitesReseautage, "Activités de réseautage social", Protection::Encrypted, amis},
        {C::ActivitesApprentissage, "Activités liées à l'apprentissage", Protection::Clear, me},
        {C::CriteresComparaison, "Critères de comparaison", Protection::Clear, me},
        {C::Interets, "Ses intérêts", Protection::Encrypted, amis},
        {C::Publications, "Les publications", Protection::Encrypted, amis},
        {C::Certifications, "Certification et diplôme", Protection::Encrypted,
         DefaultAudience{false, {"Camarades", "Famille"}}},
        {C::Connexions, "Les connexions", Protection::Clear, me},
    }};
}

// ------------------------------------------------------------- self tests

boost::rational<std::int64_t> parse_score(std::string_view text) {
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const std::int64_t den = parse_int(text.substr(slash + 1));
        if (den <= 0) {
            throw ProfileError("score denominator must be positive");
        }
        return {parse_int(text.substr(0, slash)), den};
    }
    if (const auto dot = text.find('.'); dot != std::string_view::npos) {
        const std::string_view whole = text.substr(0, dot);
        const std::string_view frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 9) {
            throw ProfileError("bad decimal score '" + std::string(text) + "'");
        }
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) {
            scale *= 10;
        }
        const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
        return {w * scale + parse_int(frac), scale};
    }
    return {parse_int(text), 1};
}

std::string format_score(const boost::rational<std::int64_t>& score) {
    return std::to_string(score.numerator()) + "/" + std::to_string(score.denominator());
}

// ---------------------------------------------------------------- Profile

const std::vector<DefaultClassSpec>& default_classes() {
    static const std::vector<DefaultClassSpec> classes = {
        {"CC1", "amis", "Amis"},
        {"CC2", "enseignants", "Mes enseignants"},
        {"CC3", "camarades", "Mes camarades"},
        {"CC4", "famille", "Famille"},
        {"CC5", "aidants", "Aidants préférés"},
    };
    return classes;
}

Profile::Profile(UserId owner, crypto::Rng& rng, unsigned key_bits)
    : owner_(std::move(owner)), key_bits_(key_bits), settings_(default_settings()) {
    for (const auto& spec : default_classes()) {
        ConnectionClass cls;
        cls.class_id = std::string(spec.class_id);
        cls.key = std::string(spec.key);
        cls.name = std::string(spec.name);
        cls.key_versions.push_back({0, crypto::generate_keypair(key_bits_, rng)});
        classes_.emplace(cls.class_id, std::move(cls));
    }
}

void Profile::add_friend(const UserId& user) {
    if (user == owner_) {
        throw ProfileError("a user cannot befriend themselves");
    }
    if (is_excluded(user)) {
        throw ProfileError("user " + user.str() + " is blocked or removed");
    }
    friends_.insert(user);
}

std::vector<KeyDelivery> Profile::block(const UserId& user, crypto::Rng& rng) {
    std::vector<KeyDelivery> deliveries;
    for (auto& [id, cls] : classes_) {
        if (cls.members.count(user)) {
            auto rotated = remove_from_class(user, id, rng);
            deliveries.insert(deliveries.end(), rotated.begin(), rotated.end());
        }
    }
    friends_.erase(user);
    blocked_.insert(user);
    return deliveries;
}

void Profile::mark_removed(const UserId& user) {
    friends_.erase(user);
    removed_.insert(user);
}

bool Profile::has_class(std::string_view id_or_key) const {
    for (const auto& [id, cls] : classes_) {
        if (id == id_or_key || cls.key == id_or_key) {
            return true;
        }
    }
    return false;
}

const ConnectionClass& Profile::find_class(std::string_view id_or_key) const {
    for (const auto& [id, cls] : classes_) {
        if (id == id_or_key || cls.key == id_or_key) {
            return cls;
        }
    }
    throw ProfileError("unknown connection class '" + std::string(id_or_key) + "'");
}

ConnectionClass& Profile::find_class_mut(std::string_view id_or_key) {
    return const_cast<ConnectionClass&>(std::as_const(*this).find_class(id_or_key));
}

std::vector<KeyDelivery> Profile::assign_to_class(const UserId& member, std::string_view class_ref) {
    ConnectionClass& cls = find_class_mut(class_ref);
    if (is_excluded(member)) {
        throw ProfileError("member " + member.str() + " is blocked or removed");
    }
    if (!friends_.count(member)) {
        throw ProfileError("member " + member.str() + " is not a friend of " + owner_.str());
    }
    if (!cls.members.insert(member).second) {
        return {};
    }
    const ClassKeyVersion& current = cls.current_key();
    return {KeyDelivery{owner_, member, cls.class_id, current.version, current.keys}};
}

std::vector<KeyDelivery> Profile::remove_from_class(const UserId& member, std::string_view class_ref,
                                                    crypto::Rng& rng) {
    ConnectionClass& cls = find_class_mut(class_ref);
    if (!cls.members.erase(member)) {
        return {};
    }
    cls.former_members.insert(member);
    const std::uint32_t next = cls.current_key().version + 1;
    cls.key_versions.push_back({next, crypto::generate_keypair(key_bits_, rng)});
    std::vector<KeyDelivery> deliveries;
    for (const auto& remaining : cls.members) {
        deliveries.push_back(KeyDelivery{owner_, remaining, cls.class_id, next, cls.current_key().keys});
    }
    return deliveries;
}

ClassAudience Profile::class_audience(std::string_view class_ref) const {
    const ConnectionClass& cls = find_class(class_ref);
    ClassAudience audience{cls.class_id, cls.name, {}};
    for (const auto& member : cls.members) {
        if (!is_excluded(member)) {
            audience.members.insert(member);
        }
    }
    return audience;
}

void Profile::record_self_test(SelfTestResult result) {
    if (result.score < 0 || result.score > 1) {
        throw ProfileError("self-test score must lie in [0, 1]");
    }
    self_tests_.push_back(std::move(result));
}

}  // namespace appraide::profile
