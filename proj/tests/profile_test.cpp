#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "appraide/profile.hpp"

using namespace appraide;
using namespace appraide::profile;

namespace {

std::string read_fixture(const std::string& name) {
    std::ifstream in(std::string(APPRAIDE_SOURCE_DIR) + "/fixtures/" + name);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

UserId user(Role role, std::uint32_t number, std::string pseudonym = {}) {
    return UserId{role, number, std::move(pseudonym)};
}

PublicationMetadata fig32_record() {
    PublicationMetadata m;
    m.owner = user(Role::Apprenant, 5484, "Marwa");
    m.content_id = 17;
    m.publication_type = PublicationType::DemandeAide;
    m.science = "Mathématique";
    m.level = Level::Lycee;
    m.audience = ClassAudience{"CC2", "Mes enseignants",
                               {user(Role::Enseignant, 80), user(Role::Enseignant, 1088), user(Role::Enseignant, 4852)}};
    m.rights.replication_protection = Protection::Encrypted;
    m.rights.distribution = Distribution::None;
    m.rights.duplication_authorized = true;
    return m;
}

}  // namespace

TEST(UserIds, FormatAndParse) {
    EXPECT_EQ(user(Role::Enseignant, 80).str(), "Enseignant_80");
    EXPECT_EQ(UserId::parse("Apprenant_5484"), user(Role::Apprenant, 5484));
    EXPECT_EQ(user(Role::Apprenant, 1, "Marwa"), user(Role::Apprenant, 1, "Other"));
    EXPECT_THROW(UserId::parse("5484"), ProfileError);
    EXPECT_THROW(UserId::parse("Directeur_3"), ProfileError);
}

TEST(DefaultSettings, MatchesTableRowForRow) {
    const ProfileSettings settings = default_settings();
    ASSERT_EQ(settings.rows.size(), 9u);
    const std::vector<std::tuple<std::string, std::string, std::string>> expected = {
        {"Identité", "Droits d'accès (Clair)", "Famille"},
        {"Attributs démographiques", "Droits d'accès (Clair)", "Famille"},
        {"Activités de réseautage social", "Droits d'accès + Chiffrement", "Amis"},
        {"Activités liées à l'apprentissage", "Droits d'accès (Clair)", "Moi-seulement"},
        {"Critères de comparaison", "Droits d'accès (Clair)", "Moi-seulement"},
        {"Ses intérêts", "Droits d'accès + Chiffrement", "Amis"},
        {"Les publications", "Droits d'accès + Chiffrement", "Amis"},
        {"Certification et diplôme", "Droits d'accès + Chiffrement", "Camarades et Famille"},
        {"Les connexions", "Droits d'accès (Clair)", "Moi-seulement"},
    };
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(settings.rows[i].content_type, std::get<0>(expected[i]));
        EXPECT_EQ(settings.rows[i].protection_label(), std::get<1>(expected[i]));
        EXPECT_EQ(settings.rows[i].audience.label(), std::get<2>(expected[i]));
    }
    EXPECT_EQ(settings.row(ContentCategory::Identite).protection, Protection::Clear);
    EXPECT_EQ(settings.row(ContentCategory::Publications).protection, Protection::Encrypted);
    EXPECT_TRUE(settings.row(ContentCategory::CriteresComparaison).audience.me_only);
}

class ProfileFixture : public ::testing::Test {
protected:
    crypto::Rng rng{2};
    UserId alice = user(Role::Apprenant, 1, "alice");
    UserId bob = user(Role::Apprenant, 2, "bobby");
    UserId carol = user(Role::Apprenant, 3, "carol");
    UserId mallory = user(Role::Apprenant, 9, "mallory");
    Profile profile{alice, rng, 64};

    void SetUp() override {
        profile.add_friend(bob);
        profile.add_friend(carol);
        profile.add_friend(mallory);
    }
};

TEST_F(ProfileFixture, DefaultClassesEachHaveAKey) {
    ASSERT_EQ(profile.classes().size(), 5u);
    for (const auto& [id, cls] : profile.classes()) {
        ASSERT_EQ(cls.key_versions.size(), 1u);
        EXPECT_TRUE(crypto::is_valid_keypair(cls.current_key().keys)) << id;
    }
    EXPECT_EQ(profile.find_class("camarades").class_id, "CC3");
    EXPECT_EQ(profile.find_class("CC2").name, "Mes enseignants");
    EXPECT_THROW(profile.find_class("inconnus"), ProfileError);
}

TEST_F(ProfileFixture, AssignDeliversKeyAndIsIdempotent) {
    const auto first = profile.assign_to_class(bob, "camarades");
    ASSERT_EQ(first.size(), 1u);
    EXPECT_EQ(first[0].member, bob);
    EXPECT_EQ(first[0].class_id, "CC3");
    EXPECT_EQ(first[0].keys.modulus_n, profile.find_class("camarades").current_key().keys.modulus_n);

    KeyRing ring;
    for (const auto& d : first) {
        ring.store(d);
    }
    for (const auto& d : profile.assign_to_class(bob, "camarades")) {
        ring.store(d);
    }
    EXPECT_EQ(ring.size(), 1u);
    EXPECT_EQ(profile.find_class("camarades").members.size(), 1u);
}

TEST_F(ProfileFixture, AssignRejectsBlockedAndStrangers) {
    profile.block(mallory, rng);
    EXPECT_THROW(profile.assign_to_class(mallory, "amis"), ProfileError);
    EXPECT_THROW(profile.assign_to_class(user(Role::Apprenant, 77), "amis"), ProfileError);
    EXPECT_THROW(profile.assign_to_class(bob, "inconnus"), ProfileError);
}

TEST_F(ProfileFixture, RemoveRotatesKeyForRemainingMembers) {
    profile.assign_to_class(bob, "camarades");
    profile.assign_to_class(carol, "camarades");
    const auto old_n = profile.find_class("camarades").current_key().keys.modulus_n;

    const auto rotation = profile.remove_from_class(bob, "camarades", rng);
    const auto& cls = profile.find_class("camarades");
    EXPECT_EQ(cls.members.size(), 1u);
    EXPECT_TRUE(cls.former_members.count(bob));
    ASSERT_EQ(rotation.size(), 1u);
    EXPECT_EQ(rotation[0].member, carol);
    EXPECT_EQ(rotation[0].version, 1u);
    EXPECT_NE(rotation[0].keys.modulus_n, old_n);

    EXPECT_TRUE(profile.remove_from_class(bob, "camarades", rng).empty());
    EXPECT_TRUE(profile.remove_from_class(bob, "famille", rng).empty());
}

TEST_F(ProfileFixture, BlockLeavesEveryClass) {
    profile.assign_to_class(mallory, "amis");
    profile.assign_to_class(bob, "amis");
    const auto deliveries = profile.block(mallory, rng);
    EXPECT_FALSE(profile.find_class("amis").members.count(mallory));
    EXPECT_FALSE(profile.friends().count(mallory));
    ASSERT_EQ(deliveries.size(), 1u);
    EXPECT_EQ(deliveries[0].member, bob);
    EXPECT_FALSE(profile.class_audience("amis").members.count(mallory));
}

TEST_F(ProfileFixture, SelfTestsStayLocalAndValidated) {
    profile.record_self_test({alice, "qcm-1", parse_score("0.85"), 3});
    profile.record_self_test({alice, "qcm-1", parse_score("17/20"), 9});
    ASSERT_EQ(profile.self_tests().size(), 2u);
    EXPECT_EQ(profile.self_tests()[0].taken_at, 3);
    EXPECT_EQ(profile.self_tests()[1].taken_at, 9);
    EXPECT_THROW(profile.record_self_test({alice, "qcm-2", parse_score("1.5"), 4}), ProfileError);
    EXPECT_THROW(profile.record_self_test({alice, "qcm-2", parse_score("-1/2"), 4}), ProfileError);
    EXPECT_EQ(format_score(parse_score("0.85")), "17/20");
}

TEST(MetadataXml, Fig32RecordMatchesFixtureByteForByte) {
    const std::string fixture = read_fixture("fig32_metadata.xml");
    ASSERT_FALSE(fixture.empty());
    EXPECT_EQ(serialize_metadata(fig32_record()), fixture);
    EXPECT_EQ(parse_metadata(fixture), fig32_record());
}

TEST(MetadataXml, DuplicationStripsListName) {
    PublicationMetadata duplicated = fig32_record();
    duplicated.audience = strip_for_duplication(duplicated.audience);
    EXPECT_EQ(serialize_metadata(duplicated), read_fixture("fig33_duplicated.xml"));
    const auto& cls = std::get<ClassAudience>(duplicated.audience);
    EXPECT_TRUE(cls.name.empty());
    EXPECT_EQ(cls.class_id, "CC2");
    EXPECT_EQ(cls.members.size(), 3u);
}

TEST(MetadataXml, RoundtripsEveryAudienceShape) {
    PublicationMetadata m = fig32_record();
    const std::vector<AudienceSpec> audiences = {
        MeOnly{}, Public{}, PersonList{{user(Role::Apprenant, 2), user(Role::Apprenant, 7)}},
        ClassAudience{"CC3", "Mes camarades & co \"x\"", {}}};
    for (const auto& audience : audiences) {
        m.audience = audience;
        m.rights = default_rights(audience);
        EXPECT_EQ(parse_metadata(serialize_metadata(m)), m);
    }
    m.rights.distribution = Distribution::Restricted;
    m.rights.restricted_to = {user(Role::Enseignant, 3)};
    m.via = Origin{user(Role::Enseignant, 44, "prof"), 9, UserSet{user(Role::Apprenant, 2)}};
    EXPECT_EQ(parse_metadata(serialize_metadata(m)), m);
    m.via->allowed.reset();
    EXPECT_EQ(parse_metadata(serialize_metadata(m)), m);
}

TEST(MetadataXml, ParseErrors) {
    std::string fixture = read_fixture("fig32_metadata.xml");
    std::string no_owner = fixture;
    no_owner.erase(no_owner.find("  <OWNER"), no_owner.find("\n", no_owner.find("  <OWNER")) + 1 - no_owner.find("  <OWNER"));
    try {
        parse_metadata(no_owner);
        FAIL() << "expected malformed-document";
    } catch (const MetadataError& e) {
        EXPECT_EQ(e.kind(), MetadataError::Kind::MalformedDocument);
        EXPECT_EQ(e.element(), "OWNER");
    }

    std::string extra = fixture;
    extra.insert(extra.find("  <Level>"), "  <Couleur>bleu</Couleur>\n");
    try {
        parse_metadata(extra);
        FAIL() << "expected unknown-element";
    } catch (const MetadataError& e) {
        EXPECT_EQ(e.kind(), MetadataError::Kind::UnknownElement);
        EXPECT_EQ(e.element(), "Couleur");
    }

    EXPECT_THROW(parse_metadata("<PUBLICATION><OWNER"), MetadataError);
    EXPECT_THROW(parse_metadata(""), MetadataError);
}
