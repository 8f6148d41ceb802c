#include <gtest/gtest.h>

#include "appraide/privacy.hpp"

using namespace appraide;
using namespace appraide::privacy;
using profile::ClassAudience;
using profile::Distribution;
using profile::KeyRing;
using profile::PersonList;
using profile::Role;

namespace {

UserId user(std::uint32_t n, std::string pseudo = {}) { return UserId{Role::Apprenant, n, std::move(pseudo)}; }

Publication make_pub(const UserId& owner, std::uint64_t id, profile::AudienceSpec audience, std::string body) {
    Publication p;
    p.metadata.owner = owner;
    p.metadata.content_id = id;
    p.metadata.publication_type = profile::PublicationType::DemandeAide;
    p.metadata.science = "Mathématique";
    p.metadata.audience = audience;
    p.metadata.rights = profile::default_rights(audience);
    p.body = std::move(body);
    return p;
}

}  // namespace

class Network : public ::testing::Test {
protected:
    crypto::Rng rng{11};
    UserId alice = user(1, "alice"), bob = user(2, "bobby"), carol = user(3, "carol"), dave = user(4, "david"),
           alex = user(5, "alexa"), eve = user(6, "evely");
    profile::Profile alice_profile{alice, rng, 64};
    profile::Profile bob_profile{bob, rng, 64};
    KeyRing bob_ring, carol_ring, dave_ring;

    void SetUp() override {
        for (const auto& f : {bob, carol, dave, alex}) {
            alice_profile.add_friend(f);
        }
        for (const auto& d : alice_profile.assign_to_class(bob, "camarades")) {
            bob_ring.store(d);
        }
        for (const auto& d : alice_profile.assign_to_class(carol, "camarades")) {
            carol_ring.store(d);
        }
        alice_profile.assign_to_class(alex, "famille");
        for (const auto& f : {alice, carol, dave}) {
            bob_profile.add_friend(f);
        }
        for (const auto& d : bob_profile.assign_to_class(carol, "amis")) {
            carol_ring.store(d);
        }
        for (const auto& d : bob_profile.assign_to_class(dave, "amis")) {
            dave_ring.store(d);
        }
    }

    Publication class_post(std::string body = "y a-t-il quelqu'un qui a les cours de Mr. X ?") {
        return make_pub(alice, 1, alice_profile.class_audience("camarades"), std::move(body));
    }
};

TEST_F(Network, PublicGoesToServerOnly) {
    const auto plan = plan_placement(make_pub(alice, 1, profile::Public{}, "x").metadata, alice_profile);
    ASSERT_EQ(plan.size(), 1u);
    EXPECT_TRUE(plan[0].to_server);
    EXPECT_EQ(plan[0].form, ReplicaForm::Clear);
}

TEST_F(Network, ClassContentIsEncryptedOnEveryFriend) {
    const auto plan = plan_placement(class_post().metadata, alice_profile);
    UserSet holders;
    for (const auto& p : plan) {
        EXPECT_FALSE(p.to_server);
        EXPECT_EQ(p.form, ReplicaForm::Encrypted);
        holders.insert(p.holder);
    }
    EXPECT_EQ(holders, (UserSet{bob, carol, dave, alex}));
}

TEST_F(Network, PersonListIsClearOnListedOnly) {
    const auto plan = plan_placement(make_pub(alice, 2, PersonList{{bob, alex}}, "x").metadata, alice_profile);
    ASSERT_EQ(plan.size(), 2u);
    EXPECT_EQ(plan[0].holder, bob);
    EXPECT_EQ(plan[1].holder, alex);
    for (const auto& p : plan) {
        EXPECT_EQ(p.form, ReplicaForm::Clear);
    }
}

TEST_F(Network, MeOnlyAndBlockedGetNothing) {
    EXPECT_TRUE(plan_placement(make_pub(alice, 3, profile::MeOnly{}, "x").metadata, alice_profile).empty());
    alice_profile.block(dave, rng);
    for (const auto& p : plan_placement(class_post().metadata, alice_profile)) {
        EXPECT_NE(p.holder, dave);
    }
    for (const auto& p : plan_placement(make_pub(alice, 2, PersonList{{dave, bob}}, "x").metadata, alice_profile)) {
        EXPECT_NE(p.holder, dave);
    }
}

TEST_F(Network, UnknownClassIsAnError) {
    auto pub = make_pub(alice, 1, ClassAudience{"CC9", "?", {bob}}, "x");
    EXPECT_THROW(plan_placement(pub.metadata, alice_profile), PrivacyError);
}

TEST_F(Network, AccessAllowsMemberAndDuplicatesEncrypted) {
    const auto pub = class_post();
    const auto r = handle_access_request(bob, &pub, alice_profile, 5, rng);
    EXPECT_EQ(r.outcome, AccessOutcome::Allow);
    EXPECT_EQ(r.plaintext, pub.body);
    ASSERT_TRUE(r.duplicate);
    EXPECT_EQ(r.duplicate->form, ReplicaForm::Encrypted);
    EXPECT_TRUE(r.duplicate->clear_body.empty());
    EXPECT_EQ(r.duplicate->received_at, 5);
}

TEST_F(Network, DeniedFriendStillStoresCiphertext) {
    const auto pub = class_post();
    const auto r = handle_access_request(dave, &pub, alice_profile, 5, rng);
    EXPECT_EQ(r.outcome, AccessOutcome::DenyNotAuthorized);
    EXPECT_TRUE(r.plaintext.empty());
    ASSERT_TRUE(r.duplicate);
    EXPECT_EQ(r.duplicate->form, ReplicaForm::Encrypted);
    EXPECT_EQ(r.duplicate->sealed_body.body.find(pub.body), std::string::npos);
}

TEST_F(Network, StrangerAndUnknownContent) {
    const auto pub = class_post();
    const auto r = handle_access_request(eve, &pub, alice_profile, 5, rng);
    EXPECT_EQ(r.outcome, AccessOutcome::DenyNotAuthorized);
    EXPECT_FALSE(r.duplicate);
    EXPECT_TRUE(r.plaintext.empty());
    EXPECT_EQ(handle_access_request(bob, nullptr, alice_profile, 5, rng).outcome, AccessOutcome::DenyUnknownContent);
}

TEST_F(Network, PersonListAccessDuplicatesClear) {
    const auto pub = make_pub(alice, 2, PersonList{{bob, alex}}, "entre nous");
    const auto r = handle_access_request(alex, &pub, alice_profile, 1, rng);
    EXPECT_EQ(r.outcome, AccessOutcome::Allow);
    ASSERT_TRUE(r.duplicate);
    EXPECT_EQ(r.duplicate->form, ReplicaForm::Clear);
    const auto denied = handle_access_request(carol, &pub, alice_profile, 1, rng);
    EXPECT_EQ(denied.outcome, AccessOutcome::DenyNotAuthorized);
    EXPECT_FALSE(denied.duplicate);
}

TEST_F(Network, RenderNeedsAudienceAndKey) {
    const auto pub = class_post();
    const auto& cls = alice_profile.find_class("camarades");
    const auto bob_copy = make_encrypted_replica(pub, cls, bob, 1, rng);
    EXPECT_EQ(render_feed_item(bob, bob_copy, bob_ring), pub.body);

    // Dave somehow holds the class key but is not on the audience list.
    KeyRing leaked = bob_ring;
    const auto dave_copy = make_encrypted_replica(pub, cls, dave, 1, rng);
    EXPECT_FALSE(render_feed_item(dave, dave_copy, leaked));

    // In the audience, key not yet delivered.
    KeyRing empty;
    EXPECT_FALSE(render_feed_item(bob, bob_copy, empty));
    EXPECT_EQ(render_feed_item(bob, bob_copy, bob_ring, {}), pub.body);
    EXPECT_FALSE(render_feed_item(bob, bob_copy, bob_ring, {alice}));
}

TEST_F(Network, RemovedMemberCannotReadNewPosts) {
    alice_profile.remove_from_class(bob, "camarades", rng);
    const auto pub = class_post("après");
    const auto copy = make_encrypted_replica(pub, alice_profile.find_class("camarades"), bob, 2, rng);
    EXPECT_FALSE(render_feed_item(bob, copy, bob_ring));
    // Even with audience checks bypassed, the old key does not open it.
    const auto* old = bob_ring.find(alice, "CC3", 0);
    ASSERT_NE(old, nullptr);
    EXPECT_THROW(crypto::decrypt_envelope(old->private_key(), copy.sealed_body), crypto::IntegrityError);
}

TEST_F(Network, ReshareIntersectsAudiences) {
    auto pub = class_post();
    pub.metadata.rights.distribution = Distribution::Allowed;
    const auto result = reshare(bob, pub, bob_profile.class_audience("amis"), 100);
    ASSERT_EQ(result.outcome, ReshareOutcome::Created);
    const Publication& derived = *result.publication;
    EXPECT_EQ(derived.metadata.owner, bob);
    ASSERT_TRUE(derived.metadata.via);
    EXPECT_EQ(derived.metadata.via->original_owner, alice);

    const auto& amis = bob_profile.find_class("amis");
    EXPECT_EQ(render_feed_item(carol, make_encrypted_replica(derived, amis, carol, 3, rng), carol_ring), pub.body);
    EXPECT_FALSE(render_feed_item(dave, make_encrypted_replica(derived, amis, dave, 3, rng), dave_ring));
    EXPECT_EQ(admitted_viewers(derived.metadata, {alice, bob, carol, dave, alex, eve}), (UserSet{bob, carol}));
}

TEST_F(Network, ReshareToPersonListPlacesClearOnlyInsideTheIntersection) {
    auto pub = class_post();
    pub.metadata.rights.distribution = Distribution::Allowed;
    const auto result = reshare(bob, pub, PersonList{{carol, dave}}, 101);
    ASSERT_EQ(result.outcome, ReshareOutcome::Created);
    const auto plan = plan_placement(result.publication->metadata, bob_profile);
    ASSERT_EQ(plan.size(), 1u);
    EXPECT_EQ(plan[0].holder, carol);
    EXPECT_EQ(plan[0].form, ReplicaForm::Clear);
}

TEST_F(Network, ReshareDeniedWithoutDistribution) {
    const auto pub = class_post();
    ASSERT_EQ(pub.metadata.rights.distribution, Distribution::None);
    EXPECT_EQ(reshare(bob, pub, bob_profile.class_audience("amis"), 100).outcome,
              ReshareOutcome::DenyNoDistribution);
    EXPECT_EQ(reshare(eve, pub, PersonList{{dave}}, 100).outcome, ReshareOutcome::DenyNotAuthorized);
    auto open = pub;
    open.metadata.rights.distribution = Distribution::Allowed;
    EXPECT_EQ(reshare(bob, open, profile::Public{}, 100).outcome, ReshareOutcome::DenyNoDistribution);
}

TEST_F(Network, PublicOriginalResharesFreely) {
    const auto pub = make_pub(alice, 7, profile::Public{}, "annonce");
    const auto result = reshare(bob, pub, bob_profile.class_audience("amis"), 100);
    ASSERT_EQ(result.outcome, ReshareOutcome::Created);
    EXPECT_FALSE(result.publication->metadata.via->allowed);
    EXPECT_EQ(admitted_viewers(result.publication->metadata, {carol, dave, eve}), (UserSet{carol, dave}));
}

TEST_F(Network, RestrictedDistributionNarrowsFurther) {
    auto pub = class_post();
    pub.metadata.rights.distribution = Distribution::Restricted;
    pub.metadata.rights.restricted_to = {dave};
    const auto result = reshare(bob, pub, bob_profile.class_audience("amis"), 100);
    ASSERT_EQ(result.outcome, ReshareOutcome::Created);
    EXPECT_EQ(admitted_viewers(result.publication->metadata, {carol, dave}), UserSet{});
}

TEST(Deletion, SignedRequestDeletesAndConfirms) {
    crypto::Rng rng(3);
    const auto owner_keys = crypto::generate_keypair(64, rng);
    const auto holder_keys = crypto::generate_keypair(64, rng);
    const UserId owner = user(1), holder = user(2);
    ReplicaStore store;
    Publication pub = make_pub(owner, 9, PersonList{{holder}}, "corps");
    ASSERT_TRUE(store.put(make_clear_replica(pub, holder, 0)));

    const auto req = make_deletion_request(owner, owner_keys.private_key(), DeletionScope::Content, 9, {holder});
    EXPECT_TRUE(verify_deletion_request(req, owner_keys.public_key()));
    const auto decoded = decode_deletion_request(Record::decode(encode_deletion_request(req).encode()));
    EXPECT_EQ(decoded.owner_signature, req.owner_signature);
    EXPECT_EQ(decoded.pending_holders, req.pending_holders);

    ASSERT_TRUE(store.apply_deletion(decoded, owner_keys.public_key()));
    EXPECT_FALSE(store.contains({owner, 9}));
    EXPECT_FALSE(store.put(make_clear_replica(pub, holder, 1)));

    const auto conf = make_confirmation(req, holder, holder_keys.private_key());
    const auto conf2 = decode_confirmation(Record::decode(encode_confirmation(conf).encode()));
    EXPECT_TRUE(verify_confirmation(conf2, holder_keys.public_key()));
    EXPECT_FALSE(verify_confirmation(conf2, owner_keys.public_key()));
}

TEST(Deletion, TamperedRequestIsIgnored) {
    crypto::Rng rng(4);
    const auto owner_keys = crypto::generate_keypair(256, rng);
    const UserId owner = user(1), holder = user(2);
    ReplicaStore store;
    store.put(make_clear_replica(make_pub(owner, 8, PersonList{{holder}}, "a"), holder, 0));
    store.put(make_clear_replica(make_pub(owner, 9, PersonList{{holder}}, "b"), holder, 0));
    auto req = make_deletion_request(owner, owner_keys.private_key(), DeletionScope::Content, 9, {});
    req.content_id ^= 1;  // now names content 8
    EXPECT_FALSE(store.apply_deletion(req, owner_keys.public_key()));
    EXPECT_TRUE(store.contains({owner, 8}));
    EXPECT_TRUE(store.contains({owner, 9}));
}

TEST(Deletion, AccountScopeRemovesEverythingOfOwner) {
    crypto::Rng rng(5);
    const auto owner_keys = crypto::generate_keypair(64, rng);
    const UserId owner = user(1), other = user(3), holder = user(2);
    ReplicaStore store;
    store.put(make_clear_replica(make_pub(owner, 1, PersonList{{holder}}, "a"), holder, 0));
    store.put(make_clear_replica(make_pub(owner, 2, PersonList{{holder}}, "b"), holder, 0));
    store.put(make_clear_replica(make_pub(other, 1, PersonList{{holder}}, "c"), holder, 0));
    const auto req = make_deletion_request(owner, owner_keys.private_key(), DeletionScope::Account, 0, {});
    ASSERT_TRUE(store.apply_deletion(req, owner_keys.public_key()));
    EXPECT_EQ(store.replicas().size(), 1u);
    EXPECT_FALSE(store.put(make_clear_replica(make_pub(owner, 3, PersonList{{holder}}, "d"), holder, 0)));
}

TEST(ReplicationLogTest, TracksHolders) {
    ReplicationLog log;
    const ContentKey k{user(1), 4};
    EXPECT_TRUE(log.record(k, user(2)));
    EXPECT_FALSE(log.record(k, user(2)));
    log.record(k, user(3));
    EXPECT_EQ(log.holders(k).size(), 2u);
    log.forget(k);
    EXPECT_TRUE(log.holders(k).empty());
}
