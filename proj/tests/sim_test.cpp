#include <gtest/gtest.h>

#include "appraide/sim.hpp"

using namespace appraide;
using namespace appraide::sim;
using profile::Role;

namespace {

Audience to_class(std::string ref) {
    Audience a;
    a.kind = Audience::Kind::Class;
    a.class_ref = std::move(ref);
    return a;
}

Audience to_persons(std::vector<UserId> persons) {
    Audience a;
    a.kind = Audience::Kind::Persons;
    a.persons = std::move(persons);
    return a;
}

Audience to_public() {
    Audience a;
    a.kind = Audience::Kind::Public;
    return a;
}

PublishRequest post(Audience audience, std::string body) {
    PublishRequest r;
    r.science = "Mathématique";
    r.audience = std::move(audience);
    r.body = std::move(body);
    return r;
}

}  // namespace

class SimWorld : public ::testing::Test {
protected:
    World w{7};
    UserId alice, bob, carol, dave;

    void SetUp() override {
        alice = w.register_user("alice", "pw-a", Role::Apprenant);
        bob = w.register_user("bobby", "pw-b", Role::Apprenant);
        carol = w.register_user("carol", "pw-c", Role::Apprenant);
        dave = w.register_user("david", "pw-d", Role::Apprenant);
        for (const auto& [p, pw] : {std::pair{"alice", "pw-a"}, {"bobby", "pw-b"}, {"carol", "pw-c"}, {"david", "pw-d"}}) {
            w.authenticate(p, pw);
        }
        w.befriend(alice, bob);
        w.befriend(alice, carol);
        w.assign_class(alice, bob, "camarades");
        w.run_to_quiescence();
    }

    void expect_clean() {
        const auto v = w.final_scan();
        EXPECT_TRUE(v.empty()) << (v.empty() ? "" : v.front());
    }
};

TEST_F(SimWorld, ClassPostReachesFriendsEncryptedAndRendersForMembersOnly) {
    const auto key = w.publish(alice, post(to_class("camarades"), "les cours de physique du lundi"));
    w.run_to_quiescence();
    EXPECT_EQ(w.replica_count(key), 2u);
    EXPECT_EQ(w.peer(carol).store.find(key)->form, privacy::ReplicaForm::Encrypted);
    EXPECT_TRUE(w.renders(bob, key));
    EXPECT_FALSE(w.renders(carol, key));
    EXPECT_FALSE(w.renders(dave, key));
    expect_clean();
}

TEST_F(SimWorld, OfflineHolderGetsReplicaAtLogin) {
    w.disconnect(bob);
    const auto key = w.publish(alice, post(to_class("camarades"), "devoir maison chapitre trois"));
    w.run_to_quiescence();
    EXPECT_FALSE(w.peer(bob).store.contains(key));
    w.authenticate("bobby", "pw-b");
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(bob, key));
    expect_clean();
}

TEST_F(SimWorld, ReplicationAlsoHappensWhenOwnerComesBack) {
    w.disconnect(bob);
    w.disconnect(alice);
    w.authenticate("bobby", "pw-b");
    w.run_to_quiescence();
    w.authenticate("alice", "pw-a");
    const auto key = w.publish(alice, post(to_class("camarades"), "resume du chapitre deux"));
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(bob, key));
}

TEST_F(SimWorld, PersonListIsClearOnListedPersonsOnly) {
    const auto key = w.publish(alice, post(to_persons({carol}), "message pour carol seulement"));
    w.run_to_quiescence();
    EXPECT_EQ(w.replica_count(key), 1u);
    EXPECT_EQ(w.peer(carol).store.find(key)->form, privacy::ReplicaForm::Clear);
    EXPECT_TRUE(w.renders(carol, key));
    EXPECT_FALSE(w.renders(bob, key));
    expect_clean();
}

TEST_F(SimWorld, PublicContentLivesOnTheServerAndFeeds) {
    const auto key = w.publish(alice, post(to_public(), "annonce publique du club"));
    w.run_to_quiescence();
    EXPECT_EQ(w.server().public_store.count(key), 1u);
    EXPECT_EQ(w.replica_count(key), 0u);
    EXPECT_TRUE(w.renders(dave, key));
    w.disconnect(dave);
    w.authenticate("david", "pw-d");
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(dave, key));
    w.delete_content(alice, key.content_id);
    w.run_to_quiescence();
    EXPECT_EQ(w.server().public_store.count(key), 0u);
    EXPECT_FALSE(w.renders(dave, key));
}

TEST_F(SimWorld, PublicPostNeedsAConnection) {
    w.disconnect(alice);
    try {
        w.publish(alice, post(to_public(), "hors ligne"));
        FAIL();
    } catch (const SimError& e) {
        EXPECT_EQ(e.code(), "not-connected");
    }
}

TEST_F(SimWorld, ResharingAPublicPostIsNotALeak) {
    auto req = post(to_public(), "annonce ouverte a tous");
    req.distribution = profile::Distribution::Allowed;
    const auto key = w.publish(alice, req);
    w.run_to_quiescence();
    w.befriend(bob, dave);
    w.assign_class(bob, dave, "camarades");
    const auto derived = w.reshare(bob, key, to_class("camarades"));
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(bob, derived));
    expect_clean();
}

TEST_F(SimWorld, DeletionReachesOnlineHoldersDirectly) {
    const auto key = w.publish(alice, post(to_class("camarades"), "a supprimer bientot"));
    w.run_to_quiescence();
    w.delete_content(alice, key.content_id);
    w.run_to_quiescence();
    EXPECT_EQ(w.replica_count(key), 0u);
    EXPECT_EQ(w.confirmation_count(key), 2u);
    EXPECT_EQ(w.escrow_count(), 0u);
    EXPECT_TRUE(w.peer(bob).store.is_tombstoned(key));
}

TEST_F(SimWorld, DeletionForOfflineHolderWaitsInEscrow) {
    const auto key = w.publish(alice, post(to_class("camarades"), "a supprimer plus tard"));
    w.run_to_quiescence();
    w.disconnect(bob);
    w.delete_content(alice, key.content_id);
    w.run_to_quiescence();
    EXPECT_EQ(w.escrow_count(bob), 1u);
    EXPECT_TRUE(w.peer(bob).store.contains(key));
    w.disconnect(alice);
    w.authenticate("bobby", "pw-b");
    w.run_to_quiescence();
    EXPECT_FALSE(w.peer(bob).store.contains(key));
    EXPECT_EQ(w.escrow_count(), 0u);
    // The confirmation waits for alice too.
    EXPECT_EQ(w.confirmation_count(key), 1u);
    w.authenticate("alice", "pw-a");
    w.run_to_quiescence();
    EXPECT_EQ(w.confirmation_count(key), 2u);
    expect_clean();
}

TEST_F(SimWorld, DeletionInFlightToDisconnectingHolderIsEscrowed) {
    const auto key = w.publish(alice, post(to_class("camarades"), "course de vitesse"));
    w.run_to_quiescence();
    w.delete_content(alice, key.content_id);
    w.disconnect(bob);
    w.run_to_quiescence();
    EXPECT_EQ(w.escrow_count(bob), 1u);
    w.authenticate("bobby", "pw-b");
    w.run_to_quiescence();
    EXPECT_EQ(w.replica_count(key), 0u);
}

TEST_F(SimWorld, PendingReplicaOfDeletedContentIsNeverSent) {
    w.disconnect(bob);
    const auto key = w.publish(alice, post(to_class("camarades"), "jamais envoye a bob"));
    w.run_to_quiescence();
    w.delete_content(alice, key.content_id);
    w.authenticate("bobby", "pw-b");
    w.run_to_quiescence();
    EXPECT_FALSE(w.peer(bob).store.contains(key));
}

TEST_F(SimWorld, AccountDeletionPurgesEverywhere) {
    const auto k1 = w.publish(alice, post(to_class("camarades"), "premier contenu prive"));
    const auto k2 = w.publish(alice, post(to_persons({bob}), "second contenu prive"));
    w.run_to_quiescence();
    w.disconnect(carol);
    w.delete_account(alice);
    w.run_to_quiescence();
    EXPECT_EQ(w.replica_count(k1), 1u);  // carol is offline
    EXPECT_EQ(w.replica_count(k2), 0u);
    w.authenticate("carol", "pw-c");
    w.run_to_quiescence();
    EXPECT_EQ(w.replica_count_of_owner(alice), 0u);
    EXPECT_EQ(w.escrow_count(), 0u);
    EXPECT_FALSE(w.server().credentials.count("alice"));
    EXPECT_FALSE(w.server().directory.count(alice));
    EXPECT_THROW(w.authenticate("alice", "pw-a"), SimError);
    EXPECT_TRUE(w.peer(bob).profile->is_excluded(alice));
    expect_clean();
}

TEST_F(SimWorld, RemovalFromClassRotatesKey) {
    w.assign_class(alice, carol, "camarades");
    w.run_to_quiescence();
    const auto before = w.publish(alice, post(to_class("camarades"), "avant le retrait"));
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(carol, before));
    w.remove_class(alice, carol, "camarades");
    w.run_to_quiescence();
    const auto after = w.publish(alice, post(to_class("camarades"), "apres le retrait"));
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(bob, after));
    EXPECT_FALSE(w.renders(carol, after));
    expect_clean();
}

TEST_F(SimWorld, ReshareIntersectsAudiences) {
    w.befriend(bob, dave);
    w.befriend(bob, carol);
    w.assign_class(bob, carol, "amis");
    w.assign_class(bob, dave, "amis");
    w.assign_class(alice, carol, "camarades");
    w.run_to_quiescence();
    const auto original = w.publish(alice, [] {
        auto r = post(to_class("camarades"), "fiche de revision partageable");
        r.distribution = profile::Distribution::Allowed;
        return r;
    }());
    w.run_to_quiescence();
    const auto derived = w.reshare(bob, original, to_class("amis"));
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(carol, derived));
    EXPECT_FALSE(w.renders(dave, derived));
    expect_clean();

    // Deleting the original takes the re-share with it.
    w.delete_content(alice, original.content_id);
    w.run_to_quiescence();
    EXPECT_EQ(w.replica_count(derived), 0u);
}

TEST_F(SimWorld, ReshareOfNonDistributableIsRefused) {
    const auto key = w.publish(alice, post(to_class("camarades"), "ne pas partager svp"));
    w.run_to_quiescence();
    try {
        w.reshare(bob, key, to_class("amis"));
        FAIL();
    } catch (const SimError& e) {
        EXPECT_EQ(e.code(), "no-distribution");
    }
}

TEST_F(SimWorld, AccessRequestOutsideAudienceIsDenied) {
    const auto key = w.publish(alice, post(to_persons({bob}), "rendez-vous a la bibliotheque"));
    w.run_to_quiescence();
    EXPECT_FALSE(w.view(dave, key));
    w.run_to_quiescence();
    EXPECT_FALSE(w.peer(dave).store.contains(key));
    const auto& log = w.render_log();
    EXPECT_FALSE(log.back().rendered);
    expect_clean();
}

TEST_F(SimWorld, AccessRequestByListedPersonDuplicatesClear) {
    w.disconnect(bob);
    const auto key = w.publish(alice, post(to_persons({bob}), "seance de soutien jeudi"));
    w.run_to_quiescence();
    w.authenticate("bobby", "pw-b");
    // Viewing before the replica arrives asks the owner directly.
    w.peer_for_test(alice).pending.clear();
    EXPECT_FALSE(w.view(bob, key));
    w.run_to_quiescence();
    EXPECT_TRUE(w.peer(bob).store.contains(key));
    EXPECT_TRUE(w.render_log().back().rendered);
    expect_clean();
}

TEST_F(SimWorld, BlockHidesAndExcludes) {
    const auto key = w.publish(bob, post(to_persons({alice}), "contenu de bob pour alice"));
    w.run_to_quiescence();
    EXPECT_TRUE(w.renders(alice, key));
    w.block(alice, bob);
    EXPECT_FALSE(w.renders(alice, key));
    EXPECT_THROW(w.send_message(bob, alice, "bonjour"), SimError);
    EXPECT_EQ(w.server().reputation.find(bob)->spam_blocks, 1);
}

TEST_F(SimWorld, PrivateMessagesStayOffTheServer) {
    w.send_message(alice, bob, "mon numero est le 0555");
    w.disconnect(carol);
    w.send_message(alice, carol, "a lire plus tard stp");
    w.run_to_quiescence();
    EXPECT_EQ(w.peer(bob).inbox->messages().size(), 1u);
    EXPECT_EQ(w.peer(carol).inbox->messages().size(), 0u);
    w.authenticate("carol", "pw-c");
    w.run_to_quiescence();
    ASSERT_EQ(w.peer(carol).inbox->messages().size(), 1u);
    EXPECT_EQ(w.peer(carol).inbox->messages()[0].body, "a lire plus tard stp");
    expect_clean();
}

TEST_F(SimWorld, SelfTestScoresStayLocal) {
    w.record_self_test(alice, "algebre-1", "17/20");
    EXPECT_EQ(w.peer(alice).profile->self_tests().size(), 1u);
    EXPECT_THROW(w.record_self_test(alice, "x", "pas un score"), SimError);
    expect_clean();
}

TEST(SimAccounts, RegistrationAndLoginErrors) {
    World w(1);
    const auto code = [&](auto&& f) {
        try {
            f();
        } catch (const SimError& e) {
            return e.code();
        }
        return std::string("ok");
    };
    EXPECT_EQ(code([&] { w.register_user("abc", "x", Role::Apprenant); }), "pseudonym-too-short");
    w.register_user("abcd", "x", Role::Apprenant);
    EXPECT_EQ(code([&] { w.register_user("abcd", "y", Role::Apprenant); }), "pseudonym-taken");
    EXPECT_EQ(code([&] { w.register_user("other", "y", Role::Apprenant, 1); }), "id-taken");
    EXPECT_EQ(code([&] { w.authenticate("abcd", "wrong"); }), "bad-credentials");
    EXPECT_EQ(code([&] { w.authenticate("nobody", "x"); }), "bad-credentials");
    const auto t = w.register_user("prof1", "p", Role::Enseignant, 204);
    EXPECT_EQ(t.str(), "Enseignant_204");
    EXPECT_EQ(code([&] { w.authenticate("prof1", "p"); }), "not-approved");
    w.approve_teacher(t);
    EXPECT_EQ(code([&] { w.authenticate("prof1", "p"); }), "ok");
    EXPECT_TRUE(w.is_connected(t));
    EXPECT_EQ(w.resolve("Enseignant_204"), t);
    EXPECT_EQ(w.resolve("prof1"), t);
    // The server keeps a salted digest, never the password.
    EXPECT_EQ(w.server().dump().find(" p\n"), std::string::npos);
}

namespace {

std::string scripted_run(std::uint64_t seed) {
    World w(seed);
    const auto a = w.register_user("alice", "a", Role::Apprenant);
    const auto b = w.register_user("bobby", "b", Role::Apprenant);
    w.authenticate("alice", "a");
    w.authenticate("bobby", "b");
    w.befriend(a, b);
    w.assign_class(a, b, "camarades");
    w.publish(a, post(to_class("camarades"), "contenu deterministe"));
    w.send_message(b, a, "salut alice, ca va ?");
    w.run_to_quiescence();
    w.disconnect(b);
    w.delete_content(a, 1);
    w.run_to_quiescence();
    w.authenticate("bobby", "b");
    w.run_to_quiescence();
    return w.trace_text() + w.dump();
}

}  // namespace

TEST(SimDeterminism, SameSeedSameTrace) {
    const auto first = scripted_run(42);
    EXPECT_EQ(first, scripted_run(42));
    EXPECT_NE(first, scripted_run(43));
    EXPECT_NE(first.find("|send:replica|"), std::string::npos);
}

TEST(SimScanner, DetectsInjectedLeaks) {
    World w(3);
    const auto a = w.register_user("alice", "a", Role::Apprenant);
    const auto b = w.register_user("bobby", "b", Role::Apprenant);
    const auto c = w.register_user("carol", "c", Role::Apprenant);
    for (const auto& [p, pw] : {std::pair{"alice", "a"}, {"bobby", "b"}, {"carol", "c"}}) {
        w.authenticate(p, pw);
    }
    w.befriend(a, b);
    const auto key = w.publish(a, post(to_persons({b}), "secret reserve a bob"));
    w.run_to_quiescence();
    EXPECT_TRUE(w.final_scan().empty());

    // A clear copy on a non-audience machine.
    auto copy = *w.peer(b).store.find(key);
    copy.holder = c;
    w.peer_for_test(c).store.put(copy);
    w.schedule(w.now() + 1, [] {});
    w.run_to_quiescence();
    const auto v = w.final_scan();
    ASSERT_FALSE(v.empty());
    EXPECT_NE(v.front().find("clear replica"), std::string::npos);
}

TEST(SimScanner, DetectsServerSideLeak) {
    World w(3);
    const auto a = w.register_user("alice", "a", Role::Apprenant);
    w.authenticate("alice", "a");
    w.publish(a, post(Audience{}, "mes notes personnelles"));
    auto& server = const_cast<ServerNode&>(w.server());
    server.reports.push_back({a, a, reputation::Category::Spam, "mes notes personnelles"});
    EXPECT_FALSE(w.final_scan().empty());
}

class SimMatching : public ::testing::Test {
protected:
    World w{5};
    UserId learner, helper_friend, stranger;

    void SetUp() override {
        learner = w.register_user("learner", "l", Role::Apprenant);
        helper_friend = w.register_user("friend", "f", Role::Apprenant);
        stranger = w.register_user("stranger", "s", Role::Apprenant);
        w.authenticate("learner", "l");
        w.authenticate("friend", "f");
        w.authenticate("stranger", "s");
        w.befriend(learner, helper_friend);
        matching::HelperPreferences prefs;
        prefs.levels = {profile::Level::Lycee};
        prefs.subjects = {"Mathématique"};
        w.set_prefs(stranger, prefs, true);
        w.run_to_quiescence();
    }

    matching::HelpRequest request() const {
        matching::HelpRequest r;
        r.requester = learner;
        r.subject = "Mathématique";
        r.chapter = "Fonctions";
        r.description = "je bloque sur les limites";
        return r;
    }
};

TEST_F(SimMatching, FriendsFirstThenServer) {
    w.request_help(request());
    w.run_until(w.now() + 1);
    EXPECT_EQ(w.peer(learner).help.phase, "friends");
    EXPECT_TRUE(w.peer(stranger).incoming_requests.empty());
    w.run_to_quiescence();
    EXPECT_EQ(w.peer(learner).help.phase, "server");
    EXPECT_EQ(w.peer(stranger).incoming_requests.size(), 1u);
    const auto offers = w.ranked_offers(learner);
    ASSERT_EQ(offers.size(), 1u);
    EXPECT_EQ(offers[0].offerer, stranger);
    // The friend was asked in the first phase and is not asked again.
    EXPECT_TRUE(w.peer(helper_friend).incoming_requests.empty());
}

TEST_F(SimMatching, FriendOfferKeepsRequestAmongFriends) {
    matching::HelperPreferences prefs;
    prefs.levels = {profile::Level::Lycee};
    prefs.subjects = {"Mathématique"};
    w.set_prefs(helper_friend, prefs, true);
    w.request_help(request());
    w.run_to_quiescence();
    EXPECT_EQ(w.peer(learner).help.phase, "friends");
    EXPECT_TRUE(w.peer(stranger).incoming_requests.empty());
    ASSERT_EQ(w.ranked_offers(learner).size(), 1u);
}

TEST_F(SimMatching, SessionEvaluationGoesPeerToPeerOnly) {
    w.request_help(request());
    w.run_to_quiescence();
    const auto session = w.accept_offer(learner, stranger);
    EXPECT_THROW(w.evaluate(session, learner, "tres-utile", true), SimError);
    w.end_session(session);
    w.evaluate(session, learner, "tres-utile", true);
    w.evaluate(session, stranger, "bon", true);
    EXPECT_THROW(w.evaluate(session, learner, "utile", true), SimError);
    EXPECT_THROW(w.evaluate(session, helper_friend, "utile", true), SimError);
    w.run_to_quiescence();
    EXPECT_EQ(w.peer(stranger).received_evaluations.size(), 1u);
    EXPECT_EQ(w.peer(learner).evaluations.rating_of_helper(stranger), matching::HelpeeRating::TresUtile);
    EXPECT_TRUE(w.final_scan().empty());
}

TEST(SimReputation, ReportsReachTheServerAsDigests) {
    World w(9);
    std::vector<UserId> users;
    for (const auto* name : {"offender", "victim1", "victim2", "victim3", "victim4"}) {
        users.push_back(w.register_user(name, "x", Role::Apprenant));
        w.authenticate(name, "x");
    }
    const UserId offender = users[0];
    const auto key = w.publish(offender, post(to_persons({users[1]}), "message insultant prive"));
    w.run_to_quiescence();
    w.report_abuse(users[1], offender, reputation::Category::Intimidateur, key);
    EXPECT_FALSE(w.renders(users[1], key));
    for (int i = 2; i <= 4; ++i) {
        w.report_abuse(users[i], offender, reputation::Category::Intimidateur, std::nullopt);
    }
    const auto* rec = w.server().reputation.find(offender);
    ASSERT_NE(rec, nullptr);
    EXPECT_EQ(rec->total_reports, 4);
    EXPECT_TRUE(rec->review_requested);
    EXPECT_EQ(w.server().reports.front().content_digest.size(), 64u);
    const auto outcome = w.warn(users[1], offender, false, true);
    EXPECT_EQ(outcome.prompts, 2);
    EXPECT_FALSE(outcome.blocked);
    EXPECT_EQ(w.server().reputation.find(offender)->assistant_visits, 1);
    w.admin_review(offender, 0);
    EXPECT_EQ(w.server().reputation.find(offender)->decision.str(), "Suspendu");
    EXPECT_TRUE(w.final_scan().empty());
}
