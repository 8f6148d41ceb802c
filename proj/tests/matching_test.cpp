#include <gtest/gtest.h>

#include "appraide/matching.hpp"

using namespace appraide;
using namespace appraide::matching;
using profile::Role;

namespace {

UserId user(std::uint32_t n) { return UserId{Role::Apprenant, n, {}}; }

HelpRequest maths_request(int minutes) {
    HelpRequest r;
    r.requester = user(1);
    r.level = Level::Lycee;
    r.study_year = 2;
    r.subject = "Mathématique";
    r.chapter = "Suites";
    r.duration_minutes = minutes;
    return r;
}

HelperPreferences maths_prefs() {
    HelperPreferences p;
    p.levels = {Level::Lycee};
    p.subjects = {"Mathématique"};
    p.max_duration_minutes = 90;
    return p;
}

}  // namespace

TEST(Matching, PreferencesGateRequests) {
    EXPECT_TRUE(match_request_to_prefs(maths_request(60), maths_prefs()));
    auto closed = maths_prefs();
    closed.accepting = false;
    EXPECT_FALSE(match_request_to_prefs(maths_request(60), closed));
    auto short_prefs = maths_prefs();
    short_prefs.max_duration_minutes = 60;
    EXPECT_FALSE(match_request_to_prefs(maths_request(120), short_prefs));
    auto other_level = maths_request(30);
    other_level.level = Level::CEM;
    EXPECT_FALSE(match_request_to_prefs(other_level, maths_prefs()));
}

TEST(Matching, TeacherKindMustAgree) {
    auto req = maths_request(30);
    req.helper_grade = Role::Enseignant;
    EXPECT_THROW(validate(req), MatchingError);
    req.teacher_kind = TeacherKind::Freelancer;
    EXPECT_NO_THROW(validate(req));
    EXPECT_FALSE(match_request_to_prefs(req, maths_prefs()));
    auto prefs = maths_prefs();
    prefs.kind = TeacherKind::Freelancer;
    EXPECT_TRUE(match_request_to_prefs(req, prefs));
    EXPECT_TRUE(grade_matches(req, Role::Enseignant));
    EXPECT_FALSE(grade_matches(req, Role::Apprenant));
    EXPECT_THROW(validate(maths_request(0)), MatchingError);
}

TEST(Matching, CourseSizeBounds) {
    CourseAnnouncement c;
    for (int n : {1, 11}) {
        c.max_learners = n;
        EXPECT_THROW(validate(c), MatchingError);
    }
    for (int n : {2, 10}) {
        c.max_learners = n;
        EXPECT_NO_THROW(validate(c));
    }
}

TEST(Ranking, BlockedDroppedAndHistoryOrders) {
    EvaluationStore history;
    history.record({"s1", user(10), true, HelpeeRating::TresUtile, std::nullopt, true, 1});
    history.record({"s2", user(11), true, HelpeeRating::PasDuToutUtile, std::nullopt, false, 2});
    history.record({"s3", user(12), true, HelpeeRating::Utile, std::nullopt, true, 3});
    const std::vector<Offer> offers = {{user(11), "a"}, {user(20), "b"}, {user(13), "c"},
                                       {user(12), "d"}, {user(10), "e"}, {user(21), "f"}};
    const auto ranked = filter_and_rank_offers(offers, {user(13)}, history);
    std::vector<std::uint32_t> order;
    for (const auto& o : ranked) {
        order.push_back(o.offerer.number);
    }
    EXPECT_EQ(order, (std::vector<std::uint32_t>{10, 12, 20, 21, 11}));
}

TEST(Ranking, UnknownOfferersKeepArrivalOrder) {
    EvaluationStore empty;
    const std::vector<Offer> offers = {{user(5), ""}, {user(3), ""}, {user(4), ""}};
    const auto ranked = filter_and_rank_offers(offers, {}, empty);
    ASSERT_EQ(ranked.size(), 3u);
    EXPECT_EQ(ranked[0].offerer, user(5));
    EXPECT_EQ(ranked[2].offerer, user(4));
}

TEST(Evaluations, OncePerSession) {
    EvaluationStore store;
    store.record({"s1", user(2), true, HelpeeRating::Utile, std::nullopt, true, 0});
    EXPECT_THROW(store.record({"s1", user(2), true, HelpeeRating::TresUtile, std::nullopt, true, 1}),
                 MatchingError);
    EXPECT_EQ(store.rating_of_helper(user(2)), HelpeeRating::Utile);
}

TEST(Codec, RequestAndOfferRoundtrip) {
    auto req = maths_request(45);
    req.helper_grade = Role::Enseignant;
    req.teacher_kind = TeacherKind::Benevole;
    req.description = "exercice 3\nligne 2";
    const auto back = decode_help_request(Record::decode(encode_help_request(req).encode()));
    EXPECT_EQ(back.subject, req.subject);
    EXPECT_EQ(back.teacher_kind, req.teacher_kind);
    EXPECT_EQ(back.description, req.description);
    EXPECT_EQ(back.duration_minutes, 45);
    const auto offer = decode_offer(Record::decode(encode_offer({user(3), "je peux aider"}).encode()));
    EXPECT_EQ(offer.offerer, user(3));
    const Record rec = encode_offer({user(3), "x"});
    EXPECT_EQ(rec.fields().size(), 2u);
}
