#include "appraide/matching.hpp"

#include <algorithm>

namespace appraide::matching {

std::string_view to_string(TeacherKind kind) {
    return kind == TeacherKind::Benevole ? "Bénévole" : "Freelancer";
}

std::string_view to_string(HelperLevel level) {
    switch (level) {
        case HelperLevel::Eleve: return "élevé";
        case HelperLevel::Intermediaire: return "intermédiaire";
        case HelperLevel::Faible: return "faible";
    }
    return "?";
}

TeacherKind parse_teacher_kind(std::string_view text) {
    if (text == "Bénévole" || text == "benevole" || text == "bénévole") {
        return TeacherKind::Benevole;
    }
    if (text == "Freelancer" || text == "freelancer") {
        return TeacherKind::Freelancer;
    }
    throw MatchingError("unknown teacher kind: " + std::string(text));
}

HelperLevel parse_helper_level(std::string_view text) {
    if (text == "élevé" || text == "eleve") {
        return HelperLevel::Eleve;
    }
    if (text == "intermédiaire" || text == "intermediaire") {
        return HelperLevel::Intermediaire;
    }
    if (text == "faible") {
        return HelperLevel::Faible;
    }
    throw MatchingError("unknown level: " + std::string(text));
}

void validate(const HelpRequest& request) {
    if (request.duration_minutes <= 0) {
        throw MatchingError("help request: duration must be positive");
    }
    if (request.teacher_kind.has_value() != (request.helper_grade == profile::Role::Enseignant)) {
        throw MatchingError("help request: teacher kind is required exactly when asking for a teacher");
    }
    if (request.helper_level == HelperLevel::Faible) {
        throw MatchingError("help request: helper level must be élevé or intermédiaire");
    }
}

void validate(const HelperPreferences& prefs) {
    if (prefs.max_concurrent < 1) {
        throw MatchingError("preferences: max_concurrent must be at least 1");
    }
    if (prefs.max_duration_minutes <= 0) {
        throw MatchingError("preferences: max duration must be positive");
    }
}

void validate(const CourseAnnouncement& announcement) {
    if (announcement.max_learners < 2 || announcement.max_learners > 10) {
        throw MatchingError("course: between 2 and 10 learners");
    }
    if (announcement.duration_minutes <= 0) {
        throw MatchingError("course: duration must be positive");
    }
}

bool match_request_to_prefs(const HelpRequest& request, const HelperPreferences& prefs) {
    if (!prefs.accepting) {
        return false;
    }
    if (!prefs.subjects.count(request.subject) || !prefs.levels.count(request.level)) {
        return false;
    }
    if (request.duration_minutes > prefs.max_duration_minutes) {
        return false;
    }
    return !request.teacher_kind || *request.teacher_kind == prefs.kind;
}

bool grade_matches(const HelpRequest& request, profile::Role helper_role) {
    return request.helper_grade == helper_role;
}

std::string_view to_string(HelpeeRating rating) {
    switch (rating) {
        case HelpeeRating::TresUtile: return "TrèsUtile";
        case HelpeeRating::Utile: return "Utile";
        case HelpeeRating::PasDuToutUtile: return "PasDuToutUtile";
    }
    return "?";
}

std::string_view to_string(HelperRating rating) {
    switch (rating) {
        case HelperRating::Excellent: return "Excellent";
        case HelperRating::Bon: return "Bon";
        case HelperRating::Faible: return "Faible";
    }
    return "?";
}

HelpeeRating parse_helpee_rating(std::string_view text) {
    if (text == "TrèsUtile" || text == "tres-utile") {
        return HelpeeRating::TresUtile;
    }
    if (text == "Utile" || text == "utile") {
        return HelpeeRating::Utile;
    }
    if (text == "PasDuToutUtile" || text == "pas-du-tout-utile") {
        return HelpeeRating::PasDuToutUtile;
    }
    throw MatchingError("unknown rating: " + std::string(text));
}

HelperRating parse_helper_rating(std::string_view text) {
    if (text == "Excellent" || text == "excellent") {
        return HelperRating::Excellent;
    }
    if (text == "Bon" || text == "bon") {
        return HelperRating::Bon;
    }
    if (text == "Faible" || text == "faible") {
        return HelperRating::Faible;
    }
    throw MatchingError("unknown rating: " + std::string(text));
}

void EvaluationStore::record(StoredEvaluation evaluation) {
    if (has_session(evaluation.session_id)) {
        throw MatchingError("session " + evaluation.session_id + " already evaluated");
    }
    entries_.push_back(std::move(evaluation));
}

bool EvaluationStore::has_session(const std::string& session_id) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const StoredEvaluation& e) { return e.session_id == session_id; });
}

std::optional<HelpeeRating> EvaluationStore::rating_of_helper(const UserId& helper) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->counterpart == helper && it->as_helper) {
            return it->as_helper;
        }
    }
    return std::nullopt;
}

namespace {

int rank_of(const std::optional<HelpeeRating>& rating) {
    if (!rating) {
        return 2;
    }
    switch (*rating) {
        case HelpeeRating::TresUtile: return 0;
        case HelpeeRating::Utile: return 1;
        case HelpeeRating::PasDuToutUtile: return 3;
    }
    return 2;
}

}  // namespace

std::vector<Offer> filter_and_rank_offers(const std::vector<Offer>& offers, const UserSet& excluded,
                                          const EvaluationStore& history) {
    std::vector<Offer> kept;
    for (const auto& offer : offers) {
        if (!excluded.count(offer.offerer)) {
            kept.push_back(offer);
        }
    }
    std::stable_sort(kept.begin(), kept.end(), [&](const Offer& a, const Offer& b) {
        return rank_of(history.rating_of_helper(a.offerer)) < rank_of(history.rating_of_helper(b.offerer));
    });
    return kept;
}

Record encode_help_request(const HelpRequest& request) {
    Record r("help-request");
    r.set("requester", request.requester.str());
    r.set("level", std::string(profile::to_string(request.level)));
    r.set("year", static_cast<std::uint64_t>(request.study_year));
    r.set("subject", request.subject);
    r.set("chapter", request.chapter);
    r.set("grade", std::string(profile::to_string(request.helper_grade)));
    if (request.teacher_kind) {
        r.set("teacher-kind", std::string(to_string(*request.teacher_kind)));
    }
    r.set("helper-level", std::string(to_string(request.helper_level)));
    r.set("duration", static_cast<std::uint64_t>(request.duration_minutes));
    r.set("description", request.description);
    return r;
}

HelpRequest decode_help_request(const Record& record) {
    if (record.type() != "help-request") {
        throw RecordError("not a help request: " + record.type());
    }
    HelpRequest req;
    try {
        req.requester = UserId::parse(record.get("requester"));
        req.level = profile::parse_level(record.get("level"));
        req.study_year = static_cast<int>(record.get_u64("year"));
        req.subject = record.get("subject");
        req.chapter = record.get("chapter");
        req.helper_grade = profile::parse_role(record.get("grade"));
        if (record.has("teacher-kind")) {
            req.teacher_kind = parse_teacher_kind(record.get("teacher-kind"));
        }
        req.helper_level = parse_helper_level(record.get("helper-level"));
        req.duration_minutes = static_cast<int>(record.get_u64("duration"));
        req.description = record.get("description");
    } catch (const profile::ProfileError& e) {
        throw RecordError(std::string("malformed help request: ") + e.what());
    } catch (const MatchingError& e) {
        throw RecordError(std::string("malformed help request: ") + e.what());
    }
    return req;
}

Record encode_offer(const Offer& offer) {
    Record r("help-offer");
    r.set("offerer", offer.offerer.str());
    r.set("proposal", offer.proposal);
    return r;
}

Offer decode_offer(const Record& record) {
    if (record.type() != "help-offer") {
        throw RecordError("not an offer: " + record.type());
    }
    try {
        return Offer{UserId::parse(record.get("offerer")), record.get("proposal")};
    } catch (const profile::ProfileError& e) {
        throw RecordError(std::string("malformed offer: ") + e.what());
    }
}

}  // namespace appraide::matching
