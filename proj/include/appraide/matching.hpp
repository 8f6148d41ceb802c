#pragma once

// Helper search: requests, helper preferences, offer ranking and the
// evaluations each side keeps after a session.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "appraide/profile.hpp"
#include "appraide/record.hpp"

namespace appraide::matching {

using profile::Level;
using profile::UserId;
using profile::UserSet;

class MatchingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TeacherKind { Benevole, Freelancer };
enum class HelperLevel { Eleve, Intermediaire, Faible };

std::string_view to_string(TeacherKind kind);
std::string_view to_string(HelperLevel level);
TeacherKind parse_teacher_kind(std::string_view text);
HelperLevel parse_helper_level(std::string_view text);

struct HelpRequest {
    UserId requester;
    Level level = Level::Lycee;
    int study_year = 1;
    std::string subject;
    std::string chapter;
    profile::Role helper_grade = profile::Role::Apprenant;
    std::optional<TeacherKind> teacher_kind;  // present iff helper_grade is Enseignant
    HelperLevel helper_level = HelperLevel::Intermediaire;
    int duration_minutes = 30;
    std::string description;
};

/// Throws MatchingError on a non-positive duration or a teacher kind that
/// does not agree with the grade.
void validate(const HelpRequest& request);

struct HelperPreferences {
    bool accepting = true;
    std::set<Level> levels;
    std::set<std::string> subjects;
    int max_duration_minutes = 60;
    int max_concurrent = 1;
    TeacherKind kind = TeacherKind::Benevole;
};

void validate(const HelperPreferences& prefs);

struct CourseAnnouncement {
    std::string title;
    Level level = Level::Lycee;
    int study_year = 1;
    std::string subject;
    std::string unit;
    int max_learners = 2;
    HelperLevel learner_level = HelperLevel::Intermediaire;
    std::string datetime;
    int duration_minutes = 60;
};

/// 2 <= max_learners <= 10 and a positive duration.
void validate(const CourseAnnouncement& announcement);

/// Preferences side of the match; the grade is checked separately because
/// it depends on the helper's role, not their settings.
bool match_request_to_prefs(const HelpRequest& request, const HelperPreferences& prefs);
bool grade_matches(const HelpRequest& request, profile::Role helper_role);

/// An offer carries nothing but who offers and what they propose.
struct Offer {
    UserId offerer;
    std::string proposal;
};

enum class HelpeeRating { TresUtile, Utile, PasDuToutUtile };
enum class HelperRating { Excellent, Bon, Faible };

std::string_view to_string(HelpeeRating rating);
std::string_view to_string(HelperRating rating);
HelpeeRating parse_helpee_rating(std::string_view text);
HelperRating parse_helper_rating(std::string_view text);

struct EvaluationPair {
    HelpeeRating helpee_rating = HelpeeRating::Utile;  // the helpee's view of the helper
    bool helpee_again = true;
    HelperRating helper_rating = HelperRating::Bon;  // the helper's view of the helpee
    bool helper_again = true;
};

/// What one party stored about the other after a session.
struct StoredEvaluation {
    std::string session_id;
    UserId counterpart;
    bool counterpart_was_helper = false;
    std::optional<HelpeeRating> as_helper;  // my rating of them as helper
    std::optional<HelperRating> as_helpee;  // my rating of them as helpee
    bool again = true;
    std::int64_t recorded_at = 0;
};

/// Local evaluation base of one user. Never leaves the machine except in the
/// sealed session exchange with the counterpart.
class EvaluationStore {
public:
    /// Throws MatchingError if the session already has an entry.
    void record(StoredEvaluation evaluation);
    bool has_session(const std::string& session_id) const;
    /// Latest rating this user gave `helper` as helper.
    std::optional<HelpeeRating> rating_of_helper(const UserId& helper) const;
    const std::vector<StoredEvaluation>& entries() const { return entries_; }

private:
    std::vector<StoredEvaluation> entries_;
};

/// Drops blocked/removed offerers, then orders by past rating of the
/// offerer: TrèsUtile, Utile, never met, PasDuToutUtile. Stable on ties.
std::vector<Offer> filter_and_rank_offers(const std::vector<Offer>& offers, const UserSet& excluded,
                                          const EvaluationStore& history);

Record encode_help_request(const HelpRequest& request);
HelpRequest decode_help_request(const Record& record);
Record encode_offer(const Offer& offer);
Offer decode_offer(const Record& record);

}  // namespace appraide::matching
