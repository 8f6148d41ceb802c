#pragma once

// Abuse reports, block reasons and the server's reputation table.

#include <map>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "appraide/profile.hpp"

namespace appraide::reputation {

using profile::UserId;
using profile::UserSet;

enum class Category { Predateur, Intimidateur, Spam };

std::string_view to_string(Category category);
Category parse_category(std::string_view text);

enum class DecisionKind { Aucune, Suspendu, FaussesDeclarations };

struct Decision {
    DecisionKind kind = DecisionKind::Aucune;
    int false_declarations = 0;

    /// "Aucune", "Suspendu", "2 Fausses déclarations".
    std::string str() const;
    bool operator==(const Decision&) const = default;
};

/// Also accepts "fausses-declarations:2".
Decision parse_decision(std::string_view text);

/// Review is requested above 3 reports from at least 3 distinct reporters;
/// the account is suspended above 5 from at least 5 before any review.
inline constexpr int kReviewReports = 3;
inline constexpr std::size_t kReviewReporters = 3;
inline constexpr int kSuspendReports = 5;
inline constexpr std::size_t kSuspendReporters = 5;

struct ReputationRecord {
    UserId user;
    int predator_reports = 0;
    int bully_reports = 0;
    int spam_blocks = 0;
    UserSet distinct_reporters;
    int total_reports = 0;
    int assistant_visits = 0;
    bool reviewed = false;
    bool review_requested = false;
    Decision decision;
};

enum class ReportOutcome { Counted, Duplicate, RejectedSelf };

std::string_view to_string(ReportOutcome outcome);

enum class Action { None, ReviewRequested, Suspended };

std::string_view to_string(Action action);

struct ReportResult {
    ReportOutcome outcome = ReportOutcome::Counted;
    Action action = Action::None;
};

class ReputationTable {
public:
    /// One count per (reporter, incident). Spam is a block without report.
    ReportResult report(const UserId& reporter, const UserId& offender, Category category,
                        const std::string& incident);
    /// Admin review: subtract false declarations, then decide.
    const ReputationRecord& admin_review(const UserId& user, int false_declarations);
    /// A privacy-assistant lookup. Counts the visit; returns the record.
    const ReputationRecord& query(const UserId& user);

    const ReputationRecord* find(const UserId& user) const;
    const std::map<UserId, ReputationRecord>& records() const { return records_; }

    /// Tab-separated, one header line then one row per user.
    std::string export_table() const;

private:
    ReputationRecord& entry(const UserId& user);

    std::map<UserId, ReputationRecord> records_;
    std::set<std::tuple<UserId, UserId, std::string>> seen_;
};

/// Privacy-assistant warning dialogue. The first prompt asks whether to
/// block; when the user declines and the suspect has prior reports, a second
/// prompt asks them to confirm.
struct WarnOutcome {
    int prompts = 1;
    bool blocked = false;
};

inline constexpr std::string_view kWarnPrompt = "Il se peut que cet utilisateur est dangereux, voulez-vous le bloquer ?";
inline constexpr std::string_view kSecondPrompt =
    "Vous n'êtes pas la première victime de cet utilisateur, êtes-vous sûr de votre décision ?";

/// Dialogue logic alone, given whether the server knows prior reports.
WarnOutcome warn_dialogue(bool prior_reports, bool block_first, bool sure_of_declining);

/// `block_first` answers the first prompt; `sure_of_declining` answers the
/// second one if it is shown. Each call counts as a reputation lookup.
WarnOutcome assistant_warn(ReputationTable& server, const UserId& suspect, bool block_first,
                           bool sure_of_declining);

}  // namespace appraide::reputation
