#include "appraide/reputation.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace appraide::reputation {

std::string_view to_string(Category category) {
    switch (category) {
        case Category::Predateur: return "prédateur";
        case Category::Intimidateur: return "intimidateur";
        case Category::Spam: return "spam";
    }
    return "?";
}

Category parse_category(std::string_view text) {
    if (text == "prédateur" || text == "predateur") {
        return Category::Predateur;
    }
    if (text == "intimidateur") {
        return Category::Intimidateur;
    }
    if (text == "spam") {
        return Category::Spam;
    }
    throw std::invalid_argument("unknown report category: " + std::string(text));
}

std::string Decision::str() const {
    switch (kind) {
        case DecisionKind::Aucune: return "Aucune";
        case DecisionKind::Suspendu: return "Suspendu";
        case DecisionKind::FaussesDeclarations: return std::to_string(false_declarations) + " Fausses déclarations";
    }
    return "?";
}

Decision parse_decision(std::string_view text) {
    if (text == "Aucune" || text == "aucune") {
        return {};
    }
    if (text == "Suspendu" || text == "suspendu") {
        return {DecisionKind::Suspendu, 0};
    }
    constexpr std::string_view prefix = "fausses-declarations:";
    if (text.substr(0, prefix.size()) == prefix) {
        return {DecisionKind::FaussesDeclarations, std::stoi(std::string(text.substr(prefix.size())))};
    }
    constexpr std::string_view suffix = " Fausses déclarations";
    if (text.size() > suffix.size() && text.substr(text.size() - suffix.size()) == suffix) {
        return {DecisionKind::FaussesDeclarations, std::stoi(std::string(text.substr(0, text.size() - suffix.size())))};
    }
    throw std::invalid_argument("unknown decision: " + std::string(text));
}

std::string_view to_string(ReportOutcome outcome) {
    switch (outcome) {
        case ReportOutcome::Counted: return "counted";
        case ReportOutcome::Duplicate: return "duplicate";
        case ReportOutcome::RejectedSelf: return "self-report";
    }
    return "?";
}

std::string_view to_string(Action action) {
    switch (action) {
        case Action::None: return "none";
        case Action::ReviewRequested: return "review";
        case Action::Suspended: return "suspended";
    }
    return "?";
}

ReputationRecord& ReputationTable::entry(const UserId& user) {
    auto [it, inserted] = records_.try_emplace(user);
    if (inserted) {
        it->second.user = user;
    }
    return it->second;
}

ReportResult ReputationTable::report(const UserId& reporter, const UserId& offender, Category category,
                                     const std::string& incident) {
    if (reporter == offender) {
        return {ReportOutcome::RejectedSelf, Action::None};
    }
    if (!seen_.insert({reporter, offender, std::string(to_string(category)) + "/" + incident}).second) {
        return {ReportOutcome::Duplicate, Action::None};
    }
    ReputationRecord& r = entry(offender);
    switch (category) {
        case Category::Predateur: ++r.predator_reports; break;
        case Category::Intimidateur: ++r.bully_reports; break;
        case Category::Spam: ++r.spam_blocks; break;
    }
    ++r.total_reports;
    r.distinct_reporters.insert(reporter);

    ReportResult result{ReportOutcome::Counted, Action::None};
    if (!r.reviewed && r.decision.kind != DecisionKind::Suspendu && r.total_reports > kSuspendReports &&
        r.distinct_reporters.size() >= kSuspendReporters) {
        r.decision = {DecisionKind::Suspendu, 0};
        r.review_requested = true;
        result.action = Action::Suspended;
    } else if (!r.review_requested && r.total_reports > kReviewReports &&
               r.distinct_reporters.size() >= kReviewReporters) {
        r.review_requested = true;
        result.action = Action::ReviewRequested;
    }
    return result;
}

const ReputationRecord& ReputationTable::admin_review(const UserId& user, int false_declarations) {
    ReputationRecord& r = entry(user);
    const int subtracted = std::clamp(false_declarations, 0, r.total_reports);
    r.total_reports -= subtracted;
    r.reviewed = true;
    r.review_requested = false;
    if (r.total_reports > kReviewReports) {
        r.decision = {DecisionKind::Suspendu, 0};
    } else if (subtracted > 0) {
        r.decision = {DecisionKind::FaussesDeclarations, subtracted};
    } else {
        r.decision = {};
    }
    return r;
}

const ReputationRecord& ReputationTable::query(const UserId& user) {
    ReputationRecord& r = entry(user);
    ++r.assistant_visits;
    return r;
}

const ReputationRecord* ReputationTable::find(const UserId& user) const {
    const auto it = records_.find(user);
    return it == records_.end() ? nullptr : &it->second;
}

std::string ReputationTable::export_table() const {
    std::ostringstream out;
    out << "Id_utilisateur\tprédateur\tIntimidateur\tSpam (Bloqué sans être signalé)\tTotal des signalements\t"
           "Nombre des visites par « Privacy Assistant »\tRévisé\tDécision\n";
    for (const auto& [user, r] : records_) {
        out << user.str() << '\t' << r.predator_reports << '\t' << r.bully_reports << '\t' << r.spam_blocks << '\t'
            << r.total_reports << '\t' << r.assistant_visits << '\t' << (r.reviewed ? "Vrai" : "Faux") << '\t'
            << r.decision.str() << '\n';
    }
    return out.str();
}

WarnOutcome warn_dialogue(bool prior_reports, bool block_first, bool sure_of_declining) {
    WarnOutcome outcome;
    if (block_first) {
        outcome.blocked = true;
    } else if (prior_reports) {
        outcome.prompts = 2;
        outcome.blocked = !sure_of_declining;
    }
    return outcome;
}

WarnOutcome assistant_warn(ReputationTable& server, const UserId& suspect, bool block_first,
                           bool sure_of_declining) {
    return warn_dialogue(server.query(suspect).total_reports > 0, block_first, sure_of_declining);
}

}  // namespace appraide::reputation
