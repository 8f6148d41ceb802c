#include "appraide/scenario.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace appraide::scenario {

using profile::ContentKey;
using profile::Role;
using profile::UserId;
using sim::World;

namespace {

struct Shape {
    std::size_t min_args;
    std::size_t max_args;
    std::set<std::string> options;
};

const std::map<std::string, Shape, std::less<>>& shapes() {
    static const std::map<std::string, Shape, std::less<>> table = {
        {"register", {3, 3, {"number"}}},
        {"approve-teacher", {1, 1, {}}},
        {"connect", {1, 2, {}}},
        {"disconnect", {1, 1, {}}},
        {"befriend", {2, 2, {}}},
        {"assign-class", {3, 3, {}}},
        {"remove-class", {3, 3, {}}},
        {"publish", {6, 6, {"dist", "to", "id"}}},
        {"view", {2, 2, {}}},
        {"reshare", {3, 3, {}}},
        {"send-message", {3, 3, {}}},
        {"delete-content", {2, 2, {}}},
        {"delete-account", {1, 1, {}}},
        {"self-test", {3, 3, {}}},
        {"request-help", {6, 6, {"grade", "kind", "helper-level", "duration"}}},
        {"set-prefs", {1, 1, {"levels", "subjects", "max-duration", "max-concurrent", "kind", "auto", "accepting"}}},
        {"offer", {2, 3, {}}},
        {"accept-offer", {2, 2, {"as"}}},
        {"end-session", {1, 1, {}}},
        {"evaluate", {3, 3, {"again"}}},
        {"report-abuse", {3, 3, {"content"}}},
        {"block", {2, 2, {}}},
        {"admin-review", {2, 2, {}}},
        {"warn", {2, 2, {"block", "sure", "times"}}},
        {"assert", {1, 4, {"holder"}}},
    };
    return table;
}

// -------------------------------------------------------------- tokenizer

struct Token {
    std::string text;
    bool quoted = false;
};

std::vector<Token> tokenize(std::string_view line, int lineno) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
            ++i;
            continue;
        }
        if (line[i] == '#') {
            break;
        }
        Token t;
        if (line[i] == '"') {
            t.quoted = true;
            ++i;
            bool closed = false;
            while (i < line.size()) {
                if (line[i] == '\\' && i + 1 < line.size()) {
                    t.text += line[i + 1];
                    i += 2;
                } else if (line[i] == '"') {
                    ++i;
                    closed = true;
                    break;
                } else {
                    t.text += line[i++];
                }
            }
            if (!closed) {
                throw ParseError(lineno, "unterminated quote");
            }
        } else {
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
                t.text += line[i++];
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::int64_t parse_number(const std::string& text, int line, const std::string& what) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty()) {
        throw ParseError(line, what + " is not an integer: '" + text + "'");
    }
    return v;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ',')) {
        if (!cur.empty()) {
            out.push_back(cur);
        }
    }
    return out;
}

bool parse_yes(const std::string& text, int line) {
    if (text == "oui" || text == "yes" || text == "true") {
        return true;
    }
    if (text == "non" || text == "no" || text == "false") {
        return false;
    }
    throw ParseError(line, "expected oui/non, got '" + text + "'");
}

// ------------------------------------------------------- compiled commands

struct Context;
using Action = std::function<void(Context&)>;

struct Context {
    World& world;
    std::map<std::string, std::string> passwords;
    std::map<std::string, std::string> sessions;  // alias -> world session id
    std::map<UserId, reputation::WarnOutcome> warns;
    std::vector<Entry>& entries;
};

/// Names defined so far, for parse-time reference checks. Mirrors the
/// world's numbering so "Apprenant_3" style references also resolve.
struct Names {
    std::set<std::string> users;
    std::map<Role, std::uint32_t> counters;
    std::set<std::string> sessions;
    int session_counter = 0;
};

class Compiler {
public:
    Compiler(const Command& cmd, Names& names) : cmd_(cmd), names_(names) {}

    Action compile();

private:
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(cmd_.line, message); }

    const std::string& arg(std::size_t i) const { return cmd_.args.at(i); }
    std::optional<std::string> opt(const std::string& key) const {
        const auto it = cmd_.options.find(key);
        return it == cmd_.options.end() ? std::nullopt : std::optional<std::string>(it->second);
    }

    std::string user(const std::string& name) const {
        if (!names_.users.count(name)) {
            fail("undefined user '" + name + "'");
        }
        return name;
    }

    std::pair<std::string, std::uint64_t> content(const std::string& ref) const {
        const auto hash = ref.rfind('#');
        if (hash == std::string::npos || hash == 0) {
            fail("content reference must look like user#id, got '" + ref + "'");
        }
        const auto id = parse_number(ref.substr(hash + 1), cmd_.line, "content id");
        if (id <= 0) {
            fail("content id must be positive");
        }
        return {user(ref.substr(0, hash)), static_cast<std::uint64_t>(id)};
    }

    sim::Audience audience(const std::string& text) const {
        sim::Audience a;
        if (text == "me" || text == "moi") {
            a.kind = sim::Audience::Kind::MeOnly;
        } else if (text == "public") {
            a.kind = sim::Audience::Kind::Public;
        } else if (text.rfind("class:", 0) == 0 && text.size() > 6) {
            a.kind = sim::Audience::Kind::Class;
            a.class_ref = text.substr(6);
        } else if (text.rfind("persons:", 0) == 0) {
            a.kind = sim::Audience::Kind::Persons;
        } else {
            fail("unknown audience '" + text + "'");
        }
        return a;
    }

    std::vector<std::string> persons_of(const std::string& text) const {
        std::vector<std::string> out;
        if (text.rfind("persons:", 0) == 0) {
            for (const auto& p : split_list(text.substr(8))) {
                out.push_back(user(p));
            }
        }
        return out;
    }

    template <typename F>
    auto checked(F&& parse, const std::string& text) const {
        try {
            return parse(text);
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }

    Action compile_assert();

    const Command& cmd_;
    Names& names_;
};

UserId id_of(Context& c, const std::string& name) { return c.world.resolve(name); }

ContentKey key_of(Context& c, const std::pair<std::string, std::uint64_t>& ref) {
    return {id_of(c, ref.first), ref.second};
}

Action Compiler::compile() {
    const std::string& n = cmd_.name;
    if (n == "register") {
        const std::string pseudo = arg(0);
        const std::string pw = arg(1);
        const Role role = checked(profile::parse_role, arg(2));
        std::optional<std::uint32_t> number;
        if (const auto v = opt("number")) {
            number = static_cast<std::uint32_t>(parse_number(*v, cmd_.line, "number"));
        }
        std::uint32_t& counter = names_.counters[role];
        const std::uint32_t assigned = number ? *number : counter + 1;
        counter = std::max(counter, assigned);
        names_.users.insert(pseudo);
        names_.users.insert(UserId{role, assigned, {}}.str());
        return [=](Context& c) {
            c.world.register_user(pseudo, pw, role, number);
            c.passwords[pseudo] = pw;
        };
    }
    if (n == "approve-teacher") {
        const auto u = user(arg(0));
        return [=](Context& c) { c.world.approve_teacher(id_of(c, u)); };
    }
    if (n == "connect") {
        const auto u = user(arg(0));
        const std::optional<std::string> pw = cmd_.args.size() > 1 ? std::optional(arg(1)) : std::nullopt;
        return [=](Context& c) {
            const UserId id = id_of(c, u);
            const std::string pseudo = id.pseudonym;
            const auto it = c.passwords.find(pseudo);
            c.world.authenticate(pseudo, pw ? *pw : it == c.passwords.end() ? std::string() : it->second);
        };
    }
    if (n == "disconnect") {
        const auto u = user(arg(0));
        return [=](Context& c) { c.world.disconnect(id_of(c, u)); };
    }
    if (n == "befriend") {
        const auto a = user(arg(0));
        const auto b = user(arg(1));
        return [=](Context& c) { c.world.befriend(id_of(c, a), id_of(c, b)); };
    }
    if (n == "assign-class" || n == "remove-class") {
        const auto owner = user(arg(0));
        const auto member = user(arg(1));
        const auto cls = arg(2);
        const bool assign = n == "assign-class";
        return [=](Context& c) {
            if (assign) {
                c.world.assign_class(id_of(c, owner), id_of(c, member), cls);
            } else {
                c.world.remove_class(id_of(c, owner), id_of(c, member), cls);
            }
        };
    }
    if (n == "publish") {
        const auto owner = user(arg(0));
        sim::PublishRequest req;
        req.type = checked(profile::parse_publication_type, arg(1));
        req.science = arg(2);
        req.level = checked(profile::parse_level, arg(3));
        req.audience = audience(arg(4));
        const auto persons = persons_of(arg(4));
        req.body = arg(5);
        std::vector<std::string> restricted;
        if (const auto d = opt("dist")) {
            if (*d == "oui") {
                req.distribution = profile::Distribution::Allowed;
            } else if (*d == "non") {
                req.distribution = profile::Distribution::None;
            } else if (*d == "restreint") {
                req.distribution = profile::Distribution::Restricted;
            } else {
                fail("dist must be oui, non or restreint");
            }
        }
        if (const auto to = opt("to")) {
            for (const auto& p : split_list(*to)) {
                restricted.push_back(user(p));
            }
        }
        if (const auto id = opt("id")) {
            req.content_id = static_cast<std::uint64_t>(parse_number(*id, cmd_.line, "id"));
        }
        return [=](Context& c) {
            sim::PublishRequest r = req;
            for (const auto& p : persons) {
                r.audience.persons.push_back(id_of(c, p));
            }
            for (const auto& p : restricted) {
                r.restricted_to.insert(id_of(c, p));
            }
            c.world.publish(id_of(c, owner), r);
        };
    }
    if (n == "view") {
        const auto viewer = user(arg(0));
        const auto ref = content(arg(1));
        return [=](Context& c) { c.world.view(id_of(c, viewer), key_of(c, ref)); };
    }
    if (n == "reshare") {
        const auto resharer = user(arg(0));
        const auto ref = content(arg(1));
        const auto aud = audience(arg(2));
        const auto persons = persons_of(arg(2));
        return [=](Context& c) {
            sim::Audience a = aud;
            for (const auto& p : persons) {
                a.persons.push_back(id_of(c, p));
            }
            c.world.reshare(id_of(c, resharer), key_of(c, ref), a);
        };
    }
    if (n == "send-message") {
        const auto from = user(arg(0));
        const auto to = user(arg(1));
        const auto body = arg(2);
        return [=](Context& c) { c.world.send_message(id_of(c, from), id_of(c, to), body); };
    }
    if (n == "delete-content") {
        const auto owner = user(arg(0));
        const auto id = parse_number(arg(1), cmd_.line, "content id");
        return [=](Context& c) { c.world.delete_content(id_of(c, owner), static_cast<std::uint64_t>(id)); };
    }
    if (n == "delete-account") {
        const auto owner = user(arg(0));
        return [=](Context& c) { c.world.delete_account(id_of(c, owner)); };
    }
    if (n == "self-test") {
        const auto owner = user(arg(0));
        const auto test = arg(1);
        const auto score = arg(2);
        return [=](Context& c) { c.world.record_self_test(id_of(c, owner), test, score); };
    }
    if (n == "request-help") {
        const auto requester = user(arg(0));
        matching::HelpRequest req;
        req.level = checked(profile::parse_level, arg(1));
        req.study_year = static_cast<int>(parse_number(arg(2), cmd_.line, "year"));
        req.subject = arg(3);
        req.chapter = arg(4);
        req.description = arg(5);
        if (const auto g = opt("grade")) {
            req.helper_grade = checked(profile::parse_role, *g);
        }
        if (const auto k = opt("kind")) {
            req.teacher_kind = checked(matching::parse_teacher_kind, *k);
        }
        if (const auto l = opt("helper-level")) {
            req.helper_level = checked(matching::parse_helper_level, *l);
        }
        if (const auto d = opt("duration")) {
            req.duration_minutes = static_cast<int>(parse_number(*d, cmd_.line, "duration"));
        }
        return [=](Context& c) {
            matching::HelpRequest r = req;
            r.requester = id_of(c, requester);
            c.world.request_help(r);
        };
    }
    if (n == "set-prefs") {
        const auto helper = user(arg(0));
        matching::HelperPreferences prefs;
        if (const auto v = opt("levels")) {
            for (const auto& l : split_list(*v)) {
                prefs.levels.insert(checked(profile::parse_level, l));
            }
        }
        if (const auto v = opt("subjects")) {
            for (const auto& s : split_list(*v)) {
                prefs.subjects.insert(s);
            }
        }
        if (const auto v = opt("max-duration")) {
            prefs.max_duration_minutes = static_cast<int>(parse_number(*v, cmd_.line, "max-duration"));
        }
        if (const auto v = opt("max-concurrent")) {
            prefs.max_concurrent = static_cast<int>(parse_number(*v, cmd_.line, "max-concurrent"));
        }
        if (const auto v = opt("kind")) {
            prefs.kind = checked(matching::parse_teacher_kind, *v);
        }
        if (const auto v = opt("accepting")) {
            prefs.accepting = parse_yes(*v, cmd_.line);
        }
        const bool auto_offer = opt("auto") ? parse_yes(*opt("auto"), cmd_.line) : false;
        return [=](Context& c) { c.world.set_prefs(id_of(c, helper), prefs, auto_offer); };
    }
    if (n == "offer") {
        const auto helper = user(arg(0));
        const auto requester = user(arg(1));
        const auto proposal = cmd_.args.size() > 2 ? arg(2) : std::string("disponible");
        return [=](Context& c) { c.world.offer(id_of(c, helper), id_of(c, requester), proposal); };
    }
    if (n == "accept-offer") {
        const auto requester = user(arg(0));
        const auto helper = user(arg(1));
        const auto alias = opt("as").value_or("S" + std::to_string(++names_.session_counter));
        names_.sessions.insert(alias);
        return [=](Context& c) { c.sessions[alias] = c.world.accept_offer(id_of(c, requester), id_of(c, helper)); };
    }
    if (n == "end-session" || n == "evaluate") {
        const auto alias = arg(0);
        if (!names_.sessions.count(alias)) {
            fail("undefined session '" + alias + "'");
        }
        if (n == "end-session") {
            return [=](Context& c) { c.world.end_session(c.sessions.at(alias)); };
        }
        const auto by = user(arg(1));
        const auto rating = arg(2);
        const bool again = opt("again") ? parse_yes(*opt("again"), cmd_.line) : true;
        return [=](Context& c) { c.world.evaluate(c.sessions.at(alias), id_of(c, by), rating, again); };
    }
    if (n == "report-abuse") {
        const auto victim = user(arg(0));
        const auto offender = user(arg(1));
        const auto category = checked(reputation::parse_category, arg(2));
        std::optional<std::pair<std::string, std::uint64_t>> ref;
        if (const auto v = opt("content")) {
            ref = content(*v);
        }
        return [=](Context& c) {
            std::optional<ContentKey> key;
            if (ref) {
                key = key_of(c, *ref);
            }
            c.world.report_abuse(id_of(c, victim), id_of(c, offender), category, key);
        };
    }
    if (n == "block") {
        const auto u = user(arg(0));
        const auto target = user(arg(1));
        return [=](Context& c) { c.world.block(id_of(c, u), id_of(c, target)); };
    }
    if (n == "admin-review") {
        const auto u = user(arg(0));
        const auto count = static_cast<int>(parse_number(arg(1), cmd_.line, "false declarations"));
        return [=](Context& c) { c.world.admin_review(id_of(c, u), count); };
    }
    if (n == "warn") {
        const auto u = user(arg(0));
        const auto suspect = user(arg(1));
        const auto b = opt("block");
        if (!b) {
            fail("warn needs block:oui|non");
        }
        const bool block_first = parse_yes(*b, cmd_.line);
        const bool sure = opt("sure") ? parse_yes(*opt("sure"), cmd_.line) : true;
        const auto times = opt("times") ? parse_number(*opt("times"), cmd_.line, "times") : 1;
        if (times < 1) {
            fail("times must be positive");
        }
        return [=](Context& c) {
            const UserId id = id_of(c, u);
            for (std::int64_t i = 0; i < times; ++i) {
                c.warns[id] = c.world.warn(id, id_of(c, suspect), block_first, sure);
            }
        };
    }
    return compile_assert();
}

// Assertions record their own entry and never throw into the runner.
Action Compiler::compile_assert() {
    const std::string kind = arg(0);
    const std::size_t argc = cmd_.args.size() - 1;
    const auto need = [&](std::size_t count) {
        if (argc != count) {
            fail("assert " + kind + " takes " + std::to_string(count) + " arguments");
        }
    };
    using Check = std::function<std::optional<std::string>(Context&)>;  // failure detail
    Check check;
    if (kind == "renders" || kind == "hidden") {
        need(2);
        const auto viewer = user(arg(1));
        const auto ref = content(arg(2));
        const bool want = kind == "renders";
        check = [=](Context& c) -> std::optional<std::string> {
            const bool got = c.world.renders(id_of(c, viewer), key_of(c, ref));
            if (got == want) {
                return std::nullopt;
            }
            return got ? "rendered" : "not rendered";
        };
    } else if (kind == "replica") {
        need(3);
        const auto holder = user(arg(1));
        const auto ref = content(arg(2));
        const auto state = arg(3);
        if (state != "present" && state != "absent" && state != "clear" && state != "encrypted") {
            fail("replica state must be present, absent, clear or encrypted");
        }
        check = [=](Context& c) -> std::optional<std::string> {
            const auto* r = c.world.peer(id_of(c, holder)).store.find(key_of(c, ref));
            const std::string got = r == nullptr ? "absent" : std::string(privacy::to_string(r->form));
            const bool ok = state == "present" ? r != nullptr : got == state;
            return ok ? std::nullopt : std::optional<std::string>("replica is " + got);
        };
    } else if (kind == "replica-count") {
        need(2);
        const auto ref = content(arg(1));
        const auto want = static_cast<std::size_t>(parse_number(arg(2), cmd_.line, "count"));
        check = [=](Context& c) -> std::optional<std::string> {
            const auto got = c.world.replica_count(key_of(c, ref));
            return got == want ? std::nullopt : std::optional<std::string>("count is " + std::to_string(got));
        };
    } else if (kind == "reputation-decision") {
        need(2);
        const auto u = user(arg(1));
        const auto want = checked(reputation::parse_decision, arg(2));
        check = [=](Context& c) -> std::optional<std::string> {
            const auto* r = c.world.server().reputation.find(id_of(c, u));
            const auto got = r == nullptr ? reputation::Decision{} : r->decision;
            return got == want ? std::nullopt : std::optional<std::string>("decision is " + got.str());
        };
    } else if (kind == "reputation-row") {
        // predator/bully/spam/total/visits/Vrai|Faux/decision
        need(2);
        const auto u = user(arg(1));
        const auto want = arg(2);
        const auto parts = split_list([&] {
            std::string t = want;
            std::replace(t.begin(), t.end(), '/', ',');
            return t;
        }());
        if (parts.size() != 7) {
            fail("reputation-row expects 7 '/'-separated columns");
        }
        checked(reputation::parse_decision, parts[6]);
        check = [=](Context& c) -> std::optional<std::string> {
            const auto* r = c.world.server().reputation.find(id_of(c, u));
            const reputation::ReputationRecord empty;
            const auto& rec = r == nullptr ? empty : *r;
            const std::string got = std::to_string(rec.predator_reports) + "/" + std::to_string(rec.bully_reports) +
                                    "/" + std::to_string(rec.spam_blocks) + "/" + std::to_string(rec.total_reports) +
                                    "/" + std::to_string(rec.assistant_visits) + "/" +
                                    (rec.reviewed ? "Vrai" : "Faux") + "/" + rec.decision.str();
            const bool same = got.substr(0, got.rfind('/')) == want.substr(0, want.rfind('/')) &&
                              rec.decision == reputation::parse_decision(parts[6]);
            return same ? std::nullopt : std::optional<std::string>("row is " + got);
        };
    } else if (kind == "reputation-total") {
        need(2);
        const auto u = user(arg(1));
        const auto want = parse_number(arg(2), cmd_.line, "total");
        check = [=](Context& c) -> std::optional<std::string> {
            const auto* r = c.world.server().reputation.find(id_of(c, u));
            const int got = r == nullptr ? 0 : r->total_reports;
            return got == want ? std::nullopt : std::optional<std::string>("total is " + std::to_string(got));
        };
    } else if (kind == "offer-list") {
        need(2);
        const auto requester = user(arg(1));
        std::vector<std::string> want;
        if (arg(2) != "none") {
            for (const auto& p : split_list(arg(2))) {
                want.push_back(user(p));
            }
        }
        check = [=](Context& c) -> std::optional<std::string> {
            std::vector<UserId> expected;
            for (const auto& p : want) {
                expected.push_back(id_of(c, p));
            }
            std::vector<UserId> got;
            std::string shown;
            for (const auto& o : c.world.ranked_offers(id_of(c, requester))) {
                got.push_back(o.offerer);
                shown += (shown.empty() ? "" : ",") + (o.offerer.pseudonym.empty() ? o.offerer.str() : o.offerer.pseudonym);
            }
            return got == expected ? std::nullopt : std::optional<std::string>("offers are " + (shown.empty() ? "none" : shown));
        };
    } else if (kind == "escrow-count") {
        need(1);
        const auto want = static_cast<std::size_t>(parse_number(arg(1), cmd_.line, "count"));
        std::optional<std::string> holder;
        if (const auto h = opt("holder")) {
            holder = user(*h);
        }
        check = [=](Context& c) -> std::optional<std::string> {
            const auto got = c.world.escrow_count(holder ? std::optional(id_of(c, *holder)) : std::nullopt);
            return got == want ? std::nullopt : std::optional<std::string>("escrow holds " + std::to_string(got));
        };
    } else if (kind == "confirmations") {
        need(2);
        const auto ref = content(arg(1));
        const auto want = static_cast<std::size_t>(parse_number(arg(2), cmd_.line, "count"));
        check = [=](Context& c) -> std::optional<std::string> {
            const auto got = c.world.confirmation_count(key_of(c, ref));
            return got == want ? std::nullopt : std::optional<std::string>(std::to_string(got) + " confirmations");
        };
    } else if (kind == "help-phase") {
        need(2);
        const auto u = user(arg(1));
        const auto want = arg(2);
        check = [=](Context& c) -> std::optional<std::string> {
            const auto& got = c.world.peer(id_of(c, u)).help.phase;
            return got == want ? std::nullopt : std::optional<std::string>("phase is " + got);
        };
    } else if (kind == "inbox") {
        need(2);
        const auto u = user(arg(1));
        const auto want = static_cast<std::size_t>(parse_number(arg(2), cmd_.line, "count"));
        check = [=](Context& c) -> std::optional<std::string> {
            const auto got = c.world.peer(id_of(c, u)).inbox->messages().size();
            return got == want ? std::nullopt : std::optional<std::string>(std::to_string(got) + " messages");
        };
    } else if (kind == "warn-prompts") {
        need(2);
        const auto u = user(arg(1));
        const auto want = parse_number(arg(2), cmd_.line, "prompts");
        check = [=](Context& c) -> std::optional<std::string> {
            const auto it = c.warns.find(id_of(c, u));
            if (it == c.warns.end()) {
                return "no warning shown";
            }
            return it->second.prompts == want ? std::nullopt
                                              : std::optional<std::string>(std::to_string(it->second.prompts) + " prompts");
        };
    } else if (kind == "rejected") {
        // Handled by the runner against the previous command.
        need(1);
        return nullptr;
    } else {
        fail("unknown assertion '" + kind + "'");
    }
    const int line = cmd_.line;
    const std::string text = cmd_.text;
    return [=](Context& c) {
        Entry e{line, text, false, {}};
        try {
            const auto problem = check(c);
            e.passed = !problem;
            e.detail = problem.value_or("");
        } catch (const std::exception& ex) {
            e.detail = ex.what();
        }
        c.entries.push_back(std::move(e));
    };
}

std::string error_code(const std::exception& e) {
    if (const auto* s = dynamic_cast<const sim::SimError*>(&e)) {
        return s->code();
    }
    return "error";
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const std::vector<std::string_view>& command_names() {
    static const std::vector<std::string_view> names = [] {
        std::vector<std::string_view> v;
        for (const auto& [name, shape] : shapes()) {
            v.push_back(name);
        }
        return v;
    }();
    return names;
}

Scenario parse_scenario(std::string_view text) {
    Scenario s;
    Names names;
    std::int64_t last_tick = 0;
    int lineno = 0;
    std::size_t pos = 0;
    bool seen_command = false;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        const auto tokens = tokenize(raw, lineno);
        if (tokens.empty()) {
            continue;
        }
        if (tokens[0].text == "seed" && !tokens[0].quoted) {
            if (tokens.size() != 2 || seen_command) {
                throw ParseError(lineno, "seed takes one value and comes before the commands");
            }
            s.seed = static_cast<std::uint64_t>(parse_number(tokens[1].text, lineno, "seed"));
            continue;
        }
        if (tokens.size() < 2) {
            throw ParseError(lineno, "expected '<tick> <command> ...'");
        }
        Command cmd;
        cmd.line = lineno;
        cmd.tick = parse_number(tokens[0].text, lineno, "tick");
        if (cmd.tick < 0) {
            throw ParseError(lineno, "negative tick");
        }
        if (cmd.tick < last_tick) {
            throw ParseError(lineno, "tick " + std::to_string(cmd.tick) + " goes back in time (after " +
                                         std::to_string(last_tick) + ")");
        }
        last_tick = cmd.tick;
        cmd.name = tokens[1].text;
        const auto shape = shapes().find(cmd.name);
        if (shape == shapes().end() || tokens[1].quoted) {
            throw ParseError(lineno, "unknown command '" + cmd.name + "'");
        }
        for (std::size_t i = 2; i < tokens.size(); ++i) {
            const auto& t = tokens[i];
            const auto colon = t.text.find(':');
            if (!t.quoted && colon != std::string::npos && shape->second.options.count(t.text.substr(0, colon))) {
                if (!cmd.options.emplace(t.text.substr(0, colon), t.text.substr(colon + 1)).second) {
                    throw ParseError(lineno, "option '" + t.text.substr(0, colon) + "' given twice");
                }
            } else {
                cmd.args.push_back(t.text);
            }
        }
        if (cmd.args.size() < shape->second.min_args || cmd.args.size() > shape->second.max_args) {
            throw ParseError(lineno, cmd.name + " takes " + std::to_string(shape->second.min_args) +
                                         (shape->second.max_args != shape->second.min_args
                                              ? "-" + std::to_string(shape->second.max_args)
                                              : std::string()) +
                                         " arguments, got " + std::to_string(cmd.args.size()));
        }
        const auto hash = raw.find(" #");
        cmd.text = trim(hash == std::string_view::npos || raw.find('"') < hash ? raw : raw.substr(0, hash));
        Compiler(cmd, names).compile();  // validates arguments and references
        s.commands.push_back(std::move(cmd));
        seen_command = true;
    }
    return s;
}

bool Report::passed() const {
    return violations.empty() && std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.passed; });
}

std::string Report::str() const {
    std::ostringstream out;
    out << "seed " << seed << '\n';
    for (const auto& e : entries) {
        out << "line " << e.line << ' ' << (e.passed ? "PASS" : "FAIL") << ' ' << e.text;
        if (!e.detail.empty()) {
            out << " -- " << e.detail;
        }
        out << '\n';
    }
    out << "violations " << violations.size() << '\n';
    for (const auto& v : violations) {
        out << "  " << v << '\n';
    }
    out << "world " << world_digest << '\n';
    out << "result " << (passed() ? "PASS" : "FAIL") << '\n';
    return out.str();
}

Report run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override, sim::Config config) {
    const std::uint64_t seed = seed_override.value_or(scenario.seed);
    World world(seed, config);
    Report report = run_scenario_on(world, scenario);
    report.seed = seed;
    return report;
}

Report run_scenario_on(World& world, const Scenario& scenario) {
    Report report;
    report.seed = scenario.seed;
    Context ctx{world, {}, {}, {}, report.entries};

    struct PendingError {
        int line;
        std::string text;
        std::string code;
        std::string message;
    };
    auto pending = std::make_shared<std::optional<PendingError>>();
    const auto flush = [&report, pending]() {
        if (*pending) {
            const auto& p = **pending;
            report.entries.push_back({p.line, p.text, false, "command failed: " + p.message});
            pending->reset();
        }
    };

    Names names;
    std::int64_t last = 0;
    for (const auto& cmd : scenario.commands) {
        last = std::max(last, cmd.tick);
        Action action = Compiler(cmd, names).compile();
        const bool expects_rejection = cmd.name == "assert" && !cmd.args.empty() && cmd.args[0] == "rejected";
        if (expects_rejection) {
            const std::string want = cmd.args.at(1);
            world.schedule(cmd.tick, [&report, pending, cmd, want]() {
                Entry e{cmd.line, cmd.text, false, {}};
                if (!*pending) {
                    e.detail = "previous command succeeded";
                } else if ((*pending)->code != want) {
                    e.detail = "rejected with " + (*pending)->code;
                } else {
                    e.passed = true;
                }
                pending->reset();
                report.entries.push_back(std::move(e));
            });
            continue;
        }
        world.schedule(cmd.tick, [&ctx, flush, pending, cmd, action]() {
            flush();
            try {
                action(ctx);
            } catch (const std::exception& e) {
                *pending = PendingError{cmd.line, cmd.text, error_code(e), e.what()};
            }
        });
    }
    world.run_until(last);
    world.schedule(world.now(), flush);
    world.run_to_quiescence();
    flush();

    report.violations = world.final_scan();
    report.trace = world.trace_text();
    report.world_dump = world.dump();
    report.world_digest = crypto::hash(report.world_dump).hex();
    return report;
}

}  // namespace appraide::scenario
