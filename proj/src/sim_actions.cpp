#include <algorithm>

#include "appraide/sim.hpp"

namespace appraide::sim {

namespace {

Record encode_replica(const privacy::ReplicaRecord& r) {
    Record rec("replica");
    rec.set("key", r.key().str());
    rec.set("metadata", profile::serialize_metadata(r.metadata));
    rec.set("form", std::string(privacy::to_string(r.form)));
    if (r.form == privacy::ReplicaForm::Clear) {
        rec.set("body", r.clear_body);
    } else {
        rec.set("class", r.class_id);
        rec.set("version", r.key_version);
        rec.set("wrapped", crypto::to_hex(r.sealed_body.wrapped_key));
        rec.set("nonce", crypto::base64_encode(r.sealed_body.nonce));
        rec.set("sealed", crypto::base64_encode(r.sealed_body.body));
    }
    return rec;
}

privacy::ReplicaRecord decode_replica(const Record& rec, const UserId& holder, std::int64_t now) {
    privacy::ReplicaRecord r;
    r.holder = holder;
    r.received_at = now;
    r.metadata = profile::parse_metadata(rec.get("metadata"));
    if (rec.get("form") == "clear") {
        r.form = privacy::ReplicaForm::Clear;
        r.clear_body = rec.get("body");
    } else {
        r.form = privacy::ReplicaForm::Encrypted;
        r.class_id = rec.get("class");
        r.key_version = static_cast<std::uint32_t>(rec.get_u64("version"));
        r.sealed_body.wrapped_key = crypto::from_hex(rec.get("wrapped"));
        r.sealed_body.nonce = crypto::base64_decode(rec.get("nonce"));
        r.sealed_body.body = crypto::base64_decode(rec.get("sealed"));
    }
    return r;
}

Record encode_key_delivery(const profile::KeyDelivery& d) {
    Record rec("key-delivery");
    rec.set("owner", d.owner.str());
    rec.set("class", d.class_id);
    rec.set("version", d.version);
    rec.set("n", crypto::to_hex(d.keys.modulus_n));
    rec.set("e", crypto::to_hex(d.keys.public_e));
    rec.set("d", crypto::to_hex(d.keys.private_d));
    return rec;
}

UserSet excluded_of(const PeerNode& p) {
    UserSet s = p.profile->blocked();
    s.insert(p.profile->removed().begin(), p.profile->removed().end());
    return s;
}

}  // namespace

// ------------------------------------------------------------ social graph

void World::befriend(const UserId& a, const UserId& b) {
    PeerNode& pa = peer_mut(a);
    PeerNode& pb = peer_mut(b);
    if (pa.deleted || pb.deleted) {
        throw SimError("unknown-user");
    }
    try {
        pa.profile->add_friend(b);
        pb.profile->add_friend(a);
    } catch (const profile::ProfileError& e) {
        throw SimError("not-authorized", e.what());
    }
    log(a.str(), "befriend", b.str());
    replicate_to(pa, b);
    replicate_to(pb, a);
}

void World::send_key_deliveries(const std::vector<profile::KeyDelivery>& deliveries) {
    for (const auto& d : deliveries) {
        send_p2p(d.owner, d.member, encode_key_delivery(d));
    }
}

void World::assign_class(const UserId& owner, const UserId& member, const std::string& class_ref) {
    PeerNode& p = peer_mut(owner);
    std::vector<profile::KeyDelivery> deliveries;
    try {
        deliveries = p.profile->assign_to_class(member, class_ref);
    } catch (const profile::ProfileError& e) {
        throw SimError("not-authorized", e.what());
    }
    log(owner.str(), "assign", member.str() + "|" + class_ref);
    send_key_deliveries(deliveries);
}

void World::remove_class(const UserId& owner, const UserId& member, const std::string& class_ref) {
    PeerNode& p = peer_mut(owner);
    if (!p.profile->has_class(class_ref)) {
        throw SimError("unknown-class", class_ref);
    }
    const auto deliveries = p.profile->remove_from_class(member, class_ref, rng_);
    log(owner.str(), "unassign", member.str() + "|" + class_ref);
    send_key_deliveries(deliveries);
}

void World::server_call(PeerNode& from, const Record& inner) {
    if (from.connected) {
        rpc(from.id, inner);
    } else {
        from.pending_rpcs.push_back(inner);
    }
}

void World::block(const UserId& user, const UserId& target) {
    PeerNode& p = peer_mut(user);
    if (user == target) {
        throw SimError("self-block");
    }
    const auto deliveries = p.profile->block(target, rng_);
    p.hidden_owners.insert(target);
    log(user.str(), "block", target.str());
    send_key_deliveries(deliveries);
    Record report("block-report");
    report.set("offender", target.str());
    report.set("incident", "block");
    server_call(p, report);
}

// ------------------------------------------------------------ publications

profile::AudienceSpec World::make_audience(const PeerNode& owner, const Audience& audience) const {
    switch (audience.kind) {
        case Audience::Kind::MeOnly: return profile::MeOnly{};
        case Audience::Kind::Public: return profile::Public{};
        case Audience::Kind::Class:
            if (!owner.profile->has_class(audience.class_ref)) {
                throw SimError("unknown-class", audience.class_ref);
            }
            return owner.profile->class_audience(audience.class_ref);
        case Audience::Kind::Persons: {
            profile::PersonList list;
            for (const auto& u : audience.persons) {
                if (!owner.profile->is_excluded(u)) {
                    list.persons.insert(u);
                }
            }
            return list;
        }
    }
    return profile::MeOnly{};
}

ContentKey World::install_publication(PeerNode& owner, Publication pub) {
    const ContentKey key = profile::key_of(pub.metadata);
    const bool is_public = profile::is_public(pub.metadata.audience);
    if (is_public && !owner.connected) {
        throw SimError("not-connected", "public content goes through the server");
    }
    owner.publications[key.content_id] = pub;
    owner.next_content_id = std::max(owner.next_content_id, key.content_id + 1);
    truth_[key] = Truth{pub.metadata, pub.body};
    log(owner.id.str(), "publish", key.str());
    if (is_public) {
        Record call("publish-public");
        call.set("metadata", profile::serialize_metadata(pub.metadata));
        call.set("body", pub.body);
        rpc(owner.id, call);
    } else {
        replicate_all(owner);
    }
    return key;
}

ContentKey World::publish(const UserId& owner, const PublishRequest& request) {
    PeerNode& p = peer_mut(owner);
    if (p.deleted) {
        throw SimError("unknown-user", owner.str());
    }
    const std::uint64_t id = request.content_id.value_or(p.next_content_id);
    if (p.publications.count(id) || truth_.count({owner, id})) {
        throw SimError("content-id-taken", std::to_string(id));
    }
    Publication pub;
    pub.metadata.owner = p.id;
    pub.metadata.content_id = id;
    pub.metadata.publication_type = request.type;
    pub.metadata.science = request.science;
    pub.metadata.level = request.level;
    pub.metadata.audience = make_audience(p, request.audience);
    pub.metadata.rights = profile::default_rights(pub.metadata.audience);
    if (request.distribution) {
        pub.metadata.rights.distribution = *request.distribution;
        pub.metadata.rights.restricted_to = request.restricted_to;
    }
    pub.body = request.body;
    return install_publication(p, std::move(pub));
}

void World::replicate_to(PeerNode& owner, const UserId& holder) {
    const PeerNode* target = find_peer(holder);
    if (!owner.connected || owner.deleted || target == nullptr || !target->connected || target->deleted) {
        return;
    }
    for (const auto& [cid, pub] : owner.publications) {
        const ContentKey key = profile::key_of(pub.metadata);
        if (owner.log.has(key, holder)) {
            continue;
        }
        std::vector<privacy::Placement> plan;
        try {
            plan = privacy::plan_placement(pub.metadata, *owner.profile);
        } catch (const privacy::PrivacyError&) {
            continue;
        }
        const auto it = std::find_if(plan.begin(), plan.end(),
                                     [&](const privacy::Placement& pl) { return !pl.to_server && pl.holder == holder; });
        if (it == plan.end()) {
            continue;
        }
        privacy::ReplicaRecord replica;
        if (it->form == privacy::ReplicaForm::Clear) {
            replica = privacy::make_clear_replica(pub, holder, clock_);
        } else {
            const auto& cls = std::get<profile::ClassAudience>(pub.metadata.audience);
            replica = privacy::make_encrypted_replica(pub, owner.profile->find_class(cls.class_id), holder, clock_, rng_);
        }
        owner.log.record(key, holder);
        send_p2p(owner.id, holder, encode_replica(replica));
    }
}

void World::replicate_all(PeerNode& owner) {
    if (!owner.connected) {
        return;
    }
    for (const auto& [id, p] : peers_) {
        if (id != owner.id && p->connected && !p->deleted) {
            replicate_to(owner, id);
        }
    }
}

bool World::renders(const UserId& viewer, const ContentKey& content) {
    const PeerNode& p = peer(viewer);
    bool shown = false;
    if (!p.deleted) {
        UserSet hidden = p.hidden_owners;
        hidden.insert(p.profile->blocked().begin(), p.profile->blocked().end());
        if (content.owner == viewer) {
            shown = p.publications.count(content.content_id) != 0;
        } else if (const auto* replica = p.store.find(content)) {
            shown = privacy::render_feed_item(viewer, *replica, p.keyring, hidden).has_value();
        } else if (const auto it = p.feed.find(content); it != p.feed.end()) {
            shown = !hidden.count(content.owner);
        }
    }
    renders_.push_back({clock_, viewer, content, shown});
    log(viewer.str(), shown ? "render" : "hidden", content.str());
    return shown;
}

bool World::view(const UserId& viewer, const ContentKey& content) {
    if (renders(viewer, content)) {
        return true;
    }
    const PeerNode& p = peer(viewer);
    const PeerNode* owner = find_peer(content.owner);
    if (owner != nullptr && p.connected && !p.store.contains(content) && content.owner != viewer) {
        Record req("access-request");
        req.set("owner", content.owner.str());
        req.set("content", content.content_id);
        send_p2p(viewer, content.owner, req);
    }
    return false;
}

void World::handle_access_request(PeerNode& p, const UserId& requester, const Record& r) {
    const std::uint64_t cid = r.get_u64("content");
    const auto it = p.publications.find(cid);
    const Publication* pub = it == p.publications.end() ? nullptr : &it->second;
    const auto result = privacy::handle_access_request(requester, pub, *p.profile, clock_, rng_);
    Record resp("access-response");
    resp.set("owner", p.id.str());
    resp.set("content", cid);
    resp.set("outcome", std::string(privacy::to_string(result.outcome)));
    if (result.outcome == privacy::AccessOutcome::Allow) {
        resp.set("plaintext", result.plaintext);
    }
    if (result.duplicate && pub != nullptr) {
        const Record replica = encode_replica(*result.duplicate);
        resp.set("replica", replica.encode());
        p.log.record(profile::key_of(pub->metadata), requester);
    }
    log(p.id.str(), "access:" + std::string(privacy::to_string(result.outcome)), requester.str());
    send_p2p(p.id, requester, resp);
}

void World::handle_access_response(PeerNode& p, const Record& r) {
    const ContentKey key{UserId::parse(r.get("owner")), r.get_u64("content")};
    if (r.has("replica")) {
        auto replica = decode_replica(Record::decode(r.get("replica")), p.id, clock_);
        log(p.id.str(), p.store.put(std::move(replica)) ? "store" : "refuse", key.str());
    }
    const bool allowed = r.get("outcome") == "allow" && !p.hidden_owners.count(key.owner);
    renders_.push_back({clock_, p.id, key, allowed});
    log(p.id.str(), allowed ? "render" : "hidden", key.str());
}

ContentKey World::reshare(const UserId& resharer, const ContentKey& original, const Audience& audience) {
    PeerNode& p = peer_mut(resharer);
    Publication source;
    if (const auto* replica = p.store.find(original)) {
        UserSet hidden = p.hidden_owners;
        const auto body = privacy::render_feed_item(resharer, *replica, p.keyring, hidden);
        if (!body) {
            throw SimError("not-authorized", original.str());
        }
        source = Publication{replica->metadata, *body};
    } else if (const auto it = p.feed.find(original); it != p.feed.end()) {
        source = it->second;
    } else {
        throw SimError("not-authorized", original.str());
    }
    const auto result = privacy::reshare(resharer, source, make_audience(p, audience), p.next_content_id);
    if (result.outcome != privacy::ReshareOutcome::Created) {
        log(resharer.str(), "reshare-denied", original.str());
        throw SimError(std::string(privacy::to_string(result.outcome)), original.str());
    }
    Publication derived = *result.publication;
    derived.metadata.owner = p.id;
    return install_publication(p, std::move(derived));
}

void World::send_message(const UserId& from, const UserId& to, const std::string& body) {
    PeerNode& p = peer_mut(from);
    const PeerNode& q = peer(to);
    if (p.deleted || q.deleted) {
        throw SimError("unknown-user");
    }
    if (p.profile->is_excluded(to) || q.profile->blocked().count(from)) {
        throw SimError("not-authorized", "blocked");
    }
    message_bodies_.push_back(body);
    send_p2p_raw(from, to, "private-message", body);
}

// ------------------------------------------------------------ deletion

void World::delete_content(const UserId& owner, std::uint64_t content_id) {
    PeerNode& p = peer_mut(owner);
    const auto it = p.publications.find(content_id);
    if (it == p.publications.end()) {
        throw SimError("unknown-content", owner.str() + "#" + std::to_string(content_id));
    }
    const ContentKey key = profile::key_of(it->second.metadata);
    const bool was_public = profile::is_public(it->second.metadata.audience);
    p.publications.erase(it);
    const UserSet holders = p.log.holders(key);
    p.log.forget(key);
    p.deletions[key] = OwnerDeletion{holders, {}};
    // Replicas still waiting for their holder are never sent.
    p.pending.erase(std::remove_if(p.pending.begin(), p.pending.end(),
                                   [&](const Message& m) {
                                       return m.kind == "replica" && Record::decode(m.inner).get("key") == key.str();
                                   }),
                    p.pending.end());
    log(owner.str(), "delete", key.str());

    if (was_public) {
        Record call("delete-public");
        call.set("owner", owner.str());
        call.set("content", content_id);
        server_call(p, call);
    }
    const auto request =
        privacy::make_deletion_request(owner, p.keys.private_key(), privacy::DeletionScope::Content, content_id, {});
    UserSet offline;
    for (const auto& h : holders) {
        if (p.connected && is_connected(h)) {
            send_p2p(owner, h, privacy::encode_deletion_request(request));
        } else {
            offline.insert(h);
        }
    }
    if (!offline.empty()) {
        privacy::DeletionRequest escrowed = request;
        escrowed.pending_holders = offline;
        server_call(p, privacy::encode_deletion_request(escrowed));
    }
}

void World::handle_deletion_request(PeerNode& p, const privacy::DeletionRequest& req, bool via_server) {
    const PeerNode& owner = peer(req.owner);
    if (!p.store.apply_deletion(req, owner.keys.public_key())) {
        log(p.id.str(), "deletion-ignored", req.target().str());
        return;
    }
    log(p.id.str(), "deleted", privacy::deletion_payload(req.owner, req.scope, req.content_id));
    const bool account = req.scope == privacy::DeletionScope::Account;
    if (account) {
        p.keyring.forget_owner(req.owner);
        p.profile->mark_removed(req.owner);
    }
    const auto confirmation = privacy::make_confirmation(req, p.id, p.keys.private_key());
    if (via_server || account) {
        rpc(p.id, privacy::encode_confirmation(confirmation));
    } else {
        send_p2p(p.id, req.owner, privacy::encode_confirmation(confirmation));
    }
    // Re-shares derived from the deleted content go too.
    std::vector<std::uint64_t> derived;
    for (const auto& [cid, pub] : p.publications) {
        const auto& via = pub.metadata.via;
        if (via && via->original_owner == req.owner && (account || via->original_content_id == req.content_id)) {
            derived.push_back(cid);
        }
    }
    for (const auto cid : derived) {
        delete_content(p.id, cid);
    }
}

void World::handle_confirmation(PeerNode& p, const privacy::DeletionConfirmation& c) {
    const PeerNode* holder = find_peer(c.confirming_holder);
    if (holder == nullptr || !privacy::verify_confirmation(c, holder->keys.public_key())) {
        log(p.id.str(), "confirmation-rejected", c.confirming_holder.str());
        return;
    }
    const auto it = p.deletions.find({c.owner, c.content_id});
    if (it == p.deletions.end()) {
        return;
    }
    it->second.confirmations[c.confirming_holder] = c;
    log(p.id.str(), "confirmed", privacy::confirmation_payload(c));
}

void World::delete_account(const UserId& owner) {
    PeerNode& p = peer_mut(owner);
    if (p.deleted) {
        return;
    }
    if (!p.connected) {
        throw SimError("not-connected", owner.str());
    }
    UserSet holders = p.log.all_holders();
    holders.insert(p.profile->friends().begin(), p.profile->friends().end());
    const auto request = privacy::make_deletion_request(owner, p.keys.private_key(), privacy::DeletionScope::Account,
                                                        0, holders);
    log(owner.str(), "delete-account", owner.str());
    Record call("delete-account");
    const Record encoded = privacy::encode_deletion_request(request);
    for (const auto& [k, v] : encoded.fields()) {
        call.add(k, v);
    }
    rpc(owner, call);
    p.publications.clear();
    p.pending.clear();
    p.pending_rpcs.clear();
    p.connected = false;
    p.deleted = true;
    log(owner.str(), "logout", owner.str());
}

void World::record_self_test(const UserId& owner, const std::string& test_id, const std::string& score) {
    PeerNode& p = peer_mut(owner);
    try {
        p.profile->record_self_test({owner, test_id, profile::parse_score(score), clock_});
    } catch (const profile::ProfileError& e) {
        throw SimError("bad-score", e.what());
    } catch (const std::exception& e) {
        throw SimError("bad-score", e.what());
    }
    if (score.size() >= 4) {
        self_test_tokens_.push_back(score);
    }
    log(owner.str(), "self-test", test_id);
}

// ------------------------------------------------------------ matching

void World::set_prefs(const UserId& helper, const matching::HelperPreferences& prefs, bool auto_offer) {
    matching::validate(prefs);
    PeerNode& p = peer_mut(helper);
    p.prefs = prefs;
    p.auto_offer = auto_offer;
    log(helper.str(), "prefs", helper.str());
}

void World::request_help(const matching::HelpRequest& request) {
    PeerNode& p = peer_mut(request.requester);
    if (!p.connected) {
        throw SimError("not-connected", request.requester.str());
    }
    try {
        matching::validate(request);
    } catch (const matching::MatchingError& e) {
        throw SimError("invalid-request", e.what());
    }
    p.help = HelpState{request, "friends", clock_, {}};
    p.incoming_requests.clear();
    const Record rec = matching::encode_help_request(request);
    UserSet friends;
    for (const auto& f : p.profile->friends()) {
        if (!p.profile->is_excluded(f)) {
            friends.insert(f);
        }
    }
    log(p.id.str(), "help-request", rec.encode());
    if (friends.empty()) {
        check_help_window(p.id, clock_);
        return;
    }
    for (const auto& f : friends) {
        if (is_connected(f)) {
            send_p2p(p.id, f, rec);
        }
    }
    const std::int64_t opened = clock_;
    const UserId id = p.id;
    schedule(clock_ + config_.offer_window, [this, id, opened]() { check_help_window(id, opened); });
}

void World::check_help_window(const UserId& requester, std::int64_t opened_at) {
    PeerNode& p = peer_mut(requester);
    if (!p.help.request || p.help.opened_at != opened_at || !p.help.offers.empty() || p.help.phase != "friends") {
        return;
    }
    p.help.phase = "server";
    log(requester.str(), "help-escalate", requester.str());
    if (!p.connected) {
        return;
    }
    Record call = matching::encode_help_request(*p.help.request);
    for (const auto& f : p.profile->friends()) {
        call.add("exclude", f.str());
    }
    rpc(requester, call);
}

void World::handle_help_request(PeerNode& p, const Record& r) {
    const auto req = matching::decode_help_request(r);
    if (p.profile->is_excluded(req.requester) || !p.prefs) {
        return;
    }
    if (!matching::match_request_to_prefs(req, *p.prefs) || !matching::grade_matches(req, p.id.role)) {
        return;
    }
    p.incoming_requests.push_back(req);
    log(p.id.str(), "help-match", req.requester.str());
    if (p.auto_offer) {
        offer(p.id, req.requester, "disponible");
    }
}

void World::offer(const UserId& helper, const UserId& requester, const std::string& proposal) {
    PeerNode& p = peer_mut(helper);
    const bool asked = std::any_of(p.incoming_requests.begin(), p.incoming_requests.end(),
                                   [&](const matching::HelpRequest& r) { return r.requester == requester; });
    if (!asked) {
        throw SimError("no-request", requester.str());
    }
    send_p2p(helper, requester, matching::encode_offer({helper, proposal}));
}

void World::handle_offer(PeerNode& p, const Record& r) {
    if (!p.help.request) {
        return;
    }
    p.help.offers.push_back(matching::decode_offer(r));
    log(p.id.str(), "offer-received", r.encode());
}

std::vector<matching::Offer> World::ranked_offers(const UserId& requester) const {
    const PeerNode& p = peer(requester);
    return matching::filter_and_rank_offers(p.help.offers, excluded_of(p), p.evaluations);
}

std::string World::accept_offer(const UserId& requester, const UserId& helper) {
    const auto ranked = ranked_offers(requester);
    if (std::none_of(ranked.begin(), ranked.end(), [&](const matching::Offer& o) { return o.offerer == helper; })) {
        throw SimError("not-offered", helper.str());
    }
    PeerNode& p = peer_mut(requester);
    p.help.request.reset();
    const std::string id = "S" + std::to_string(next_session_++);
    sessions_[id] = Session{id, requester, helper, false, {}};
    log(requester.str(), "session-open", id);
    return id;
}

const Session& World::session(const std::string& id) const {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw SimError("unknown-session", id);
    }
    return it->second;
}

void World::end_session(const std::string& session_id) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw SimError("unknown-session", session_id);
    }
    it->second.ended = true;
    log(it->second.helpee.str(), "session-end", session_id);
}

void World::evaluate(const std::string& session_id, const UserId& by, const std::string& rating, bool again) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw SimError("unknown-session", session_id);
    }
    Session& s = it->second;
    if (!s.ended) {
        throw SimError("session-open", session_id);
    }
    if (by != s.helpee && by != s.helper) {
        throw SimError("not-a-party", by.str());
    }
    if (s.evaluated_by.count(by)) {
        throw SimError("already-evaluated", session_id);
    }
    PeerNode& p = peer_mut(by);
    matching::StoredEvaluation given;
    given.session_id = session_id;
    given.again = again;
    given.recorded_at = clock_;
    Record msg("evaluation");
    msg.set("session", session_id);
    try {
        if (by == s.helpee) {
            given.counterpart = s.helper;
            given.counterpart_was_helper = true;
            given.as_helper = matching::parse_helpee_rating(rating);
            msg.set("rating", rating);
        } else {
            given.counterpart = s.helpee;
            given.as_helpee = matching::parse_helper_rating(rating);
            msg.set("rating", rating);
        }
    } catch (const matching::MatchingError& e) {
        throw SimError("bad-rating", e.what());
    }
    msg.set("again", again ? "oui" : "non");
    p.evaluations.record(given);
    s.evaluated_by.insert(by);
    log(by.str(), "evaluate", session_id);
    send_p2p(by, given.counterpart, msg);
}

void World::handle_evaluation(PeerNode& p, const UserId& from, const Record& r) {
    matching::StoredEvaluation received;
    received.session_id = r.get("session");
    received.counterpart = from;
    received.again = r.get("again") == "oui";
    received.recorded_at = clock_;
    const auto& s = session(received.session_id);
    // Ratings about this peer, in the scale the sender used.
    if (from == s.helpee) {
        received.as_helper = matching::parse_helpee_rating(r.get("rating"));
    } else {
        received.counterpart_was_helper = true;
        received.as_helpee = matching::parse_helper_rating(r.get("rating"));
    }
    p.received_evaluations.push_back(received);
}

// ------------------------------------------------------------ reputation

void World::report_abuse(const UserId& victim, const UserId& offender, reputation::Category category,
                         const std::optional<ContentKey>& content) {
    if (victim == offender) {
        throw SimError("self-report");
    }
    PeerNode& p = peer_mut(victim);
    peer(offender);
    p.hidden_owners.insert(offender);
    Record report("abuse-report");
    report.set("offender", offender.str());
    report.set("category", std::string(reputation::to_string(category)));
    if (content) {
        std::string material = content->str();
        if (const auto* replica = p.store.find(*content)) {
            material += "|" + replica->clear_body + crypto::base64_encode(replica->sealed_body.body);
        }
        report.set("incident", content->str());
        report.set("content-digest", crypto::hash(material).hex());
    } else {
        report.set("incident", "t" + std::to_string(clock_));
    }
    log(victim.str(), "report", offender.str());
    server_call(p, report);
}

void World::admin_review(const UserId& user, int false_declarations) {
    server_.reputation.admin_review(user, false_declarations);
    log("server", "review", user.str() + "|" + std::to_string(false_declarations));
}

reputation::WarnOutcome World::warn(const UserId& user, const UserId& suspect, bool block_first, bool sure) {
    Record query("reputation-query");
    query.set("suspect", suspect.str());
    const Record reply = rpc(user, query);
    const auto outcome = reputation::warn_dialogue(reply.get_u64("reports") > 0, block_first, sure);
    log(user.str(), "warn", suspect.str() + "|" + std::to_string(outcome.prompts));
    if (outcome.blocked) {
        block(user, suspect);
    }
    return outcome;
}

// ------------------------------------------------------------ dispatch

void World::handle_replica(PeerNode& p, const Record& r) {
    auto replica = decode_replica(r, p.id, clock_);
    const ContentKey key = replica.key();
    if (p.profile->is_excluded(key.owner)) {
        log(p.id.str(), "refuse", key.str());
        return;
    }
    log(p.id.str(), p.store.put(std::move(replica)) ? "store" : "refuse", key.str());
}

void World::handle_key_delivery(PeerNode& p, const Record& r) {
    profile::KeyDelivery d;
    d.owner = UserId::parse(r.get("owner"));
    d.member = p.id;
    d.class_id = r.get("class");
    d.version = static_cast<std::uint32_t>(r.get_u64("version"));
    d.keys.modulus_n = crypto::from_hex(r.get("n"));
    d.keys.public_e = crypto::from_hex(r.get("e"));
    d.keys.private_d = crypto::from_hex(r.get("d"));
    p.keyring.store(d);
}

void World::handle_feed(PeerNode& p, const Record& r) {
    if (r.type() == "feed") {
        Publication pub{profile::parse_metadata(r.get("metadata")), r.get("body")};
        p.feed[profile::key_of(pub.metadata)] = pub;
    } else if (r.type() == "feed-retract") {
        p.feed.erase({UserId::parse(r.get("owner")), r.get_u64("content")});
    } else {
        p.feed.clear();
        const auto items = r.get_all("item");
        const auto bodies = r.get_all("body");
        for (std::size_t i = 0; i < items.size() && i < bodies.size(); ++i) {
            Publication pub{profile::parse_metadata(items[i]), bodies[i]};
            p.feed[profile::key_of(pub.metadata)] = pub;
        }
    }
}

void World::dispatch(PeerNode& p, const Message& msg, const Record& inner) {
    const std::string& kind = inner.type();
    if (kind == "replica") {
        handle_replica(p, inner);
    } else if (kind == "key-delivery") {
        handle_key_delivery(p, inner);
    } else if (kind == "deletion-request") {
        handle_deletion_request(p, privacy::decode_deletion_request(inner), msg.from_server);
    } else if (kind == "deletion-confirmation") {
        handle_confirmation(p, privacy::decode_confirmation(inner));
    } else if (kind == "access-request") {
        handle_access_request(p, msg.from, inner);
    } else if (kind == "access-response") {
        handle_access_response(p, inner);
    } else if (kind == "help-request") {
        handle_help_request(p, inner);
    } else if (kind == "help-offer") {
        handle_offer(p, inner);
    } else if (kind == "evaluation") {
        handle_evaluation(p, msg.from, inner);
    } else if (kind == "feed" || kind == "feed-sync" || kind == "feed-retract") {
        handle_feed(p, inner);
    } else {
        log(p.id.str(), "unknown:" + kind, inner.encode());
    }
}

std::size_t World::replica_count(const ContentKey& content) const {
    std::size_t n = 0;
    for (const auto& [id, p] : peers_) {
        n += p->store.contains(content) ? 1 : 0;
    }
    return n;
}

std::size_t World::replica_count_of_owner(const UserId& owner) const {
    std::size_t n = 0;
    for (const auto& [id, p] : peers_) {
        for (const auto& [key, r] : p->store.replicas()) {
            n += key.owner == owner ? 1 : 0;
        }
    }
    return n;
}

std::size_t World::escrow_count(const std::optional<UserId>& holder) const {
    return static_cast<std::size_t>(std::count_if(server_.escrow.begin(), server_.escrow.end(),
                                                  [&](const EscrowEntry& e) { return !holder || e.holder == *holder; }));
}

std::size_t World::confirmation_count(const ContentKey& content) const {
    const PeerNode& p = peer(content.owner);
    if (const auto it = p.deletions.find(content); it != p.deletions.end()) {
        return it->second.confirmations.size();
    }
    return 0;
}

}  // namespace appraide::sim
