#include <algorithm>
#include <sstream>

#include "appraide/sim.hpp"

namespace appraide::sim {

namespace {

constexpr std::string_view kServer = "server";

std::string short_digest(std::string_view payload) { return crypto::hash(payload).hex().substr(0, 16); }

bool contains(std::string_view haystack, std::string_view needle) {
    return !needle.empty() && haystack.find(needle) != std::string_view::npos;
}

}  // namespace

World::World(std::uint64_t seed, Config config) : config_(config), rng_(seed) {
    server_.keys = crypto::generate_keypair(config_.user_key_bits, rng_);
}

World::~World() = default;

// ------------------------------------------------------------ event loop

void World::schedule(std::int64_t tick, std::function<void()> action) {
    queue_.push(Event{std::max(tick, clock_), seq_++, std::move(action)});
}

bool World::step() {
    if (queue_.empty()) {
        return false;
    }
    clock_ = queue_.top().tick;
    while (!queue_.empty() && queue_.top().tick == clock_) {
        Event ev = queue_.top();
        queue_.pop();
        ev.action();
    }
    scan_tick();
    return true;
}

void World::run_until(std::int64_t tick) {
    while (!queue_.empty() && queue_.top().tick <= tick) {
        step();
    }
}

void World::run_to_quiescence(std::int64_t limit) {
    while (!queue_.empty() && queue_.top().tick <= limit) {
        step();
    }
}

void World::log(const std::string& node, const std::string& event, const std::string& payload) {
    trace_.push_back({clock_, node, event, short_digest(payload)});
}

std::string World::trace_text() const {
    std::string out;
    for (const auto& t : trace_) {
        out += std::to_string(t.tick) + "|" + t.node + "|" + t.event + "|" + t.digest + "\n";
    }
    return out;
}

// ------------------------------------------------------------ lookups

PeerNode* World::find_peer(const UserId& id) {
    const auto it = peers_.find(id);
    return it == peers_.end() ? nullptr : it->second.get();
}

PeerNode& World::peer_mut(const UserId& id) {
    PeerNode* p = find_peer(id);
    if (p == nullptr) {
        throw SimError("unknown-user", id.str());
    }
    return *p;
}

const PeerNode& World::peer(const UserId& id) const {
    const auto it = peers_.find(id);
    if (it == peers_.end()) {
        throw SimError("unknown-user", id.str());
    }
    return *it->second;
}

bool World::has_user(const std::string& name) const {
    if (by_pseudonym_.count(name)) {
        return true;
    }
    try {
        return peers_.count(UserId::parse(name)) != 0;
    } catch (const profile::ProfileError&) {
        return false;
    }
}

UserId World::resolve(const std::string& name) const {
    if (const auto it = by_pseudonym_.find(name); it != by_pseudonym_.end()) {
        return it->second;
    }
    try {
        const UserId id = UserId::parse(name);
        if (const auto it = peers_.find(id); it != peers_.end()) {
            return it->second->id;
        }
    } catch (const profile::ProfileError&) {
    }
    throw SimError("unknown-user", name);
}

bool World::is_connected(const UserId& id) const {
    const auto it = peers_.find(id);
    return it != peers_.end() && it->second->connected;
}

// ------------------------------------------------------------ accounts

UserId World::register_user(const std::string& pseudonym, const std::string& password, profile::Role role,
                            std::optional<std::uint32_t> number) {
    if (pseudonym.size() < profile::kMinPseudonymLength) {
        throw SimError("pseudonym-too-short", pseudonym);
    }
    if (server_.credentials.count(pseudonym) || by_pseudonym_.count(pseudonym)) {
        throw SimError("pseudonym-taken", pseudonym);
    }
    std::uint32_t& counter = next_number_[role];
    UserId id{role, number ? *number : ++counter, pseudonym};
    if (peers_.count(id)) {
        throw SimError("id-taken", id.str());
    }
    counter = std::max(counter, id.number);

    auto node = std::make_unique<PeerNode>();
    node->id = id;
    node->keys = crypto::generate_keypair(config_.user_key_bits, rng_);
    node->profile = std::make_unique<profile::Profile>(id, rng_, config_.class_key_bits);
    node->inbox = std::make_unique<messaging::Mailbox>(id, node->keys.private_key());
    peers_.emplace(id, std::move(node));
    by_pseudonym_[pseudonym] = id;

    StoredCredential cred{id, crypto::bytes_to_hex(rng_.bytes(8)), {}};
    cred.digest = crypto::hash(cred.salt + "|" + password).hex();
    server_.credentials[pseudonym] = cred;
    server_.directory[id] = DirectoryEntry{{}, false, role == profile::Role::Apprenant};
    log(std::string(kServer), "register", id.str());
    return id;
}

void World::approve_teacher(const UserId& id) {
    const auto it = server_.directory.find(id);
    if (it == server_.directory.end()) {
        throw SimError("unknown-user", id.str());
    }
    it->second.approved = true;
    log(std::string(kServer), "approve", id.str());
}

void World::authenticate(const std::string& pseudonym, const std::string& password) {
    const auto it = server_.credentials.find(pseudonym);
    if (it == server_.credentials.end() ||
        crypto::hash(it->second.salt + "|" + password).hex() != it->second.digest) {
        log(std::string(kServer), "login-rejected", pseudonym);
        throw SimError("bad-credentials", pseudonym);
    }
    const UserId id = it->second.user;
    DirectoryEntry& entry = server_.directory.at(id);
    if (!entry.approved) {
        throw SimError("not-approved", pseudonym);
    }
    PeerNode& p = peer_mut(id);
    if (p.connected) {
        return;
    }
    p.connected = true;
    entry.connected = true;
    entry.address = "addr-" + crypto::bytes_to_hex(rng_.bytes(4));
    log(id.str(), "login", entry.address);

    server_on_login(id);
    auto calls = std::move(p.pending_rpcs);
    p.pending_rpcs.clear();
    for (const auto& call : calls) {
        rpc(id, call);
    }
    flush_pending_from(p);
    flush_pending_toward(id);
    replicate_all(p);
    for (auto& [other_id, other] : peers_) {
        if (other_id != id && other->connected && !other->deleted) {
            replicate_to(*other, id);
        }
    }
}

void World::disconnect(const UserId& id) {
    PeerNode& p = peer_mut(id);
    if (!p.connected) {
        return;
    }
    p.connected = false;
    if (auto it = server_.directory.find(id); it != server_.directory.end()) {
        it->second.connected = false;
    }
    log(id.str(), "logout", id.str());
}

// ------------------------------------------------------------ transport

void World::send_p2p(const UserId& from, const UserId& to, const Record& inner) {
    send_p2p_raw(from, to, inner.type(), inner.encode());
}

void World::send_p2p_raw(const UserId& from, const UserId& to, const std::string& kind, const std::string& inner) {
    Message msg;
    msg.id = ++message_ids_;
    msg.from = from;
    msg.to = to;
    msg.kind = kind;
    msg.inner = inner;
    msg.sent_at = clock_;
    PeerNode& sender = peer_mut(from);
    const PeerNode* receiver = find_peer(to);
    if (receiver == nullptr || receiver->deleted) {
        return;
    }
    if (!sender.connected || !receiver->connected) {
        log(from.str(), "queue:" + kind, to.str() + "|" + inner);
        sender.pending.push_back(std::move(msg));
        return;
    }
    transmit(std::move(msg));
}

void World::send_from_server(const UserId& to, const Record& inner) {
    Message msg;
    msg.id = ++message_ids_;
    msg.from_server = true;
    msg.to = to;
    msg.kind = inner.type();
    msg.inner = inner.encode();
    msg.sent_at = clock_;
    const PeerNode* receiver = find_peer(to);
    if (receiver == nullptr || !receiver->connected) {
        return;
    }
    transmit(std::move(msg));
}

void World::transmit(Message msg) {
    const crypto::PrivateKey sender_key =
        msg.from_server ? server_.keys.private_key() : peer(msg.from).keys.private_key();
    const std::string from_name = msg.from_server ? std::string(kServer) : msg.from.str();
    const messaging::SignedMessage sealed = messaging::compose_signed(
        msg.from_server ? UserId{} : msg.from, sender_key, msg.to, peer(msg.to).keys.public_key(), msg.inner, rng_);
    msg.wire = msg.kind + "|" + messaging::encode_wire(sealed);
    msg.sent_at = clock_;
    wire_.push_back({clock_, from_name, msg.to.str(), msg.kind, msg.inner, msg.wire});
    log(from_name, "send:" + msg.kind, msg.wire);
    schedule(clock_ + config_.latency, [this, msg]() { deliver(msg); });
}

void World::deliver(const Message& msg) {
    PeerNode* receiver = find_peer(msg.to);
    if (receiver == nullptr || receiver->deleted || !receiver->connected) {
        on_dropped(msg);
        return;
    }
    const std::string_view frame = msg.wire;
    const auto bar = frame.find('|');
    messaging::SignedMessage sealed;
    try {
        sealed = messaging::decode_wire(frame.substr(bar + 1));
    } catch (const std::invalid_argument&) {
        log(msg.to.str(), "reject:" + msg.kind, msg.wire);
        return;
    }
    const crypto::PublicKey sender_key =
        msg.from_server ? server_.keys.public_key() : peer(msg.from).keys.public_key();
    if (msg.kind == "private-message") {
        const auto result = receiver->inbox->receive(sender_key, sealed, clock_);
        log(msg.to.str(), std::string(result.outcome == messaging::ReceiveOutcome::Delivered ? "deliver:" : "reject:") +
                              msg.kind, msg.wire);
        return;
    }
    const auto opened = messaging::open_signed(msg.to, receiver->keys.private_key(), sender_key, sealed);
    if (opened.outcome != messaging::ReceiveOutcome::Delivered) {
        log(msg.to.str(), "reject:" + msg.kind, msg.wire);
        return;
    }
    log(msg.to.str(), "deliver:" + msg.kind, msg.wire);
    dispatch(*receiver, msg, Record::decode(opened.body));
}

void World::on_dropped(const Message& msg) {
    const std::string node = msg.to.str();
    log(node, "drop:" + msg.kind, msg.wire);
    if (msg.from_server) {
        if (msg.kind == "deletion-confirmation") {
            const auto c = privacy::decode_confirmation(Record::decode(msg.inner));
            server_.confirmations_for_owner[c.owner].push_back(c);
        }
        // Escrowed deletions stay at the server until confirmed, and feed
        // state is re-sent at login, so nothing else needs keeping.
        return;
    }
    PeerNode* sender = find_peer(msg.from);
    if (sender == nullptr || sender->deleted) {
        return;
    }
    if (msg.kind == "deletion-request") {
        privacy::DeletionRequest req = privacy::decode_deletion_request(Record::decode(msg.inner));
        req.pending_holders = {msg.to};
        server_.escrow.push_back({req, msg.to});
        log(std::string(kServer), "escrow", msg.to.str() + "|" + msg.inner);
        return;
    }
    if (msg.kind == "replica") {
        // Content deleted since sending: drop the copy instead of retrying.
        const std::string key = Record::decode(msg.inner).get("key");
        if (!sender->publications.count(std::stoull(key.substr(key.rfind('#') + 1)))) {
            return;
        }
    }
    Message back = msg;
    back.wire.clear();
    sender->pending.push_back(std::move(back));
}

void World::flush_pending_from(PeerNode& sender) {
    if (!sender.connected) {
        return;
    }
    std::deque<Message> keep;
    while (!sender.pending.empty()) {
        Message m = std::move(sender.pending.front());
        sender.pending.pop_front();
        const PeerNode* receiver = find_peer(m.to);
        if (receiver == nullptr || receiver->deleted) {
            continue;
        }
        if (receiver->connected) {
            transmit(std::move(m));
        } else {
            keep.push_back(std::move(m));
        }
    }
    sender.pending = std::move(keep);
}

void World::flush_pending_toward(const UserId& id) {
    for (auto& [pid, p] : peers_) {
        if (pid == id || !p->connected || p->pending.empty()) {
            continue;
        }
        std::deque<Message> keep;
        while (!p->pending.empty()) {
            Message m = std::move(p->pending.front());
            p->pending.pop_front();
            if (m.to == id) {
                transmit(std::move(m));
            } else {
                keep.push_back(std::move(m));
            }
        }
        p->pending = std::move(keep);
    }
}

Record World::rpc(const UserId& from, const Record& inner) {
    PeerNode& p = peer_mut(from);
    if (!p.connected) {
        throw SimError("not-connected", from.str());
    }
    const std::string text = inner.encode();
    const messaging::SignedMessage sealed =
        messaging::compose_signed(from, p.keys.private_key(), UserId{}, server_.keys.public_key(), text, rng_);
    const std::string wire = inner.type() + "|" + messaging::encode_wire(sealed);
    wire_.push_back({clock_, from.str(), std::string(kServer), inner.type(), text, wire});
    log(from.str(), "rpc:" + inner.type(), wire);
    const auto opened = messaging::open_signed(UserId{}, server_.keys.private_key(), p.keys.public_key(), sealed);
    if (opened.outcome != messaging::ReceiveOutcome::Delivered) {
        throw SimError("rpc-rejected", inner.type());
    }
    return server_handle(from, Record::decode(opened.body));
}

// ------------------------------------------------------------ server

void World::server_on_login(const UserId& id) {
    for (const auto& entry : server_.escrow) {
        if (entry.holder == id) {
            send_from_server(id, privacy::encode_deletion_request(entry.request));
        }
    }
    if (auto it = server_.confirmations_for_owner.find(id); it != server_.confirmations_for_owner.end()) {
        auto confirmations = std::move(it->second);
        server_.confirmations_for_owner.erase(it);
        for (const auto& c : confirmations) {
            send_from_server(id, privacy::encode_confirmation(c));
        }
    }
    Record sync("feed-sync");
    for (const auto& [key, pub] : server_.public_store) {
        sync.add("item", profile::serialize_metadata(pub.metadata));
        sync.add("body", pub.body);
    }
    send_from_server(id, sync);
}

Record World::server_handle(const UserId& from, const Record& r) {
    const std::string& kind = r.type();
    Record reply("ok");
    if (kind == "publish-public") {
        Publication pub{profile::parse_metadata(r.get("metadata")), r.get("body")};
        if (!profile::is_public(pub.metadata.audience)) {
            throw SimError("not-public", "server accepts public content only");
        }
        const ContentKey key = profile::key_of(pub.metadata);
        server_.public_store[key] = pub;
        Record feed("feed");
        feed.set("metadata", r.get("metadata"));
        feed.set("body", pub.body);
        for (const auto& [id, p] : peers_) {
            if (id != from && p->connected && !p->deleted) {
                send_from_server(id, feed);
            }
        }
    } else if (kind == "delete-public") {
        const ContentKey key{UserId::parse(r.get("owner")), r.get_u64("content")};
        if (server_.public_store.erase(key)) {
            Record retract("feed-retract");
            retract.set("owner", key.owner.str());
            retract.set("content", key.content_id);
            for (const auto& [id, p] : peers_) {
                if (p->connected && !p->deleted) {
                    send_from_server(id, retract);
                }
            }
        }
    } else if (kind == "deletion-request") {
        // Escrow for holders that were offline when the owner deleted.
        const auto req = privacy::decode_deletion_request(r);
        if (!privacy::verify_deletion_request(req, peer(req.owner).keys.public_key())) {
            throw SimError("bad-signature", "escrow");
        }
        for (const auto& holder : req.pending_holders) {
            privacy::DeletionRequest single = req;
            single.pending_holders = {holder};
            server_.escrow.push_back({single, holder});
            log(std::string(kServer), "escrow", holder.str() + "|" + r.encode());
            if (is_connected(holder)) {
                send_from_server(holder, privacy::encode_deletion_request(single));
            }
        }
    } else if (kind == "deletion-confirmation") {
        server_record_confirmation(privacy::decode_confirmation(r));
    } else if (kind == "delete-account") {
        Record as_request("deletion-request");
        for (const auto& [k, v] : r.fields()) {
            as_request.add(k, v);
        }
        const auto req = privacy::decode_deletion_request(as_request);
        if (req.owner != from || req.scope != privacy::DeletionScope::Account ||
            !privacy::verify_deletion_request(req, peer(from).keys.public_key())) {
            throw SimError("bad-signature", "account deletion");
        }
        for (auto it = server_.public_store.begin(); it != server_.public_store.end();) {
            it = it->first.owner == from ? server_.public_store.erase(it) : std::next(it);
        }
        server_.directory.erase(from);
        for (auto it = server_.credentials.begin(); it != server_.credentials.end();) {
            it = it->second.user == from ? server_.credentials.erase(it) : std::next(it);
        }
        for (const auto& holder : req.pending_holders) {
            privacy::DeletionRequest single = req;
            single.pending_holders = {holder};
            server_.escrow.push_back({single, holder});
            log(std::string(kServer), "escrow", holder.str() + "|" + r.encode());
            if (is_connected(holder)) {
                send_from_server(holder, privacy::encode_deletion_request(single));
            }
        }
    } else if (kind == "abuse-report" || kind == "block-report") {
        const UserId offender = UserId::parse(r.get("offender"));
        const auto category = kind == "block-report" ? reputation::Category::Spam
                                                     : reputation::parse_category(r.get("category"));
        const std::string digest = r.has("content-digest") ? r.get("content-digest") : "";
        const auto result = server_.reputation.report(from, offender, category, r.get("incident"));
        server_.reports.push_back({from, offender, category, digest});
        reply.set("outcome", std::string(reputation::to_string(result.outcome)));
        reply.set("action", std::string(reputation::to_string(result.action)));
    } else if (kind == "reputation-query") {
        const auto& rec = server_.reputation.query(UserId::parse(r.get("suspect")));
        reply.set("reports", static_cast<std::uint64_t>(rec.total_reports));
    } else if (kind == "help-request") {
        const UserSet exclude = [&] {
            UserSet s;
            for (const auto& e : r.get_all("exclude")) {
                s.insert(UserId::parse(e));
            }
            return s;
        }();
        Record clean("help-request");
        for (const auto& [k, v] : r.fields()) {
            if (k != "exclude") {
                clean.add(k, v);
            }
        }
        for (const auto& [id, p] : peers_) {
            if (id != from && p->connected && !p->deleted && !exclude.count(id)) {
                send_from_server(id, clean);
            }
        }
    } else {
        throw SimError("unknown-rpc", kind);
    }
    return reply;
}

void World::server_record_confirmation(const privacy::DeletionConfirmation& c) {
    if (!privacy::verify_confirmation(c, peer(c.confirming_holder).keys.public_key())) {
        log(std::string(kServer), "confirmation-rejected", c.confirming_holder.str());
        return;
    }
    server_.recorded_confirmations.push_back(c);
    auto& escrow = server_.escrow;
    escrow.erase(std::remove_if(escrow.begin(), escrow.end(),
                                [&](const EscrowEntry& e) {
                                    return e.holder == c.confirming_holder && e.request.owner == c.owner &&
                                           e.request.scope == c.scope && e.request.content_id == c.content_id;
                                }),
                 escrow.end());
    log(std::string(kServer), "confirmation", privacy::confirmation_payload(c));
    const PeerNode* owner = find_peer(c.owner);
    if (owner == nullptr || owner->deleted) {
        return;
    }
    if (owner->connected) {
        send_from_server(c.owner, privacy::encode_confirmation(c));
    } else {
        server_.confirmations_for_owner[c.owner].push_back(c);
    }
}

std::string ServerNode::dump() const {
    std::ostringstream out;
    out << "[directory]\n";
    for (const auto& [id, e] : directory) {
        out << id.str() << ' ' << e.address << ' ' << (e.connected ? "connected" : "offline") << ' '
            << (e.approved ? "approved" : "pending") << '\n';
    }
    out << "[credentials]\n";
    for (const auto& [pseudo, c] : credentials) {
        out << pseudo << ' ' << c.user.str() << ' ' << c.salt << ' ' << c.digest << '\n';
    }
    out << "[public]\n";
    for (const auto& [key, pub] : public_store) {
        out << key.str() << ' ' << pub.body << '\n';
    }
    out << "[escrow]\n";
    for (const auto& e : escrow) {
        out << e.holder.str() << ' ' << privacy::deletion_payload(e.request.owner, e.request.scope, e.request.content_id)
            << '\n';
    }
    out << "[confirmations]\n";
    for (const auto& c : recorded_confirmations) {
        out << privacy::confirmation_payload(c) << '\n';
    }
    out << "[reports]\n";
    for (const auto& r : reports) {
        out << r.reporter.str() << ' ' << r.offender.str() << ' ' << reputation::to_string(r.category) << ' '
            << r.content_digest << '\n';
    }
    out << "[reputation]\n" << reputation.export_table();
    out << "[racl]\n";
    for (const auto& u : racl.entries()) {
        out << crypto::to_hex(u) << '\n';
    }
    return out.str();
}

// ------------------------------------------------------------ scanners

bool World::admitted(const ContentKey& content, const UserId& viewer) const {
    const auto it = truth_.find(content);
    return it != truth_.end() && privacy::audience_admits(it->second.metadata, viewer);
}

void World::violation(const std::string& what) {
    violations_.push_back("tick " + std::to_string(clock_) + ": " + what);
}

void World::scan_tick() {
    for (const auto& [id, p] : peers_) {
        for (const auto& [key, replica] : p->store.replicas()) {
            const auto t = truth_.find(key);
            if (t == truth_.end() || profile::is_public(t->second.metadata.audience)) {
                continue;
            }
            if (replica.form == privacy::ReplicaForm::Clear && !admitted(key, id)) {
                violation(id.str() + " holds clear replica of " + key.str());
            }
        }
        for (const auto& [key, pub] : p->feed) {
            if (!profile::is_public(pub.metadata.audience)) {
                violation(id.str() + " feed holds non-public " + key.str());
            }
        }
    }
    for (; renders_scanned_ < renders_.size(); ++renders_scanned_) {
        const RenderEvent& r = renders_[renders_scanned_];
        if (r.rendered && !admitted(r.content, r.viewer)) {
            violation(r.viewer.str() + " rendered " + r.content.str() + " outside its audience");
        }
    }
    for (const auto& [key, pub] : server_.public_store) {
        if (!profile::is_public(pub.metadata.audience)) {
            violation("server stores non-public " + key.str());
        }
    }
    const std::string dump = server_.dump();
    for (const auto& [key, t] : truth_) {
        if (!body_is_public(key) && t.body.size() >= 8 && contains(dump, t.body)) {
            violation("server state contains private body of " + key.str());
        }
    }
    for (const auto& token : self_test_tokens_) {
        if (contains(dump, token)) {
            violation("server state contains a self-test score");
        }
    }
    for (const auto& body : message_bodies_) {
        if (body.size() >= 8 && contains(dump, body)) {
            violation("server state contains a private message body");
        }
    }
}

bool World::body_is_public(const ContentKey& content) const {
    std::optional<ContentKey> at = content;
    for (int depth = 0; at && depth < 16; ++depth) {
        const auto t = truth_.find(*at);
        if (t == truth_.end()) {
            return false;
        }
        if (profile::is_public(t->second.metadata.audience)) {
            return true;
        }
        const auto& via = t->second.metadata.via;
        at = via ? std::optional<ContentKey>(ContentKey{via->original_owner, via->original_content_id})
                 : std::nullopt;
    }
    return false;
}

std::vector<std::string> World::final_scan() {
    scan_tick();
    // Plaintext of private content must not sit anywhere on non-audience
    // machines, in any form.
    for (const auto& [key, t] : truth_) {
        if (body_is_public(key) || t.body.size() < 8) {
            continue;
        }
        for (const auto& [id, p] : peers_) {
            // The owner of a re-shared original holds that body legitimately.
            const auto& via = t.metadata.via;
            if (admitted(key, id) || (via && admitted({via->original_owner, via->original_content_id}, id))) {
                continue;
            }
            bool leaked = false;
            for (const auto& [k, r] : p->store.replicas()) {
                leaked |= contains(r.clear_body, t.body) || contains(r.sealed_body.body, t.body);
            }
            for (const auto& [k, pub] : p->feed) {
                leaked |= contains(pub.body, t.body);
            }
            for (const auto& [k, pub] : p->publications) {
                leaked |= contains(pub.body, t.body);
            }
            if (leaked) {
                violation(id.str() + " holds plaintext of " + key.str());
            }
        }
    }
    for (const auto& w : wire_) {
        for (const auto& token : self_test_tokens_) {
            if (contains(w.inner, token) || (token.size() >= 8 && contains(w.outer, token))) {
                violation("self-test score on the wire (" + w.kind + " " + w.from + "->" + w.to + ")");
            }
        }
        for (const auto& [key, t] : truth_) {
            if (body_is_public(key) || t.body.size() < 8) {
                continue;
            }
            if (contains(w.outer, t.body)) {
                violation("private body in clear on the wire (" + w.kind + ")");
            }
            if (w.to == kServer && contains(w.inner, t.body)) {
                violation("private body sent to the server (" + w.kind + ")");
            }
        }
        for (const auto& body : message_bodies_) {
            if (body.size() >= 8 && contains(w.outer, body)) {
                violation("private message in clear on the wire");
            }
        }
        const bool carries_rating = contains(w.inner, "\nrating:") || w.inner.rfind("rating:", 0) == 0;
        if (carries_rating && (w.kind != "evaluation" || w.to == kServer || w.from == kServer)) {
            violation("evaluation value outside the session exchange (" + w.kind + ")");
        }
        if ((w.kind == "help-request" || w.kind == "help-offer") &&
            (contains(w.inner, "score") || carries_rating)) {
            violation("matching message carries scores or evaluations");
        }
    }
    return violations_;
}

std::string World::dump() const {
    std::ostringstream out;
    out << "clock " << clock_ << '\n';
    for (const auto& [id, p] : peers_) {
        out << "[peer " << id.str() << "] " << (p->deleted ? "deleted" : p->connected ? "connected" : "offline")
            << " pending=" << p->pending.size() << " keys=" << p->keyring.size()
            << " inbox=" << p->inbox->messages().size() << " feed=" << p->feed.size() << '\n';
        for (const auto& [cid, pub] : p->publications) {
            out << "  own " << profile::key_of(pub.metadata).str() << '\n';
        }
        for (const auto& [key, r] : p->store.replicas()) {
            out << "  replica " << key.str() << ' ' << privacy::to_string(r.form);
            if (r.form == privacy::ReplicaForm::Encrypted) {
                out << ' ' << r.class_id << "/v" << r.key_version;
            }
            out << '\n';
        }
        for (const auto& key : p->store.tombstones()) {
            out << "  tombstone " << key.str() << '\n';
        }
    }
    out << "[server]\n" << server_.dump();
    return out.str();
}

}  // namespace appraide::sim
