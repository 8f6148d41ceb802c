#pragma once

// Deterministic discrete-event simulation of peers and one logical server.
// Peer-to-peer and server-to-peer traffic is queued with a fixed latency and
// always travels as sign-then-encrypt envelopes. Peer-to-server calls are
// synchronous. Scanners check confidentiality and server minimality.

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "appraide/credentials.hpp"
#include "appraide/matching.hpp"
#include "appraide/messaging.hpp"
#include "appraide/privacy.hpp"
#include "appraide/profile.hpp"
#include "appraide/record.hpp"
#include "appraide/reputation.hpp"

namespace appraide::sim {

using profile::ContentKey;
using profile::Publication;
using profile::UserId;
using profile::UserSet;

/// Raised by world actions. `code` is a short kebab-case reason such as
/// "pseudonym-taken" or "not-authorized".
class SimError : public std::runtime_error {
public:
    explicit SimError(std::string code, const std::string& detail = {})
        : std::runtime_error(detail.empty() ? code : code + ": " + detail), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct Config {
    unsigned user_key_bits = 256;
    unsigned class_key_bits = 128;
    std::int64_t latency = 1;
    std::int64_t offer_window = 10;
};

struct TraceLine {
    std::int64_t tick = 0;
    std::string node;
    std::string event;
    std::string digest;  // first 16 hex digits of SHA-256 over the payload
};

/// A message as seen on the network, kept for the scanners. `outer` is the
/// exact transmitted bytes; `inner` the record inside the envelope.
struct WireCapture {
    std::int64_t tick = 0;
    std::string from;
    std::string to;
    std::string kind;
    std::string inner;
    std::string outer;
};

struct RenderEvent {
    std::int64_t tick = 0;
    UserId viewer;
    ContentKey content;
    bool rendered = false;
};

struct Message {
    std::uint64_t id = 0;
    bool from_server = false;
    bool to_server = false;
    UserId from;
    UserId to;
    std::string kind;
    std::string inner;  // encoded record, sealed only when transmitted
    std::string wire;   // kind frame + messaging::encode_wire output
    std::int64_t sent_at = 0;
};

struct HelpState {
    std::optional<matching::HelpRequest> request;
    std::string phase = "none";  // none | friends | server
    std::int64_t opened_at = 0;
    std::vector<matching::Offer> offers;
};

struct Session {
    std::string id;
    UserId helpee;
    UserId helper;
    bool ended = false;
    std::set<UserId> evaluated_by;
};

struct OwnerDeletion {
    UserSet holders;
    std::map<UserId, privacy::DeletionConfirmation> confirmations;
};

struct PeerNode {
    UserId id;
    bool connected = false;
    bool deleted = false;
    crypto::KeyPair keys;
    std::unique_ptr<profile::Profile> profile;
    profile::KeyRing keyring;
    std::map<std::uint64_t, Publication> publications;
    std::uint64_t next_content_id = 1;
    privacy::ReplicaStore store;
    privacy::ReplicationLog log;
    std::unique_ptr<messaging::Mailbox> inbox;
    std::map<ContentKey, Publication> feed;  // public items pushed by the server
    UserSet hidden_owners;                   // reported offenders
    std::deque<Message> pending;             // awaiting the receiver's connection
    std::map<ContentKey, OwnerDeletion> deletions;
    matching::EvaluationStore evaluations;
    std::vector<matching::StoredEvaluation> received_evaluations;
    std::optional<matching::HelperPreferences> prefs;
    bool auto_offer = false;
    std::vector<matching::HelpRequest> incoming_requests;
    HelpState help;
    std::vector<Record> pending_rpcs;  // server calls made while offline
};

struct DirectoryEntry {
    std::string address;  // opaque, renewed at each login
    bool connected = false;
    bool approved = true;
};

struct StoredCredential {
    UserId user;
    std::string salt;
    std::string digest;
};

struct AbuseReport {
    UserId reporter;
    UserId offender;
    reputation::Category category;
    std::string content_digest;
};

struct EscrowEntry {
    privacy::DeletionRequest request;
    UserId holder;
};

struct ServerNode {
    crypto::KeyPair keys;
    std::map<UserId, DirectoryEntry> directory;
    std::map<std::string, StoredCredential> credentials;  // by pseudonym
    std::map<ContentKey, Publication> public_store;
    std::vector<EscrowEntry> escrow;
    std::map<UserId, std::vector<privacy::DeletionConfirmation>> confirmations_for_owner;
    std::vector<privacy::DeletionConfirmation> recorded_confirmations;
    reputation::ReputationTable reputation;
    std::vector<AbuseReport> reports;
    credentials::Racl racl;

    /// Text rendering of everything the server stores.
    std::string dump() const;
};

struct Audience {
    enum class Kind { MeOnly, Class, Persons, Public } kind = Kind::MeOnly;
    std::string class_ref;
    std::vector<UserId> persons;
};

struct PublishRequest {
    profile::PublicationType type = profile::PublicationType::Statut;
    std::string science;
    profile::Level level = profile::Level::Lycee;
    Audience audience;
    std::optional<profile::Distribution> distribution;
    UserSet restricted_to;
    std::optional<std::uint64_t> content_id;
    std::string body;
};

class World {
public:
    explicit World(std::uint64_t seed, Config config = {});
    ~World();

    World(const World&) = delete;
    World& operator=(const World&) = delete;

    std::int64_t now() const { return clock_; }
    const Config& config() const { return config_; }

    // --- event loop
    void schedule(std::int64_t tick, std::function<void()> action);
    /// Runs every event at the next timestamp. Returns false when idle.
    bool step();
    void run_until(std::int64_t tick);
    void run_to_quiescence(std::int64_t limit = 1'000'000);
    bool idle() const { return queue_.empty(); }

    // --- accounts and connectivity
    UserId register_user(const std::string& pseudonym, const std::string& password, profile::Role role,
                         std::optional<std::uint32_t> number = std::nullopt);
    void approve_teacher(const UserId& id);
    void authenticate(const std::string& pseudonym, const std::string& password);
    void disconnect(const UserId& id);
    bool is_connected(const UserId& id) const;

    // --- social graph and publications
    void befriend(const UserId& a, const UserId& b);
    void assign_class(const UserId& owner, const UserId& member, const std::string& class_ref);
    void remove_class(const UserId& owner, const UserId& member, const std::string& class_ref);
    void block(const UserId& user, const UserId& target);
    ContentKey publish(const UserId& owner, const PublishRequest& request);
    /// Render on the viewer's machine; asks the owner when nothing is local.
    bool view(const UserId& viewer, const ContentKey& content);
    /// Pure render check on local state; logged for the scanner.
    bool renders(const UserId& viewer, const ContentKey& content);
    ContentKey reshare(const UserId& resharer, const ContentKey& original, const Audience& audience);
    void send_message(const UserId& from, const UserId& to, const std::string& body);
    void delete_content(const UserId& owner, std::uint64_t content_id);
    void delete_account(const UserId& owner);
    void record_self_test(const UserId& owner, const std::string& test_id, const std::string& score);

    // --- matching and reputation
    void set_prefs(const UserId& helper, const matching::HelperPreferences& prefs, bool auto_offer);
    void request_help(const matching::HelpRequest& request);
    void offer(const UserId& helper, const UserId& requester, const std::string& proposal);
    std::vector<matching::Offer> ranked_offers(const UserId& requester) const;
    std::string accept_offer(const UserId& requester, const UserId& helper);
    void end_session(const std::string& session_id);
    void evaluate(const std::string& session_id, const UserId& by, const std::string& rating, bool again);
    void report_abuse(const UserId& victim, const UserId& offender, reputation::Category category,
                      const std::optional<ContentKey>& content);
    void admin_review(const UserId& user, int false_declarations);
    reputation::WarnOutcome warn(const UserId& user, const UserId& suspect, bool block_first, bool sure);

    // --- inspection
    UserId resolve(const std::string& name) const;
    bool has_user(const std::string& name) const;
    const PeerNode& peer(const UserId& id) const;
    PeerNode& peer_for_test(const UserId& id) { return peer_mut(id); }
    const ServerNode& server() const { return server_; }
    const std::map<UserId, std::unique_ptr<PeerNode>>& peers() const { return peers_; }
    std::size_t replica_count(const ContentKey& content) const;
    std::size_t replica_count_of_owner(const UserId& owner) const;
    std::size_t escrow_count(const std::optional<UserId>& holder = std::nullopt) const;
    std::size_t confirmation_count(const ContentKey& content) const;
    const Session& session(const std::string& id) const;
    const std::vector<TraceLine>& trace() const { return trace_; }
    std::string trace_text() const;
    const std::vector<WireCapture>& wire() const { return wire_; }
    const std::vector<RenderEvent>& render_log() const { return renders_; }

    // --- scanners
    /// Per-tick checks run automatically after each step; end-of-run byte
    /// greps run here. Returns all violations found so far.
    std::vector<std::string> final_scan();
    const std::vector<std::string>& violations() const { return violations_; }
    std::string dump() const;

private:
    struct Event {
        std::int64_t tick;
        std::uint64_t seq;
        std::function<void()> action;
    };
    struct EventOrder {
        bool operator()(const Event& a, const Event& b) const {
            return a.tick != b.tick ? a.tick > b.tick : a.seq > b.seq;
        }
    };
    struct Truth {
        profile::PublicationMetadata metadata;
        std::string body;
    };

    PeerNode& peer_mut(const UserId& id);
    PeerNode* find_peer(const UserId& id);
    profile::AudienceSpec make_audience(const PeerNode& owner, const Audience& audience) const;
    ContentKey install_publication(PeerNode& owner, Publication pub);
    void server_call(PeerNode& from, const Record& inner);

    void log(const std::string& node, const std::string& event, const std::string& payload);

    // transport
    void send_p2p(const UserId& from, const UserId& to, const Record& inner);
    void send_p2p_raw(const UserId& from, const UserId& to, const std::string& kind, const std::string& inner);
    void send_from_server(const UserId& to, const Record& inner);
    void transmit(Message msg);
    void deliver(const Message& msg);
    void dispatch(PeerNode& receiver, const Message& msg, const Record& inner);
    void on_dropped(const Message& msg);
    void flush_pending_toward(const UserId& id);
    void flush_pending_from(PeerNode& sender);
    Record rpc(const UserId& from, const Record& inner);

    // peer-side handlers
    void handle_replica(PeerNode& p, const Record& r);
    void handle_key_delivery(PeerNode& p, const Record& r);
    void handle_deletion_request(PeerNode& p, const privacy::DeletionRequest& req, bool via_server);
    void handle_confirmation(PeerNode& p, const privacy::DeletionConfirmation& c);
    void handle_access_request(PeerNode& p, const UserId& requester, const Record& r);
    void handle_access_response(PeerNode& p, const Record& r);
    void handle_help_request(PeerNode& p, const Record& r);
    void handle_offer(PeerNode& p, const Record& r);
    void handle_evaluation(PeerNode& p, const UserId& from, const Record& r);
    void handle_feed(PeerNode& p, const Record& r);

    // server-side handlers
    void server_on_login(const UserId& id);
    Record server_handle(const UserId& from, const Record& r);
    void server_record_confirmation(const privacy::DeletionConfirmation& c);

    // replication
    void replicate_to(PeerNode& owner, const UserId& holder);
    void replicate_all(PeerNode& owner);
    void send_key_deliveries(const std::vector<profile::KeyDelivery>& deliveries);
    void check_help_window(const UserId& requester, std::int64_t opened_at);

    // scanners
    void scan_tick();
    bool admitted(const ContentKey& content, const UserId& viewer) const;
    /// True when the body is a re-share of something published publicly.
    bool body_is_public(const ContentKey& content) const;
    void violation(const std::string& what);

    Config config_;
    crypto::Rng rng_;
    std::int64_t clock_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t message_ids_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
    std::map<UserId, std::unique_ptr<PeerNode>> peers_;
    std::map<std::string, UserId> by_pseudonym_;
    std::map<profile::Role, std::uint32_t> next_number_;
    ServerNode server_;
    std::map<std::string, Session> sessions_;
    std::uint64_t next_session_ = 1;

    std::map<ContentKey, Truth> truth_;
    std::vector<std::string> self_test_tokens_;
    std::vector<std::string> message_bodies_;
    std::vector<TraceLine> trace_;
    std::vector<WireCapture> wire_;
    std::vector<RenderEvent> renders_;
    std::size_t renders_scanned_ = 0;
    std::vector<std::string> violations_;
};

}  // namespace appraide::sim
