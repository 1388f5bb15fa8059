#pragma once

// Immutable evidence-bundle data model: one browsing session frozen into
// network records, an indexed frame sequence, an action trace, a resource
// store and the session context, sealed under a SHA-256 manifest digest
// computed over a canonical serialization.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "triage/time.hpp"
#include "triage/util.hpp"

namespace triage {

inline constexpr std::size_t kInlineBodyCap = 64 * 1024;  // bytes kept inline per body

struct Header {
  std::string name;
  std::string value;
};

struct NetworkRecord {
  std::uint64_t seq = 0;
  double started_at = 0.0;  // absolute seconds
  double duration_ms = 0.0;
  std::string method;
  std::string url;
  std::string host;  // authority host of url
  int status = 0;    // 0 = aborted / no response
  std::vector<Header> request_headers;
  std::vector<Header> response_headers;
  std::string request_body;  // capped at kInlineBodyCap
  bool request_body_truncated = false;
  std::string response_body_ref;  // resource id, empty = none
  std::string mime_type;
};

struct FrameRecord {
  std::uint64_t frame_no = 0;
  RelTime t_rel;
  std::string image_ref;
};

enum class ActionKind { click, type, scroll, key, navigate, note };

std::string_view action_kind_name(ActionKind k);

struct ClickPayload {
  int x = 0, y = 0;
};
struct TypePayload {
  std::string target;  // field label
  std::string text;
};
struct ScrollPayload {
  int dy = 0;
};
struct KeyPayload {
  std::string key;
};
struct NavigatePayload {
  std::string url;
};
struct NotePayload {
  std::string text;
};

using ActionPayload = std::variant<ClickPayload, TypePayload, ScrollPayload, KeyPayload,
                                   NavigatePayload, NotePayload>;

struct ActionEvent {
  RelTime t_rel;
  ActionKind kind = ActionKind::note;
  ActionPayload payload;
  std::string annotation;  // one-line audit text
};

enum class ResourceKind { html, script, image, other };

std::string_view resource_kind_name(ResourceKind k);
std::optional<ResourceKind> resource_kind_from_name(std::string_view name);
ResourceKind resource_kind_for_mime(std::string_view mime);

struct Resource {
  ResourceKind kind = ResourceKind::other;
  std::vector<unsigned char> content;
  Digest sha256{};  // always matches content
};

class ResourceStore {
 public:
  // Throws IntegrityError on duplicate id or empty/invalid id.
  void put(std::string id, ResourceKind kind, std::vector<unsigned char> content);
  void put_text(std::string id, ResourceKind kind, std::string_view text);

  const Resource* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  // All entries whose id starts with prefix, in lexicographic id order.
  std::vector<std::pair<std::string_view, const Resource*>> prefix_scan(
      std::string_view prefix) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Resource>& entries() const { return entries_; }
  std::map<std::string, Resource>& mutable_entries() { return entries_; }

 private:
  std::map<std::string, Resource> entries_;
};

struct Persona {
  std::string full_name;
  std::string username;
  std::string password;  // secret: never rendered in reports
  std::string email;
  std::string phone;
  std::string address;
  std::string card_number;  // secret: never rendered in reports
  std::string card_exp;
  std::string card_cvc;
  std::string user_agent;

  // Substrings whose presence in a body marks exfiltration evidence.
  std::vector<std::string> secrets() const;
  bool complete() const;  // all fields non-empty

  static Persona default_persona();
};

struct SessionContext {
  std::string lure_subject;
  std::string lure_body_text;
  std::string lure_from;  // email address
  std::string target_url;
  Persona persona;
  double time_budget_s = 60.0;
};

struct EvidenceBundle {
  std::string bundle_id;
  double epoch_t0 = 0.0;
  std::vector<NetworkRecord> network;  // sorted non-decreasing by started_at
  std::vector<FrameRecord> frames;     // strictly increasing t_rel
  std::vector<ActionEvent> actions;    // non-decreasing t_rel
  ResourceStore resources;
  SessionContext context;
  RelTime session_end;
  std::optional<Digest> manifest_hash;  // present once sealed

  bool sealed() const { return manifest_hash.has_value(); }
};

// Canonical serialization: UTF-8 JSON with lexicographically sorted keys,
// timestamps as fixed 6-fractional-digit decimal strings, resource content
// represented by its recomputed SHA-256. Deterministic for a given bundle.
std::string canonical_json(const EvidenceBundle& bundle);

// Validates stream invariants and resource references, computes the manifest
// digest and marks the bundle sealed. Throws IntegrityError on dangling refs
// or violated ordering invariants.
Digest seal(EvidenceBundle& bundle);

// True iff the digest recomputed from current members equals `digest`.
// Resource digests are recomputed from bytes, not trusted from the store.
bool verify(const EvidenceBundle& bundle, const Digest& digest);

}  // namespace triage
