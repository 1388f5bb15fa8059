#include "triage/bundle.hpp"

#include <nlohmann/json.hpp>

#include "triage/errors.hpp"

namespace triage {

using json = nlohmann::json;  // json object keys are kept sorted by the library

std::string_view action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::click: return "click";
    case ActionKind::type: return "type";
    case ActionKind::scroll: return "scroll";
    case ActionKind::key: return "key";
    case ActionKind::navigate: return "navigate";
    case ActionKind::note: return "note";
  }
  return "note";
}

std::string_view resource_kind_name(ResourceKind k) {
  switch (k) {
    case ResourceKind::html: return "html";
    case ResourceKind::script: return "script";
    case ResourceKind::image: return "image";
    case ResourceKind::other: return "other";
  }
  return "other";
}

std::optional<ResourceKind> resource_kind_from_name(std::string_view name) {
  if (name == "html") return ResourceKind::html;
  if (name == "script") return ResourceKind::script;
  if (name == "image") return ResourceKind::image;
  if (name == "other") return ResourceKind::other;
  return std::nullopt;
}

ResourceKind resource_kind_for_mime(std::string_view mime) {
  std::string m = to_lower(mime);
  if (m.find("html") != std::string::npos) return ResourceKind::html;
  if (m.find("javascript") != std::string::npos || m.find("ecmascript") != std::string::npos)
    return ResourceKind::script;
  if (m.rfind("image/", 0) == 0) return ResourceKind::image;
  return ResourceKind::other;
}

namespace {

bool valid_resource_id(std::string_view id) {
  if (id.empty() || id.size() > 200) return false;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return id.front() != '.';
}

}  // namespace

void ResourceStore::put(std::string id, ResourceKind kind,
                        std::vector<unsigned char> content) {
  if (!valid_resource_id(id))
    throw IntegrityError("resource id invalid: '" + id + "'");
  if (entries_.count(id)) throw IntegrityError("duplicate resource id: " + id);
  Resource r;
  r.kind = kind;
  r.sha256 = sha256(std::span<const unsigned char>(content.data(), content.size()));
  r.content = std::move(content);
  entries_.emplace(std::move(id), std::move(r));
}

void ResourceStore::put_text(std::string id, ResourceKind kind, std::string_view text) {
  put(std::move(id), kind,
      std::vector<unsigned char>(text.begin(), text.end()));
}

const Resource* ResourceStore::find(std::string_view id) const {
  auto it = entries_.find(std::string(id));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string_view, const Resource*>> ResourceStore::prefix_scan(
    std::string_view prefix) const {
  std::vector<std::pair<std::string_view, const Resource*>> out;
  for (auto it = entries_.lower_bound(std::string(prefix)); it != entries_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    out.emplace_back(it->first, &it->second);
  }
  return out;
}

std::vector<std::string> Persona::secrets() const {
  std::vector<std::string> out;
  if (!password.empty()) out.push_back(password);
  if (!card_number.empty()) {
    out.push_back(card_number);
    std::string digits;
    for (char c : card_number)
      if (c >= '0' && c <= '9') digits.push_back(c);
    if (!digits.empty() && digits != card_number) out.push_back(digits);
  }
  return out;
}

bool Persona::complete() const {
  return !full_name.empty() && !username.empty() && !password.empty() && !email.empty() &&
         !phone.empty() && !address.empty() && !card_number.empty() && !card_exp.empty() &&
         !card_cvc.empty() && !user_agent.empty();
}

Persona Persona::default_persona() {
  Persona p;
  p.full_name = "Bob Alice";
  p.username = "randombob";
  p.password = "ZK29YcCITMb!";
  p.email = "boba@demo.com";
  p.phone = "+1-555-0199";
  p.address = "123 Maple Ave, Springfield, IL 62704, US";
  p.card_number = "1234 5678 9012 3456";
  p.card_exp = "12/29";
  p.card_cvc = "000";
  p.user_agent =
      "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) AppleWebKit/537.36 "
      "(KHTML, like Gecko) Chrome/120.0.0.0 Safari/537.36";
  return p;
}

namespace {

// Free-form strings pass through canon_encode so the serialization stays
// total and injective even for non-UTF-8 bytes.
json cstr(std::string_view s) { return json(canon_encode(s)); }

json headers_json(const std::vector<Header>& hs) {
  json arr = json::array();
  for (const auto& h : hs)
    arr.push_back(json{{"name", cstr(h.name)}, {"value", cstr(h.value)}});
  return arr;
}

std::string fixed3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

json network_json(const NetworkRecord& r) {
  json j;
  j["seq"] = r.seq;
  j["started_at"] = format_abs6(r.started_at);
  j["duration_ms"] = fixed3(r.duration_ms);
  j["method"] = cstr(r.method);
  j["url"] = cstr(r.url);
  j["host"] = cstr(r.host);
  j["status"] = r.status;
  j["request_headers"] = headers_json(r.request_headers);
  j["response_headers"] = headers_json(r.response_headers);
  j["request_body"] = cstr(r.request_body);
  j["request_body_truncated"] = r.request_body_truncated;
  j["response_body_ref"] = cstr(r.response_body_ref);
  j["mime_type"] = cstr(r.mime_type);
  return j;
}

json action_payload_json(const ActionEvent& a) {
  json j;
  switch (a.kind) {
    case ActionKind::click: {
      const auto& p = std::get<ClickPayload>(a.payload);
      j["x"] = p.x;
      j["y"] = p.y;
      break;
    }
    case ActionKind::type: {
      const auto& p = std::get<TypePayload>(a.payload);
      j["target"] = cstr(p.target);
      j["text"] = cstr(p.text);
      break;
    }
    case ActionKind::scroll:
      j["dy"] = std::get<ScrollPayload>(a.payload).dy;
      break;
    case ActionKind::key:
      j["key"] = cstr(std::get<KeyPayload>(a.payload).key);
      break;
    case ActionKind::navigate:
      j["url"] = cstr(std::get<NavigatePayload>(a.payload).url);
      break;
    case ActionKind::note:
      j["text"] = cstr(std::get<NotePayload>(a.payload).text);
      break;
  }
  return j;
}

}  // namespace

std::string canonical_json(const EvidenceBundle& b) {
  json root;
  root["bundle_id"] = cstr(b.bundle_id);
  root["epoch_t0"] = format_abs6(b.epoch_t0);
  root["session_end"] = b.session_end.str_fixed6();

  json net = json::array();
  for (const auto& r : b.network) net.push_back(network_json(r));
  root["network"] = net;

  json frames = json::array();
  for (const auto& f : b.frames) {
    frames.push_back(json{{"frame_no", f.frame_no},
                          {"t_rel", f.t_rel.str_fixed6()},
                          {"image_ref", cstr(f.image_ref)}});
  }
  root["frames"] = frames;

  json actions = json::array();
  for (const auto& a : b.actions) {
    actions.push_back(json{{"t_rel", a.t_rel.str_fixed6()},
                           {"kind", std::string(action_kind_name(a.kind))},
                           {"payload", action_payload_json(a)},
                           {"annotation", cstr(a.annotation)}});
  }
  root["actions"] = actions;

  json res = json::object();
  for (const auto& [id, r] : b.resources.entries()) {
    Digest d = sha256(std::span<const unsigned char>(r.content.data(), r.content.size()));
    res[id] = json{{"kind", std::string(resource_kind_name(r.kind))},
                   {"sha256", to_hex(d)},
                   {"size", r.content.size()}};
  }
  root["resources"] = res;

  const SessionContext& c = b.context;
  root["context"] = json{{"lure_subject", cstr(c.lure_subject)},
                         {"lure_body_text", cstr(c.lure_body_text)},
                         {"lure_from", cstr(c.lure_from)},
                         {"target_url", cstr(c.target_url)},
                         {"time_budget_s", fixed3(c.time_budget_s)},
                         {"persona",
                          json{{"full_name", cstr(c.persona.full_name)},
                               {"username", cstr(c.persona.username)},
                               {"password", cstr(c.persona.password)},
                               {"email", cstr(c.persona.email)},
                               {"phone", cstr(c.persona.phone)},
                               {"address", cstr(c.persona.address)},
                               {"card_number", cstr(c.persona.card_number)},
                               {"card_exp", cstr(c.persona.card_exp)},
                               {"card_cvc", cstr(c.persona.card_cvc)},
                               {"user_agent", cstr(c.persona.user_agent)}}}};
  return root.dump();
}

namespace {

void check_invariants(const EvidenceBundle& b) {
  for (std::size_t i = 1; i < b.network.size(); ++i) {
    if (b.network[i].started_at < b.network[i - 1].started_at)
      throw IntegrityError("network records not sorted by started_at");
  }
  for (const auto& r : b.network) {
    if (r.started_at < b.epoch_t0)
      throw IntegrityError("network record precedes epoch_t0");
    if (!r.response_body_ref.empty() && !b.resources.contains(r.response_body_ref))
      throw IntegrityError("dangling response_body_ref: " + r.response_body_ref);
  }
  for (std::size_t i = 1; i < b.frames.size(); ++i) {
    if (b.frames[i].t_rel <= b.frames[i - 1].t_rel)
      throw IntegrityError("frame t_rel not strictly increasing");
  }
  for (const auto& f : b.frames) {
    if (!b.resources.contains(f.image_ref))
      throw IntegrityError("dangling frame image_ref: " + f.image_ref);
  }
  for (std::size_t i = 1; i < b.actions.size(); ++i) {
    if (b.actions[i].t_rel < b.actions[i - 1].t_rel)
      throw IntegrityError("action t_rel decreasing");
  }
  RelTime max_rel{0};
  if (!b.frames.empty()) max_rel = std::max(max_rel, b.frames.back().t_rel);
  if (!b.actions.empty()) max_rel = std::max(max_rel, b.actions.back().t_rel);
  if (b.session_end < max_rel)
    throw IntegrityError("session_end precedes last recorded event");
}

}  // namespace

Digest seal(EvidenceBundle& b) {
  check_invariants(b);
  Digest d = sha256(canonical_json(b));
  b.manifest_hash = d;
  return d;
}

bool verify(const EvidenceBundle& b, const Digest& digest) {
  return sha256(canonical_json(b)) == digest;
}

}  // namespace triage
