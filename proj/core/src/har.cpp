#include <nlohmann/json.hpp>

#include <algorithm>

#include "triage/errors.hpp"
#include "triage/ingest.hpp"

namespace triage {

using json = nlohmann::json;

namespace {

std::string get_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

std::vector<Header> get_headers(const json& obj) {
  std::vector<Header> out;
  auto it = obj.find("headers");
  if (it == obj.end() || !it->is_array()) return out;
  for (const auto& h : *it) {
    if (!h.is_object()) continue;
    out.push_back(Header{get_string(h, "name"), get_string(h, "value")});
  }
  return out;
}

}  // namespace

HarIngest ingest_har(std::string_view har_text, std::size_t body_cap) {
  json root;
  try {
    root = json::parse(har_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("HAR: ") + e.what(), e.byte);
  }
  if (!root.is_object() || !root.contains("log") || !root["log"].is_object())
    throw ParseError("HAR: top-level 'log' object missing", 0);
  const json& log = root["log"];
  if (!log.contains("entries") || !log["entries"].is_array())
    throw ParseError("HAR: 'log.entries' array missing", 0);

  HarIngest out;
  struct Pending {
    NetworkRecord rec;
    std::vector<unsigned char> response_body;
    std::string mime;
    bool has_body = false;
  };
  std::vector<Pending> pending;

  std::size_t index = 0;
  for (const auto& entry : log["entries"]) {
    ++index;
    if (!entry.is_object()) {
      out.warnings.push_back("SkippedEntry: entry " + std::to_string(index) +
                             " is not an object");
      continue;
    }
    std::string started = get_string(entry, "startedDateTime");
    double started_at = 0.0;
    try {
      if (started.empty()) throw ParseError("missing startedDateTime");
      started_at = parse_rfc3339(started);
    } catch (const ParseError&) {
      out.warnings.push_back("SkippedEntry: entry " + std::to_string(index) +
                             " has no parsable start time");
      continue;
    }

    Pending p;
    p.rec.started_at = started_at;
    if (auto it = entry.find("time"); it != entry.end() && it->is_number()) {
      double t = it->get<double>();
      p.rec.duration_ms = t < 0 ? 0.0 : t;  // HAR uses -1 for unknown
    }
    if (entry.contains("request") && entry["request"].is_object()) {
      const json& req = entry["request"];
      p.rec.method = get_string(req, "method");
      p.rec.url = get_string(req, "url");
      p.rec.request_headers = get_headers(req);
      if (req.contains("postData") && req["postData"].is_object()) {
        std::string text = get_string(req["postData"], "text");
        if (text.size() > body_cap) {
          p.rec.request_body = text.substr(0, body_cap);
          p.rec.request_body_truncated = true;
        } else {
          p.rec.request_body = std::move(text);
        }
      }
    }
    p.rec.host = host_of_url(p.rec.url);
    if (entry.contains("response") && entry["response"].is_object()) {
      const json& resp = entry["response"];
      if (auto it = resp.find("status"); it != resp.end() && it->is_number_integer()) {
        int s = it->get<int>();
        p.rec.status = s < 0 ? 0 : s;
      }
      p.rec.response_headers = get_headers(resp);
      if (resp.contains("content") && resp["content"].is_object()) {
        const json& content = resp["content"];
        p.mime = get_string(content, "mimeType");
        std::string text = get_string(content, "text");
        if (!text.empty()) {
          if (get_string(content, "encoding") == "base64") {
            if (auto bytes = base64_decode(text)) {
              p.response_body = std::move(*bytes);
              p.has_body = true;
            }
          } else {
            p.response_body.assign(text.begin(), text.end());
            p.has_body = true;
          }
        }
      }
    }
    p.rec.mime_type = p.mime;
    pending.push_back(std::move(p));
  }

  std::stable_sort(pending.begin(), pending.end(),
                   [](const Pending& a, const Pending& b) {
                     return a.rec.started_at < b.rec.started_at;
                   });

  char idbuf[64];
  for (std::size_t i = 0; i < pending.size(); ++i) {
    Pending& p = pending[i];
    p.rec.seq = i;
    if (p.has_body) {
      std::snprintf(idbuf, sizeof(idbuf), "har-body-%04zu", i);
      Resource r;
      r.kind = resource_kind_for_mime(p.mime);
      r.sha256 = sha256(std::span<const unsigned char>(p.response_body.data(),
                                                       p.response_body.size()));
      r.content = std::move(p.response_body);
      p.rec.response_body_ref = idbuf;
      out.body_resources.emplace_back(idbuf, std::move(r));
    }
    out.records.push_back(std::move(p.rec));
  }
  return out;
}

}  // namespace triage
