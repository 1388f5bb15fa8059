#include "triage/evidence_api.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "triage/errors.hpp"

namespace triage {

using json = nlohmann::json;

FilterExpr FilterExpr::parse(std::string_view text) {
  FilterExpr expr;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) break;
    std::string clause(text.substr(start, i - start));
    auto colon = clause.find(':');
    if (colon == std::string::npos)
      throw FilterParseError("filter clause missing ':': '" + clause + "'", clause);
    std::string key = to_lower(std::string_view(clause).substr(0, colon));
    std::string value = clause.substr(colon + 1);
    FilterClause fc;
    if (key == "host") {
      fc.key = FilterClause::Key::host;
    } else if (key == "url") {
      fc.key = FilterClause::Key::url;
    } else if (key == "method") {
      fc.key = FilterClause::Key::method;
    } else if (key == "status") {
      fc.key = FilterClause::Key::status;
      bool class_form = value.size() == 3 && std::isdigit(static_cast<unsigned char>(value[0])) &&
                        (value[1] == 'x' || value[1] == 'X') && (value[2] == 'x' || value[2] == 'X');
      bool code_form = !value.empty() &&
                       std::all_of(value.begin(), value.end(), [](unsigned char c) {
                         return std::isdigit(c);
                       });
      if (!class_form && !code_form)
        throw FilterParseError("filter status value must be a code or class: '" + clause + "'",
                               clause);
    } else if (key == "mime") {
      fc.key = FilterClause::Key::mime;
    } else {
      throw FilterParseError("unknown filter key in clause '" + clause + "'", clause);
    }
    fc.value = std::move(value);
    expr.clauses.push_back(std::move(fc));
  }
  return expr;
}

bool FilterExpr::matches(const NetworkRecord& r) const {
  for (const auto& c : clauses) {
    switch (c.key) {
      case FilterClause::Key::host:
        if (!icontains(r.host, c.value)) return false;
        break;
      case FilterClause::Key::url:
        if (!icontains(r.url, c.value)) return false;
        break;
      case FilterClause::Key::method:
        if (!iequals(r.method, c.value)) return false;
        break;
      case FilterClause::Key::status: {
        if (c.value.size() == 3 && (c.value[1] == 'x' || c.value[1] == 'X')) {
          if (r.status / 100 != c.value[0] - '0') return false;
        } else {
          if (std::to_string(r.status) != c.value) return false;
        }
        break;
      }
      case FilterClause::Key::mime:
        if (!icontains(r.mime_type, c.value)) return false;
        break;
    }
  }
  return true;
}

EvidenceApi::EvidenceApi(const EvidenceBundle& bundle) : bundle_(&bundle) {
  secrets_ = bundle.context.persona.secrets();
}

namespace {

json headers_json(const std::vector<Header>& hs) {
  json arr = json::array();
  for (const auto& h : hs) arr.push_back(json{{"name", h.name}, {"value", h.value}});
  return arr;
}

}  // namespace

json EvidenceApi::get_session(std::optional<RelTime> time,
                              const std::optional<FilterExpr>& filter,
                              std::size_t offset) const {
  const EvidenceBundle& b = *bundle_;
  std::vector<const NetworkRecord*> matched;

  std::optional<EvidenceWindow> window;
  if (time) {
    if (*time > b.session_end)
      throw OutOfSessionError("get_session: time past session end");
    window = EvidenceWindow{*time};
  }

  for (const auto& r : b.network) {
    if (window) {
      RelTime rel = RelTime::from_micros(std::llround((r.started_at - b.epoch_t0) * 1e6));
      if (!window->contains(rel)) continue;
    }
    if (filter && !filter->matches(r)) continue;
    matched.push_back(&r);
  }

  json records = json::array();
  std::size_t end = std::min(matched.size(), offset + kSessionPageCap);
  for (std::size_t i = offset; i < end; ++i) {
    const NetworkRecord& r = *matched[i];
    bool secret_match = false;
    for (const auto& s : secrets_) {
      if (!s.empty() && r.request_body.find(s) != std::string::npos) {
        secret_match = true;
        break;
      }
    }
    RelTime rel = RelTime::from_micros(std::llround((r.started_at - b.epoch_t0) * 1e6));
    records.push_back(json{{"seq", r.seq},
                           {"t_rel", rel.str_fixed6()},
                           {"duration_ms", r.duration_ms},
                           {"method", r.method},
                           {"url", r.url},
                           {"host", r.host},
                           {"status", r.status},
                           {"mime_type", r.mime_type},
                           {"request_headers", headers_json(r.request_headers)},
                           {"response_headers", headers_json(r.response_headers)},
                           {"request_body", r.request_body},
                           {"request_body_truncated", r.request_body_truncated},
                           {"response_body_ref", r.response_body_ref},
                           {"secret_match", secret_match}});
  }

  json out{{"records", records},
           {"total_matched", matched.size()},
           {"truncated", end < matched.size()}};
  if (window) {
    out["window"] = json{{"center", window->center.str_fixed6()},
                         {"lo", window->lo().str_fixed6()},
                         {"hi", window->hi().str_fixed6()}};
  }
  return out;
}

json EvidenceApi::get_screenshot(RelTime time) const {
  const EvidenceBundle& b = *bundle_;
  if (time > b.session_end)
    throw OutOfSessionError("get_screenshot: time past session end");
  const FrameRecord* f = seek_frame(b.frames, time);
  if (!f) throw NoFrameError("get_screenshot: no frame at or before " + time.str());
  return json{{"image_ref", f->image_ref},
              {"frame_no", f->frame_no},
              {"t_rel", f->t_rel.str_fixed6()}};
}

json EvidenceApi::retrieve_resource(std::string_view prefix, std::size_t offset) const {
  if (prefix.empty()) throw BadPrefixError("retrieve_resource: empty prefix");
  auto matched = bundle_->resources.prefix_scan(prefix);

  json resources = json::array();
  std::size_t end = std::min(matched.size(), offset + kResourcePageCap);
  for (std::size_t i = offset; i < end; ++i) {
    const auto& [id, res] = matched[i];
    std::size_t n = std::min(res->content.size(), kResourceContentCap);
    // Evidence content is surfaced as text; non-UTF8 bytes are base64-wrapped.
    std::string_view text(reinterpret_cast<const char*>(res->content.data()), n);
    bool binary = text.find('\0') != std::string_view::npos;
    json entry{{"resource_id", std::string(id)},
               {"kind", std::string(resource_kind_name(res->kind))},
               {"size", res->content.size()},
               {"sha256", to_hex(res->sha256)},
               {"content_truncated", n < res->content.size()}};
    if (binary) {
      entry["content_base64"] =
          base64_encode(std::span<const unsigned char>(res->content.data(), n));
    } else {
      entry["content"] = std::string(text);
    }
    resources.push_back(std::move(entry));
  }
  return json{{"resources", resources},
              {"total_matched", matched.size()},
              {"truncated", end < matched.size()}};
}

namespace {

json error_response(const json& request_id, ToolErrorCode code, const std::string& message) {
  return json{{"request_id", request_id},
              {"error", json{{"code", static_cast<int>(code)}, {"message", message}}}};
}

}  // namespace

json EvidenceApi::handle(const json& request) const {
  json request_id = nullptr;
  if (request.is_object() && request.contains("request_id"))
    request_id = request["request_id"];
  if (!request.is_object() || !request.contains("method") || !request["method"].is_string())
    return error_response(request_id, ToolErrorCode::bad_params, "missing method");

  const std::string method = request["method"].get<std::string>();
  const json params = request.value("params", json::object());
  if (!params.is_object())
    return error_response(request_id, ToolErrorCode::bad_params, "params must be an object");

  auto get_offset = [&]() -> std::size_t {
    if (params.contains("offset")) {
      if (!params["offset"].is_number_unsigned())
        throw Error("offset must be a nonnegative integer");
      return params["offset"].get<std::size_t>();
    }
    return 0;
  };
  auto get_time = [&](const char* key) -> std::optional<RelTime> {
    if (!params.contains(key)) return std::nullopt;
    if (params[key].is_number()) {
      double v = params[key].get<double>();
      if (v < 0) throw Error("time must be nonnegative");
      return RelTime::from_seconds(v);
    }
    if (params[key].is_string()) {
      auto t = parse_reltime(params[key].get<std::string>());
      if (!t) throw Error("time string not parsable");
      return t;
    }
    throw Error("time must be a number or decimal string");
  };

  try {
    json result;
    if (method == "get_session") {
      std::optional<FilterExpr> filter;
      if (params.contains("filter") && !params["filter"].is_null()) {
        if (!params["filter"].is_string())
          return error_response(request_id, ToolErrorCode::bad_params, "filter must be a string");
        filter = FilterExpr::parse(params["filter"].get<std::string>());
      }
      result = get_session(get_time("time"), filter, get_offset());
    } else if (method == "get_screenshot") {
      auto t = get_time("time");
      if (!t)
        return error_response(request_id, ToolErrorCode::bad_params, "time required");
      result = get_screenshot(*t);
    } else if (method == "retrieve_resource") {
      if (!params.contains("prefix") || !params["prefix"].is_string())
        return error_response(request_id, ToolErrorCode::bad_params, "prefix required");
      result = retrieve_resource(params["prefix"].get<std::string>(), get_offset());
    } else {
      return error_response(request_id, ToolErrorCode::method_not_found,
                            "unknown method '" + method + "'");
    }
    return json{{"request_id", request_id}, {"result", result}};
  } catch (const FilterParseError& e) {
    return error_response(request_id, ToolErrorCode::filter_parse, e.what());
  } catch (const OutOfSessionError& e) {
    return error_response(request_id, ToolErrorCode::out_of_session, e.what());
  } catch (const NoFrameError& e) {
    return error_response(request_id, ToolErrorCode::no_frame, e.what());
  } catch (const BadPrefixError& e) {
    return error_response(request_id, ToolErrorCode::bad_params, e.what());
  } catch (const std::exception& e) {
    return error_response(request_id, ToolErrorCode::bad_params, e.what());
  }
}

}  // namespace triage
