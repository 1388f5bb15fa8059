#include "triage/remote.hpp"

#include <httplib.h>

#include <cstdlib>

#include "triage/errors.hpp"

namespace triage {

using json = nlohmann::json;

namespace {

// The three evidence tools, advertised in chat-completions function form.
json tool_definitions() {
  auto tool = [](const char* name, const char* description, json params) {
    return json{{"type", "function"},
                {"function", json{{"name", name},
                                  {"description", description},
                                  {"parameters", std::move(params)}}}};
  };
  json time_param{{"type", "number"}, {"description", "seconds relative to session epoch"}};
  return json::array(
      {tool("get_session", "HTTP traffic and headers, optionally time-windowed and filtered",
            json{{"type", "object"},
                 {"properties",
                  json{{"time", time_param},
                       {"filter",
                        json{{"type", "string"},
                             {"description",
                              "space-separated key:value clauses over host,url,method,status,mime"}}},
                       {"offset", json{{"type", "integer"}}}}}}),
       tool("get_screenshot", "rendered frame at or before a session time",
            json{{"type", "object"},
                 {"properties", json{{"time", time_param}}},
                 {"required", json::array({"time"})}}),
       tool("retrieve_resource", "persisted HTML/JS artifacts by id prefix",
            json{{"type", "object"},
                 {"properties",
                  json{{"prefix", json{{"type", "string"}}},
                       {"offset", json{{"type", "integer"}}}}},
                 {"required", json::array({"prefix"})}})});
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // leading path, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos)
    throw BackendError("remote: base_url missing scheme: " + base_url);
  auto path_start = base_url.find('/', scheme_end + 3);
  SplitUrl s;
  if (path_start == std::string::npos) {
    s.origin = base_url;
  } else {
    s.origin = base_url.substr(0, path_start);
    s.path = base_url.substr(path_start);
  }
  while (!s.path.empty() && s.path.back() == '/') s.path.pop_back();
  return s;
}

json post_chat(const RemoteEndpointConfig& config, const json& payload) {
  SplitUrl url = split_base_url(config.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config.timeout_s);
  client.set_read_timeout(config.timeout_s);

  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(url.path + "/chat/completions", headers, payload.dump(),
                         "application/json");
  if (!res) throw BackendError("remote: HTTP request failed (no response)");
  if (res->status < 200 || res->status >= 300)
    throw BackendError("remote: HTTP " + std::to_string(res->status) + ": " + res->body);
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw BackendError("remote: response is not JSON");
  return body;
}

const json& first_message(const json& completion) {
  if (!completion.contains("choices") || !completion["choices"].is_array() ||
      completion["choices"].empty() || !completion["choices"][0].contains("message"))
    throw BackendError("remote: completion without choices[0].message");
  return completion["choices"][0]["message"];
}

void add_usage(const json& completion, std::uint64_t& prompt, std::uint64_t& out) {
  if (!completion.contains("usage")) return;
  const json& u = completion["usage"];
  prompt += u.value("prompt_tokens", 0ULL);
  out += u.value("completion_tokens", 0ULL);
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteEndpointConfig config) : config_(std::move(config)) {}

BackendReply RemoteBackend::adjudicate(const TechniqueBrief& brief, const ToolCallFn& tool) {
  json messages = json::array();
  messages.push_back(json{{"role", "system"}, {"content", brief.system_prompt}});

  std::string user = "Technique under investigation: " + brief.technique_id + " (" +
                     brief.technique_name + ").\n" + brief.guidance +
                     "\nReply with the verdict JSON once your investigation is complete.";
  if (!brief.rejection_feedback.empty()) {
    user += "\n\nYour previous reply was rejected by the evidence citation protocol:\n";
    for (const auto& r : brief.rejection_feedback) user += "- " + r + "\n";
    user += "Correct these problems and reply with valid verdict JSON.";
  }
  messages.push_back(json{{"role", "user"}, {"content", user}});

  BackendReply reply;
  int tool_calls_used = 0;
  bool budget_notice_sent = false;

  for (int round = 0; round < 2 * config_.max_tool_calls + 4; ++round) {
    json payload{{"model", config_.model}, {"messages", messages}};
    if (tool_calls_used < config_.max_tool_calls)
      payload["tools"] = tool_definitions();

    json completion = post_chat(config_, payload);
    add_usage(completion, reply.prompt_tokens, reply.completion_tokens);
    const json& message = first_message(completion);

    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
      messages.push_back(message);
      for (const auto& call : message["tool_calls"]) {
        std::string call_id = call.value("id", "");
        std::string fn_name = call.value("function", json::object()).value("name", "");
        std::string args_text =
            call.value("function", json::object()).value("arguments", "{}");
        json args = json::parse(args_text, nullptr, false);
        if (args.is_discarded()) args = json::object();

        json tool_response;
        if (tool_calls_used >= config_.max_tool_calls) {
          tool_response =
              json{{"error", json{{"code", 2}, {"message", "tool budget exhausted"}}}};
        } else {
          ++tool_calls_used;
          json request{{"request_id", call_id.empty() ? json(tool_calls_used) : json(call_id)},
                       {"method", fn_name},
                       {"params", args}};
          tool_response = tool(request);
        }
        messages.push_back(json{{"role", "tool"},
                                {"tool_call_id", call_id},
                                {"content", tool_response.dump()}});
      }
      if (tool_calls_used >= config_.max_tool_calls && !budget_notice_sent) {
        budget_notice_sent = true;
        messages.push_back(
            json{{"role", "user"},
                 {"content", "Tool budget exhausted. Reply now with your final verdict "
                             "JSON based on the evidence already retrieved."}});
      }
      continue;
    }

    std::string content =
        message.contains("content") && message["content"].is_string()
            ? message["content"].get<std::string>()
            : "";
    reply.raw_output = content;
    break;
  }

  reply.usd = static_cast<double>(reply.prompt_tokens) / 1000.0 *
                  config_.usd_per_1k_prompt_tokens +
              static_cast<double>(reply.completion_tokens) / 1000.0 *
                  config_.usd_per_1k_completion_tokens;
  return reply;
}

CompletionResult remote_complete(const RemoteEndpointConfig& config,
                                 const std::string& system_prompt,
                                 const std::string& user_prompt) {
  json payload{{"model", config.model},
               {"messages", json::array({json{{"role", "system"}, {"content", system_prompt}},
                                         json{{"role", "user"}, {"content", user_prompt}}})}};
  json completion = post_chat(config, payload);
  CompletionResult out;
  add_usage(completion, out.prompt_tokens, out.completion_tokens);
  const json& message = first_message(completion);
  if (message.contains("content") && message["content"].is_string())
    out.content = message["content"].get<std::string>();
  return out;
}

}  // namespace triage
