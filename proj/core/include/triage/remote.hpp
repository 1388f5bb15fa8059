#pragma once

// Chat-completion backed adjudicator and report writer. Speaks the common
// /chat/completions contract: system+user messages, optional tool calls,
// token usage accounting. Any vendor exposing that contract works.

#include <optional>
#include <string>

#include "triage/adjudicator.hpp"

namespace triage {

struct RemoteEndpointConfig {
  std::string base_url;          // e.g. "http://127.0.0.1:8089/v1"
  std::string model;             // model name passed through
  std::string api_key_env;       // environment variable holding the key, may be empty
  int timeout_s = 60;
  int max_tool_calls = 12;
  // Token prices for cost accounting; zero disables cost attribution.
  double usd_per_1k_prompt_tokens = 0.0;
  double usd_per_1k_completion_tokens = 0.0;
};

// Brokers tool calls between the model and the evidence API; enforces the
// tool-call budget with a forced final answer once exhausted.
class RemoteBackend final : public AdjudicatorBackend {
 public:
  explicit RemoteBackend(RemoteEndpointConfig config);

  std::string name() const override { return "remote"; }
  Capabilities capabilities() const override {
    return Capabilities{config_.max_tool_calls};
  }
  BackendReply adjudicate(const TechniqueBrief& brief, const ToolCallFn& tool) override;

 private:
  RemoteEndpointConfig config_;
};

// One plain completion round trip (no tools); used by the remote report
// writer. Throws BackendError on transport failure.
struct CompletionResult {
  std::string content;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
};
CompletionResult remote_complete(const RemoteEndpointConfig& config,
                                 const std::string& system_prompt,
                                 const std::string& user_prompt);

}  // namespace triage
