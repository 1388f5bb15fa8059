#pragma once

// Read-only tool surface over a sealed bundle:
//   get_session(time, filter)   HTTP traffic / headers
//   get_screenshot(time)        rendered frames
//   retrieve_resource(prefix)   persisted HTML/JS artifacts
// plus the request/response wire protocol that serves them.

#include <nlohmann/json.hpp>

#include <atomic>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "triage/bundle.hpp"
#include "triage/timeline.hpp"

namespace triage {

inline constexpr std::size_t kSessionPageCap = 50;    // records per response
inline constexpr std::size_t kResourcePageCap = 20;   // resources per response
inline constexpr std::size_t kResourceContentCap = 32 * 1024;  // bytes per entry

// Protocol error codes.
enum class ToolErrorCode {
  method_not_found = 1,
  bad_params = 2,
  out_of_session = 3,
  no_frame = 4,
  filter_parse = 5,
};

struct FilterClause {
  enum class Key { host, url, method, status, mime };
  Key key;
  std::string value;
};

struct FilterExpr {
  std::vector<FilterClause> clauses;  // conjunctive

  // Grammar: whitespace-separated `key:value` clauses, keys in
  // {host,url,method,status,mime}; values substring-matched except status,
  // which takes an exact code ("403") or a class ("4xx").
  // Throws FilterParseError naming the offending clause.
  static FilterExpr parse(std::string_view text);

  bool matches(const NetworkRecord& r) const;
};

class EvidenceApi {
 public:
  // The bundle must be sealed and outlive the API.
  explicit EvidenceApi(const EvidenceBundle& bundle);

  const EvidenceBundle& bundle() const { return *bundle_; }

  // Results are canonical JSON payloads (also used verbatim on the wire).
  nlohmann::json get_session(std::optional<RelTime> time,
                             const std::optional<FilterExpr>& filter,
                             std::size_t offset = 0) const;
  nlohmann::json get_screenshot(RelTime time) const;
  nlohmann::json retrieve_resource(std::string_view prefix, std::size_t offset = 0) const;

  // Full protocol dispatch: {request_id, method, params} ->
  // {request_id, result | error{code, message}}. Never throws.
  nlohmann::json handle(const nlohmann::json& request) const;

 private:
  const EvidenceBundle* bundle_;
  std::vector<std::string> secrets_;  // persona secrets, for secret_match flags
};

// Length-prefixed framing: "<decimal byte count>\n<payload>".
void write_frame(std::ostream& out, std::string_view payload);
std::optional<std::string> read_frame(std::istream& in);

// Serves requests from `in` until EOF; one response per request, FIFO.
void serve_stream(const EvidenceApi& api, std::istream& in, std::ostream& out);

// Local TCP server speaking the same framing; one thread per connection.
class ToolServer {
 public:
  ToolServer(const EvidenceApi& api, const std::string& host, int port);
  ~ToolServer();

  int port() const { return port_; }
  void stop();

 private:
  void accept_loop();

  const EvidenceApi& api_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::vector<std::thread> workers_;
};

// Client helper for tests and the remote backend: one framed round trip.
nlohmann::json tool_roundtrip_tcp(const std::string& host, int port,
                                  const nlohmann::json& request);

}  // namespace triage
