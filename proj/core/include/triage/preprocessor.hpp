#pragma once

// Email ingestion and target extraction: parse the raw message, neutralize
// the markup so it can never reach the network, enumerate candidate links,
// pick the primary call-to-action and assemble the session context handed to
// the rest of the pipeline.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/bundle.hpp"

namespace triage {

struct EmailDoc {
  std::string subject;
  std::string from_address;  // addr-spec only
  std::optional<std::string> body_html;
  std::optional<std::string> body_text;
  std::vector<Header> headers;
};

// RFC 5322 + MIME subset: multipart/alternative|mixed|related recursion,
// quoted-printable and base64 transfer encodings, basic encoded-word subject
// decoding. Throws ParseError on structurally broken messages and
// EmptyBodyError when no text or html body is present.
EmailDoc parse_eml(std::string_view bytes);

struct SafeHtml {
  std::string document;
  std::map<std::string, std::size_t> removals;  // kind -> count
};

// Neutralizes markup: script elements dropped, event-handler attributes and
// javascript: URLs removed, remote loads replaced with inert placeholders,
// form submission targets stripped. Layout structure and anchor hrefs are
// preserved. Throws DepthError past 512 nested elements.
SafeHtml sanitize(std::string_view html);

struct LinkCandidate {
  int index = 0;  // 1-based, document order
  std::string text;
  std::string url;  // absolute
  bool button_like = false;
  int area_rank = 0;  // 1 = most prominent
};

// One candidate per anchor with a resolvable absolute URL (honoring any
// <base href>), document order, style hints populated.
std::vector<LinkCandidate> enumerate_links(const SafeHtml& safe);

// Numbered selection prompt for a visual backend. Throws NoCandidatesError.
std::string build_cta_prompt(const std::vector<LinkCandidate>& candidates);

class VisualSelector {
 public:
  virtual ~VisualSelector() = default;
  // Receives the sanitized document and the selection prompt; replies with
  // free-form text expected to contain the candidate number.
  virtual std::string choose(const SafeHtml& safe, const std::string& prompt) = 0;
};

// Visual path when `backend` is non-null (out-of-range or non-numeric replies
// fall back); deterministic heuristic otherwise: drop footer-pattern
// candidates, prefer button-like, then lowest area_rank, then document order.
int select_cta(const SafeHtml& safe, const std::vector<LinkCandidate>& candidates,
               VisualSelector* backend = nullptr);

// Assembles the session context: lure fields from the message (text body
// derived from the sanitized markup when only html exists), target from the
// chosen candidate, persona injected from configuration.
SessionContext extract_context(const EmailDoc& doc, const std::string& cta_url,
                               const Persona& persona);

// Plain text extraction from sanitized markup (tags stripped, entities
// decoded, whitespace collapsed).
std::string html_to_text(std::string_view html);

// persona.v1: one `key=value` per line, keys matching the Persona fields.
Persona parse_persona_file(std::string_view text);
std::string format_persona_file(const Persona& p);

}  // namespace triage
