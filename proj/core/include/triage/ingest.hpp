#pragma once

// Parsers for the raw capture artifacts a bundle is assembled from:
//   - HAR 1.2 JSON network log (only the fields the record model needs)
//   - frame manifest:  frame_no <TAB> t_rel <TAB> image_ref
//   - action log:      t_rel <TAB> kind <TAB> payload <TAB> annotation

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triage/bundle.hpp"

namespace triage {

struct HarIngest {
  std::vector<NetworkRecord> records;  // sorted by started_at, seq assigned
  // Response bodies lifted into the resource store: (resource id, resource).
  std::vector<std::pair<std::string, Resource>> body_resources;
  std::vector<std::string> warnings;  // one per skipped entry
};

// Throws ParseError (with byte offset) on malformed documents. Entries
// without a parsable start time are dropped with a SkippedEntry warning.
HarIngest ingest_har(std::string_view har_text, std::size_t body_cap = kInlineBodyCap);

// Throws MonotonicityError (naming the offending frame_no) on duplicate or
// regressing t_rel / frame_no, MissingResourceError on dangling image_ref,
// ParseError on unparsable lines.
std::vector<FrameRecord> ingest_frames(std::string_view manifest,
                                       const ResourceStore& resources);

// Unknown kinds are preserved as kind=note carrying the raw line. Output is
// ordered by t_rel (stable). Throws ParseError with the 1-based line number.
std::vector<ActionEvent> ingest_actions(std::string_view log);

// Inverses used when writing a bundle's streams back to the exchange formats.
std::string format_frames(const std::vector<FrameRecord>& frames);
std::string format_actions(const std::vector<ActionEvent>& actions);

}  // namespace triage
