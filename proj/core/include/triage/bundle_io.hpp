#pragma once

// Bundle directory layout:
//   <dir>/manifest        bundle_id, epoch_t0, session_end (canonical JSON)
//   <dir>/network         canonical JSON array of network records
//   <dir>/frames          frame manifest (TSV exchange format)
//   <dir>/actions         action log (TSV exchange format)
//   <dir>/context         session context incl. persona (canonical JSON)
//   <dir>/resources/      index file + one blob file per resource ("b_<id>")
//   <dir>/seal            "sha256:<hex>"

#include <filesystem>
#include <string>

#include "triage/bundle.hpp"

namespace triage {

// Bundle must be sealed. Overwrites existing files in `dir`.
void save_bundle(const EvidenceBundle& bundle, const std::filesystem::path& dir);

// Reads a bundle directory back. When `check_seal` is set, recomputes the
// manifest digest and throws IntegrityError if it does not match the seal
// file. Throws ParseError / MissingResourceError on malformed content.
EvidenceBundle load_bundle(const std::filesystem::path& dir, bool check_seal = true);

std::string read_file(const std::filesystem::path& p);           // throws Error
void write_file(const std::filesystem::path& p, std::string_view content);

}  // namespace triage
