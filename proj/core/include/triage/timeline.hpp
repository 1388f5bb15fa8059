#pragma once

// Deterministic temporal normalization over a sealed bundle: the session
// epoch, relative-time arithmetic, at-or-before frame seeking and the
// +/-0.5 s dual-seek evidence window.

#include <optional>
#include <span>
#include <vector>

#include "triage/bundle.hpp"
#include "triage/time.hpp"

namespace triage {

// Earliest network record's start; the session's T0.
// Throws NoNetworkError on an empty log.
double establish_epoch(std::span<const NetworkRecord> network);

// t_abs - epoch, rounded to microseconds. Throws PreEpochError if t_abs
// precedes the epoch by more than rounding noise.
RelTime to_relative(double t_abs, double epoch);

// Frame with the largest t_rel <= t; nullptr when t precedes the first frame.
// Frames must be strictly increasing in t_rel.
const FrameRecord* seek_frame(std::span<const FrameRecord> frames, RelTime t);

// All records whose relativized started_at lies in the closed window,
// original order preserved. Records must be sorted by started_at.
std::vector<NetworkRecord> window_query(std::span<const NetworkRecord> network,
                                        double epoch, const EvidenceWindow& window);

struct DualSeekResult {
  std::optional<FrameRecord> frame;
  std::vector<NetworkRecord> network_burst;
};

// seek_frame(t) plus window_query(t +/- 0.5 s) against a sealed bundle.
// Throws OutOfSessionError when t exceeds session_end.
DualSeekResult dual_seek(const EvidenceBundle& bundle, RelTime t);

}  // namespace triage
