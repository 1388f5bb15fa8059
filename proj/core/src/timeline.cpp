#include "triage/timeline.hpp"

#include <algorithm>
#include <cmath>

#include "triage/errors.hpp"

namespace triage {

double establish_epoch(std::span<const NetworkRecord> network) {
  if (network.empty()) throw NoNetworkError("establish_epoch: empty network log");
  double min = network.front().started_at;
  for (const auto& r : network) min = std::min(min, r.started_at);
  return min;
}

RelTime to_relative(double t_abs, double epoch) {
  return RelTime::from_seconds(t_abs - epoch);  // PreEpochError when negative
}

const FrameRecord* seek_frame(std::span<const FrameRecord> frames, RelTime t) {
  auto it = std::upper_bound(frames.begin(), frames.end(), t,
                             [](RelTime v, const FrameRecord& f) { return v < f.t_rel; });
  if (it == frames.begin()) return nullptr;
  return &*(it - 1);
}

std::vector<NetworkRecord> window_query(std::span<const NetworkRecord> network,
                                        double epoch, const EvidenceWindow& window) {
  // Relativized starts are non-decreasing, so locate the window start by
  // binary search and scan forward until past the upper bound.
  auto rel = [epoch](const NetworkRecord& r) {
    return RelTime::from_micros(std::llround((r.started_at - epoch) * 1e6));
  };
  auto it = std::lower_bound(network.begin(), network.end(), window.lo(),
                             [&](const NetworkRecord& r, RelTime lo) { return rel(r) < lo; });
  std::vector<NetworkRecord> out;
  for (; it != network.end(); ++it) {
    RelTime t = rel(*it);
    if (t > window.hi()) break;
    out.push_back(*it);
  }
  return out;
}

DualSeekResult dual_seek(const EvidenceBundle& bundle, RelTime t) {
  if (t > bundle.session_end)
    throw OutOfSessionError("dual_seek: t=" + t.str() + " past session end " +
                            bundle.session_end.str());
  DualSeekResult result;
  if (const FrameRecord* f = seek_frame(bundle.frames, t)) result.frame = *f;
  result.network_burst = window_query(bundle.network, bundle.epoch_t0, EvidenceWindow{t});
  return result;
}

}  // namespace triage
