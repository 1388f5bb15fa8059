#include <benchmark/benchmark.h>

#include <random>

#include "triage/simulator.hpp"
#include "triage/timeline.hpp"

namespace {

triage::EvidenceBundle slider_bundle() {
  auto script =
      triage::ScenarioScript::for_kind(triage::ScenarioKind::gated_slider_loop, 99);
  return triage::run_scenario(script, triage::Persona::default_persona()).first;
}

void BM_DualSeek(benchmark::State& state) {
  triage::EvidenceBundle bundle = slider_bundle();
  std::mt19937_64 rng(1);
  for (auto _ : state) {
    triage::RelTime t = triage::RelTime::from_micros(
        static_cast<std::int64_t>(rng() % bundle.session_end.micros));
    benchmark::DoNotOptimize(triage::dual_seek(bundle, t));
  }
}
BENCHMARK(BM_DualSeek);

void BM_WindowQuery(benchmark::State& state) {
  triage::EvidenceBundle bundle = slider_bundle();
  std::mt19937_64 rng(2);
  for (auto _ : state) {
    triage::EvidenceWindow w{triage::RelTime::from_micros(
        static_cast<std::int64_t>(rng() % bundle.session_end.micros))};
    benchmark::DoNotOptimize(triage::window_query(bundle.network, bundle.epoch_t0, w));
  }
}
BENCHMARK(BM_WindowQuery);

}  // namespace
