#include <benchmark/benchmark.h>

#include "triage/oracle.hpp"
#include "triage/simulator.hpp"

namespace {

void BM_SealHarvester(benchmark::State& state) {
  auto script =
      triage::ScenarioScript::for_kind(triage::ScenarioKind::logoless_harvester, 7);
  auto bundle = triage::run_scenario(script, triage::Persona::default_persona()).first;
  for (auto _ : state) {
    triage::EvidenceBundle copy = bundle;
    copy.manifest_hash.reset();
    benchmark::DoNotOptimize(triage::seal(copy));
  }
}
BENCHMARK(BM_SealHarvester);

void BM_OracleDispatchAll(benchmark::State& state) {
  auto script =
      triage::ScenarioScript::for_kind(triage::ScenarioKind::brand_impersonation, 7);
  auto bundle = triage::run_scenario(script, triage::Persona::default_persona()).first;
  auto profile = triage::resolve_profile("comprehensive");
  for (auto _ : state) {
    for (const auto& id : profile.technique_ids)
      benchmark::DoNotOptimize(triage::dispatch(id, bundle));
  }
}
BENCHMARK(BM_OracleDispatchAll);

}  // namespace
