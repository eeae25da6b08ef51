#include <benchmark/benchmark.h>

#include <filesystem>

#include "dct/io.hpp"
#include "dct/sim.hpp"
#include "dct/sweep.hpp"

namespace {

using namespace dct;

Scenario reference(const char* name) {
  return load_config(std::filesystem::path(DCT_SOURCE_DIR) / "configs" / name);
}

void BM_IntegrateStepFree(benchmark::State& state) {
  Scenario sc;
  DrivetrainState s;
  s.motor_speed = 150.0;
  s.drive_shaft_speed = 2.0;
  s.motor_torque = 120.0;
  s.clutch_capacity = {40.0, 60.0};
  ControlCommand cmd;
  cmd.motor = 300.0;
  cmd.clutch = {90.0, 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(integrate_step(s, cmd, sc));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_IntegrateStepFree);

void BM_IntegrateStepEngaged(benchmark::State& state) {
  Scenario sc;
  DrivetrainState s;
  s.drive_shaft_speed = 3.0;
  s.motor_speed = primary_speed(3.0, GearId::first(), sc.vehicle);
  s.engaged = EngagedClutch::Clutch1;
  s.motor_torque = 100.0;
  s.clutch_capacity = {200.0, 0.0};
  ControlCommand cmd;
  cmd.motor = 120.0;
  cmd.clutch = {200.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(integrate_step(s, cmd, sc));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_IntegrateStepEngaged);

void BM_ReferenceRun(benchmark::State& state, const char* config) {
  const Scenario sc = reference(config);
  for (auto _ : state) benchmark::DoNotOptimize(run(sc));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sc.steps()));
}
BENCHMARK_CAPTURE(BM_ReferenceRun, downshift, "wheel_loader_10t.ini")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_ReferenceRun, upshift, "wheel_loader_10t_upshift.ini")
    ->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  const Scenario sc = reference("wheel_loader_10t.ini");
  const SweepSpec spec = load_sweep(std::filesystem::path(DCT_SOURCE_DIR) / "configs" / "sweep_gamma.ini");
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sweep(sc, spec, static_cast<unsigned>(state.range(0))));
  }
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
