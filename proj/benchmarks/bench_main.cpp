#include "airgrasp/contact.hpp"
#include "airgrasp/engine.hpp"
#include "airgrasp/scenario.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace airgrasp;

namespace {

ScenarioConfig hover_cfg() {
  ScenarioConfig c = parse_scenario(preset_text("hover"));
  c.sim.t_end = 1.0;
  return c;
}

void BM_EngineStep(benchmark::State& state) {
  const ScenarioConfig c = hover_cfg();
  Engine engine(c.model, c.sim);
  SystemState st = initial_state(c);
  st.p_b += Vec3(0.1, 0.0, 0.0);
  const Setpoints sp = generate_setpoints(c, 0.0, st, 0.0);
  for (auto _ : state) {
    st = engine.step(st, sp);
    benchmark::DoNotOptimize(st.p_b);
  }
}
BENCHMARK(BM_EngineStep);

void BM_HoverSecond(benchmark::State& state) {
  const ScenarioConfig c = hover_cfg();
  for (auto _ : state) {
    const SimTrace trace = run_scenario(c);
    benchmark::DoNotOptimize(trace.steps.back().state.p_b);
  }
}
BENCHMARK(BM_HoverSecond)->Unit(benchmark::kMillisecond);

void BM_ResolveContacts(benchmark::State& state) {
  const ScenarioConfig c = parse_scenario(preset_text("fig3-mission"));
  SystemState st = initial_state(c);
  st.mission = MissionPhase::Dock;
  st.p_b = {1.79, 0.0, -0.94};
  st.s = c.model.object.half_width - 0.002;
  for (auto _ : state) {
    const ContactSet cs = resolve_contacts(st, c.model.manip, c.model.gripper, c.model.geometry,
                                           c.model.object, c.model.contact);
    benchmark::DoNotOptimize(cs.points[0].force);
  }
}
BENCHMARK(BM_ResolveContacts);

void BM_GraspPinv(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  MatX g(6, kContactForceDim);
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c) g(r, c) = n(rng);
  for (auto _ : state) {
    const MatX p = pinv(g);
    benchmark::DoNotOptimize(p(0, 0));
  }
}
BENCHMARK(BM_GraspPinv);

}  // namespace

BENCHMARK_MAIN();
