#include <benchmark/benchmark.h>

#include "noir/config.hpp"
#include "noir/cursor.hpp"
#include "noir/features.hpp"
#include "noir/image.hpp"
#include "noir/learning.hpp"
#include "noir/mi.hpp"
#include "noir/protocol.hpp"
#include "noir/render.hpp"
#include "noir/ssvep.hpp"
#include "noir/synth.hpp"
#include "noir/world.hpp"

using namespace noir;

namespace {

SynthConfig cfg(double snr) {
  SynthConfig c = SynthConfig::defaults();
  c.snr_db = snr;
  c.seed = 11;
  return c;
}

TaskDefinition task(const std::string& name) {
  ProtocolConfig c;
  c.task = name;
  return read_task_file(c.task_path());
}

void BM_SsvepClassify(benchmark::State& state) {
  const FrequencyBank bank;
  const EegSegment s = gen_ssvep(bank.freqs[1], static_cast<double>(state.range(0)), cfg(-20), 0);
  for (auto _ : state) benchmark::DoNotOptimize(classify_ssvep(s, bank));
}
BENCHMARK(BM_SsvepClassify)->Arg(2)->Arg(10);

void BM_MiCalibrate(benchmark::State& state) {
  const auto session = Synth(cfg(-12)).mi_session(static_cast<int>(state.range(0)), 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_mi(session, MiConfig{}));
}
BENCHMARK(BM_MiCalibrate)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_MiDecode(benchmark::State& state) {
  const MiDecoder dec = calibrate_mi(Synth(cfg(-12)).mi_session(12, 3.0), MiConfig{});
  const EegSegment s = gen_mi(MiClass::RightHand, 3.0, cfg(-12), 5);
  for (auto _ : state) benchmark::DoNotOptimize(dec.decode(s));
}
BENCHMARK(BM_MiDecode);

void BM_ParameterSelection(benchmark::State& state) {
  ControlPolicy p;
  p.kind = state.range(0) ? PolicyKind::Continuous4Way : PolicyKind::BinarySequential;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        run_parameter_selection({0.8, 0.2, 0.7}, stochastic_channel(0.9, 3), p, perfect_confirm()));
  }
}
BENCHMARK(BM_ParameterSelection)->Arg(0)->Arg(1);

void BM_FeatureExtract(benchmark::State& state) {
  const Image img = render_top(task("wipe_spill").instantiate(0), CameraCalibration::standard());
  for (auto _ : state) benchmark::DoNotOptimize(extract_feature_map(img));
}
BENCHMARK(BM_FeatureExtract);

void BM_MatchParameter(benchmark::State& state) {
  const CameraCalibration calib = CameraCalibration::standard();
  const FeatureMap a = extract_feature_map(render_top(task("wipe_spill").instantiate(0), calib));
  const FeatureMap b = extract_feature_map(render_top(task("wipe_spill").instantiate(4), calib));
  for (auto _ : state) benchmark::DoNotOptimize(match_parameter(a, {180.0, 120.0}, b));
}
BENCHMARK(BM_MatchParameter);

void BM_Retrieve(benchmark::State& state) {
  const DemoSequence demo = demo_from_plan(task("open_basket"), 0);
  const DemoIndex index(demo);
  for (auto _ : state) benchmark::DoNotOptimize(index.retrieve(demo.states[2].gripper, demo.states[2].top));
}
BENCHMARK(BM_Retrieve);

void BM_Trial(benchmark::State& state) {
  ProtocolConfig c;
  c.task = "wipe_spill";
  c.mode = state.range(0) ? ProtocolMode::Noir2 : ProtocolMode::Noir1;
  const TaskDefinition t = task(c.task);
  const Decoders d = calibrate_decoders(c);
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(c, {&t, &d}));
}
BENCHMARK(BM_Trial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
