// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "noir/benchmark.hpp"
#include "noir/calibration_io.hpp"
#include "noir/cursor.hpp"
#include "noir/emg.hpp"
#include "noir/features.hpp"
#include "noir/learning.hpp"
#include "noir/mi.hpp"
#include "noir/protocol.hpp"
#include "noir/render.hpp"
#include "noir/rng.hpp"
#include "noir/ssvep.hpp"
#include "noir/synth.hpp"
#include "oracles.hpp"

using namespace noir;

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SynthConfig synth_at(double snr_db, std::uint64_t seed) {
  SynthConfig c = SynthConfig::defaults();
  c.snr_db = snr_db;
  c.seed = seed;
  return c;
}

TaskDefinition load_task(const std::string& name) {
  ProtocolConfig c;
  c.task = name;
  return read_task_file(c.task_path());
}

const std::vector<std::string> kTasks{"wipe_spill", "open_basket", "pour_tea"};

Image blocks(int w, int h, std::uint64_t seed) {
  Rng rng = make_rng(seed, "blocks");
  Image img(w, h);
  for (int by = 0; by < h; by += 4) {
    for (int bx = 0; bx < w; bx += 4) {
      const auto r = static_cast<std::uint8_t>(uniform_index(rng, 256));
      const auto g = static_cast<std::uint8_t>(uniform_index(rng, 256));
      const auto b = static_cast<std::uint8_t>(uniform_index(rng, 256));
      for (int y = by; y < std::min(h, by + 4); ++y) {
        for (int x = bx; x < std::min(w, bx + 4); ++x) img.set(x, y, r, g, b);
      }
    }
  }
  return img;
}

Outcome cca_correctness() {
  Outcome o;
  Rng rng = make_rng(1, "cca");
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd x(8, 1000);
    for (int i = 0; i < x.size(); ++i) x(i) = gaussian(rng);
    worst = std::max(worst, std::abs(cca_max_corr(x, x) - 1.0));
  }
  o.require(worst <= 1e-6, "rho(X,X) = 1");
  const FrequencyBank bank;
  const ChannelLayout vis({{"O1", Region::Visual}, {"Oz", Region::Visual}, {"O2", Region::Visual}});
  int noiseless = 0;
  for (std::size_t i = 0; i < bank.freqs.size(); ++i) {
    Eigen::MatrixXd x(3, 2500);
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 2500; ++k) x(r, k) = (1.0 + 0.3 * r) * std::sin(kTwoPi * bank.freqs[i] * k / 250.0 + r);
    }
    noiseless += classify_ssvep(EegSegment(x, 250, vis), bank).index == static_cast<int>(i) ? 1 : 0;
  }
  o.require(noiseless == 4, "noiseless stimuli");
  Rng labels = make_rng(77, "labels");
  int hits = 0;
  for (int t = 0; t < 1000; ++t) {
    const int truth = static_cast<int>(uniform_index(labels, 4));
    const EegSegment s(background_noise(16, 750, 250, static_cast<std::uint64_t>(t)), 250, ChannelLayout::standard16());
    hits += classify_ssvep(s, bank).index == truth ? 1 : 0;
  }
  const double acc = hits / 1000.0;
  o.require(std::abs(acc - 0.25) <= 0.05, "noise accuracy 0.25 +- 0.05");
  o.note("|rho-1| " + fmt("%.1e", worst) + ", noiseless 4/4, noise acc " + fmt("%.3f", acc));
  return o;
}

double ssvep_accuracy(double snr, int n) {
  const FrequencyBank bank;
  const SynthConfig c = synth_at(snr, 2);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    hits += classify_ssvep(gen_ssvep(bank.freqs[i % 4], 10, c, static_cast<std::uint64_t>(i)), bank).index == i % 4;
  }
  return static_cast<double>(hits) / n;
}

Outcome ssvep_curve() {
  Outcome o;
  std::string curve;
  double prev = -1.0, at5 = 0.0;
  for (double snr : {-10.0, -5.0, 0.0, 5.0}) {
    const double a = ssvep_accuracy(snr, 200);
    o.require(a >= prev, "monotone at " + fmt("%+.0f dB", snr));
    prev = a;
    at5 = a;
    curve += fmt("%+.0f:", snr) + fmt("%.3f ", a);
  }
  o.require(at5 >= 0.95, "accuracy >= 0.95 at +5 dB");
  std::string low;
  for (double snr : {-40.0, -35.0, -30.0, -25.0}) low += fmt("%+.0f:", snr) + fmt("%.3f ", ssvep_accuracy(snr, 200));
  o.note("acc " + curve + "| info " + low);
  return o;
}

Outcome csp_oracle() {
  Outcome o;
  const Eigen::MatrixXd a = Eigen::Vector2d(4, 1).asDiagonal();
  const Eigen::MatrixXd b = Eigen::Vector2d(1, 4).asDiagonal();
  const CspFilters f = csp_fit_covariances({{a, a}, {b, b}}, 1);
  const Eigen::VectorXd w = f.per_class[0].row(0).transpose().normalized();
  const double cosv = std::abs(w.dot(oracle::leading_generalized_vector(a, a + b)));
  o.require(cosv >= 0.99, "|cos| >= 0.99");
  double worst = 0.0;
  for (const auto& pc : f.per_class) worst = std::max(worst, oracle::off_diagonal_ratio(pc * (a + b) * pc.transpose()));
  o.require(worst < 1e-6, "whitening off-diagonal < 1e-6");
  o.note("|cos| " + fmt("%.6f", cosv) + ", off-diagonal " + fmt("%.1e", worst));
  return o;
}

Outcome pipeline_ordering() {
  Outcome o;
  double diff = 0.0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SynthConfig c = synth_at(-20, seed);
    Synth train(c);
    const auto session = train.mi_session(40, 3.0);
    SynthConfig held = c;
    held.seed = derive_seed(seed, 999);
    const auto test = Synth(held).mi_session(50, 3.0);
    const double fb = evaluate_mi(calibrate_mi(session, MiConfig{}), test);
    const double qd = evaluate_mi(calibrate_mi(session, MiConfig::csp_qda_baseline()), test);
    diff += fb - qd;
    detail += fmt("%.3f/", fb) + fmt("%.3f ", qd);
  }
  o.require(diff / 5 >= 0.0, "mean FBCSP+SVM - CSP+QDA >= 0");
  o.note("-20 dB fbcsp/qda " + detail + "mean diff " + fmt("%+.3f", diff / 5));
  return o;
}

Outcome emg_separability() {
  Outcome o;
  SynthConfig c = synth_at(0, 1);
  std::vector<EegSegment> rest, clench;
  for (std::uint64_t i = 0; i < 20; ++i) {
    rest.push_back(gen_emg(false, c, i));
    clench.push_back(gen_emg(true, c, 100 + i));
  }
  const TensionThreshold th = calibrate_threshold(rest, clench);
  const ArtifactConfig art = ArtifactConfig::from_threshold(th);
  SynthConfig held = c;
  held.seed = 4242;
  int hits = 0;
  for (std::uint64_t i = 0; i < 200; ++i) hits += detect_tension(gen_emg(i % 2 == 1, held, i), th) == (i % 2 == 1);
  o.require(hits == 200, "held-out accuracy 1.0");
  int leaked = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const EegSegment w = inject_blink(gen_emg(i % 2 == 0, held, 1000 + i), 8.0 * art.rest_sd, 0.1 + 0.3 * (i % 5) / 4.0);
    leaked += gate_confirm(w, th, art).confirmed ? 1 : 0;
  }
  o.require(leaked == 0, "blink windows never confirm");
  o.note("held-out " + std::to_string(hits) + "/200, blink confirms " + std::to_string(leaked) + "/200");
  return o;
}

double mean_decodes(PolicyKind k, double accuracy, int n) {
  ControlPolicy p;
  p.kind = k;
  Rng rng = make_rng(6, "targets");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 t{0.1 + 0.8 * uniform01(rng), 0.1 + 0.8 * uniform01(rng), 0.1 + 0.8 * uniform01(rng)};
    total += run_parameter_selection(t, stochastic_channel(accuracy, derive_seed(6, i)), p, perfect_confirm())
                 .decode_windows;
  }
  return total / n;
}

Outcome cursor_claim() {
  Outcome o;
  const double c1 = mean_decodes(PolicyKind::Continuous4Way, 1.0, 100);
  const double b1 = mean_decodes(PolicyKind::BinarySequential, 1.0, 100);
  o.require(c1 <= b1, "continuous <= binary at accuracy 1.0");
  const double c9 = mean_decodes(PolicyKind::Continuous4Way, 0.9, 100);
  const double b9 = mean_decodes(PolicyKind::BinarySequential, 0.9, 100);
  const double red = reduction_percent(b9, c9);
  o.require(red >= 5.0, "reduction >= 10% - 5 pp at accuracy 0.9");
  o.note("acc 1.0 " + fmt("%.2f", c1) + " vs " + fmt("%.2f", b1) + ", acc 0.9 " + fmt("%.2f", c9) + " vs " +
         fmt("%.2f", b9) + " (" + fmt("%.1f%%", red) + ")");
  return o;
}

Outcome one_shot_matching() {
  Outcome o;
  const Image img = blocks(360, 240, 7);
  const FeatureMap m = extract_feature_map(img);
  bool ident = true;
  for (int r = 0; r < m.rows; r += 3) {
    for (int c = 0; c < m.cols; c += 3) {
      const MatchResult x = match_parameter(m, {c * 8 + 4.0, r * 8 + 4.0}, m);
      ident = ident && x.row == r && x.col == c;
    }
  }
  o.require(ident, "identity self-match");
  bool equiv = true;
  for (const auto& [dx, dy] : std::vector<std::pair<int, int>>{{3, 0}, {0, 2}, {-2, -1}, {4, 3}}) {
    const FeatureMap t = extract_feature_map(translate(img, 8 * dx, 8 * dy));
    for (int r = 2; r < m.rows - 2; r += 2) {
      for (int c = 2; c < m.cols - 2; c += 2) {
        if (r + dy < 2 || r + dy >= m.rows - 2 || c + dx < 2 || c + dx >= m.cols - 2) continue;
        const MatchResult x = match_parameter(m, {c * 8 + 4.0, r * 8 + 4.0}, t);
        equiv = equiv && x.row == r + dy && x.col == c + dx;
      }
    }
  }
  o.require(equiv, "integer-cell translation equivariance");
  int agree = 0;
  Rng rng = make_rng(50);
  for (std::uint64_t f = 0; f < 50; ++f) {
    const Image a = blocks(96, 64, 100 + f);
    const Image b = add_noise(translate(a, static_cast<int>(f % 7) - 3, static_cast<int>(f % 5) - 2), 0.05, f);
    const FeatureMap fa = extract_feature_map(a), fb = extract_feature_map(b);
    const Pixel p{uniform01(rng) * 95.0, uniform01(rng) * 63.0};
    const MatchResult got = match_parameter(fa, p, fb), want = oracle::match(fa, p, fb);
    agree += got.row == want.row && got.col == want.col ? 1 : 0;
  }
  o.require(agree == 50, "brute-force oracle agreement 100%");
  const CameraCalibration calib = CameraCalibration::standard();
  const WorldState scene = load_task("pour_tea").instantiate(0);
  const FeatureMap train = extract_feature_map(render_side(scene, calib));
  const double cell_z = 8.0 / std::abs(calib.side_map(1, 2));
  double worst = 0.0;
  for (const auto& [id, anchor] : std::vector<std::pair<std::string, Vec3>>{{"teapot", {0.75, 0.35, 0.12}},
                                                                           {"cup", {0.30, 0.35, 0.09}}}) {
    for (double dz : {-0.04, 0.02, 0.04, 0.06, 0.08, 0.12, 0.16}) {
      WorldState raised = scene;
      raised.find(id)->pose.p.z += dz;
      const FeatureMap test = extract_feature_map(render_side(raised, calib));
      const double z = predict_z(train, calib.side_project(anchor), test, anchor, calib);
      worst = std::max(worst, std::abs(z - (anchor.z + dz)));
    }
  }
  o.require(worst <= cell_z, "known dz within one cell height");
  o.note("oracle " + std::to_string(agree) + "/50, worst dz error " + fmt("%.4f", worst) + " (cell " +
         fmt("%.4f", cell_z) + ")");
  return o;
}

Outcome retrieval_contract() {
  Outcome o;
  int self_ok = 0, self_n = 0, noisy_ok = 0, noisy_n = 0;
  std::vector<DemoSequence> demos;
  for (const auto& t : kTasks) demos.push_back(demo_from_plan(load_task(t), 0));
  for (const DemoSequence& d : demos) {
    const DemoIndex index(d);
    for (std::size_t i = 0; i + 1 < d.states.size(); ++i, ++self_n) {
      const auto got = index.retrieve(d.states[i].gripper, d.states[i].top);
      self_ok += got.front().obj == d.states[i + 1].obj && got.front().skill == d.states[i + 1].skill;
    }
  }
  o.require(self_ok == self_n, "self-retrieval top-1 on every non-terminal state");
  for (std::uint64_t k = 0; noisy_n < 100; ++k) {
    const DemoSequence& d = demos[k % demos.size()];
    const DemoIndex index(d);
    const std::size_t i = (k / demos.size()) % (d.states.size() - 1);
    const Image g = add_noise(d.states[i].gripper, 10.0 / 255.0, 2 * k);
    const Image t = add_noise(d.states[i].top, 10.0 / 255.0, 2 * k + 1);
    try {
      const auto got = index.retrieve(g, t);
      noisy_ok += got.front().obj == d.states[i + 1].obj && got.front().skill == d.states[i + 1].skill;
    } catch (const Error&) {
    }
    ++noisy_n;
  }
  o.require(noisy_ok >= 80, "noisy top-1 >= 0.80");
  o.note("self " + std::to_string(self_ok) + "/" + std::to_string(self_n) + ", noisy " + std::to_string(noisy_ok) +
         "/100");
  return o;
}

Outcome end_to_end() {
  Outcome o;
  ProtocolConfig base;
  const std::vector<ProtocolMode> modes{ProtocolMode::Noir1, ProtocolMode::Noir2, ProtocolMode::Noir2Learning};
  const BenchmarkSummary s = run_benchmark(base, kTasks, modes, 20);
  bool all_success = true, identities = true;
  for (const TrialReport& r : s.reports) {
    all_success = all_success && r.success && r.attempts <= base.attempt_budget;
    identities = identities && r.time_identity_holds();
  }
  std::map<ProtocolMode, double> human;
  for (const BenchmarkRow& row : s.rows) {
    if (row.task == "ALL") human[row.mode] = row.mean_human_time_s;
  }
  o.require(all_success, "every trial succeeds within the attempt budget");
  o.require(identities, "time identity on every report");
  o.require(human[ProtocolMode::Noir2Learning] <= human[ProtocolMode::Noir2], "Noir2Learning <= Noir2");
  o.require(human[ProtocolMode::Noir2] < human[ProtocolMode::Noir1], "Noir2 < Noir1");
  o.note(std::to_string(s.reports.size()) + " trials, human min Noir1 " + fmt("%.2f", human[ProtocolMode::Noir1] / 60) +
         " Noir2 " + fmt("%.2f", human[ProtocolMode::Noir2] / 60) + " Noir2Learning " +
         fmt("%.2f", human[ProtocolMode::Noir2Learning] / 60));
  return o;
}

Outcome determinism() {
  Outcome o;
  auto simulate = [] {
    ProtocolConfig cfg;
    cfg.mode = ProtocolMode::Noir2Learning;
    cfg.task = "open_basket";
    cfg.seed = 7;
    const TaskDefinition task = load_task(cfg.task);
    const Decoders d = calibrate_decoders(cfg);
    const DemoSequence demo = capture_demo(cfg, task, d);
    std::stringstream ss;
    write_report_jsonl(ss, run_trial(cfg, {&task, &d, &demo}));
    return ss.str();
  };
  const std::string sa = simulate();
  o.require(!sa.empty() && sa == simulate(), "simulate reports byte-identical");
  auto bench = [] {
    ProtocolConfig cfg;
    cfg.seed = 3;
    const BenchmarkSummary s = run_benchmark(cfg, {"pour_tea"}, {ProtocolMode::Noir1, ProtocolMode::Noir2}, 2);
    std::stringstream ss;
    write_benchmark_csv(ss, s);
    write_benchmark_table(ss, s);
    return ss.str();
  };
  o.require(bench() == bench(), "benchmark outputs byte-identical");
  const MiDecoder dec = calibrate_mi(Synth(synth_at(-12, 5)).mi_session(12, 3.0), MiConfig{});
  std::stringstream file;
  write_calibration(file, dec);
  const CalibrationModel back = read_calibration(file);
  const SynthConfig c = synth_at(-12, 55);
  int same = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const EegSegment s = gen_mi(static_cast<MiClass>(i % 4), 3.0, c, i);
    const MiDecision a = dec.decode(s), b = back.mi.decode(s);
    same += a.cls == b.cls && a.scores == b.scores ? 1 : 0;
  }
  o.require(same == 100, "calibration round trip bit-identical decisions");
  o.note("calibration round trip " + std::to_string(same) + "/100 identical");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cca correctness", cca_correctness},         {"ssvep snr curve", ssvep_curve},
      {"csp oracle equivalence", csp_oracle},       {"pipeline ordering", pipeline_ordering},
      {"emg separability", emg_separability},       {"cursor redesign", cursor_claim},
      {"one-shot matching", one_shot_matching},     {"retrieval index+1", retrieval_contract},
      {"end-to-end protocol", end_to_end},          {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                secs, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
