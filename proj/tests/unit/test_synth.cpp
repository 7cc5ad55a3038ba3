#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "noir/intent.hpp"
#include "noir/ssvep.hpp"
#include "noir/synth.hpp"

using namespace noir;
using namespace noir::testing;

namespace {

SynthConfig at(double snr_db, std::uint64_t seed = 0) {
  SynthConfig c = SynthConfig::defaults();
  c.snr_db = snr_db;
  c.seed = seed;
  return c;
}

double power_db(const Eigen::MatrixXd& s, const Eigen::MatrixXd& n, const std::vector<int>& rows) {
  double ps = 0.0, pn = 0.0;
  for (int r : rows) {
    ps += s.row(r).squaredNorm();
    pn += n.row(r).squaredNorm();
  }
  return 10.0 * std::log10(ps / pn);
}

// nearest centroid on per-channel log variance of the MI rows
struct LogVarCentroids {
  std::vector<int> rows;
  std::array<Eigen::VectorXd, kMiClasses> centre;

  Eigen::VectorXd feat(const EegSegment& s) const {
    Eigen::VectorXd f(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Eigen::VectorXd x = s.data().row(rows[i]).transpose();
      f[static_cast<Eigen::Index>(i)] = std::log((x.array() - x.mean()).square().mean());
    }
    return f;
  }

  static LogVarCentroids fit(const SynthConfig& c, int per_class) {
    LogVarCentroids m;
    m.rows = c.layout.indices({Region::Visual, Region::MotorLeft, Region::MotorRight});
    for (MiClass cls : kAllMiClasses) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.rows.size()));
      for (int i = 0; i < per_class; ++i) acc += m.feat(gen_mi(cls, 3.0, c, 10000 + 10 * i + ordinal(cls)));
      m.centre[ordinal(cls)] = acc / per_class;
    }
    return m;
  }

  MiClass predict(const EegSegment& s) const {
    const Eigen::VectorXd f = feat(s);
    int best = 0;
    for (int k = 1; k < kMiClasses; ++k) {
      if ((f - centre[k]).squaredNorm() < (f - centre[best]).squaredNorm()) best = k;
    }
    return static_cast<MiClass>(best);
  }
};

double centroid_accuracy(const SynthConfig& c, int n) {
  const LogVarCentroids m = LogVarCentroids::fit(c, 20);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const MiClass cls = static_cast<MiClass>(i % 4);
    hits += m.predict(gen_mi(cls, 3.0, c, static_cast<std::uint64_t>(i))) == cls ? 1 : 0;
  }
  return static_cast<double>(hits) / n;
}

}  // namespace

TEST(Synth, DeterministicPerSeedAndIndex) {
  const SynthConfig c = at(-5, 3);
  EXPECT_EQ(gen_mi(MiClass::Legs, 3, c, 7).data(), gen_mi(MiClass::Legs, 3, c, 7).data());
  EXPECT_EQ(gen_ssvep(7.5, 2, c, 1).data(), gen_ssvep(7.5, 2, c, 1).data());
  EXPECT_EQ(gen_emg(true, c, 2).data(), gen_emg(true, c, 2).data());
  EXPECT_NE(gen_mi(MiClass::Legs, 3, c, 7).data(), gen_mi(MiClass::Legs, 3, c, 8).data());
  EXPECT_NE(gen_mi(MiClass::Legs, 3, c, 7).data(), gen_mi(MiClass::Legs, 3, at(-5, 4), 7).data());
  Synth a(c), b(c);
  EXPECT_EQ(a.mi(MiClass::Rest, 3).data(), b.mi(MiClass::Rest, 3).data());
  EXPECT_EQ(a.calls(), 1u);
  EXPECT_EQ(a.ssvep(6, 1).data(), gen_ssvep(6, 1, c, 1).data());
}

TEST(Synth, BackgroundNoiseHasUnitVariance) {
  const Eigen::MatrixXd n = background_noise(4, 25000, 250, 9);
  for (int r = 0; r < 4; ++r) {
    const Eigen::VectorXd x = n.row(r).transpose();
    EXPECT_NEAR((x.array() - x.mean()).square().mean(), 1.0, 0.15);
  }
}

TEST(Synth, BandNoiseIsBandLimited) {
  const Eigen::VectorXd x = band_noise(20000, 250, 20, 30, 2);
  EXPECT_NEAR(x.squaredNorm() / x.size(), 1.0, 0.1);
  // projection onto an in-band and an out-of-band tone
  auto tone_power = [&](double f) {
    double c = 0.0, s = 0.0;
    for (int k = 0; k < x.size(); ++k) {
      c += x[k] * std::cos(kTwoPi * f * k / 250);
      s += x[k] * std::sin(kTwoPi * f * k / 250);
    }
    return (c * c + s * s) / x.size();
  };
  double in = 0.0, out = 0.0;
  for (double f = 22; f <= 28; f += 0.5) in += tone_power(f);
  for (double f = 4; f <= 10; f += 0.5) out += tone_power(f);
  EXPECT_GT(in, 100 * out);
}

TEST(Synth, SsvepSnrMatchesRequest) {
  for (double snr : {-25.0, -10.0, 0.0, 10.0}) {
    const SynthConfig c = at(snr, 5);
    const auto vis = c.layout.indices({Region::Visual});
    double acc = 0.0;
    for (std::uint64_t i = 0; i < 5; ++i) {
      const SignalComponents s = gen_ssvep_components(10, 10, c, i);
      acc += power_db(s.signal, s.noise, vis);
      for (Eigen::Index r = 0; r < s.signal.rows(); ++r) {
        if (std::find(vis.begin(), vis.end(), static_cast<int>(r)) == vis.end()) {
          EXPECT_EQ(s.signal.row(r).norm(), 0.0);
        }
      }
    }
    EXPECT_NEAR(acc / 5, snr, 1.0);
  }
}

TEST(Synth, MiSnrMatchesRequest) {
  const SynthConfig c = at(-12, 6);
  const auto rows = c.layout.indices({Region::Visual, Region::MotorLeft, Region::MotorRight});
  double acc = 0.0;
  int n = 0;
  for (MiClass cls : kAllMiClasses) {
    for (std::uint64_t i = 0; i < 5; ++i, ++n) {
      const SignalComponents s = gen_mi_components(cls, 3, c, i);
      acc += std::pow(10.0, power_db(s.signal, s.noise, rows) / 10);
    }
  }
  EXPECT_NEAR(10 * std::log10(acc / n), -12.0, 1.0);
}

TEST(Synth, DriftShiftsSnrOverTime) {
  SynthConfig c = at(-10);
  c.drift_db_per_min = -2.0;
  EXPECT_DOUBLE_EQ(c.snr_at(0), -10.0);
  EXPECT_DOUBLE_EQ(c.snr_at(90), -13.0);
  const SignalComponents early = gen_ssvep_components(10, 10, c, 0, 0);
  const SignalComponents late = gen_ssvep_components(10, 10, c, 0, 300);
  EXPECT_NEAR(10 * std::log10(late.signal.squaredNorm() / early.signal.squaredNorm()), -10.0, 1e-9);
}

TEST(Synth, HighSnrSsvepCorrelatesWithReference) {
  const SynthConfig c = at(40, 7);
  for (double f : FrequencyBank{}.freqs) {
    const EegSegment s = gen_ssvep(f, 10, c, 0).select({Region::Visual}, ErrorCode::NoVisualChannels);
    EXPECT_GE(cca_max_corr(s.data(), make_crs(f, 2, 250, s.n_samples())), 0.99);
  }
}

TEST(Synth, VeryLowSnrSsvepIsChance) {
  const SynthConfig c = at(-60, 8);
  const FrequencyBank bank;
  int hits = 0;
  for (int i = 0; i < 400; ++i) {
    hits += classify_ssvep(gen_ssvep(bank.freqs[i % 4], 3, c, static_cast<std::uint64_t>(i)), bank).index == i % 4;
  }
  EXPECT_NEAR(hits / 400.0, 0.25, 0.07);
}

TEST(Synth, HighSnrMiIsSeparableByBandPower) { EXPECT_GE(centroid_accuracy(at(40, 9), 200), 0.99); }

TEST(Synth, IdenticalMixingCarriesNoClassInformation) {
  SynthConfig c = at(40, 10);
  for (auto& m : c.mi_mixing) m = c.mi_mixing[0];
  EXPECT_NEAR(centroid_accuracy(c, 400), 0.25, 0.08);
}

TEST(Synth, RankDeficientMixingRejected) {
  SynthConfig c = at(0);
  c.mi_mixing[2].col(1) = c.mi_mixing[2].col(0);
  EXPECT_NOIR_ERROR(c.validate(), ErrorCode::InvalidArgument);
  EXPECT_NOIR_ERROR(Synth{c}, ErrorCode::InvalidArgument);
  c = at(0);
  c.ssvep_gain.resize(2);
  EXPECT_NOIR_ERROR(c.validate(), ErrorCode::ShapeMismatch);
}

TEST(Synth, ClenchRaisesFrontalLogVariance) {
  for (double g : {3.0, 10.0}) {
    SynthConfig c = at(0, 11);
    c.burst_gain = g;
    for (std::uint64_t i = 0; i < 20; ++i) {
      const EegSegment a = gen_emg(false, c, i), b = gen_emg(true, c, i);
      const auto lv = [](const EegSegment& s) {
        const EegSegment f = s.select({Region::Frontal}, ErrorCode::NoFrontalChannels);
        double acc = 0.0;
        for (int r = 0; r < f.n_channels(); ++r) {
          const Eigen::VectorXd x = f.data().row(r).transpose();
          acc += std::log((x.array() - x.mean()).square().mean());
        }
        return acc / f.n_channels();
      };
      EXPECT_GE(lv(b) - lv(a), std::log(g * g) / 2);
      // non-frontal rows are untouched
      const auto rows = c.layout.indices({Region::Visual});
      for (int r : rows) EXPECT_EQ(a.data().row(r), b.data().row(r));
    }
  }
}

TEST(Synth, BlinkShape) {
  const EegSegment base(Eigen::MatrixXd::Zero(16, 250), 250, ChannelLayout::standard16());
  const EegSegment b = inject_blink(base, 10.0, 0.5);
  const auto frontal = base.layout().indices({Region::Frontal});
  for (std::size_t i = 0; i < base.layout().size(); ++i) {
    const bool fr = std::find(frontal.begin(), frontal.end(), static_cast<int>(i)) != frontal.end();
    const double peak = b.data().row(static_cast<Eigen::Index>(i)).maxCoeff();
    if (!fr) {
      EXPECT_EQ(peak, 0.0);
    } else if (base.layout()[i].name.rfind("Fp", 0) == 0) {
      EXPECT_NEAR(peak, 10.0, 1e-9);
    } else {
      EXPECT_NEAR(peak, 6.0, 1e-9);
    }
  }
}

TEST(SimulatedIntent, FollowsWipeSpillPlan) {
  const TaskDefinition task = shipped_task("wipe_spill");
  WorldState w = task.instantiate(0);
  const SimulatedIntent first = next_intent(w, task, 0);
  EXPECT_FALSE(first.terminal);
  EXPECT_EQ(first.object_id, "towel");
  EXPECT_EQ(first.skill, SkillKind::Pick);
  EXPECT_NEAR(first.param.x, w.at("towel").pose.p.x, 1e-12);
  EXPECT_NEAR(first.param.y, w.at("towel").pose.p.y, 1e-12);
  const SimulatedIntent move = next_intent(w, task, 1);
  EXPECT_EQ(move.skill, SkillKind::MoveTo);
  EXPECT_NEAR(move.param.x, w.at("spill").pose.p.x - 0.10, 1e-12);
  for (std::size_t i = 0; i < task.plan.size(); ++i) {
    const SimulatedIntent in = next_intent(w, task, i);
    auto [next, out] = execute_skill(w, {in.skill, in.object_id, in.param});
    ASSERT_TRUE(out.success) << out.reason;
    w = next;
  }
  EXPECT_TRUE(next_intent(w, task, task.plan.size()).terminal);
}

TEST(SimulatedIntent, ExhaustedPlan) {
  const TaskDefinition task = shipped_task("wipe_spill");
  const WorldState w = task.instantiate(0);
  EXPECT_NOIR_ERROR(next_intent(w, task, task.plan.size()), ErrorCode::PlanExhausted);
}

TEST(SimulatedIntent, UserStopsAfterTerminal) {
  const TaskDefinition task = shipped_task("open_basket");
  SimulatedUser user(task);
  WorldState w = task.instantiate(0);
  for (;;) {
    const SimulatedIntent in = user.next(w);
    if (in.terminal) break;
    auto [next, out] = execute_skill(w, {in.skill, in.object_id, in.param});
    ASSERT_TRUE(out.success) << out.reason;
    w = next;
    user.advance();
  }
  EXPECT_EQ(user.step(), task.plan.size());
  EXPECT_NOIR_ERROR(user.next(w), ErrorCode::PlanExhausted);
  user.reset();
  EXPECT_FALSE(user.next(task.instantiate(0)).terminal);
}
