#include <gtest/gtest.h>

#include "helpers.hpp"
#include "noir/rng.hpp"
#include "noir/ssvep.hpp"
#include "noir/synth.hpp"

using namespace noir;
using namespace noir::testing;

namespace {

Eigen::MatrixXd white(int rows, int cols, std::uint64_t seed) {
  Rng rng = make_rng(seed, "white");
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m(i) = gaussian(rng);
  return m;
}

// 8 channels mixing a sin/cos pair at f with fixed random weights
Eigen::MatrixXd sinusoid_mixture(double f, double fs, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, "mix");
  Eigen::MatrixXd out(8, n);
  const Eigen::VectorXd s = sinusoid(f, fs, n), c = sinusoid(f, fs, n, kTwoPi / 4);
  for (int r = 0; r < 8; ++r) out.row(r) = (gaussian(rng) * s + gaussian(rng) * c).transpose();
  return out;
}

EegSegment visual_segment(const Eigen::MatrixXd& d, double fs) {
  std::vector<Channel> ch;
  for (int i = 0; i < d.rows(); ++i) ch.push_back({"V" + std::to_string(i), Region::Visual});
  return EegSegment(d, fs, ChannelLayout(ch));
}

}  // namespace

TEST(MakeCrs, ShapeAndRows) {
  const Eigen::MatrixXd y = make_crs(10, 2, 250, 250);
  ASSERT_EQ(y.rows(), 4);
  ASSERT_EQ(y.cols(), 250);
  for (int k = 0; k < 250; ++k) {
    EXPECT_NEAR(y(0, k), std::sin(kTwoPi * 10 * k / 250.0), 1e-12);
    EXPECT_NEAR(y(1, k), std::cos(kTwoPi * 10 * k / 250.0), 1e-12);
    EXPECT_NEAR(y(2, k), std::sin(kTwoPi * 20 * k / 250.0), 1e-12);
    EXPECT_NEAR(y(3, k), std::cos(kTwoPi * 20 * k / 250.0), 1e-12);
  }
}

TEST(MakeCrs, RowRmsAndMean) {
  for (double f : {6.0, 7.5, 8.57, 10.0}) {
    const Eigen::MatrixXd y = make_crs(f, 2, 250, 2500);
    for (int r = 0; r < 4; ++r) {
      EXPECT_NEAR(rms(y.row(r).transpose()), std::sqrt(0.5), 0.01);
      EXPECT_LT(std::abs(y.row(r).mean()), 10.0 / 2500);
    }
  }
}

TEST(MakeCrs, AliasedHarmonic) {
  EXPECT_NOIR_ERROR(make_crs(10, 13, 250, 250), ErrorCode::AliasedHarmonic);
  EXPECT_NO_THROW(make_crs(10, 12, 250, 250));
}

TEST(Cca, IdenticalInputsGiveOne) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Eigen::MatrixXd x = white(6, 500, s);
    EXPECT_NEAR(cca_max_corr(x, x), 1.0, 1e-6);
  }
}

TEST(Cca, SinusoidMixtureMatchesOwnReference) {
  const Eigen::MatrixXd x = sinusoid_mixture(7.5, 250, 2500, 1);
  EXPECT_GE(cca_max_corr(x, make_crs(7.5, 2, 250, 2500)), 0.999);
  EXPECT_LT(cca_max_corr(x, make_crs(10, 2, 250, 2500)), 0.2);
}

TEST(Cca, WhiteNoiseNullDistribution) {
  const Eigen::MatrixXd y = make_crs(10, 2, 250, 2500);
  int below = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) below += cca_max_corr(white(8, 2500, s), y) < 0.25 ? 1 : 0;
  EXPECT_GE(below, 990);
}

TEST(Cca, SymmetricBoundedAndRecombinationInvariant) {
  const Eigen::MatrixXd y = make_crs(8.57, 2, 250, 1000);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Eigen::MatrixXd x = white(5, 1000, s) + 0.3 * sinusoid_mixture(8.57, 250, 1000, s).topRows(5);
    const double r = cca_max_corr(x, y);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0 + 1e-12);
    EXPECT_NEAR(r, cca_max_corr(y, x), 1e-9);
    Eigen::MatrixXd mix = white(5, 5, 100 + s) + 3.0 * Eigen::MatrixXd::Identity(5, 5);
    // the trace-scaled ridge is not mixing invariant, so only approximate
    EXPECT_NEAR(cca_max_corr(mix * x, y), r, 1e-4);
  }
}

TEST(Cca, DegenerateInputs) {
  EXPECT_NOIR_ERROR(cca_max_corr(white(4, 6, 1), make_crs(10, 2, 250, 6)), ErrorCode::DegenerateInput);
  EXPECT_NOIR_ERROR(cca_max_corr(Eigen::MatrixXd::Zero(3, 500), make_crs(10, 2, 250, 500)), ErrorCode::DegenerateInput);
}

TEST(ClassifySsvep, NoiselessStimuli) {
  const FrequencyBank bank;
  for (std::size_t i = 0; i < bank.freqs.size(); ++i) {
    const SsvepResult r = classify_ssvep(visual_segment(sinusoid_mixture(bank.freqs[i], 250, 2500, i), 250), bank);
    EXPECT_EQ(r.index, static_cast<int>(i));
    EXPECT_GE(r.scores[i], 0.999);
    EXPECT_EQ(r.scores.size(), bank.freqs.size());
  }
}

TEST(ClassifySsvep, SyntheticAtZeroDb) {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.snr_db = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const EegSegment s = gen_ssvep(8.57, 10, cfg, i);
    EXPECT_EQ(classify_ssvep(s, FrequencyBank{}).index, 2);
  }
}

TEST(ClassifySsvep, ScaleAndMixingInvariance) {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.snr_db = -25;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const EegSegment s = gen_ssvep(FrequencyBank{}.freqs[i % 4], 10, cfg, i).select({Region::Visual}, ErrorCode::NoVisualChannels);
    const SsvepResult base = classify_ssvep(s, FrequencyBank{});
    EXPECT_EQ(classify_ssvep(s.with_data(s.data() * 37.5), FrequencyBank{}).index, base.index);
    const Eigen::MatrixXd m = white(4, 4, i) + 2.5 * Eigen::MatrixXd::Identity(4, 4);
    EXPECT_EQ(classify_ssvep(s.with_data(m * s.data()), FrequencyBank{}).index, base.index);
  }
}

TEST(ClassifySsvep, PureNoiseIsChance) {
  const FrequencyBank bank;
  const ChannelLayout l = ChannelLayout::standard16();
  Rng labels = make_rng(77, "labels");
  int hits = 0;
  const int n = 1000;
  for (int t = 0; t < n; ++t) {
    const int truth = static_cast<int>(uniform_index(labels, 4));
    const EegSegment s(background_noise(16, 750, 250, static_cast<std::uint64_t>(t)), 250, l);
    hits += classify_ssvep(s, bank).index == truth ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.25, 0.05);
}

TEST(FrequencyBank, Validation) {
  FrequencyBank bank;
  EXPECT_NO_THROW(bank.validate(250));
  bank.freqs = {7.5, 7.5};
  EXPECT_NOIR_ERROR(bank.validate(250), ErrorCode::InvalidArgument);
  bank.freqs = {6.0, 40.0};
  EXPECT_NOIR_ERROR(bank.validate(150), ErrorCode::AliasedHarmonic);
  EXPECT_EQ(FrequencyBank{}.first(2).freqs, (std::vector<double>{6.0, 7.5}));
}

TEST(ClassifySsvep, NeedsVisualChannels) {
  const EegSegment s(Eigen::MatrixXd::Random(2, 500), 250, ChannelLayout({{"C3", Region::MotorLeft}, {"C4", Region::MotorRight}}));
  EXPECT_NOIR_ERROR(classify_ssvep(s, FrequencyBank{}), ErrorCode::NoVisualChannels);
}

TEST(SsvepDecoder, RestrictsToObjectsOnScreen) {
  SynthConfig cfg = SynthConfig::defaults();
  cfg.snr_db = 0;
  const SsvepDecoder dec;
  const SsvepResult r = dec.decode(gen_ssvep(10.0, 10, cfg, 4), 3);
  EXPECT_EQ(r.scores.size(), 3u);
  EXPECT_LT(r.index, 3);
  EXPECT_EQ(dec.decode(gen_ssvep(10.0, 10, cfg, 4)).index, 3);
}
