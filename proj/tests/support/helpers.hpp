#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "noir/config.hpp"
#include "noir/error.hpp"
#include "noir/signal.hpp"
#include "noir/world.hpp"

namespace noir::testing {

inline constexpr double kTwoPi = 6.283185307179586;

inline Eigen::VectorXd sinusoid(double f, double fs, int n, double phase = 0.0, double amp = 1.0) {
  Eigen::VectorXd x(n);
  for (int k = 0; k < n; ++k) x[k] = amp * std::sin(kTwoPi * f * k / fs + phase);
  return x;
}

inline double rms(const Eigen::VectorXd& x) { return std::sqrt(x.squaredNorm() / static_cast<double>(x.size())); }

inline EegSegment single_channel(const Eigen::VectorXd& x, double fs) {
  return EegSegment(x.transpose(), fs, ChannelLayout({{"Oz", Region::Visual}}));
}

inline TaskDefinition shipped_task(const std::string& name) {
  ProtocolConfig c;
  c.task = name;
  return read_task_file(c.task_path());
}

}  // namespace noir::testing

#define EXPECT_NOIR_ERROR(stmt, code_)                          \
  do {                                                          \
    try {                                                       \
      stmt;                                                     \
      ADD_FAILURE() << "expected " << ::noir::to_string(code_); \
    } catch (const ::noir::Error& e_) {                         \
      EXPECT_EQ(e_.code(), code_) << e_.what();                 \
    }                                                           \
  } while (0)
