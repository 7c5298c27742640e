#pragma once

// Flag reliability and gauge-pumping algebra.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "ril/noise_mc.hpp"

namespace ril {

struct FlagParams {
  double eps_L = 0.0;   // prior probability that the input is leaked
  double eps_1S = 0.0;  // P(1_M | ancilla singlet)
  double eps_0T = 0.0;  // P(0_M | ancilla triplet)

  void validate() const {
    for (double v : {eps_L, eps_1S, eps_0T}) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("flag parameters must lie in [0, 1]");
    }
  }
};

// The channel quantities the flag algebra needs.
struct ChannelErrors {
  double p_L_ind = 0.0;
  double eps_F = 0.0;
  double eps_5 = 0.0;
  double eps_8 = 0.0;

  static ChannelErrors from(const MetricSet& m) {
    return {m.p_L_ind.value, m.eps_F.value, m.eps_5.value, m.eps_8.value};
  }

  void validate() const {
    for (double v : {p_L_ind, eps_F, eps_5, eps_8}) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("channel errors must lie in [0, 1]");
    }
    if (eps_5 + eps_8 > 1.0) throw std::invalid_argument("eps_5 + eps_8 exceeds 1");
  }
};

struct FlagEstimate {
  double value = 0.0;
  bool defined = true;
  // False if any input exceeds 0.1, where the leading-order form is unreliable.
  bool small_parameters = true;
};

namespace detail {

inline bool all_small(const FlagParams& f, const ChannelErrors& e) {
  for (double v : {f.eps_L, f.eps_1S, f.eps_0T, e.p_L_ind, e.eps_F, e.eps_5}) {
    if (v > 0.1) return false;
  }
  return true;
}

}  // namespace detail

// Leading order of P(output or input leaked | flag 0).
inline FlagEstimate wrong_guess_given_0(const FlagParams& f, const ChannelErrors& e) {
  f.validate();
  e.validate();
  return {f.eps_0T * e.p_L_ind + f.eps_0T * f.eps_L + e.eps_5 * f.eps_L, true, detail::all_small(f, e)};
}

// Leading order of P(input not leaked | flag 1).
inline FlagEstimate wrong_guess_given_1(const FlagParams& f, const ChannelErrors& e) {
  f.validate();
  e.validate();
  const double false_alarm = f.eps_1S + e.eps_F;
  const bool small = detail::all_small(f, e);
  if (false_alarm == 0.0) return {0.0, f.eps_L != 0.0, small};
  return {1.0 / (1.0 + f.eps_L / false_alarm), true, small};
}

enum class Ancilla { kSinglet, kTriplet };
enum class Occupancy { kUnleaked, kLeaked };

// Exact P(F, O, I) for flag F in {0, 1}, output O and input I.
class JointFlagTable {
 public:
  JointFlagTable(const FlagParams& f, const ChannelErrors& e) {
    f.validate();
    e.validate();
    if (e.eps_F < e.p_L_ind) {
      throw std::domain_error("inconsistent metrics: eps_F = " + std::to_string(e.eps_F) +
                              " < p_L_ind = " + std::to_string(e.p_L_ind));
    }
    const int S = 0, T = 1, U = 0, L = 1;
    // P(j, O | I). A singlet ancilla with leaked output is impossible when
    // only exchange acts.
    cond_[S][U][U] = 1.0 - e.eps_F;
    cond_[T][U][U] = e.eps_F - e.p_L_ind;
    cond_[S][L][U] = 0.0;
    cond_[T][L][U] = e.p_L_ind;
    cond_[S][U][L] = 0.0;
    cond_[S][L][L] = e.eps_5;
    cond_[T][L][L] = e.eps_8;
    cond_[T][U][L] = 1.0 - e.eps_5 - e.eps_8;

    const double p_flag[2][2] = {{1.0 - f.eps_1S, f.eps_1S}, {f.eps_0T, 1.0 - f.eps_0T}};  // [j][F]
    const double p_in[2] = {1.0 - f.eps_L, f.eps_L};
    for (int F = 0; F < 2; ++F) {
      for (int O = 0; O < 2; ++O) {
        for (int I = 0; I < 2; ++I) {
          double p = 0.0;
          for (int j = 0; j < 2; ++j) p += p_flag[j][F] * cond_[j][O][I] * p_in[I];
          joint_[F][O][I] = p;
        }
      }
    }
  }

  double joint(int flag, Occupancy out, Occupancy in) const {
    return joint_.at(flag)[idx(out)][idx(in)];
  }

  double conditional(Ancilla j, Occupancy out, Occupancy in) const {
    return cond_[j == Ancilla::kSinglet ? 0 : 1][idx(out)][idx(in)];
  }

  double flag_probability(int flag) const {
    double s = 0.0;
    for (const auto& o : joint_.at(flag)) s += o[0] + o[1];
    return s;
  }

  double total() const { return flag_probability(0) + flag_probability(1); }

  // Exact counterparts of the leading-order estimates.
  double wrong_given_0() const {
    const double p0 = flag_probability(0);
    return p0 > 0.0 ? (p0 - joint_[0][0][0]) / p0 : 0.0;
  }

  double wrong_given_1() const {
    const double p1 = flag_probability(1);
    return p1 > 0.0 ? (p1 - joint_[1][0][1]) / p1 : 0.0;
  }

 private:
  static int idx(Occupancy o) { return o == Occupancy::kUnleaked ? 0 : 1; }

  double cond_[2][2][2]{};                          // [j][O][I]
  std::array<std::array<std::array<double, 2>, 2>, 2> joint_{};  // [F][O][I]
};

inline JointFlagTable joint_flag_table(const FlagParams& f, const ChannelErrors& e) {
  return JointFlagTable(f, e);
}

// --- gauge pumping ---

struct GaugeParams {
  double eta = 0.0;  // per-cycle gauge relaxation probability

  void validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  }
};

// Column-stochastic matrices over the gauge populations (down, up).
inline Eigen::Matrix2d gauge_pumping() {
  Eigen::Matrix2d p;
  p << 1.0, 2.0, 2.0, 1.0;
  return p / 3.0;
}

inline Eigen::Matrix2d gauge_relaxation(double eta) {
  Eigen::Matrix2d r;
  r << 1.0, eta, 0.0, 1.0 - eta;
  return r;
}

struct GaugeStationary {
  double p_down = 0.0;
  double p_up = 0.0;
  double decay_eigenvalue = 0.0;
  double coherence_weight = 0.0;  // p_down - p_up
};

inline GaugeStationary gauge_stationary(const GaugeParams& g) {
  g.validate();
  const Eigen::Matrix2d m = gauge_relaxation(g.eta) * gauge_pumping();
  // Two-state chain: the fixed point balances the two off-diagonal flows.
  const double to_down = m(0, 1), to_up = m(1, 0);
  GaugeStationary s;
  s.p_down = to_down / (to_down + to_up);
  s.p_up = to_up / (to_down + to_up);
  s.decay_eigenvalue = m.trace() - 1.0;
  s.coherence_weight = s.p_down - s.p_up;
  return s;
}

}  // namespace ril
