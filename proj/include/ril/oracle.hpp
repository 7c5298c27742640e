#pragma once

// Brute-force reference computations on the full 32-dim five-spin space.
// Slow, and only used to cross-check the block-level code.

#include <array>
#include <cmath>
#include <stdexcept>

#include "ril/exchange_kernel.hpp"
#include "ril/objective.hpp"
#include "ril/spin_basis.hpp"

namespace ril::oracle {

// Ordered product of 32-dim exchanges, slot 1 first.
inline Operator unitary(const ExchangeSequence& seq) {
  Operator u = Operator::Identity(kHilbertDim, kHilbertDim);
  for (int slot = 1; slot <= kNumSlots; ++slot) {
    const double theta = seq.angles[slot - 1];
    if (theta == 0.0) continue;
    u = oracle_exchange(link_of_slot(slot), theta) * u;
  }
  return u;
}

enum class AncillaState { kSinglet, kTripletPlus, kTripletZero, kTripletMinus };

inline constexpr std::array<AncillaState, 4> kAncillaStates = {
    AncillaState::kSinglet, AncillaState::kTripletPlus, AncillaState::kTripletZero,
    AncillaState::kTripletMinus};

inline StateVec ancilla_vector(AncillaState a) {
  switch (a) {
    case AncillaState::kSinglet: return detail::pair_singlet();
    case AncillaState::kTripletPlus: return detail::pair_triplet_plus();
    case AncillaState::kTripletZero: return detail::pair_triplet_zero();
    case AncillaState::kTripletMinus: return detail::pair_triplet_minus();
  }
  return {};
}

// Three-dot amplitude left after projecting the ancilla pair (dots 4, 5,
// the two least significant bits) onto `a`.
inline StateVec ancilla_branch(const StateVec& psi, AncillaState a) {
  const StateVec anc = ancilla_vector(a);
  StateVec out = StateVec::Zero(8);
  for (int q = 0; q < 8; ++q) {
    for (int k = 0; k < 4; ++k) out(q) += std::conj(anc(k)) * psi(4 * q + k);
  }
  return out;
}

inline Eigen::MatrixXcd trace_ancilla(const StateVec& psi) {
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(8, 8);
  for (AncillaState a : kAncillaStates) {
    const StateVec b = ancilla_branch(psi, a);
    rho += b * b.adjoint();
  }
  return rho;
}

// Three-dot representations the representation-level map groups over m.
enum class QubitRep { kZero, kOne, kLeaked };

inline std::vector<StateVec> rep_states(QubitRep r) {
  switch (r) {
    case QubitRep::kZero: return {detail::qubit_zero(-1), detail::qubit_zero(+1)};
    case QubitRep::kOne: return {detail::qubit_one(-1), detail::qubit_one(+1)};
    case QubitRep::kLeaked:
      return {detail::quartet(-3), detail::quartet(-1), detail::quartet(+1), detail::quartet(+3)};
  }
  return {};
}

// <x| T rho T^dagger |y> with T = sum_i |i> sum_m <i, m|.
inline Cplx rep_element(const Eigen::MatrixXcd& rho_q, QubitRep x, QubitRep y) {
  Cplx s{};
  for (const auto& a : rep_states(x)) {
    for (const auto& b : rep_states(y)) s += a.dot(rho_q * b);
  }
  return s;
}

// 2x2 representation-level density over {unleaked, leaked} for the state
// alpha |1_QA> + beta |2_Q> at total 2M = two_m, with the unleaked qubit
// state |qubit>. Either the full ancilla trace or a single ancilla branch.
struct CoherentLeakage {
  Eigen::Matrix2cd traced;
  std::array<Eigen::Matrix2cd, 4> by_branch;  // indexed like kAncillaStates
};

inline CoherentLeakage coherent_leakage(Cplx alpha, Cplx beta, int two_m, int qubit = 0) {
  if (qubit != 0 && qubit != 1) throw std::invalid_argument("qubit must be 0 or 1");
  const StateVec psi = alpha * basis_state(2 + qubit, two_m).amplitudes +
                       beta * basis_state(4, two_m).amplitudes;
  const QubitRep u = qubit == 0 ? QubitRep::kZero : QubitRep::kOne;
  auto project = [&](const Eigen::MatrixXcd& rho_q) {
    Eigen::Matrix2cd m;
    m(0, 0) = rep_element(rho_q, u, u);
    m(0, 1) = rep_element(rho_q, u, QubitRep::kLeaked);
    m(1, 0) = rep_element(rho_q, QubitRep::kLeaked, u);
    m(1, 1) = rep_element(rho_q, QubitRep::kLeaked, QubitRep::kLeaked);
    return m;
  };
  CoherentLeakage out;
  out.traced = project(trace_ancilla(psi));
  for (std::size_t i = 0; i < kAncillaStates.size(); ++i) {
    const StateVec b = ancilla_branch(psi, kAncillaStates[i]);
    out.by_branch[i] = project(b * b.adjoint());
  }
  return out;
}

inline double purity(const Eigen::Matrix2cd& rho) { return (rho * rho).trace().real(); }

// Physical channel quantities computed by full simulation and ancilla trace
// at total 2M = two_m.
struct ChannelOracle {
  double F_e = 0.0;
  double p_L_ind = 0.0;
  double eps_F = 0.0;  // ancilla not found in the singlet
};

inline ChannelOracle channel(const ExchangeSequence& seq, int two_m = -1) {
  const Operator u = unitary(seq);
  const Operator p_leak = sector_projector(SectorKind::kLeaked).full;
  std::array<StateVec, 2> out;
  for (int q = 0; q < 2; ++q) out[q] = u * basis_state(q, two_m).amplitudes;

  ChannelOracle c;
  const std::array<QubitRep, 2> reps = {QubitRep::kZero, QubitRep::kOne};
  Cplx fe{};
  for (int q = 0; q < 2; ++q) {
    for (int qp = 0; qp < 2; ++qp) {
      // E(|q><q'|), traced over the ancilla, read out at <q| . |q'>.
      Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(8, 8);
      for (AncillaState a : kAncillaStates) {
        rho += ancilla_branch(out[q], a) * ancilla_branch(out[qp], a).adjoint();
      }
      fe += rep_element(rho, reps[q], reps[qp]);
    }
    c.p_L_ind += 0.5 * out[q].dot(p_leak * out[q]).real();
    c.eps_F += 0.5 * (1.0 - ancilla_branch(out[q], AncillaState::kSinglet).squaredNorm());
  }
  c.F_e = fe.real() / 4.0;
  return c;
}

}  // namespace ril::oracle
