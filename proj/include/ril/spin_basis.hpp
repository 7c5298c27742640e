#pragma once

// Explicit five-spin representation basis and the brute-force 32-dimensional
// exchange oracle. Dots are numbered 1..5 (Q1 Q2 Q3 A1 A2). In the product
// basis dot 1 is the most significant bit and spin-up is bit value 0.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ril/linalg.hpp"

namespace ril {

inline constexpr int kNumSpins = 5;
inline constexpr int kHilbertDim = 1 << kNumSpins;
inline constexpr int kNumLabels = 9;

using StateVec = Eigen::VectorXcd;
using Operator = Eigen::MatrixXcd;

enum class Link : std::uint8_t { k12, k23, k34, k45 };

inline constexpr std::array<Link, 4> kAllLinks = {Link::k12, Link::k23, Link::k34, Link::k45};

constexpr std::pair<int, int> dots(Link link) {
  switch (link) {
    case Link::k12: return {1, 2};
    case Link::k23: return {2, 3};
    case Link::k34: return {3, 4};
    case Link::k45: return {4, 5};
  }
  return {0, 0};
}

inline Link link_from_dots(int i, int j) {
  if (i > j) std::swap(i, j);
  if (j != i + 1 || i < 1 || j > kNumSpins) {
    throw std::invalid_argument("no exchange link between dots " + std::to_string(i) + " and " +
                                std::to_string(j));
  }
  return static_cast<Link>(i - 1);
}

inline std::string to_string(Link link) {
  const auto [i, j] = dots(link);
  return std::to_string(i) + std::to_string(j);
}

namespace detail {

inline StateVec kron(const StateVec& a, const StateVec& b) {
  StateVec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

inline StateVec spin_up() { return StateVec::Unit(2, 0); }
inline StateVec spin_down() { return StateVec::Unit(2, 1); }

inline StateVec pair_singlet() {
  return (kron(spin_up(), spin_down()) - kron(spin_down(), spin_up())) / std::sqrt(2.0);
}
inline StateVec pair_triplet_plus() { return kron(spin_up(), spin_up()); }
inline StateVec pair_triplet_zero() {
  return (kron(spin_up(), spin_down()) + kron(spin_down(), spin_up())) / std::sqrt(2.0);
}
inline StateVec pair_triplet_minus() { return kron(spin_down(), spin_down()); }

// Sum_i S_{i,+} on an n-spin product vector; spin i sits at bit (n-1-i).
inline StateVec apply_raising(const StateVec& v) {
  const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(v.size()))));
  StateVec out = StateVec::Zero(v.size());
  for (Eigen::Index idx = 0; idx < v.size(); ++idx) {
    if (v(idx) == Cplx{}) continue;
    for (int bit = 0; bit < n; ++bit) {
      if (idx & (Eigen::Index{1} << bit)) out(idx & ~(Eigen::Index{1} << bit)) += v(idx);
    }
  }
  return out;
}

// Three-spin states of the qubit dots, `two_m` = 2m.
inline StateVec qubit_zero(int two_m) {
  return kron(two_m < 0 ? spin_down() : spin_up(), pair_singlet());
}

inline StateVec qubit_one(int two_m) {
  StateVec low = std::sqrt(2.0 / 3.0) * kron(spin_up(), pair_triplet_minus()) -
                 std::sqrt(1.0 / 3.0) * kron(spin_down(), pair_triplet_zero());
  if (two_m < 0) return low;
  StateVec up = apply_raising(low);
  return up / up.norm();
}

inline StateVec quartet(int two_m) {
  StateVec v = kron(spin_down(), kron(spin_down(), spin_down()));
  for (int m = -3; m < two_m; m += 2) {
    v = apply_raising(v);
    v /= v.norm();
  }
  return v;
}

}  // namespace detail

// One of the nine representation states at a definite magnetic quantum number.
struct BasisState {
  int label = 0;
  int two_j = 1;
  int two_m = -1;
  StateVec amplitudes;

  double J() const { return 0.5 * two_j; }
  double M() const { return 0.5 * two_m; }
};

// Labels 0..4 carry J = 1/2, labels 5..8 carry J = 3/2.
constexpr int two_j_of_label(int label) { return label < 5 ? 1 : 3; }

// Raw total raising operator applied to a 32-dim state (no normalization).
inline StateVec apply_total_raising(const StateVec& v) { return detail::apply_raising(v); }

// Representative state at the lowest printed M (M = -1/2 for J = 1/2, M = -3/2
// for J = 3/2). Signs of |7> and |8> are the ones under which the closed-form
// block matrices in exchange_kernel.hpp equal the oracle element-wise.
inline BasisState representative_state(int label) {
  using namespace detail;
  const double r13 = std::sqrt(1.0 / 3.0);
  const double r23 = std::sqrt(2.0 / 3.0);
  BasisState s;
  s.label = label;
  s.two_j = two_j_of_label(label);
  s.two_m = -s.two_j;
  switch (label) {
    case 0: s.amplitudes = kron(qubit_zero(-1), pair_singlet()); break;
    case 1: s.amplitudes = kron(qubit_one(-1), pair_singlet()); break;
    case 2:
      s.amplitudes = -r13 * kron(qubit_zero(-1), pair_triplet_zero()) +
                     r23 * kron(qubit_zero(+1), pair_triplet_minus());
      break;
    case 3:
      s.amplitudes = -r13 * kron(qubit_one(-1), pair_triplet_zero()) +
                     r23 * kron(qubit_one(+1), pair_triplet_minus());
      break;
    case 4:
      s.amplitudes = std::sqrt(0.5) * kron(quartet(-3), pair_triplet_plus()) -
                     r13 * kron(quartet(-1), pair_triplet_zero()) +
                     std::sqrt(1.0 / 6.0) * kron(quartet(+1), pair_triplet_minus());
      break;
    case 5: s.amplitudes = kron(quartet(-3), pair_singlet()); break;
    case 6: s.amplitudes = kron(qubit_zero(-1), pair_triplet_minus()); break;
    case 7: s.amplitudes = -kron(qubit_one(-1), pair_triplet_minus()); break;
    case 8:
      s.amplitudes = std::sqrt(3.0 / 5.0) * kron(quartet(-3), pair_triplet_zero()) -
                     std::sqrt(2.0 / 5.0) * kron(quartet(-1), pair_triplet_minus());
      break;
    default: throw std::invalid_argument("basis label out of range: " + std::to_string(label));
  }
  return s;
}

// Sign relating each label state to its explicit spin expression in the
// standard state listing: state(label) = listing_sign(label) * listing(label).
constexpr int listing_sign(int label) { return label == 7 || label == 8 ? -1 : 1; }

// Ladder step J_+ with the Clebsch-Gordan prefactor sqrt(J(J+1) - M(M+1)) divided out.
inline BasisState raise_m(const BasisState& state) {
  if (state.two_m >= state.two_j) {
    throw std::invalid_argument("raise_m: state is already at M = J");
  }
  const double j = state.J();
  const double m = state.M();
  BasisState out = state;
  out.two_m += 2;
  out.amplitudes = apply_total_raising(state.amplitudes) / std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  return out;
}

inline BasisState basis_state(int label, int two_m) {
  BasisState s = representative_state(label);
  if (two_m < -s.two_j || two_m > s.two_j || (two_m + s.two_j) % 2 != 0) {
    throw std::invalid_argument("invalid 2M = " + std::to_string(two_m) + " for label " +
                                std::to_string(label));
  }
  while (s.two_m < two_m) s = raise_m(s);
  return s;
}

// Every label at every allowed M: 5 x 2 states for J = 1/2, 4 x 4 for J = 3/2.
inline std::vector<BasisState> build_basis() {
  std::vector<BasisState> out;
  out.reserve(26);
  for (int label = 0; label < kNumLabels; ++label) {
    BasisState s = representative_state(label);
    out.push_back(s);
    while (s.two_m < s.two_j) {
      s = raise_m(s);
      out.push_back(s);
    }
  }
  return out;
}

// --- spin operators on the 32-dim product space ---

inline Operator total_sz() {
  Operator op = Operator::Zero(kHilbertDim, kHilbertDim);
  for (int idx = 0; idx < kHilbertDim; ++idx) {
    int down = __builtin_popcount(static_cast<unsigned>(idx));
    op(idx, idx) = 0.5 * (kNumSpins - 2 * down);
  }
  return op;
}

inline Operator total_raising() {
  Operator op(kHilbertDim, kHilbertDim);
  for (int col = 0; col < kHilbertDim; ++col) {
    op.col(col) = apply_total_raising(StateVec::Unit(kHilbertDim, col));
  }
  return op;
}

inline Operator total_spin_squared() {
  const Operator jp = total_raising();
  const Operator jz = total_sz();
  return jp.adjoint() * jp + jz * jz + jz;
}

// Permutation operator exchanging the spins on dots i and j (1-based).
inline Operator swap_operator(int dot_i, int dot_j) {
  const int bi = kNumSpins - dot_i;
  const int bj = kNumSpins - dot_j;
  Operator op = Operator::Zero(kHilbertDim, kHilbertDim);
  for (int idx = 0; idx < kHilbertDim; ++idx) {
    const int vi = (idx >> bi) & 1;
    const int vj = (idx >> bj) & 1;
    int target = idx & ~((1 << bi) | (1 << bj));
    target |= (vi << bj) | (vj << bi);
    op(target, idx) = 1.0;
  }
  return op;
}

// exp(i theta) |S_ij><S_ij| + |T_ij><T_ij| on the full five-spin space.
inline Operator oracle_exchange(Link link, double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("oracle_exchange: non-finite angle");
  const auto [i, j] = dots(link);
  const Operator swap = swap_operator(i, j);
  const Operator id = Operator::Identity(kHilbertDim, kHilbertDim);
  const Operator singlet = 0.5 * (id - swap);
  const Operator triplet = 0.5 * (id + swap);
  return std::polar(1.0, theta) * singlet + triplet;
}

inline Operator oracle_exchange(int dot_i, int dot_j, double theta) {
  return oracle_exchange(link_from_dots(dot_i, dot_j), theta);
}

// --- sector projectors ---

enum class SectorKind { kQubit, kLeaked, kHalf };

struct SectorProjector {
  SectorKind kind;
  Operator full;                                  // 32 x 32
  Eigen::Matrix<double, kNumLabels, 1> diagonal;  // block form over labels 0..8
};

inline SectorProjector sector_projector(SectorKind kind) {
  const Operator id = Operator::Identity(kHilbertDim, kHilbertDim);
  SectorProjector p{kind, Operator(), {}};
  switch (kind) {
    case SectorKind::kLeaked:
    case SectorKind::kQubit: {
      // Three-dot total spin squared, tensored with identity on the ancillas.
      Operator jp3 = Operator::Zero(kHilbertDim, kHilbertDim);
      Operator jz3 = Operator::Zero(kHilbertDim, kHilbertDim);
      for (int idx = 0; idx < kHilbertDim; ++idx) {
        int down = 0;
        for (int dot = 1; dot <= 3; ++dot) {
          const int bit = kNumSpins - dot;
          if (idx & (1 << bit)) {
            ++down;
            jp3(idx & ~(1 << bit), idx) += 1.0;
          }
        }
        jz3(idx, idx) = 0.5 * (3 - 2 * down);
      }
      const Operator s2 = jp3.adjoint() * jp3 + jz3 * jz3 + jz3;
      const Operator leaked = (s2 - 0.75 * id) / 3.0;
      p.full = kind == SectorKind::kLeaked ? leaked : Operator(id - leaked);
      if (kind == SectorKind::kLeaked) {
        p.diagonal << 0, 0, 0, 0, 1, 1, 0, 0, 1;
      } else {
        p.diagonal << 1, 1, 1, 1, 0, 0, 1, 1, 0;
      }
      break;
    }
    case SectorKind::kHalf: {
      const Operator s2 = total_spin_squared();
      // Eigenvalues 3/4, 15/4, 35/4 for J = 1/2, 3/2, 5/2.
      p.full = (s2 - 3.75 * id) * (s2 - 8.75 * id) / ((0.75 - 3.75) * (0.75 - 8.75));
      p.diagonal << 1, 1, 1, 1, 1, 0, 0, 0, 0;
      break;
    }
  }
  return p;
}

}  // namespace ril
