#pragma once

// Sector-blocked exchange unitaries, the brickwork slot layout and sequence
// composition. Only the J = 1/2 (labels 0..4) and J = 3/2 (labels 5..8)
// blocks are stored; the J = 5/2 block of every exchange is the identity.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ril/linalg.hpp"
#include "ril/spin_basis.hpp"

namespace ril {

struct BlockUnitary {
  HalfBlock half = HalfBlock::Identity();
  ThreeHalfBlock threehalf = ThreeHalfBlock::Identity();

  static BlockUnitary identity() { return {}; }

  friend BlockUnitary operator*(const BlockUnitary& a, const BlockUnitary& b) {
    return {a.half * b.half, a.threehalf * b.threehalf};
  }

  double unitarity_deviation() const {
    return std::max(ril::unitarity_deviation(half), ril::unitarity_deviation(threehalf));
  }
};

namespace detail {

// Singlet-pair projector of each link in the label basis; the triplet
// projector is its complement.
struct LinkProjectors {
  HalfBlock half_singlet;
  ThreeHalfBlock threehalf_singlet;
};

inline LinkProjectors make_projectors(Link link) {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0), r5 = std::sqrt(5.0);
  const double r6 = std::sqrt(6.0), r15 = std::sqrt(15.0);
  LinkProjectors p;
  p.half_singlet.setZero();
  p.threehalf_singlet.setZero();
  switch (link) {
    case Link::k12:
      p.half_singlet << 1, -r3, 0, 0, 0,
                        -r3, 3, 0, 0, 0,
                        0, 0, 1, -r3, 0,
                        0, 0, -r3, 3, 0,
                        0, 0, 0, 0, 0;
      p.half_singlet /= 4.0;
      p.threehalf_singlet << 0, 0, 0, 0,
                             0, 1, r3, 0,
                             0, r3, 3, 0,
                             0, 0, 0, 0;
      p.threehalf_singlet /= 4.0;
      break;
    case Link::k23:
      p.half_singlet.diagonal() << 1, 0, 1, 0, 0;
      p.threehalf_singlet.diagonal() << 0, 1, 0, 0;
      break;
    case Link::k34:
      p.half_singlet << 3, 0, 0, 3, -3 * r2,
                        0, 3, 3, -2 * r3, -r6,
                        0, 3, 3, -2 * r3, -r6,
                        3, -2 * r3, -2 * r3, 7, -r2,
                        -3 * r2, -r6, -r6, -r2, 8;
      p.half_singlet /= 12.0;
      p.threehalf_singlet << 3, 3, -r3, r15,
                             3, 3, -r3, r15,
                             -r3, -r3, 1, -r5,
                             r15, r15, -r5, 5;
      p.threehalf_singlet /= 12.0;
      break;
    case Link::k45:
      p.half_singlet.diagonal() << 1, 1, 0, 0, 0;
      p.threehalf_singlet.diagonal() << 1, 0, 0, 0;
      break;
  }
  return p;
}

inline const LinkProjectors& projectors(Link link) {
  static const std::array<LinkProjectors, 4> table = {
      make_projectors(Link::k12), make_projectors(Link::k23), make_projectors(Link::k34),
      make_projectors(Link::k45)};
  return table[static_cast<int>(link)];
}

}  // namespace detail

// exp(i theta) P_S + P_T restricted to each total-spin block.
inline BlockUnitary block_exchange(Link link, double theta) {
  const auto& p = detail::projectors(link);
  const Cplx phase_minus_one = std::polar(1.0, theta) - 1.0;
  BlockUnitary u;
  u.half.noalias() += phase_minus_one * p.half_singlet;
  u.threehalf.noalias() += phase_minus_one * p.threehalf_singlet;
  return u;
}

// Conjugates the 32-dim oracle exchange into the label basis at the given
// magnetic quantum numbers (defaults: the representative M of each block).
inline BlockUnitary oracle_blocks(Link link, double theta, int two_m_half = -1,
                                  int two_m_threehalf = -3) {
  const Operator u = oracle_exchange(link, theta);
  Eigen::MatrixXcd half_basis(kHilbertDim, 5), three_basis(kHilbertDim, 4);
  for (int l = 0; l < 5; ++l) half_basis.col(l) = basis_state(l, two_m_half).amplitudes;
  for (int l = 0; l < 4; ++l) three_basis.col(l) = basis_state(5 + l, two_m_threehalf).amplitudes;
  BlockUnitary out;
  out.half = half_basis.adjoint() * u * half_basis;
  out.threehalf = three_basis.adjoint() * u * three_basis;
  return out;
}

// --- brickwork layout ---

inline constexpr int kNumSlots = 20;
// Theta_19 is a placeholder that never carries an angle.
inline constexpr int kPlaceholderSlot = 19;

// Link of slot k (1-based), following U = U23(T20) U45(T19) U12(T18) U34(T17) ... U12(T2) U34(T1).
constexpr Link link_of_slot(int slot) {
  switch (slot % 4) {
    case 1: return Link::k34;
    case 2: return Link::k12;
    case 3: return Link::k45;
    default: return Link::k23;
  }
}

namespace detail {

constexpr bool links_disjoint(Link a, Link b) {
  const auto [a1, a2] = dots(a);
  const auto [b1, b2] = dots(b);
  return a1 != b1 && a1 != b2 && a2 != b1 && a2 != b2;
}

constexpr bool layout_is_brickwork() {
  for (int layer_start = 1; layer_start < kNumSlots; layer_start += 2) {
    if (!links_disjoint(link_of_slot(layer_start), link_of_slot(layer_start + 1))) return false;
  }
  // Consecutive layers alternate between the {34,12} and {45,23} bricks.
  for (int slot = 1; slot + 2 <= kNumSlots; ++slot) {
    if (link_of_slot(slot) == link_of_slot(slot + 2)) return false;
  }
  return true;
}

static_assert(layout_is_brickwork(), "slot layout must pair commuting exchanges in each layer");

}  // namespace detail

struct ExchangeSequence {
  std::array<double, kNumSlots> angles{};  // radians; angles[k - 1] is Theta_k
  std::array<bool, kNumSlots> mask{};      // active slots

  double& angle(int slot) { return angles.at(slot - 1); }
  double angle(int slot) const { return angles.at(slot - 1); }
  bool active(int slot) const { return mask.at(slot - 1); }

  int active_count() const {
    int n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
  }

  // Throws std::invalid_argument if the placeholder slot is active or an
  // inactive slot carries a nonzero angle.
  void validate() const {
    if (mask[kPlaceholderSlot - 1] || angles[kPlaceholderSlot - 1] != 0.0) {
      throw std::invalid_argument("slot 19 is a placeholder and must stay inactive and zero");
    }
    for (int k = 0; k < kNumSlots; ++k) {
      if (!std::isfinite(angles[k])) {
        throw std::invalid_argument("non-finite angle in slot " + std::to_string(k + 1));
      }
      if (!mask[k] && angles[k] != 0.0) {
        throw std::invalid_argument("inactive slot " + std::to_string(k + 1) +
                                    " carries a nonzero angle");
      }
    }
  }

  // Mask derived from the nonzero angles.
  static ExchangeSequence from_angles(const std::array<double, kNumSlots>& radians) {
    ExchangeSequence s;
    s.angles = radians;
    for (int k = 0; k < kNumSlots; ++k) s.mask[k] = radians[k] != 0.0;
    return s;
  }

  static ExchangeSequence from_angles_pi(const std::array<double, kNumSlots>& units_of_pi) {
    std::array<double, kNumSlots> rad{};
    for (int k = 0; k < kNumSlots; ++k) rad[k] = units_of_pi[k] * kPi;
    return from_angles(rad);
  }
};

using SlotMask = std::array<bool, kNumSlots>;

// Left-multiplies `acc` by the exchange of `link`. Cheaper than forming the
// block unitary and doing a full product.
inline void apply_exchange(BlockUnitary& acc, Link link, double theta) {
  const auto& p = detail::projectors(link);
  const Cplx c = std::polar(1.0, theta) - 1.0;
  acc.half += c * (p.half_singlet * acc.half);
  acc.threehalf += c * (p.threehalf_singlet * acc.threehalf);
}

// Ordered product over slots 1..20, slot 1 acting first.
inline BlockUnitary compose(const ExchangeSequence& seq) {
  BlockUnitary acc;
  for (int slot = 1; slot <= kNumSlots; ++slot) {
    const double theta = seq.angles[slot - 1];
    if (theta == 0.0) continue;
    apply_exchange(acc, link_of_slot(slot), theta);
  }
  return acc;
}

// Sequence restricted to the singlet-ancilla inputs |0>, |1> and |5>.
struct RilIsometry {
  HalfColumns half;
  ThreeHalfColumn threehalf;

  double isometry_deviation() const {
    return std::max(ril::unitarity_deviation(half), std::abs(threehalf.squaredNorm() - 1.0));
  }
};

inline RilIsometry isometry_of(const BlockUnitary& u) {
  return {u.half.leftCols<2>(), u.threehalf.col(0)};
}

// Same as isometry_of(compose(seq)) but propagates only the three input columns.
inline RilIsometry isometry(const ExchangeSequence& seq) {
  RilIsometry iso{HalfBlock::Identity().leftCols<2>(), ThreeHalfColumn::Unit(0)};
  for (int slot = 1; slot <= kNumSlots; ++slot) {
    const double theta = seq.angles[slot - 1];
    if (theta == 0.0) continue;
    const auto& p = detail::projectors(link_of_slot(slot));
    const Cplx c = std::polar(1.0, theta) - 1.0;
    iso.half += c * (p.half_singlet * iso.half);
    iso.threehalf += c * (p.threehalf_singlet * iso.threehalf);
  }
  return iso;
}

}  // namespace ril
