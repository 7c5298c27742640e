#pragma once

// Reset-if-leaked target functions.
//
// Inside the J = 1/2 block the labels factor as |q_Q> (x) |a_QA> with
// label = q + 2a, so rows 0,1 hold the QA state |0_QA> (ancilla singlet) and
// rows 2,3 hold |1_QA> (ancilla triplet). Row 4 is induced leakage. In the
// J = 3/2 block the leaked input |5> must end up in span{|6>, |7>}.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ril/exchange_kernel.hpp"
#include "ril/linalg.hpp"

namespace ril {

enum class GateConstraint { kNone, kIdentity, kPauli, kClifford };

inline std::string to_string(GateConstraint g) {
  switch (g) {
    case GateConstraint::kNone: return "none";
    case GateConstraint::kIdentity: return "identity";
    case GateConstraint::kPauli: return "pauli";
    case GateConstraint::kClifford: return "clifford";
  }
  return "?";
}

inline GateConstraint parse_gate_constraint(std::string_view s) {
  if (s == "none") return GateConstraint::kNone;
  if (s == "identity") return GateConstraint::kIdentity;
  if (s == "pauli") return GateConstraint::kPauli;
  if (s == "clifford") return GateConstraint::kClifford;
  throw std::invalid_argument("unknown gate constraint '" + std::string(s) +
                              "' (expected none|identity|pauli|clifford)");
}

struct RilSpec {
  bool flaggable = false;  // pins the QA reversal to (0, 0)
  GateConstraint gate = GateConstraint::kIdentity;
};

// The QA isometry |0_QA> -> cos(gamma/2)|0_QA> + e^{i phi} sin(gamma/2)|1_QA>.
struct QaReversal {
  double phi = 0.0;
  double gamma = 0.0;

  Mat2 rotation() const {
    const double c = std::cos(0.5 * gamma), s = std::sin(0.5 * gamma);
    Mat2 r;
    r << c, -std::polar(s, -phi), std::polar(s, phi), c;
    return r;
  }
};

class NotASolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Undoes the QA rotation on the J = 1/2 columns; row 4 is untouched.
inline HalfColumns apply_reversal(const HalfColumns& half, const QaReversal& rev) {
  if (rev.phi == 0.0 && rev.gamma == 0.0) return half;
  const Mat2 rd = rev.rotation().adjoint();
  HalfColumns out = half;
  for (int q = 0; q < 2; ++q) {
    for (int col = 0; col < 2; ++col) {
      const Cplx a0 = half(q, col), a1 = half(q + 2, col);
      out(q, col) = rd(0, 0) * a0 + rd(0, 1) * a1;
      out(q + 2, col) = rd(1, 0) * a0 + rd(1, 1) * a1;
    }
  }
  return out;
}

// Sum of squared magnitudes of the entries a reset-if-leaked isometry must not have.
inline double f0_ril(const RilIsometry& iso, const QaReversal& rev) {
  const HalfColumns h = apply_reversal(iso.half, rev);
  return h.bottomRows<3>().squaredNorm() + std::norm(iso.threehalf(0)) +
         std::norm(iso.threehalf(3));
}

namespace detail {

inline double four_norm(const std::array<Cplx, 4>& c) {
  double s = 0.0;
  for (const auto& v : c) s += std::norm(v) * std::norm(v);
  return std::pow(s, 0.25);
}

inline std::array<Cplx, 4> pauli_coefficients(const Mat2& m) {
  return {0.5 * m.trace(), 0.5 * (m * pauli::x()).trace(), 0.5 * (m * pauli::y()).trace(),
          0.5 * (m * pauli::z()).trace()};
}

}  // namespace detail

// Gate-class penalty on a 2x2 block without checking unitarity. Used inside
// the search, where the block only becomes unitary at a solution.
inline double gate_penalty(const Mat2& u, GateConstraint kind) {
  switch (kind) {
    case GateConstraint::kNone: return 0.0;
    case GateConstraint::kIdentity: return 1.0 - std::abs(0.5 * u.trace());
    case GateConstraint::kPauli: return 1.0 - detail::four_norm(detail::pauli_coefficients(u));
    case GateConstraint::kClifford: {
      const Mat2 ux = u * pauli::x() * u.adjoint();
      const Mat2 uz = u * pauli::z() * u.adjoint();
      return 2.0 - detail::four_norm(detail::pauli_coefficients(ux)) -
             detail::four_norm(detail::pauli_coefficients(uz));
    }
  }
  return 0.0;
}

inline constexpr double kUnitaryTolerance = 1e-6;

// Vanishes iff u is, up to phase, in the requested class. Throws on non-unitary input.
inline double f_gate(const Mat2& u, GateConstraint kind) {
  if (unitarity_deviation(u) > kUnitaryTolerance) {
    throw std::invalid_argument("f_gate: input deviates from unitary by " +
                                std::to_string(unitarity_deviation(u)));
  }
  return std::max(0.0, gate_penalty(u, kind));
}

inline double f_total(const RilIsometry& iso, const QaReversal& rev, const RilSpec& spec) {
  const QaReversal r = spec.flaggable ? QaReversal{} : rev;
  const HalfColumns h = apply_reversal(iso.half, r);
  const double f0 = h.bottomRows<3>().squaredNorm() + std::norm(iso.threehalf(0)) +
                    std::norm(iso.threehalf(3));
  return f0 + gate_penalty(h.topRows<2>(), spec.gate);
}

inline double f_total(const ExchangeSequence& seq, const QaReversal& rev, const RilSpec& spec) {
  return f_total(isometry(seq), rev, spec);
}

// QA reversal minimizing f0 for a fixed isometry. Only rows 0..3 depend on
// (phi, gamma); the optimum is the dominant right singular vector of the
// 4x2 matrix B[(col, q), a] = half(q + 2a, col).
inline QaReversal fit_reversal(const RilIsometry& iso) {
  Eigen::Matrix<Cplx, 4, 2> b;
  for (int col = 0; col < 2; ++col) {
    for (int q = 0; q < 2; ++q) {
      for (int a = 0; a < 2; ++a) b(2 * col + q, a) = iso.half(q + 2 * a, col);
    }
  }
  Eigen::JacobiSVD<Eigen::Matrix<Cplx, 4, 2>> svd(b, Eigen::ComputeFullV);
  const Eigen::Matrix<Cplx, 2, 1> psi = svd.matrixV().col(0).conjugate();
  const double gamma = 2.0 * std::atan2(std::abs(psi(1)), std::abs(psi(0)));
  // At gamma = 0 or pi the relative phase only shifts the global phase of U_Q.
  const double phi = std::abs(psi(1)) > 0.0 && std::abs(psi(0)) > 0.0
                         ? std::arg(psi(1)) - std::arg(psi(0))
                         : 0.0;
  return {wrap_two_pi(phi), gamma};
}

inline constexpr double kConvergenceThreshold = 1e-8;
// f_total below this counts as a solution; printed 6-decimal angles only reach 1e-5.
inline constexpr double kSolutionThreshold = 1e-9;
inline constexpr double kPrintedAngleThreshold = 1e-5;
inline constexpr double kExtractionTolerance = 1e-4;

// Top 2x2 block of the QA-reversed isometry, polished to exact unitarity.
inline Mat2 extract_qubit_gate(const RilIsometry& iso, const QaReversal& rev,
                               double f0_threshold = kConvergenceThreshold) {
  const double f0 = f0_ril(iso, rev);
  if (f0 > f0_threshold) {
    throw NotASolution("extract_qubit_gate: f0 = " + std::to_string(f0) + " above threshold " +
                       std::to_string(f0_threshold));
  }
  const Mat2 block = apply_reversal(iso.half, rev).topRows<2>();
  const double dev = unitarity_deviation(block);
  if (dev > kExtractionTolerance) {
    throw NotASolution("extract_qubit_gate: qubit block deviates from unitary by " +
                       std::to_string(dev));
  }
  return polar_unitary(block);
}

// Reset state alpha|6> + beta|7>, with alpha made real and nonnegative.
struct ResetState {
  Cplx alpha;
  Cplx beta;
  double theta_bloch = 0.0;
  double phi_bloch = 0.0;

  Eigen::Vector3d bloch_vector() const {
    return {std::sin(theta_bloch) * std::cos(phi_bloch),
            std::sin(theta_bloch) * std::sin(phi_bloch), std::cos(theta_bloch)};
  }

  static ResetState from_amplitudes(Cplx alpha, Cplx beta) {
    ResetState r;
    const double a = std::abs(alpha);
    const Cplx phase = a > 0.0 ? std::conj(alpha) / a
                               : (std::abs(beta) > 0.0 ? std::conj(beta) / std::abs(beta) : 1.0);
    r.alpha = alpha * phase;
    r.beta = beta * phase;
    r.alpha = {r.alpha.real(), 0.0};
    r.theta_bloch = 2.0 * std::atan2(std::abs(r.beta), a);
    r.phi_bloch = std::abs(r.beta) > 0.0 ? wrap_two_pi(std::arg(r.beta)) : 0.0;
    return r;
  }

  // Same state, with amplitudes taken on the listed spin expressions of |6>, |7>.
  ResetState in_listing_basis() const {
    return from_amplitudes(alpha * double(listing_sign(6)), beta * double(listing_sign(7)));
  }
};

inline double bloch_distance(const ResetState& a, const ResetState& b) {
  return (a.bloch_vector() - b.bloch_vector()).norm();
}

inline ResetState extract_reset_state(const RilIsometry& iso,
                                      double residual_tolerance = kExtractionTolerance) {
  const double residual = std::norm(iso.threehalf(0)) + std::norm(iso.threehalf(3));
  if (residual > residual_tolerance) {
    throw NotASolution("extract_reset_state: leaked weight " + std::to_string(residual) +
                       " left on |5>/|8>");
  }
  return ResetState::from_amplitudes(iso.threehalf(1), iso.threehalf(2));
}

// Phase-insensitive Frobenius distance of the qubit gate from the identity.
inline double identity_distance(const Mat2& u) { return phase_distance(u, Mat2::Identity()); }

}  // namespace ril
