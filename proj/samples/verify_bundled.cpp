// Checks the three bundled sequences and prints their reset states on the
// listed spin expressions of |6>, |7>.

#include <cstdio>

#include "ril/ril.hpp"

int main() {
  using namespace ril;
  for (const auto& rec : bundled::all()) {
    const RilIsometry iso = isometry(rec.sequence);
    const RilSpec spec{rec.name != "no_flag", GateConstraint::kIdentity};
    const QaReversal rev = spec.flaggable ? QaReversal{} : fit_reversal(iso);
    const double f = f_total(iso, rev, spec);
    const ResetState r = extract_reset_state(iso).in_listing_basis();
    std::printf("%-10s f_total %.2e  reset theta %.6f pi  phi %.6f pi\n", rec.name.c_str(), f,
                r.theta_bloch / kPi, r.phi_bloch / kPi);
  }
}
