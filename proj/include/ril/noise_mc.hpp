#pragma once

// Monte-Carlo averaged process (chi) matrix of a sequence under multiplicative
// exchange-angle noise, and the error metrics derived from it.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ril/exchange_kernel.hpp"
#include "ril/objective.hpp"
#include "ril/rng.hpp"

namespace ril {

enum class NoiseCorrelation { kStatic, kMarkovian };

inline std::string to_string(NoiseCorrelation c) {
  return c == NoiseCorrelation::kStatic ? "static" : "markovian";
}

inline NoiseCorrelation parse_noise_correlation(std::string_view s) {
  if (s == "static") return NoiseCorrelation::kStatic;
  if (s == "markovian") return NoiseCorrelation::kMarkovian;
  throw std::invalid_argument("unknown noise model '" + std::string(s) +
                              "' (expected static|markovian)");
}

struct NoiseModel {
  double sigma = 0.0;
  NoiseCorrelation correlation = NoiseCorrelation::kStatic;

  void validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw std::invalid_argument("sigma must be finite and >= 0");
    }
  }
};

using NoiseVector = std::array<double, kNumSlots>;

// Static noise: one Gaussian per link, shared by every slot on that link.
// Markovian: every slot independent. The Gaussian is not truncated at -1.
template <typename Rng>
NoiseVector draw_noise(const NoiseModel& model, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  NoiseVector x{};
  if (model.correlation == NoiseCorrelation::kStatic) {
    std::array<double, 4> per_link{};
    for (auto& v : per_link) v = model.sigma * g(rng);
    for (int k = 0; k < kNumSlots; ++k) x[k] = per_link[k % 4];
  } else {
    for (auto& v : x) v = model.sigma * g(rng);
  }
  return x;
}

inline ExchangeSequence perturb(const ExchangeSequence& seq, const NoiseVector& x) {
  ExchangeSequence out = seq;
  for (int k = 0; k < kNumSlots; ++k) {
    if (!std::isfinite(x[k])) throw std::invalid_argument("non-finite noise value");
    out.angles[k] = seq.angles[k] * (1.0 + x[k]);
  }
  return out;
}

inline constexpr int kChiDim = 14;
using ChiVector = Eigen::Matrix<Cplx, kChiDim, 1>;
using ChiMat = Eigen::Matrix<Cplx, kChiDim, kChiDim>;

// v = [column of input |0>; column of input |1>; J = 3/2 column], with the
// QA rotation `rev` undone on the J = 1/2 part.
inline ChiVector chi_vector(const RilIsometry& iso, const QaReversal& rev = {}) {
  const HalfColumns h = apply_reversal(iso.half, rev);
  ChiVector v;
  v.segment<5>(0) = h.col(0);
  v.segment<5>(5) = h.col(1);
  v.segment<4>(10) = iso.threehalf;
  return v;
}

// Second-order Taylor model of v in the independent noise coordinates z
// (one per link for static noise, one per active slot for Markovian noise).
// Its expectation under Gaussian z is known in closed form, so it serves as a
// control variate: the estimator stays unbiased whatever the accuracy of the
// finite-difference derivatives, which only affect the variance.
struct ChiTaylor {
  ChiVector v0 = ChiVector::Zero();
  std::vector<int> coords;                  // z_c = x[coords[c]]
  std::vector<ChiVector> grad;              // dv/dz_c
  std::vector<std::vector<ChiVector>> hess;  // d2v/dz_c dz_e
  ChiMat mean_correction = ChiMat::Zero();  // E[model v model v^dagger] - v0 v0^dagger

  // b = J z and a = J z + Q(z) / 2 for one noise draw.
  void parts(const NoiseVector& x, ChiVector& a, ChiVector& b) const {
    const std::size_t d = coords.size();
    b.setZero();
    ChiVector q = ChiVector::Zero();
    for (std::size_t c = 0; c < d; ++c) {
      const double zc = x[coords[c]];
      b += zc * grad[c];
      q += (zc * zc) * hess[c][c];
      for (std::size_t e = c + 1; e < d; ++e) q += (2.0 * zc * x[coords[e]]) * hess[c][e];
    }
    a = b + 0.5 * q;
  }

  // Second-order part of the model's v v^dagger that is removed from each sample.
  ChiMat fluctuation(const ChiVector& a, const ChiVector& b) const {
    return v0 * a.adjoint() + a * v0.adjoint() + b * b.adjoint();
  }
};

inline ChiTaylor make_chi_taylor(const ExchangeSequence& seq, const NoiseModel& model,
                                 const QaReversal& rev, double h = 1e-4) {
  auto eval = [&](const NoiseVector& x) { return chi_vector(isometry(perturb(seq, x)), rev); };
  ChiTaylor t;
  std::vector<NoiseVector> dirs;
  for (int k = 0; k < kNumSlots; ++k) {
    if (!seq.mask[k] || seq.angles[k] == 0.0) continue;
    const int c = model.correlation == NoiseCorrelation::kStatic ? k % 4 : k;
    if (std::find(t.coords.begin(), t.coords.end(), c) != t.coords.end()) continue;
    NoiseVector dir{};
    for (int j = 0; j < kNumSlots; ++j) {
      dir[j] = model.correlation == NoiseCorrelation::kStatic ? (j % 4 == c ? 1.0 : 0.0) : (j == c ? 1.0 : 0.0);
    }
    t.coords.push_back(c);
    dirs.push_back(dir);
  }
  const std::size_t d = dirs.size();
  auto at = [&](double s, std::size_t c, double r = 0.0, std::size_t e = 0) {
    NoiseVector x{};
    for (int k = 0; k < kNumSlots; ++k) x[k] = s * dirs[c][k] + r * dirs[e][k];
    return eval(x);
  };
  t.v0 = eval(NoiseVector{});
  t.grad.resize(d);
  t.hess.assign(d, std::vector<ChiVector>(d, ChiVector::Zero()));
  for (std::size_t c = 0; c < d; ++c) {
    const ChiVector plus = at(h, c), minus = at(-h, c);
    t.grad[c] = (plus - minus) / (2.0 * h);
    t.hess[c][c] = (plus - 2.0 * t.v0 + minus) / (h * h);
    for (std::size_t e = 0; e < c; ++e) {
      t.hess[c][e] = (at(h, c, h, e) - at(h, c, -h, e) - at(-h, c, h, e) + at(-h, c, -h, e)) / (4.0 * h * h);
      t.hess[e][c] = t.hess[c][e];
    }
  }
  const double var = model.sigma * model.sigma;
  for (std::size_t c = 0; c < d; ++c) {
    t.mean_correction += var * (t.grad[c] * t.grad[c].adjoint() +
                                0.5 * (t.v0 * t.hess[c][c].adjoint() + t.hess[c][c] * t.v0.adjoint()));
  }
  return t;
}

struct ChiMatrix {
  ChiMat matrix = ChiMat::Zero();
  Eigen::Matrix<double, kChiDim, kChiDim> sem = Eigen::Matrix<double, kChiDim, kChiDim>::Zero();
  std::size_t n_samples = 0;
  // Per-sample vectors. Kept so that any metric gets its own error bar.
  std::vector<ChiVector> samples;
  // Set when the Taylor control variate was applied; taylor_a/b hold its per-sample parts.
  std::optional<ChiTaylor> taylor;
  std::vector<ChiVector> taylor_a, taylor_b;

  // Entry (i, j) of sample s's contribution to the estimate.
  Cplx sample_entry(std::size_t s, int i, int j) const {
    const ChiVector& v = samples[s];
    Cplx out = v(i) * std::conj(v(j));
    if (taylor) {
      const ChiVector &a = taylor_a[s], &b = taylor_b[s], &v0 = taylor->v0;
      out -= v0(i) * std::conj(a(j)) + a(i) * std::conj(v0(j)) + b(i) * std::conj(b(j));
      out += taylor->mean_correction(i, j);
    }
    return out;
  }

  ChiMat sample_matrix(std::size_t s) const {
    const ChiVector& v = samples[s];
    if (!taylor) return v * v.adjoint();
    return v * v.adjoint() - taylor->fluctuation(taylor_a[s], taylor_b[s]) + taylor->mean_correction;
  }
};

struct ChiOptions {
  QaReversal reversal{};
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t chunk = 4096;
  bool control_variate = true;
};

namespace detail {

struct ChiPartial {
  ChiMat sum = ChiMat::Zero();

  void add(const ChiPartial& o) { sum += o.sum; }
};

// Pairwise reduction in a fixed tree order.
inline ChiPartial reduce(std::vector<ChiPartial>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  ChiPartial a = reduce(parts, lo, mid);
  a.add(reduce(parts, mid, hi));
  return a;
}

}  // namespace detail

// Chunk c draws from stream (seed, c), so the result is independent of the
// thread count.
inline ChiMatrix chi_average(const ExchangeSequence& seq, const NoiseModel& model,
                             std::size_t n_samples, std::uint64_t seed,
                             const ChiOptions& opts = {}) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  model.validate();
  seq.validate();
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk);
  const std::size_t n_chunks = (n_samples + chunk - 1) / chunk;

  ChiMatrix out;
  out.n_samples = n_samples;
  out.samples.resize(n_samples);
  if (opts.control_variate && model.sigma > 0.0) {
    out.taylor = make_chi_taylor(seq, model, opts.reversal);
    out.taylor_a.resize(n_samples);
    out.taylor_b.resize(n_samples);
  }
  std::vector<detail::ChiPartial> parts(n_chunks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      auto rng = stream_rng(seed, c);
      detail::ChiPartial& p = parts[c];
      const std::size_t end = std::min(n_samples, (c + 1) * chunk);
      for (std::size_t s = c * chunk; s < end; ++s) {
        const NoiseVector x = draw_noise(model, rng);
        const ChiVector v = chi_vector(isometry(perturb(seq, x)), opts.reversal);
        p.sum += v * v.adjoint();
        out.samples[s] = v;
        if (out.taylor) {
          out.taylor->parts(x, out.taylor_a[s], out.taylor_b[s]);
          p.sum -= out.taylor->fluctuation(out.taylor_a[s], out.taylor_b[s]);
        }
      }
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const detail::ChiPartial total = detail::reduce(parts, 0, n_chunks);
  const double n = static_cast<double>(n_samples);
  out.matrix = total.sum / n;
  if (out.taylor) out.matrix += out.taylor->mean_correction;
  if (n_samples > 1) {
    // Second pass over the stored samples; a one-pass variance leaves ~1e-9 noise at sigma = 0.
    Eigen::Matrix<double, kChiDim, kChiDim> ss = Eigen::Matrix<double, kChiDim, kChiDim>::Zero();
    for (std::size_t s = 0; s < n_samples; ++s) ss += (out.sample_matrix(s) - out.matrix).cwiseAbs2();
    out.sem = (ss / (n - 1.0) / n).cwiseSqrt();
  }
  return out;
}

// What the noisy channel is compared against: the QA basis the ideal
// sequence targets and, when it resets leakage, its reset state. A sequence
// that already keeps the ancilla in the singlet is measured without rotation,
// so eps_F stays the physical flag error.
struct IdealReference {
  QaReversal reversal;
  std::optional<ResetState> reset;
};

inline IdealReference ideal_reference(const ExchangeSequence& seq,
                                      double tolerance = kExtractionTolerance) {
  const RilIsometry iso = isometry(seq);
  IdealReference ref;
  if (f0_ril(iso, {}) > tolerance) ref.reversal = fit_reversal(iso);
  try {
    ref.reset = extract_reset_state(iso, tolerance);
  } catch (const NotASolution&) {
  }
  return ref;
}

struct Estimate {
  double value = 0.0;
  double sem = 0.0;

  double relative_sem() const { return value != 0.0 ? sem / std::abs(value) : 0.0; }
};

struct MetricSet {
  Estimate p_L_ind;
  Estimate F_e;
  Estimate F_Q;
  Estimate F_2_deficit;  // 1 - F_2, approximated as (1 - F_Q) - p_L_ind
  Estimate eps_F;
  Estimate eps_5;
  Estimate eps_8;
  Estimate eps_L_rem;
  std::optional<Estimate> eps_R;
};

namespace detail {

// Each metric is a linear functional of chi, written on a single v v^dagger.
struct MetricValues {
  double p_L_ind, F_e, F_Q, F_2_deficit, eps_F, eps_5, eps_8, eps_L_rem, eps_R;
};

template <typename Entry>
MetricValues metric_values(const Entry& chi, const std::optional<ResetState>& reset) {
  auto re = [&](int i, int j) { return chi(i, j).real(); };
  MetricValues m{};
  m.p_L_ind = (re(4, 4) + re(9, 9)) / 2.0;
  m.eps_F = (re(2, 2) + re(3, 3) + re(4, 4) + re(7, 7) + re(8, 8) + re(9, 9)) / 2.0;
  m.F_e = (re(0, 0) + re(6, 6) + 2.0 * re(0, 6) + re(2, 2) + re(8, 8) + 2.0 * re(2, 8)) / 4.0;
  m.F_Q = (2.0 * m.F_e + 1.0 - m.p_L_ind) / 3.0;
  m.F_2_deficit = (1.0 - m.F_Q) - m.p_L_ind;
  m.eps_5 = re(10, 10);
  m.eps_8 = re(13, 13);
  m.eps_L_rem = m.eps_5 + m.eps_8;
  m.eps_R = std::numeric_limits<double>::quiet_NaN();
  if (reset) {
    const Cplx a = reset->alpha, b = reset->beta;
    // psi^dagger rho psi with psi = (0, alpha, beta, 0) over labels 5..8.
    const Cplx overlap = std::conj(a) * chi(11, 11) * a + std::conj(a) * chi(11, 12) * b +
                         std::conj(b) * chi(12, 11) * a + std::conj(b) * chi(12, 12) * b;
    m.eps_R = 1.0 - overlap.real();
  }
  return m;
}

struct SampleEntry {
  const ChiMatrix& chi;
  std::size_t s;
  Cplx operator()(int i, int j) const { return chi.sample_entry(s, i, j); }
};

}  // namespace detail

// Metric values from the averaged matrix; error bars from the per-sample spread.
inline MetricSet metrics(const ChiMatrix& chi, const std::optional<ResetState>& reset = std::nullopt) {
  const detail::MetricValues mean = detail::metric_values(chi.matrix, reset);
  constexpr int kCount = 9;
  auto as_array = [](const detail::MetricValues& m) {
    return std::array<double, kCount>{m.p_L_ind, m.F_e,   m.F_Q,       m.F_2_deficit, m.eps_F,
                                      m.eps_5,   m.eps_8, m.eps_L_rem, m.eps_R};
  };
  std::array<double, kCount> sem{};
  if (chi.samples.size() > 1) {
    // Two passes: F_Q sits near 1, where the one-pass variance loses digits.
    const double n = static_cast<double>(chi.samples.size());
    std::array<double, kCount> mu{}, ss{};
    for (std::size_t s = 0; s < chi.samples.size(); ++s) {
      const auto a = as_array(detail::metric_values(detail::SampleEntry{chi, s}, reset));
      for (int i = 0; i < kCount; ++i) mu[i] += a[i] / n;
    }
    for (std::size_t s = 0; s < chi.samples.size(); ++s) {
      const auto a = as_array(detail::metric_values(detail::SampleEntry{chi, s}, reset));
      for (int i = 0; i < kCount; ++i) ss[i] += (a[i] - mu[i]) * (a[i] - mu[i]);
    }
    for (int i = 0; i < kCount; ++i) sem[i] = std::sqrt(ss[i] / (n - 1.0) / n);
  }
  MetricSet out;
  out.p_L_ind = {mean.p_L_ind, sem[0]};
  out.F_e = {mean.F_e, sem[1]};
  out.F_Q = {mean.F_Q, sem[2]};
  out.F_2_deficit = {mean.F_2_deficit, sem[3]};
  out.eps_F = {mean.eps_F, sem[4]};
  out.eps_5 = {mean.eps_5, sem[5]};
  out.eps_8 = {mean.eps_8, sem[6]};
  out.eps_L_rem = {mean.eps_L_rem, sem[7]};
  if (reset) out.eps_R = Estimate{mean.eps_R, sem[8]};
  return out;
}

inline double eps_R_value(const MetricSet& m) {
  if (!m.eps_R) throw std::invalid_argument("eps_R requested but no reset state was supplied");
  return m.eps_R->value;
}

struct SweepRow {
  double sigma = 0.0;
  MetricSet metrics;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

// Every sigma reuses the same seed, so neighbouring rows share their
// standard-normal draws and differences between rows are smooth.
inline std::vector<SweepRow> sweep(const ExchangeSequence& seq, const std::vector<double>& sigmas,
                                   std::size_t n_samples, std::uint64_t seed,
                                   NoiseCorrelation correlation = NoiseCorrelation::kStatic,
                                   const std::optional<ResetState>& reset = std::nullopt,
                                   const ChiOptions& opts = {}) {
  std::vector<SweepRow> rows;
  for (double s : sigmas) {
    const ChiMatrix chi = chi_average(seq, {s, correlation}, n_samples, seed, opts);
    rows.push_back({s, metrics(chi, reset), n_samples, seed});
  }
  return rows;
}

// --- CSV ---

inline constexpr std::array<std::string_view, 13> kCsvColumns = {
    "sigma", "p_L_ind", "sem_p_L_ind", "F_Q", "F_e", "one_minus_F2", "eps_F",
    "eps_5", "eps_8", "eps_L_rem", "eps_R", "n_samples", "seed"};

inline void write_csv_header(std::ostream& out) {
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
  out << '\n';
}

inline void write_csv_row(std::ostream& out, const SweepRow& r) {
  const auto& m = r.metrics;
  const auto old_prec = out.precision(17);
  out << r.sigma << ',' << m.p_L_ind.value << ',' << m.p_L_ind.sem << ',' << m.F_Q.value << ','
      << m.F_e.value << ',' << m.F_2_deficit.value << ',' << m.eps_F.value << ','
      << m.eps_5.value << ',' << m.eps_8.value << ',' << m.eps_L_rem.value << ','
      << (m.eps_R ? m.eps_R->value : std::numeric_limits<double>::quiet_NaN()) << ','
      << r.n_samples << ',' << r.seed << '\n';
  out.precision(old_prec);
}

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  write_csv_header(out);
  for (const auto& r : rows) write_csv_row(out, r);
}

// Reads rows written by write_csv. Columns are matched by name. Only values
// (no error bars besides sem_p_L_ind) survive the round trip.
inline std::vector<SweepRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty metrics CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto column = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("metrics CSV lacks column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::array<std::size_t, kCsvColumns.size()> idx{};
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) idx[i] = column(kCsvColumns[i]);

  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw std::runtime_error("ragged metrics CSV row: " + line);
    auto num = [&](std::size_t col) {
      const std::string& c = cells[idx[col]];
      if (c == "nan") return std::numeric_limits<double>::quiet_NaN();
      std::size_t used = 0;
      const double v = std::stod(c, &used);
      if (used != c.size()) throw std::runtime_error("bad number '" + c + "' in metrics CSV");
      return v;
    };
    SweepRow r;
    r.sigma = num(0);
    r.metrics.p_L_ind = {num(1), num(2)};
    r.metrics.F_Q = {num(3), 0.0};
    r.metrics.F_e = {num(4), 0.0};
    r.metrics.F_2_deficit = {num(5), 0.0};
    r.metrics.eps_F = {num(6), 0.0};
    r.metrics.eps_5 = {num(7), 0.0};
    r.metrics.eps_8 = {num(8), 0.0};
    r.metrics.eps_L_rem = {num(9), 0.0};
    if (const double e = num(10); !std::isnan(e)) r.metrics.eps_R = Estimate{e, 0.0};
    r.n_samples = static_cast<std::size_t>(num(11));
    r.seed = std::stoull(cells[idx[12]]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ril
