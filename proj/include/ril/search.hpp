#pragma once

// Basin-hopping search for reset-if-leaked sequences.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ril/exchange_kernel.hpp"
#include "ril/objective.hpp"
#include "ril/optimize.hpp"
#include "ril/rng.hpp"
#include "ril/sequence_io.hpp"
#include "ril/sequences.hpp"

namespace ril {

struct SearchConfig {
  double temperature = 1e-5;
  double stepsize = kTwoPi;
  int iterations = 100;
  int interval = 50;
  SlotMask mask = mask_no_flag();
  RilSpec spec{};
  std::uint64_t seed = 0;
  double success_threshold = kSolutionThreshold;
  int max_restarts = 20;
  // Stepsize adaptation, as in the usual basin-hopping implementation.
  double target_accept_rate = 0.5;
  double stepsize_factor = 0.9;
  LocalOptions local{};

  void validate() const {
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (!(stepsize > 0.0)) throw std::invalid_argument("stepsize must be > 0");
    if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
    if (interval < 1) throw std::invalid_argument("interval must be >= 1");
    if (!(success_threshold > 0.0)) throw std::invalid_argument("success_threshold must be > 0");
    if (max_restarts < 0) throw std::invalid_argument("max_restarts must be >= 0");
    if (!(stepsize_factor > 0.0 && stepsize_factor < 1.0)) {
      throw std::invalid_argument("stepsize_factor must be in (0, 1)");
    }
    if (mask[kPlaceholderSlot - 1]) {
      throw std::invalid_argument("mask activates slot 19, which is a placeholder");
    }
  }
};

struct SolutionRecord {
  ExchangeSequence sequence;  // angles in [0, 2pi)
  bool flaggable = false;
  QaReversal reversal;  // (0, 0) when flaggable
  GateConstraint gate = GateConstraint::kIdentity;
  double f_total = 0.0;
  ResetState reset;
  double gate_distance = 0.0;  // phase-free distance of U_Q from the identity
  std::uint64_t seed = 0;
  int run = 0;
  int iteration = 0;

  RilSpec spec() const { return {flaggable, gate}; }
};

// Maps the free parameters (active angles, then phi and gamma when
// unflaggable) onto a sequence.
class SearchProblem {
 public:
  SearchProblem(const SlotMask& mask, const RilSpec& spec) : mask_(mask), spec_(spec) {
    for (int k = 0; k < kNumSlots; ++k) {
      if (mask[k]) slots_.push_back(k);
    }
  }

  int dimension() const { return static_cast<int>(slots_.size()) + (spec_.flaggable ? 0 : 2); }
  const RilSpec& spec() const { return spec_; }

  ExchangeSequence sequence(std::span<const double> x) const {
    ExchangeSequence s;
    s.mask = mask_;
    for (std::size_t i = 0; i < slots_.size(); ++i) s.angles[slots_[i]] = x[i];
    return s;
  }

  QaReversal reversal(std::span<const double> x) const {
    if (spec_.flaggable) return {};
    return {x[slots_.size()], x[slots_.size() + 1]};
  }

  double operator()(std::span<const double> x) const {
    return f_total(isometry(sequence(x)), reversal(x), spec_);
  }

 private:
  SlotMask mask_;
  RilSpec spec_;
  std::vector<int> slots_;
};

// Normalizes a candidate to its stored form and keeps it only if it still
// meets the threshold there.
inline std::optional<SolutionRecord> make_record(const SearchProblem& problem,
                                                 std::span<const double> x, double threshold) {
  SolutionRecord r;
  r.sequence = problem.sequence(x);
  for (int k = 0; k < kNumSlots; ++k) {
    if (r.sequence.mask[k]) r.sequence.angles[k] = storable_angle(r.sequence.angles[k]);
  }
  r.flaggable = problem.spec().flaggable;
  r.gate = problem.spec().gate;
  const QaReversal rev = problem.reversal(x);
  r.reversal = {storable_angle(rev.phi), storable_angle(rev.gamma)};
  const RilIsometry iso = isometry(r.sequence);
  r.f_total = f_total(iso, r.reversal, problem.spec());
  if (!(r.f_total <= threshold)) return std::nullopt;
  r.reset = extract_reset_state(iso);
  r.gate_distance = identity_distance(extract_qubit_gate(iso, r.reversal, threshold));
  return r;
}

inline double reverify(const SolutionRecord& r) {
  return f_total(isometry(r.sequence), r.reversal, r.spec());
}

// Equivalent records: same mask, every active angle within tol on the circle
// and reset states within tol on the Bloch sphere.
inline bool equivalent(const SolutionRecord& a, const SolutionRecord& b, double tol = 1e-6) {
  if (a.sequence.mask != b.sequence.mask) return false;
  for (int k = 0; k < kNumSlots; ++k) {
    if (circular_difference(a.sequence.angles[k], b.sequence.angles[k]) >= tol) return false;
  }
  return bloch_distance(a.reset, b.reset) < tol;
}

// Keeps the lowest-f member of each equivalence class, sorted by f. Input
// order does not matter.
inline std::vector<SolutionRecord> dedup(std::vector<SolutionRecord> records, double tol = 1e-6) {
  std::sort(records.begin(), records.end(), [](const SolutionRecord& a, const SolutionRecord& b) {
    if (a.f_total != b.f_total) return a.f_total < b.f_total;
    if (a.sequence.angles != b.sequence.angles) return a.sequence.angles < b.sequence.angles;
    if (a.run != b.run) return a.run < b.run;
    return a.iteration < b.iteration;
  });
  std::vector<SolutionRecord> kept;
  for (auto& r : records) {
    const bool dup = std::any_of(kept.begin(), kept.end(),
                                 [&](const SolutionRecord& k) { return equivalent(k, r, tol); });
    if (!dup) kept.push_back(std::move(r));
  }
  return kept;
}

struct RunStats {
  int run = 0;
  int hops = 0;
  int accepted = 0;
  double final_stepsize = 0.0;
  double best_f = 0.0;
  long evaluations = 0;
  int solutions = 0;  // distinct records from this run
};

struct RunResult {
  std::vector<SolutionRecord> records;
  RunStats stats;
};

// One seeded basin-hopping chain.
inline RunResult basin_hop(const SearchConfig& cfg, int run) {
  cfg.validate();
  const SearchProblem problem(cfg.mask, cfg.spec);
  const Objective objective = [&problem](std::span<const double> x) { return problem(x); };
  auto rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(run));
  std::uniform_real_distribution<double> start(0.0, kTwoPi), unit(0.0, 1.0);

  RunResult out;
  out.stats.run = run;
  const int n = problem.dimension();
  std::vector<double> x0(n);
  for (auto& v : x0) v = start(rng);

  auto consider = [&](const LocalResult& res, int iteration) {
    out.stats.evaluations += res.evaluations;
    if (res.f > cfg.success_threshold) return;
    if (auto rec = make_record(problem, res.x, cfg.success_threshold)) {
      rec->seed = cfg.seed;
      rec->run = run;
      rec->iteration = iteration;
      out.records.push_back(std::move(*rec));
    }
  };

  LocalResult current = local_minimize(objective, x0, cfg.local);
  consider(current, 0);
  double step = cfg.stepsize;
  double best = current.f;
  for (int i = 1; i <= cfg.iterations; ++i) {
    std::uniform_real_distribution<double> jitter(-step, step);
    std::vector<double> trial = current.x;
    for (auto& v : trial) v += jitter(rng);
    LocalResult res = local_minimize(objective, trial, cfg.local);
    consider(res, i);
    best = std::min(best, res.f);
    bool accept = res.f < current.f;
    if (!accept) {
      const double u = unit(rng);
      accept = cfg.temperature > 0.0 && u <= std::exp(-(res.f - current.f) / cfg.temperature);
    }
    if (accept) {
      current = std::move(res);
      ++out.stats.accepted;
    }
    if (i % cfg.interval == 0) {
      const double rate = static_cast<double>(out.stats.accepted) / i;
      step = rate > cfg.target_accept_rate ? step / cfg.stepsize_factor : step * cfg.stepsize_factor;
    }
  }
  out.stats.hops = cfg.iterations;
  out.stats.final_stepsize = step;
  out.stats.best_f = best;
  out.records = dedup(std::move(out.records));
  out.stats.solutions = static_cast<int>(out.records.size());
  return out;
}

struct SearchResult {
  std::vector<SolutionRecord> records;  // deduplicated across runs
  std::vector<RunStats> runs;           // in run order
};

struct SearchOptions {
  int first_run = 0;
  int n_runs = -1;  // -1: cfg.max_restarts
  unsigned threads = 0;  // 0: hardware concurrency
  // Drop every run after the first one that produced a record. The kept
  // prefix does not depend on the thread count.
  bool stop_on_first_success = false;
  std::function<void(const RunStats&)> on_run_done;
};

inline SearchResult run_search(const SearchConfig& cfg, const SearchOptions& opts = {}) {
  cfg.validate();
  const int n_runs = opts.n_runs < 0 ? cfg.max_restarts : opts.n_runs;
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max(1, n_runs));

  std::vector<std::optional<RunResult>> results(n_runs);
  std::atomic<int> next{0};
  std::atomic<int> first_success{n_runs};
  std::mutex report_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_runs) return;
      if (opts.stop_on_first_success && i > first_success.load()) return;
      try {
        RunResult r = basin_hop(cfg, opts.first_run + i);
        if (!r.records.empty()) {
          int cur = first_success.load();
          while (i < cur && !first_success.compare_exchange_weak(cur, i)) {
          }
        }
        std::lock_guard lock(report_mutex);
        if (opts.on_run_done) opts.on_run_done(r.stats);
        results[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(report_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_runs);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  const int last = opts.stop_on_first_success ? std::min(n_runs - 1, first_success.load()) : n_runs - 1;
  SearchResult out;
  std::vector<SolutionRecord> all;
  for (int i = 0; i <= last; ++i) {
    out.runs.push_back(results[i]->stats);
    all.insert(all.end(), results[i]->records.begin(), results[i]->records.end());
  }
  out.records = dedup(std::move(all));
  return out;
}

// --- catalog persistence ---

inline json record_to_json(const SolutionRecord& r) {
  json j = sequence_to_json(r.sequence);
  j["flaggable"] = r.flaggable;
  j["gate"] = to_string(r.gate);
  if (!r.flaggable) j["reversal"] = reversal_to_json(r.reversal);
  j["f_total"] = r.f_total;
  j["reset"] = {{"alpha", {r.reset.alpha.real(), r.reset.alpha.imag()}},
                {"beta", {r.reset.beta.real(), r.reset.beta.imag()}},
                {"theta_bloch_pi", r.reset.theta_bloch / kPi},
                {"phi_bloch_pi", r.reset.phi_bloch / kPi}};
  j["gate_distance"] = r.gate_distance;
  j["seed"] = r.seed;
  j["run"] = r.run;
  j["iteration"] = r.iteration;
  return j;
}

inline SolutionRecord record_from_json(const json& j) {
  try {
    SolutionRecord r;
    r.sequence = sequence_from_json(j);
    r.flaggable = j.at("flaggable").get<bool>();
    r.gate = parse_gate_constraint(j.at("gate").get<std::string>());
    if (!r.flaggable) r.reversal = reversal_from_json(j.at("reversal"));
    r.f_total = j.at("f_total").get<double>();
    const auto& a = j.at("reset").at("alpha");
    const auto& b = j.at("reset").at("beta");
    r.reset = ResetState::from_amplitudes({a[0].get<double>(), a[1].get<double>()},
                                          {b[0].get<double>(), b[1].get<double>()});
    r.gate_distance = j.at("gate_distance").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.run = j.at("run").get<int>();
    r.iteration = j.at("iteration").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad solution record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("bad solution record: ") + e.what());
  }
}

inline json catalog_to_json(const std::vector<SolutionRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(record_to_json(r));
  return {{"format", "ril-catalog"}, {"version", 1}, {"records", arr}};
}

inline std::vector<SolutionRecord> catalog_from_json(const json& j) {
  if (j.value("format", std::string()) != "ril-catalog") throw ParseError("not a ril-catalog file");
  std::vector<SolutionRecord> out;
  for (const auto& r : j.at("records")) out.push_back(record_from_json(r));
  return out;
}

// --- census ---

struct CensusState {
  int next_run = 0;
  std::vector<SolutionRecord> records;
};

inline json census_to_json(const CensusState& s) {
  json j = catalog_to_json(s.records);
  j["next_run"] = s.next_run;
  return j;
}

// Runs chains first_run, first_run+1, ... until `target_runs` have been done,
// writing the deduplicated catalog to `checkpoint` after every batch. An
// existing checkpoint is resumed.
inline CensusState run_census(const SearchConfig& cfg, const std::string& checkpoint,
                              int target_runs, int batch = 4,
                              const std::function<void(const CensusState&)>& progress = {}) {
  CensusState st;
  if (std::filesystem::exists(checkpoint)) {
    const json j = read_json_file(checkpoint);
    st.records = catalog_from_json(j);
    st.next_run = j.at("next_run").get<int>();
  }
  while (st.next_run < target_runs) {
    SearchOptions opts;
    opts.first_run = st.next_run;
    opts.n_runs = std::min(batch, target_runs - st.next_run);
    SearchResult res = run_search(cfg, opts);
    st.records.insert(st.records.end(), res.records.begin(), res.records.end());
    st.records = dedup(std::move(st.records));
    st.next_run += opts.n_runs;
    write_json_file(checkpoint, census_to_json(st));
    if (progress) progress(st);
  }
  return st;
}

}  // namespace ril
