// rilctl: verify, search and characterize reset-if-leaked exchange sequences.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ril/ril.hpp"

namespace fs = std::filesystem;
using namespace ril;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative output paths land in $RIL_OUTPUT_DIR when it is set.
std::string resolve_output(const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("RIL_OUTPUT_DIR"); dir && *dir) p = fs::path(dir) / p;
  }
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p.string();
}

std::string cplx(Cplx z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.9f%+.9fi", z.real(), z.imag());
  return buf;
}

void write_manifest(RunManifest m, const Stopwatch& clock) {
  if (m.outputs.empty()) return;
  m.wall_time_s = clock.seconds();
  write_json_file(manifest_path_for(m.outputs.front()), m.to_json());
}

SlotMask parse_mask(const std::string& text) {
  if (text == "no_flag") return mask_no_flag();
  if (text == "flaggable") return mask_flaggable();
  SlotMask m{};
  if (text == "none") return m;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int slot = 0;
    try {
      std::size_t used = 0;
      slot = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--mask: '" + item + "' is not a slot number");
    }
    if (slot < 1 || slot > kNumSlots) throw UsageError("--mask: slot " + item + " out of range 1..20");
    m[slot - 1] = true;
  }
  return m;
}

std::vector<double> parse_sigma_range(const std::string& text) {
  double lo = 0, hi = 0;
  int n = 0;
  char c1 = 0, c2 = 0;
  std::stringstream ss(text);
  if (!(ss >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || !(ss >> std::ws).eof()) {
    throw UsageError("--sigma-range expects lo:hi:count, got '" + text + "'");
  }
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return out;
}

// --- verify ---

struct VerifyArgs {
  std::string sequence;
  bool flaggable = false;
  std::string gate = "identity";
  double threshold = -1.0;
  std::string out;
};

int cmd_verify(const VerifyArgs& a, RunManifest manifest, const Stopwatch& clock) {
  const SequenceFile file = load_sequence(a.sequence);
  const ExchangeSequence& seq = file.record.sequence;
  const RilSpec spec{a.flaggable, parse_gate_constraint(a.gate)};
  const double threshold =
      a.threshold > 0.0 ? a.threshold : file.record.verify_threshold.value_or(kSolutionThreshold);

  const RilIsometry iso = isometry(seq);
  const QaReversal rev = spec.flaggable ? QaReversal{} : file.reversal.value_or(fit_reversal(iso));
  const double f0 = f0_ril(iso, rev);
  const double total = f_total(iso, rev, spec);
  const bool pass = total < threshold;

  json report;
  report["sequence"] = file.record.name;
  report["flaggable"] = spec.flaggable;
  report["gate"] = to_string(spec.gate);
  report["threshold"] = threshold;
  report["reversal"] = reversal_to_json(rev);
  report["f0"] = f0;
  report["f_total"] = total;

  std::printf("sequence      %s (%d active slots)\n", file.record.name.c_str(), seq.active_count());
  std::printf("QA reversal   phi = %.9f pi, gamma = %.9f pi%s\n", rev.phi / kPi, rev.gamma / kPi,
              spec.flaggable ? " (pinned)" : "");
  std::printf("isometry dev  %.3e\n", iso.isometry_deviation());
  const HalfColumns h = apply_reversal(iso.half, rev);
  std::printf("f0            %.6e  (J=1/2 rows 2..4: %.3e, |5>: %.3e, |8>: %.3e)\n", f0,
              h.bottomRows<3>().squaredNorm(), std::norm(iso.threehalf(0)),
              std::norm(iso.threehalf(3)));
  json per_gate;
  for (GateConstraint g : {GateConstraint::kNone, GateConstraint::kIdentity, GateConstraint::kPauli,
                           GateConstraint::kClifford}) {
    const double v = f_total(iso, rev, {spec.flaggable, g});
    per_gate[to_string(g)] = v;
    std::printf("f_total %-9s %.6e%s\n", to_string(g).c_str(), v, g == spec.gate ? "  <-" : "");
  }
  report["f_total_by_gate"] = per_gate;

  try {
    const Mat2 uq = extract_qubit_gate(iso, rev, std::max(threshold, kConvergenceThreshold));
    std::printf("U_Q           [[%s, %s], [%s, %s]]\n", cplx(uq(0, 0)).c_str(), cplx(uq(0, 1)).c_str(),
                cplx(uq(1, 0)).c_str(), cplx(uq(1, 1)).c_str());
    std::printf("gate distance %.3e (from identity, up to phase)\n", identity_distance(uq));
    report["gate_distance"] = identity_distance(uq);
  } catch (const NotASolution& e) {
    std::printf("U_Q           n/a: %s\n", e.what());
  }
  try {
    const ResetState r = extract_reset_state(iso);
    const ResetState l = r.in_listing_basis();
    std::printf("reset state   alpha = %s, beta = %s\n", cplx(r.alpha).c_str(), cplx(r.beta).c_str());
    std::printf("              theta = %.9f pi, phi = %.9f pi\n", r.theta_bloch / kPi, r.phi_bloch / kPi);
    std::printf("  (listing)   alpha = %s, beta = %s, phi = %.9f pi\n", cplx(l.alpha).c_str(),
                cplx(l.beta).c_str(), l.phi_bloch / kPi);
    report["reset"] = {{"alpha", {r.alpha.real(), r.alpha.imag()}},
                       {"beta", {r.beta.real(), r.beta.imag()}},
                       {"theta_bloch_pi", r.theta_bloch / kPi},
                       {"phi_bloch_pi", r.phi_bloch / kPi}};
  } catch (const NotASolution& e) {
    std::printf("reset state   n/a: %s\n", e.what());
  }
  std::printf("%s (f_total %.3e %s threshold %.1e)\n", pass ? "PASS" : "FAIL", total,
              pass ? "<" : ">=", threshold);
  report["pass"] = pass;

  if (!a.out.empty()) {
    const std::string out = resolve_output(a.out);
    report["manifest"] = manifest_path_for(out);
    write_json_file(out, report);
    manifest.outputs.push_back(out);
    write_manifest(manifest, clock);
  }
  return pass ? kExitOk : kExitFail;
}

// --- search ---

struct SearchArgs {
  std::string mask = "no_flag";
  bool flaggable = false;
  std::string gate = "identity";
  int seeds = 20;
  double threshold = 1e-9;
  int iterations = 100;
  double temperature = 1e-5;
  double stepsize = kTwoPi;
  int interval = 50;
  unsigned threads = 0;
  bool stop_on_first = false;
  int census = 0;
  std::string out = "catalog.json";
};

int cmd_search(const SearchArgs& a, std::uint64_t seed, RunManifest manifest, const Stopwatch& clock) {
  SearchConfig cfg;
  cfg.mask = parse_mask(a.mask);
  cfg.spec = {a.flaggable, parse_gate_constraint(a.gate)};
  cfg.max_restarts = a.seeds;
  cfg.success_threshold = a.threshold;
  cfg.iterations = a.iterations;
  cfg.temperature = a.temperature;
  cfg.stepsize = a.stepsize;
  cfg.interval = a.interval;
  cfg.seed = seed;
  cfg.validate();

  const std::string out = resolve_output(a.out);
  std::vector<SolutionRecord> records;
  if (a.census > 0) {
    const std::string checkpoint = out + ".checkpoint.json";
    std::fprintf(stderr, "census: %d runs, checkpoint %s\n", a.census, checkpoint.c_str());
    const CensusState st = run_census(cfg, checkpoint, a.census, 4, [&](const CensusState& s) {
      std::fprintf(stderr, "census: %d/%d runs, %zu distinct solutions\n", s.next_run, a.census,
                   s.records.size());
    });
    records = st.records;
  } else {
    SearchOptions opts;
    opts.threads = a.threads;
    opts.stop_on_first_success = a.stop_on_first;
    opts.on_run_done = [](const RunStats& s) {
      std::fprintf(stderr,
                   "run %3d: accepted %d/%d hops, stepsize %.3f, best f %.3e, %d solution(s), %ld evals\n",
                   s.run, s.accepted, s.hops, s.final_stepsize, s.best_f, s.solutions, s.evaluations);
    };
    records = run_search(cfg, opts).records;
  }

  json cat = catalog_to_json(records);
  cat["manifest"] = manifest_path_for(out);
  write_json_file(out, cat);
  std::printf("%zu distinct solution(s) written to %s\n", records.size(), out.c_str());
  for (const auto& r : records) {
    std::printf("  f = %.3e  theta_R = %.6f pi  phi_R = %.6f pi  gate distance %.2e  (run %d, hop %d)\n",
                r.f_total, r.reset.theta_bloch / kPi, r.reset.phi_bloch / kPi, r.gate_distance, r.run,
                r.iteration);
  }
  manifest.outputs.push_back(out);
  write_manifest(manifest, clock);
  return kExitOk;
}

// --- noise ---

struct NoiseArgs {
  std::string sequence = "no_flag";
  std::vector<double> sigma;
  std::string sigma_range;
  std::size_t samples = 100000;
  std::string model = "static";
  unsigned threads = 0;
  bool plain = false;
  std::string out;
};

int cmd_noise(const NoiseArgs& a, std::uint64_t seed, RunManifest manifest, const Stopwatch& clock) {
  const SequenceFile file = load_sequence(a.sequence);
  std::vector<double> sigmas = a.sigma;
  if (!a.sigma_range.empty()) {
    const auto r = parse_sigma_range(a.sigma_range);
    sigmas.insert(sigmas.end(), r.begin(), r.end());
  }
  if (sigmas.empty()) throw UsageError("noise: give --sigma and/or --sigma-range");
  if (a.samples < 1) throw UsageError("noise: --samples must be >= 1");
  const NoiseCorrelation corr = parse_noise_correlation(a.model);

  const IdealReference ref = ideal_reference(file.record.sequence);
  if (!ref.reset) std::fprintf(stderr, "note: sequence does not reset leakage, eps_R left empty\n");
  ChiOptions opts;
  opts.reversal = ref.reversal;
  opts.threads = a.threads;
  opts.control_variate = !a.plain;

  const std::string out = resolve_output(a.out.empty() ? "noise_" + file.record.name + ".csv" : a.out);
  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot write " + out);
  write_csv_header(csv);
  for (double s : sigmas) {
    const auto rows = sweep(file.record.sequence, {s}, a.samples, seed, corr, ref.reset, opts);
    write_csv_row(csv, rows.front());
    const MetricSet& m = rows.front().metrics;
    std::printf("sigma %.5f  p_L_ind %.4e  1-F_Q %.4e  eps_F %.4e  eps_L_rem %.4e  eps_R %.4e\n", s,
                m.p_L_ind.value, 1.0 - m.F_Q.value, m.eps_F.value, m.eps_L_rem.value,
                m.eps_R ? m.eps_R->value : std::nan(""));
  }
  csv.close();
  std::printf("wrote %s\n", out.c_str());
  manifest.outputs.push_back(out);
  write_manifest(manifest, clock);
  return kExitOk;
}

// --- flag ---

struct FlagArgs {
  FlagParams flag;
  std::string metrics_file;
  int row = 0;
  ChannelErrors errors;
};

int cmd_flag(const FlagArgs& a) {
  ChannelErrors e = a.errors;
  if (!a.metrics_file.empty()) {
    std::ifstream in(a.metrics_file);
    if (!in) throw UsageError("cannot open " + a.metrics_file);
    const auto rows = read_csv(in);
    if (a.row < 0 || a.row >= static_cast<int>(rows.size())) {
      throw UsageError("--row " + std::to_string(a.row) + " out of range (file has " +
                       std::to_string(rows.size()) + " rows)");
    }
    e = ChannelErrors::from(rows[a.row].metrics);
    std::printf("metrics from %s row %d (sigma %.5f)\n", a.metrics_file.c_str(), a.row, rows[a.row].sigma);
  }
  std::printf("eps_L %.4e  eps_1S %.4e  eps_0T %.4e\n", a.flag.eps_L, a.flag.eps_1S, a.flag.eps_0T);
  std::printf("p_L_ind %.4e  eps_F %.4e  eps_5 %.4e  eps_8 %.4e\n", e.p_L_ind, e.eps_F, e.eps_5, e.eps_8);

  const FlagEstimate g0 = wrong_guess_given_0(a.flag, e);
  const FlagEstimate g1 = wrong_guess_given_1(a.flag, e);
  const JointFlagTable t = joint_flag_table(a.flag, e);
  if (!g0.small_parameters) std::fprintf(stderr, "warning: inputs above 0.1, leading order unreliable\n");
  std::printf("\n%-34s %-14s %s\n", "", "leading order", "exact");
  std::printf("%-34s %-14.6e %.6e\n", "P(wrong guess | flag 0)", g0.value, t.wrong_given_0());
  std::printf("%-34s %-14.6e %.6e%s\n", "P(wrong guess | flag 1)", g1.value, t.wrong_given_1(),
              g1.defined ? "" : "  (undefined: no flag-1 events, reported as 0)");
  std::printf("\nP(F, O, I)            I=U            I=L\n");
  for (int f = 0; f < 2; ++f) {
    for (Occupancy o : {Occupancy::kUnleaked, Occupancy::kLeaked}) {
      std::printf("F=%d O=%s          %.6e   %.6e\n", f, o == Occupancy::kUnleaked ? "U" : "L",
                  t.joint(f, o, Occupancy::kUnleaked), t.joint(f, o, Occupancy::kLeaked));
    }
  }
  std::printf("P(0_M) = %.12f  P(1_M) = %.12f  sum = %.15f\n", t.flag_probability(0), t.flag_probability(1),
              t.total());
  return kExitOk;
}

int cmd_gauge(double eta) {
  const GaugeStationary s = gauge_stationary({eta});
  std::printf("eta               %.6g\n", eta);
  std::printf("p_down, p_up      %.15f  %.15f\n", s.p_down, s.p_up);
  std::printf("decay eigenvalue  %.15f\n", s.decay_eigenvalue);
  std::printf("coherence weight  %.15f  (3 eta / 4 = %.15f)\n", s.coherence_weight, 0.75 * eta);
  return kExitOk;
}

int cmd_oracle_check(std::uint64_t seed, int count) {
  auto rng = stream_rng(seed, 0);
  std::uniform_real_distribution<double> angle(-kTwoPi, kTwoPi);
  std::uniform_int_distribution<int> pick(0, 3);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const Link link = kAllLinks[pick(rng)];
    const double theta = angle(rng);
    const BlockUnitary blocks = block_exchange(link, theta);
    const BlockUnitary ref = oracle_blocks(link, theta);
    worst = std::max({worst, max_abs(blocks.half - ref.half), max_abs(blocks.threehalf - ref.threehalf)});
  }
  const bool ok = worst < 1e-12;
  std::printf("%d random (link, angle) comparisons, max deviation %.3e: %s\n", count, worst,
              ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitFail;
}

int run(std::vector<std::string> args);

int cmd_rerun(const std::string& path) {
  const RunManifest m = RunManifest::from_json(read_json_file(path));
  if (m.argv.empty()) throw UsageError("manifest has no argv");
  std::vector<std::string> args(m.argv.begin(), m.argv.end());
  std::fprintf(stderr, "rerunning:");
  for (const auto& s : args) std::fprintf(stderr, " %s", s.c_str());
  std::fprintf(stderr, "\n");
  return run(args);
}

int run(std::vector<std::string> args) {
  CLI::App app{"Reset-if-leaked exchange sequences: verification, search and noise analysis", "rilctl"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check a bundled sequence or a sequence file");
  verify->add_option("sequence", va.sequence, "no_flag | best_flag | worst_flag | path.json")->required();
  verify->add_flag("--flaggable", va.flaggable, "Pin the QA reversal to (0, 0)");
  verify->add_option("--gate", va.gate, "none | identity | pauli | clifford")->capture_default_str();
  verify->add_option("--threshold", va.threshold, "f_total threshold (default: per sequence, else 1e-9)");
  verify->add_option("--out", va.out, "Write a JSON report");

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "Basin-hopping search for new sequences");
  search->add_option("--mask", sa.mask, "no_flag | flaggable | none | comma-separated slots")
      ->capture_default_str();
  search->add_flag("--flaggable", sa.flaggable, "Pin the QA reversal to (0, 0)");
  search->add_option("--gate", sa.gate, "none | identity | pauli | clifford")->capture_default_str();
  search->add_option("--seeds", sa.seeds, "Independent seeded restarts")->capture_default_str();
  search->add_option("--threshold", sa.threshold, "Success threshold on f_total")->capture_default_str();
  search->add_option("--iterations", sa.iterations, "Hops per restart")->capture_default_str();
  search->add_option("--temperature", sa.temperature, "Metropolis temperature")->capture_default_str();
  search->add_option("--stepsize", sa.stepsize, "Initial hop size (radians)")->capture_default_str();
  search->add_option("--interval", sa.interval, "Stepsize adaptation interval")->capture_default_str();
  search->add_option("--threads", sa.threads, "Worker threads (0: all cores)");
  search->add_flag("--stop-on-first", sa.stop_on_first, "Stop after the first restart that succeeds");
  search->add_option("--census", sa.census, "Census mode: number of restarts, checkpointed");
  search->add_option("--out", sa.out, "Catalog file")->capture_default_str();

  NoiseArgs na;
  auto* noise = app.add_subcommand("noise", "Monte-Carlo noise characterization");
  noise->add_option("--sequence", na.sequence, "Bundled name or sequence file")->capture_default_str();
  noise->add_option("--sigma", na.sigma, "Noise strength(s)");
  noise->add_option("--sigma-range", na.sigma_range, "lo:hi:count");
  noise->add_option("--samples", na.samples, "Samples per sigma")->capture_default_str();
  noise->add_option("--model", na.model, "static | markovian")->capture_default_str();
  noise->add_option("--threads", na.threads, "Worker threads (0: all cores)");
  noise->add_flag("--plain", na.plain, "Plain sample average, without the Taylor control variate");
  noise->add_option("--out", na.out, "CSV file (default noise_<sequence>.csv)");

  FlagArgs fa;
  auto* flag = app.add_subcommand("flag", "Flag reliability from channel errors");
  flag->add_option("--eps-L", fa.flag.eps_L, "Prior leakage probability")->required();
  flag->add_option("--eps-1S", fa.flag.eps_1S, "P(flag 1 | singlet)")->required();
  flag->add_option("--eps-0T", fa.flag.eps_0T, "P(flag 0 | triplet)")->required();
  auto* mf = flag->add_option("--metrics-file", fa.metrics_file, "CSV written by `noise`");
  flag->add_option("--row", fa.row, "Row of the metrics file")->capture_default_str();
  flag->add_option("--p-L-ind", fa.errors.p_L_ind)->excludes(mf);
  flag->add_option("--eps-F", fa.errors.eps_F)->excludes(mf);
  flag->add_option("--eps-5", fa.errors.eps_5)->excludes(mf);
  flag->add_option("--eps-8", fa.errors.eps_8)->excludes(mf);

  double eta = 0.0;
  auto* gauge = app.add_subcommand("gauge", "Stationary gauge under pumping and relaxation");
  gauge->add_option("--eta", eta, "Relaxation probability per cycle")->required();

  int count = 200;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare block exchanges to the 32-dim construction");
  oracle_cmd->add_option("--count", count, "Number of random comparisons")->capture_default_str();

  std::string manifest_path;
  auto* rerun = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  rerun->add_option("manifest", manifest_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.argv = args;
  manifest.seed = seed;
  const Stopwatch clock;
  try {
    if (*verify) {
      manifest.command = "verify";
      manifest.config = {{"sequence", va.sequence}, {"flaggable", va.flaggable}, {"gate", va.gate},
                         {"threshold", va.threshold}};
      return cmd_verify(va, manifest, clock);
    }
    if (*search) {
      manifest.command = "search";
      manifest.config = {{"mask", sa.mask},         {"flaggable", sa.flaggable},   {"gate", sa.gate},
                         {"seeds", sa.seeds},       {"threshold", sa.threshold},   {"iterations", sa.iterations},
                         {"temperature", sa.temperature}, {"stepsize", sa.stepsize}, {"interval", sa.interval},
                         {"census", sa.census},     {"stop_on_first", sa.stop_on_first}};
      return cmd_search(sa, seed, manifest, clock);
    }
    if (*noise) {
      manifest.command = "noise";
      manifest.config = {{"sequence", na.sequence}, {"sigma", na.sigma}, {"sigma_range", na.sigma_range},
                         {"samples", na.samples},   {"model", na.model},
                         {"plain", na.plain}};
      return cmd_noise(na, seed, manifest, clock);
    }
    if (*flag) return cmd_flag(fa);
    if (*gauge) return cmd_gauge(eta);
    if (*oracle_cmd) return cmd_oracle_check(seed, count);
    if (*rerun) return cmd_rerun(manifest_path);
  } catch (const std::exception& e) {
    // Bad values, unreadable files and inconsistent inputs all land here.
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
