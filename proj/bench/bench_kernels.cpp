// Serial reference versus OpenMP timings for the filter and tone kernels, a
// batch of Monte Carlo trials, and a short sweep. Each pair is also checked
// for bit-identical output.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <omp.h>

#include "csdcr/frontend.hpp"
#include "csdcr/harness.hpp"
#include "csdcr/kernels.hpp"
#include "csdcr/pates.hpp"

using namespace csdcr;

namespace {

double best_of(int reps, const std::function<void()>& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s serial %10.3f ms   openmp %10.3f ms   speedup %5.2fx   identical %s\n", name,
              serial * 1e3, parallel * 1e3, serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main() {
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> x(1 << 18);
  for (double& v : x) v = g(rng);
  const auto taps = design_lowpass(20e3, 400e3, 32);

  std::vector<double> a, b;
  const double fs = best_of(5, [&] { a = kernels::fir_circular_serial(x, taps); });
  const double fp = best_of(5, [&] { b = kernels::fir_circular(x, taps); });
  row("fir_circular (262144 x 65)", fs, fp, a == b);

  const double zs = best_of(5, [&] { a = kernels::fir_zero_padded_serial(x, taps); });
  const double zp = best_of(5, [&] { b = kernels::fir_zero_padded(x, taps); });
  row("fir_zero_padded", zs, zp, a == b);

  const double ts = best_of(5, [&] {
    a.assign(x.size(), 0.0);
    kernels::add_tone_serial(a, 1.0, 0.1, 0.3);
  });
  const double tp = best_of(5, [&] {
    b.assign(x.size(), 0.0);
    kernels::add_tone(b, 1.0, 0.1, 0.3);
  });
  row("add_tone", ts, tp, a == b);

  DesignBrief brief;
  const auto pattern = make_random_pattern(brief.grid, 5, 24, 2, 7);
  std::vector<TrialJob> jobs;
  for (std::size_t t = 0; t < 400; ++t) jobs.push_back({&pattern, {}, derive_seed(3, {t})});
  std::vector<TrialOutcome> os, op;
  const double rs = best_of(2, [&] { os = run_trials(jobs, brief, {}, {}, Execution::serial); });
  const double rp = best_of(2, [&] { op = run_trials(jobs, brief, {}, {}, Execution::parallel); });
  bool same = os.size() == op.size();
  for (std::size_t i = 0; same && i < os.size(); ++i) same = os[i].snr_db == op[i].snr_db;
  row("run_trials (400 trials)", rs, rp, same);

  SweepConfig cfg;
  cfg.trials_per_point = 50;
  SweepResult ss{{}, pattern, {}, std::nullopt}, sp = ss;
  const double ws = best_of(2, [&] { ss = run_sweep_with_pattern(cfg, pattern, {}, Execution::serial); });
  const double wp = best_of(2, [&] { sp = run_sweep_with_pattern(cfg, pattern, {}, Execution::parallel); });
  same = ss.rows.size() == sp.rows.size();
  for (std::size_t i = 0; same && i < ss.rows.size(); ++i)
    same = ss.rows[i].mean_snr_db == sp.rows[i].mean_snr_db && ss.rows[i].successes == sp.rows[i].successes;
  row("sweep (19 x 50 trials)", ws, wp, same);
  return 0;
}
