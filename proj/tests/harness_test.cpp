#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "csdcr/errors.hpp"
#include "csdcr/harness.hpp"
#include "doctest.h"

using namespace csdcr;

namespace {

SweepConfig quick_config() {
  SweepConfig c;
  c.sweep_freqs = {10e3, 20e3, 75e3, 95e3};
  c.trials_per_point = 20;
  c.pates.candidate_count = 6;
  c.pates.trials_per_candidate = 10;
  c.pates.keep_count_min = 30;
  c.pates.keep_count_max = 34;
  return c;
}

double psd_at(const std::vector<PsdRow>& rows, double f) {
  const auto it = std::min_element(rows.begin(), rows.end(), [f](const PsdRow& a, const PsdRow& b) {
    return std::abs(a.freq_hz - f) < std::abs(b.freq_hz - f);
  });
  return it->psd_db;
}

double median_db(std::vector<PsdRow> rows) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r.psd_db);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("default sweep frequencies") {
  const auto f = default_sweep_freqs();
  REQUIRE(f.size() == 19);
  CHECK(f.front() == 5e3);
  CHECK(f.back() == 95e3);
  SweepConfig c;
  c.sweep_freqs = {30e3, 10e3};
  CHECK(c.frequencies() == std::vector<double>{10e3, 30e3});
}

TEST_CASE("sweep config validation") {
  SweepConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.sweep_freqs = {200e3};
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = c;
  bad.trials_per_point = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = c;
  bad.interferer_mode = InterfererMode::co_swept;
  bad.interferer_offset = 150e3;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
  bad = c;
  bad.f_b = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("sweep scenarios follow the interferer mode") {
  SweepConfig c;
  auto s = sweep_scenario(c, 15e3);
  CHECK(s.tones[0].frequency == 15e3);
  CHECK(s.tones[1].frequency == 45e3);
  CHECK(s.tones[1].amplitude == doctest::Approx(3.16));
  CHECK_FALSE(s.tones[0].phase.has_value());
  c.interferer_mode = InterfererMode::co_swept;
  s = sweep_scenario(c, 15e3);
  CHECK(s.tones[1].frequency == 40e3);
}

TEST_CASE("designed sweep: in-band success, far out-of-band collapse") {
  const auto cfg = quick_config();
  const auto res = run_sweep(cfg);
  REQUIRE(res.selection.has_value());
  CHECK(res.pattern == res.selection->pattern);
  REQUIRE(res.rows.size() == 4);
  for (std::size_t i = 1; i < res.rows.size(); ++i)
    CHECK(res.rows[i].desired_freq_hz > res.rows[i - 1].desired_freq_hz);
  CHECK(res.rows[0].success_probability == 1.0);
  CHECK(res.rows[1].success_probability == 1.0);
  CHECK(res.rows[2].success_probability == 0.0);
  CHECK(res.rows[3].success_probability == 0.0);
  for (const auto& r : res.rows) CHECK(r.trials == cfg.trials_per_point);
}

TEST_CASE("sweep is deterministic and execution-independent") {
  auto cfg = quick_config();
  cfg.sweep_freqs = {10e3, 60e3};
  const auto p = make_random_pattern(cfg.grid, 5, 30, 2, 1);
  const auto a = run_sweep_with_pattern(cfg, p, {}, Execution::parallel);
  const auto b = run_sweep_with_pattern(cfg, p, {}, Execution::serial);
  std::ostringstream ca, cb;
  write_sweep_csv(ca, a);
  write_sweep_csv(cb, b);
  CHECK(ca.str() == cb.str());
  CHECK(ca.str().rfind(
            "desired_freq_hz,trials,successes,success_probability,mean_snr_db,mean_drop_fraction\n", 0) == 0);
  cfg.seed = 2;
  const auto c = run_sweep_with_pattern(cfg, p, {}, Execution::serial);
  std::ostringstream cc;
  write_sweep_csv(cc, c);
  CHECK(cc.str() != ca.str());
}

TEST_CASE("sweep from a pattern file") {
  const auto dir = std::filesystem::temp_directory_path() / "csdcr_harness_test";
  std::filesystem::create_directories(dir);
  auto cfg = quick_config();
  const auto p = make_random_pattern(cfg.grid, 5, 32, 2, 7);
  save_pattern(dir / "p.txt", p);
  cfg.pattern_file = dir / "p.txt";
  const auto res = run_sweep(cfg);
  CHECK_FALSE(res.selection.has_value());
  CHECK(res.pattern == p);

  save_pattern(dir / "other.txt", make_uniform_pattern(TimeGrid(400e3, 5e-3), 5));
  cfg.pattern_file = dir / "other.txt";
  CHECK_THROWS_AS(run_sweep(cfg), InvalidConfig);
  cfg.pattern_file = dir / "missing.txt";
  CHECK_THROWS_AS(run_sweep(cfg), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("psd figure: two labelled peaks") {
  SweepConfig c;
  const auto spec = sweep_scenario(c, 10e3);
  const auto rows = run_psd_figure(spec, c.grid, 3);
  const double floor = median_db(rows);
  CHECK(psd_at(rows, 10e3) > floor + 40.0);
  CHECK(psd_at(rows, 45e3) > floor + 40.0);
  CHECK(psd_at(rows, 45e3) > psd_at(rows, 10e3));
  for (const auto& r : rows) {
    if (r.freq_hz <= 20e3) CHECK(r.band_label == "desired");
    else if (r.freq_hz >= 40e3 && r.freq_hz <= 50e3) CHECK(r.band_label == "interferer");
    else CHECK(r.band_label == "none");
  }
  std::ostringstream out;
  write_psd_csv(out, rows);
  CHECK(out.str().rfind("freq_hz,psd_db,band_label\n", 0) == 0);
}

TEST_CASE("psd figure: white noise is flat, silence is floor") {
  SignalSpec noise;
  noise.noise_std = 0.5;
  const TimeGrid grid(400e3, 10e-3);
  const auto rows = run_psd_figure(noise, grid, 21);
  // Band-to-band variation: average in 10 kHz bands, excluding DC and Nyquist bins.
  std::vector<double> bands;
  for (double lo = 10e3; lo < 190e3; lo += 10e3) {
    double s = 0.0;
    int n = 0;
    for (const auto& r : rows)
      if (r.freq_hz >= lo && r.freq_hz < lo + 10e3) {
        s += std::pow(10.0, r.psd_db / 10.0);
        ++n;
      }
    bands.push_back(10.0 * std::log10(s / n));
  }
  const auto [lo, hi] = std::minmax_element(bands.begin(), bands.end());
  CHECK(*hi - *lo < 6.0);

  SignalSpec silent;
  for (const auto& r : run_psd_figure(silent, grid, 0)) CHECK(r.psd_db == kPsdFloorDb);
}
