#include <filesystem>
#include <fstream>
#include <string>

#include "csdcr/config.hpp"
#include "csdcr/errors.hpp"
#include "doctest.h"

using namespace csdcr;

TEST_CASE("empty document gives the defaults") {
  const auto c = parse_config("{}");
  const auto& s = c.sweep;
  CHECK(s.grid == TimeGrid(400e3, 10e-3));
  CHECK(s.f_b == 20e3);
  CHECK(s.frequencies() == default_sweep_freqs());
  CHECK(s.interferer_mode == InterfererMode::fixed);
  CHECK(s.interferer_freq == 45e3);
  CHECK(s.interferer_amplitude_ratio == 3.16);
  CHECK(s.noise_std == 0.0);
  CHECK(s.trials_per_point == 200);
  CHECK(s.solver.kind == SolverKind::omp);
  CHECK(s.solver.success_threshold_db == 40.0);
  CHECK(s.frontend.filter_cutoff == 20e3);
  CHECK_FALSE(s.frontend.quantizer_bits.has_value());
  CHECK(s.pates.candidate_count == 50);
  CHECK(s.pates.trials_per_candidate == 50);
  CHECK_FALSE(s.pattern_file.has_value());
  CHECK(c.psd.segment_len == 1024);
}

TEST_CASE("values are read from every section") {
  const auto c = parse_config(R"({
    "grid": {"rate_hz": 200000, "duration_s": 0.02},
    "sweep": {"f_b_hz": 10000, "freqs_hz": [5000, 15000], "interferer_mode": "co_swept",
              "interferer_offset_hz": 30000, "interferer_bands_hz": [[30000, 45000]],
              "noise_std": 0.01, "trials_per_point": 7, "seed": 42, "pattern_policy": "drop_saturated"},
    "frontend": {"filter_order": 12, "agc_target_rms": 0.3, "clip_level": 0.9, "quantizer_bits": 10},
    "pates": {"candidate_count": 3, "trials_per_candidate": 4, "objective": "max_worst_snr",
              "adc_decimation": 4, "keep_count_min": 10, "keep_count_max": 20,
              "min_gap_min": 2, "min_gap_max": 3, "max_drop_fraction": 0.2},
    "solver": {"kind": "irls", "delta_f_hz": 500, "success_threshold_db": 30, "max_atoms": 6,
               "residual_tol": 1e-8, "epsilon_floor": 1e-10, "max_iters": 50, "penalty": 1e-9},
    "psd": {"segment_len": 512, "desired_freq_hz": 5000}
  })");
  const auto& s = c.sweep;
  CHECK(s.grid == TimeGrid(200e3, 0.02));
  CHECK(s.f_b == 10e3);
  CHECK(s.frequencies() == std::vector<double>{5e3, 15e3});
  CHECK(s.interferer_mode == InterfererMode::co_swept);
  CHECK(s.interferer_offset == 30e3);
  REQUIRE(s.interferer_bands.size() == 1);
  CHECK(s.interferer_bands[0].lo == 30e3);
  CHECK(s.trials_per_point == 7);
  CHECK(s.seed == 42);
  CHECK(s.file_policy.mode == DropMode::drop_saturated);
  CHECK(s.file_policy.max_drop_fraction == 0.2);
  CHECK(s.frontend.filter_cutoff == 10e3);  // follows f_B
  CHECK(s.frontend.filter_order == 12);
  CHECK(s.frontend.quantizer_bits == 10);
  CHECK(s.pates.objective == Objective::max_worst_snr);
  CHECK(s.pates.adc_decimation == 4);
  CHECK(s.pates.min_gap_max == 3);
  CHECK(s.solver.kind == SolverKind::irls);
  CHECK(s.solver.delta_f == 500.0);
  CHECK(s.solver.omp.max_atoms == 6);
  CHECK(s.solver.irls.max_iters == 50);
  CHECK(c.psd.segment_len == 512);
  CHECK(c.psd_scenario().tones[0].frequency == 5e3);
}

TEST_CASE("explicit cutoff overrides f_B") {
  const auto c = parse_config(R"({"frontend": {"filter_cutoff_hz": 25000}})");
  CHECK(c.sweep.frontend.filter_cutoff == 25e3);
}

TEST_CASE("start/stop/step ranges") {
  const auto c = parse_config(R"({"sweep": {"start_hz": 10000, "stop_hz": 30000, "step_hz": 10000}})");
  CHECK(c.sweep.frequencies() == std::vector<double>{10e3, 20e3, 30e3});
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"start_hz": 1000, "freqs_hz": [1000]}})"), InvalidConfig);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"step_hz": 0}})"), InvalidConfig);
}

TEST_CASE("rejections") {
  const char* bad[] = {
      "not json",
      "[]",
      R"({"sweeps": {}})",
      R"({"sweep": {"trials": 5}})",
      R"({"sweep": 5})",
      R"({"sweep": {"trials_per_point": "ten"}})",
      R"({"sweep": {"trials_per_point": -1}})",
      R"({"sweep": {"trials_per_point": 0}})",
      R"({"sweep": {"freqs_hz": []}})",
      R"({"sweep": {"freqs_hz": [250000]}})",
      R"({"sweep": {"interferer_mode": "random"}})",
      R"({"sweep": {"interferer_bands_hz": [[10000, 30000]]}})",
      R"({"sweep": {"pattern_policy": "maybe"}})",
      R"({"solver": {"kind": "lasso"}})",
      R"({"solver": {"delta_f_hz": 3000}})",
      R"({"pates": {"objective": "fastest"}})",
      R"({"pates": {"keep_count_max": 5000}})",
      R"({"frontend": {"clip_level": 0}})",
      R"({"psd": {"segment_len": 1000}})",
      R"({"grid": {"rate_hz": -1}})",
  };
  for (const char* text : bad) {
    const std::string doc = text;
    CAPTURE(doc);
    CHECK_THROWS_AS(parse_config(text), InvalidConfig);
  }
}

TEST_CASE("files: relative pattern paths and missing files") {
  const auto dir = std::filesystem::temp_directory_path() / "csdcr_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "c.json");
    out << R"({"sweep": {"pattern_file": "p.txt"}})";
  }
  const auto c = load_config(dir / "c.json");
  REQUIRE(c.sweep.pattern_file.has_value());
  CHECK(*c.sweep.pattern_file == dir / "p.txt");
  CHECK_THROWS_AS(load_config(dir / "absent.json"), InvalidConfig);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reference lists every section") {
  const auto ref = config_reference();
  for (const char* s : {"[grid]", "[sweep]", "[frontend]", "[pates]", "[solver]", "[psd]", "trials_per_point",
                        "quantizer_bits", "keep_count_max"})
    CHECK(ref.find(s) != std::string::npos);
}
