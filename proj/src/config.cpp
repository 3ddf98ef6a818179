#include "csdcr/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <fmt/core.h>

#include "csdcr/errors.hpp"
#include "json.hpp"

namespace csdcr {

using nlohmann::json;

namespace {

// Values collected while walking the document; assembled once all keys are read.
struct Draft {
  ExperimentConfig config;
  double rate_hz = 400e3;
  double duration_s = 10e-3;
  std::optional<double> cutoff_hz;
  std::optional<double> start_hz, stop_hz, step_hz;
  bool explicit_freqs = false;
  std::optional<DropMode> file_policy_mode;
};

struct Key {
  std::string_view section;
  std::string_view name;
  std::string_view doc;
  std::function<void(const json&, Draft&)> apply;
};

[[noreturn]] void type_error(std::string_view section, std::string_view name, std::string_view want) {
  throw InvalidConfig(fmt::format("config key {}.{} must be {}", section, name, want));
}

double as_number(const json& v, std::string_view section, std::string_view name) {
  if (!v.is_number()) type_error(section, name, "a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, std::string_view section, std::string_view name) {
  if (!v.is_number_unsigned()) type_error(section, name, "a non-negative integer");
  return v.get<std::size_t>();
}

std::string as_text(const json& v, std::string_view section, std::string_view name) {
  if (!v.is_string()) type_error(section, name, "a string");
  return v.get<std::string>();
}

std::vector<Band> parse_bands(const json& v) {
  if (!v.is_array()) type_error("sweep", "interferer_bands_hz", "an array of [lo, hi] pairs");
  std::vector<Band> out;
  for (const json& b : v) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
      type_error("sweep", "interferer_bands_hz", "an array of [lo, hi] pairs");
    out.push_back({b[0].get<double>(), b[1].get<double>()});
  }
  return out;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add = [&k](std::string_view s, std::string_view n, std::string_view doc,
                    std::function<void(const json&, Draft&)> f) { k.push_back({s, n, doc, std::move(f)}); };

    add("grid", "rate_hz", "dense simulation rate in Hz (400000)", [](const json& v, Draft& d) {
      d.rate_hz = as_number(v, "grid", "rate_hz");
    });
    add("grid", "duration_s", "frame duration in s (0.01)", [](const json& v, Draft& d) {
      d.duration_s = as_number(v, "grid", "duration_s");
    });

    add("sweep", "f_b_hz", "design band edge f_B in Hz (20000)", [](const json& v, Draft& d) {
      d.config.sweep.f_b = as_number(v, "sweep", "f_b_hz");
    });
    add("sweep", "freqs_hz", "explicit list of desired frequencies in Hz", [](const json& v, Draft& d) {
      if (!v.is_array()) type_error("sweep", "freqs_hz", "an array of numbers");
      d.config.sweep.sweep_freqs.clear();
      for (const json& f : v) {
        if (!f.is_number()) type_error("sweep", "freqs_hz", "an array of numbers");
        d.config.sweep.sweep_freqs.push_back(f.get<double>());
      }
      if (d.config.sweep.sweep_freqs.empty()) throw InvalidConfig("sweep.freqs_hz is empty");
      d.explicit_freqs = true;
    });
    add("sweep", "start_hz", "first desired frequency in Hz (5000)", [](const json& v, Draft& d) {
      d.start_hz = as_number(v, "sweep", "start_hz");
    });
    add("sweep", "stop_hz", "last desired frequency in Hz (95000)", [](const json& v, Draft& d) {
      d.stop_hz = as_number(v, "sweep", "stop_hz");
    });
    add("sweep", "step_hz", "desired frequency increment in Hz (5000)", [](const json& v, Draft& d) {
      d.step_hz = as_number(v, "sweep", "step_hz");
    });
    add("sweep", "interferer_mode", "\"fixed\" or \"co_swept\" (fixed)", [](const json& v, Draft& d) {
      const std::string mode = as_text(v, "sweep", "interferer_mode");
      if (mode == "fixed") d.config.sweep.interferer_mode = InterfererMode::fixed;
      else if (mode == "co_swept") d.config.sweep.interferer_mode = InterfererMode::co_swept;
      else throw InvalidConfig(fmt::format("sweep.interferer_mode '{}' is not fixed or co_swept", mode));
    });
    add("sweep", "interferer_freq_hz", "interferer frequency in fixed mode (45000)",
        [](const json& v, Draft& d) {
          d.config.sweep.interferer_freq = as_number(v, "sweep", "interferer_freq_hz");
        });
    add("sweep", "interferer_offset_hz", "interferer offset above the desired tone in co_swept mode (25000)",
        [](const json& v, Draft& d) {
          d.config.sweep.interferer_offset = as_number(v, "sweep", "interferer_offset_hz");
        });
    add("sweep", "interferer_bands_hz", "interferer band priors [[lo, hi], ...] ([[40000, 50000]])",
        [](const json& v, Draft& d) { d.config.sweep.interferer_bands = parse_bands(v); });
    add("sweep", "desired_amplitude", "desired tone amplitude in V (1.0)", [](const json& v, Draft& d) {
      d.config.sweep.desired_amplitude = as_number(v, "sweep", "desired_amplitude");
    });
    add("sweep", "interferer_amplitude_ratio", "interferer amplitude / desired amplitude (3.16)",
        [](const json& v, Draft& d) {
          d.config.sweep.interferer_amplitude_ratio = as_number(v, "sweep", "interferer_amplitude_ratio");
        });
    add("sweep", "noise_std", "white noise std per dense sample in V (0)", [](const json& v, Draft& d) {
      d.config.sweep.noise_std = as_number(v, "sweep", "noise_std");
    });
    add("sweep", "trials_per_point", "Monte Carlo trials per sweep frequency (200)",
        [](const json& v, Draft& d) {
          d.config.sweep.trials_per_point = as_count(v, "sweep", "trials_per_point");
        });
    add("sweep", "seed", "root RNG seed (1)", [](const json& v, Draft& d) {
      d.config.sweep.seed = as_count(v, "sweep", "seed");
    });
    add("sweep", "pattern_file", "use this pattern file instead of designing one (unset)",
        [](const json& v, Draft& d) {
          d.config.sweep.pattern_file = as_text(v, "sweep", "pattern_file");
        });
    add("sweep", "pattern_policy", "drop policy used with pattern_file (keep_all)",
        [](const json& v, Draft& d) {
          d.file_policy_mode = drop_mode_from_string(as_text(v, "sweep", "pattern_policy"));
        });

    add("frontend", "filter_cutoff_hz", "lowpass cutoff in Hz (f_B)", [](const json& v, Draft& d) {
      d.cutoff_hz = as_number(v, "frontend", "filter_cutoff_hz");
    });
    add("frontend", "filter_order", "FIR half length, taps = 2 * order + 1 (8)",
        [](const json& v, Draft& d) {
          d.config.sweep.frontend.filter_order = static_cast<int>(as_count(v, "frontend", "filter_order"));
        });
    add("frontend", "agc_target_rms", "AGC output RMS in V (0.25)", [](const json& v, Draft& d) {
      d.config.sweep.frontend.agc_target_rms = as_number(v, "frontend", "agc_target_rms");
    });
    add("frontend", "clip_level", "ADC full scale in V (1.0)", [](const json& v, Draft& d) {
      d.config.sweep.frontend.clip_level = as_number(v, "frontend", "clip_level");
    });
    add("frontend", "quantizer_bits", "ADC bits in [4, 16], or null for ideal (null)",
        [](const json& v, Draft& d) {
          if (v.is_null()) d.config.sweep.frontend.quantizer_bits.reset();
          else d.config.sweep.frontend.quantizer_bits = static_cast<int>(as_count(v, "frontend", "quantizer_bits"));
        });

    add("pates", "candidate_count", "random candidate patterns (50)", [](const json& v, Draft& d) {
      d.config.sweep.pates.candidate_count = as_count(v, "pates", "candidate_count");
    });
    add("pates", "trials_per_candidate", "trials per candidate and policy (50)",
        [](const json& v, Draft& d) {
          d.config.sweep.pates.trials_per_candidate = as_count(v, "pates", "trials_per_candidate");
        });
    add("pates", "objective", "max_success_rate or max_worst_snr (max_success_rate)",
        [](const json& v, Draft& d) {
          d.config.sweep.pates.objective = objective_from_string(as_text(v, "pates", "objective"));
        });
    add("pates", "adc_decimation", "ADC clock = grid rate / D (5)", [](const json& v, Draft& d) {
      d.config.sweep.pates.adc_decimation = as_count(v, "pates", "adc_decimation");
    });
    add("pates", "keep_count_min", "smallest candidate keep count (6)", [](const json& v, Draft& d) {
      d.config.sweep.pates.keep_count_min = as_count(v, "pates", "keep_count_min");
    });
    add("pates", "keep_count_max", "largest candidate keep count (34)", [](const json& v, Draft& d) {
      d.config.sweep.pates.keep_count_max = as_count(v, "pates", "keep_count_max");
    });
    add("pates", "min_gap_min", "smallest candidate min_gap in clock ticks (1)",
        [](const json& v, Draft& d) {
          d.config.sweep.pates.min_gap_min = as_count(v, "pates", "min_gap_min");
        });
    add("pates", "min_gap_max", "largest candidate min_gap in clock ticks (4)",
        [](const json& v, Draft& d) {
          d.config.sweep.pates.min_gap_max = as_count(v, "pates", "min_gap_max");
        });
    add("pates", "max_drop_fraction", "cap for drop_saturated_capped (0.1)", [](const json& v, Draft& d) {
      d.config.sweep.pates.max_drop_fraction = as_number(v, "pates", "max_drop_fraction");
    });

    add("solver", "kind", "omp or irls (omp)", [](const json& v, Draft& d) {
      d.config.sweep.solver.kind = solver_from_string(as_text(v, "solver", "kind"));
    });
    add("solver", "delta_f_hz", "dictionary frequency spacing in Hz (1000)", [](const json& v, Draft& d) {
      d.config.sweep.solver.delta_f = as_number(v, "solver", "delta_f_hz");
    });
    add("solver", "success_threshold_db", "desired-signal SNR counted as success (40)",
        [](const json& v, Draft& d) {
          d.config.sweep.solver.success_threshold_db = as_number(v, "solver", "success_threshold_db");
        });
    add("solver", "max_atoms", "OMP atom budget (8)", [](const json& v, Draft& d) {
      d.config.sweep.solver.omp.max_atoms = as_count(v, "solver", "max_atoms");
    });
    add("solver", "residual_tol", "OMP stop when |r| <= tol * |y| (1e-9)", [](const json& v, Draft& d) {
      d.config.sweep.solver.omp.residual_tol = as_number(v, "solver", "residual_tol");
    });
    add("solver", "epsilon_floor", "IRLS smoothing floor, relative (1e-12)", [](const json& v, Draft& d) {
      d.config.sweep.solver.irls.epsilon_floor = as_number(v, "solver", "epsilon_floor");
    });
    add("solver", "max_iters", "IRLS iteration limit (200)", [](const json& v, Draft& d) {
      d.config.sweep.solver.irls.max_iters = as_count(v, "solver", "max_iters");
    });
    add("solver", "penalty", "IRLS l1 weight relative to max |A^T y| (1e-10)",
        [](const json& v, Draft& d) {
          d.config.sweep.solver.irls.penalty = as_number(v, "solver", "penalty");
        });

    add("psd", "segment_len", "Welch segment length, power of two (1024)", [](const json& v, Draft& d) {
      d.config.psd.segment_len = as_count(v, "psd", "segment_len");
    });
    add("psd", "desired_freq_hz", "desired tone of the PSD scenario in Hz (10000)",
        [](const json& v, Draft& d) {
          d.config.psd.desired_freq = as_number(v, "psd", "desired_freq_hz");
        });
    return k;
  }();
  return table;
}

const Key* find_key(std::string_view section, std::string_view name) {
  for (const Key& k : keys())
    if (k.section == section && k.name == name) return &k;
  return nullptr;
}

bool known_section(std::string_view section) {
  for (const Key& k : keys())
    if (k.section == section) return true;
  return false;
}

}  // namespace

SignalSpec ExperimentConfig::psd_scenario() const { return sweep_scenario(sweep, psd.desired_freq); }

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw InvalidConfig("config must be a JSON object of sections");

  Draft draft;
  for (const auto& [section, body] : doc.items()) {
    if (!known_section(section)) throw InvalidConfig(fmt::format("unknown config section '{}'", section));
    if (!body.is_object()) throw InvalidConfig(fmt::format("config section '{}' must be an object", section));
    for (const auto& [name, value] : body.items()) {
      const Key* key = find_key(section, name);
      if (!key) throw InvalidConfig(fmt::format("unknown config key '{}.{}'", section, name));
      key->apply(value, draft);
    }
  }

  ExperimentConfig cfg = std::move(draft.config);
  SweepConfig& sweep = cfg.sweep;
  try {
    sweep.grid = TimeGrid(draft.rate_hz, draft.duration_s);
  } catch (const InvalidSpec& e) {
    throw InvalidConfig(e.what());
  }
  sweep.frontend.filter_cutoff = draft.cutoff_hz.value_or(sweep.f_b);
  sweep.file_policy = DropPolicy{draft.file_policy_mode.value_or(DropMode::keep_all),
                                 sweep.pates.max_drop_fraction};
  if (sweep.pattern_file && sweep.pattern_file->is_relative() && !base_dir.empty())
    sweep.pattern_file = base_dir / *sweep.pattern_file;

  if (draft.start_hz || draft.stop_hz || draft.step_hz) {
    if (draft.explicit_freqs)
      throw InvalidConfig("sweep.freqs_hz cannot be combined with start_hz/stop_hz/step_hz");
    const double start = draft.start_hz.value_or(5e3);
    const double stop = draft.stop_hz.value_or(95e3);
    const double step = draft.step_hz.value_or(5e3);
    if (!(step > 0.0) || !(stop >= start)) throw InvalidConfig("sweep range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    sweep.sweep_freqs.clear();
    for (std::size_t i = 0; i < n; ++i) sweep.sweep_freqs.push_back(start + static_cast<double>(i) * step);
  }

  sweep.validate();
  if (cfg.psd.segment_len < 2 || !std::has_single_bit(cfg.psd.segment_len) ||
      cfg.psd.segment_len > sweep.grid.length())
    throw InvalidConfig(fmt::format("psd.segment_len {} must be a power of two in [2, {}]",
                                    cfg.psd.segment_len, sweep.grid.length()));
  try {
    validate(cfg.psd_scenario(), sweep.grid);
  } catch (const InvalidSpec& e) {
    throw InvalidConfig(fmt::format("psd scenario: {}", e.what()));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig(fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string config_reference() {
  std::string out = "Config file (JSON object; every section and key optional; unknown keys are errors):\n";
  std::string_view section;
  for (const Key& k : keys()) {
    if (k.section != section) {
      section = k.section;
      out += fmt::format("  [{}]\n", section);
    }
    out += fmt::format("    {:<28} {}\n", k.name, k.doc);
  }
  return out;
}

}  // namespace csdcr
