// csdcr: command-line front end for the sweep experiment, pattern design,
// PSD figure data and pattern file round trips.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "csdcr/config.hpp"
#include "csdcr/errors.hpp"
#include "csdcr/harness.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string in;
  std::string leaderboard;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> solver;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw csdcr::InvalidConfig("cannot open output file '" + path + "'");
  return out;
}

csdcr::ExperimentConfig load_with_overrides(const Options& opt, bool trials_are_per_candidate) {
  csdcr::ExperimentConfig cfg = csdcr::load_config(opt.config);
  auto& sweep = cfg.sweep;
  if (opt.seed) sweep.seed = *opt.seed;
  if (opt.trials) {
    if (*opt.trials < 1) throw csdcr::InvalidConfig("--trials must be >= 1");
    if (trials_are_per_candidate) sweep.pates.trials_per_candidate = *opt.trials;
    else sweep.trials_per_point = *opt.trials;
  }
  if (opt.solver) sweep.solver.kind = csdcr::solver_from_string(*opt.solver);
  sweep.validate();
  return cfg;
}

int run_sweep(const Options& opt) {
  const auto cfg = load_with_overrides(opt, false);
  const auto result = csdcr::run_sweep(cfg.sweep);
  auto out = open_output(opt.out);
  csdcr::write_sweep_csv(out, result);
  return 0;
}

int run_pates(const Options& opt) {
  const auto cfg = load_with_overrides(opt, true);
  const auto sel = csdcr::select_pattern(cfg.sweep.design_brief(), cfg.sweep.frontend,
                                         cfg.sweep.solver, cfg.sweep.seed);
  csdcr::save_pattern(opt.out, sel.pattern);
  if (!opt.leaderboard.empty()) {
    auto lb = open_output(opt.leaderboard);
    csdcr::write_leaderboard_csv(lb, sel.leaderboard);
  }
  std::cerr << "selected candidate " << sel.leaderboard[sel.best].candidate_id << " ("
            << sel.pattern.size() << " samples, " << csdcr::to_string(sel.policy.mode)
            << "), success rate " << sel.score.success_rate << "\n";
  return 0;
}

int run_psd(const Options& opt) {
  const auto cfg = load_with_overrides(opt, false);
  const auto rows = csdcr::run_psd_figure(cfg.psd_scenario(), cfg.sweep.grid, cfg.sweep.seed,
                                          cfg.psd.segment_len);
  auto out = open_output(opt.out);
  csdcr::write_psd_csv(out, rows);
  return 0;
}

int run_roundtrip(const Options& opt) {
  std::ifstream in(opt.in, std::ios::binary);
  if (!in) throw csdcr::InvalidPattern("cannot read pattern file '" + opt.in + "'");
  std::ostringstream original;
  original << in.rdbuf();
  std::istringstream source(original.str());
  const auto pattern = csdcr::read_pattern(source);
  csdcr::save_pattern(opt.out, pattern);
  if (csdcr::load_pattern(opt.out) != pattern)
    throw csdcr::InvalidPattern("re-read pattern differs from the original");
  std::ostringstream rewritten;
  csdcr::write_pattern(rewritten, pattern);
  if (rewritten.str() != original.str())
    std::cerr << "note: input was not in canonical form; canonical copy written\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-sensing direct-conversion receiver simulator"};
  app.require_subcommand(1);
  app.footer(csdcr::config_reference());
  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out, "output file")->required();
    cmd->add_option("--seed", opt.seed, "root seed override");
    cmd->add_option("--solver", opt.solver, "solver override")->check(CLI::IsMember({"omp", "irls"}));
  };

  auto* sweep = app.add_subcommand("sweep", "run the desired-frequency sweep, write CSV");
  add_common(sweep);
  sweep->add_option("--trials", opt.trials, "trials per sweep frequency override");

  auto* pates = app.add_subcommand("pates", "design a sampling pattern, write pattern file");
  add_common(pates);
  pates->add_option("--trials", opt.trials, "trials per candidate override");
  pates->add_option("--leaderboard", opt.leaderboard, "leaderboard CSV output");

  auto* psd = app.add_subcommand("psd", "write the PSD of the configured scenario as CSV");
  add_common(psd);

  auto* roundtrip = app.add_subcommand("pattern-roundtrip", "read a pattern file and write it back");
  roundtrip->add_option("--in", opt.in, "pattern file to read")->required();
  roundtrip->add_option("--out", opt.out, "pattern file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sweep) return run_sweep(opt);
    if (*pates) return run_pates(opt);
    if (*psd) return run_psd(opt);
    if (*roundtrip) return run_roundtrip(opt);
  } catch (const std::exception& e) {
    std::cerr << "csdcr: error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
