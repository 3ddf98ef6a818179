#include "csdcr/recon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "csdcr/errors.hpp"
#include "csdcr/kernels.hpp"

namespace csdcr {

namespace {

// Integer grid positions lo/Δf .. hi/Δf of a band; edges must sit on the grid.
std::pair<long long, long long> band_grid(const Band& band, double delta_f) {
  auto on_grid = [delta_f](double f, std::string_view edge) {
    const double q = f / delta_f;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
      throw InvalidSpec(
          fmt::format("band {} edge {} Hz is not a multiple of delta_f = {} Hz", edge, f, delta_f));
    return static_cast<long long>(r);
  };
  const long long lo = on_grid(band.lo, "lower");
  const long long hi = on_grid(band.hi, "upper");
  if (hi < lo) throw InvalidSpec(fmt::format("band [{}, {}] Hz has an empty grid", band.lo, band.hi));
  return {lo, hi};
}

constexpr double kVanishingAtom = 1e-9;  // relative to sqrt(#instants)

std::string atom_name(const AtomInfo& a) {
  return fmt::format("{} Hz {}", a.freq_hz, a.kind == AtomKind::cosine ? "cos" : "sin");
}

}  // namespace

Dictionary build_dictionary(const SignalSpec& spec, const TimeGrid& grid,
                            std::span<const std::size_t> instants, double delta_f,
                            const ChannelResponse& response) {
  validate(spec, grid);
  if (!(delta_f > 0.0)) throw InvalidSpec(fmt::format("delta_f must be positive, got {}", delta_f));
  if (instants.empty()) throw InvalidSpec("dictionary needs at least one observation instant");
  for (std::size_t idx : instants)
    if (idx >= grid.length())
      throw InvalidSpec(fmt::format("observation instant {} outside the grid", idx));

  std::vector<std::pair<Band, BandLabel>> bands{{spec.design_band, BandLabel::desired_band}};
  for (const Band& b : spec.interferer_bands) bands.emplace_back(b, BandLabel::interferer_band);

  Dictionary dict{grid, {instants.begin(), instants.end()}, {}, {}, {}};
  const auto m = static_cast<Eigen::Index>(instants.size());
  std::vector<Eigen::VectorXd> columns;
  const double vanishing = kVanishingAtom * std::sqrt(static_cast<double>(m));

  for (const auto& [band, label] : bands) {
    const auto [lo, hi] = band_grid(band, delta_f);
    for (long long q = lo; q <= hi; ++q) {
      const double f = static_cast<double>(q) * delta_f;
      const double gain = response ? response(f) : 1.0;
      if (!(std::abs(gain) > 1e-12))
        throw InvalidSpec(fmt::format("channel response vanishes at {} Hz", f));
      const double omega = 2.0 * std::numbers::pi * f / grid.grid_rate();
      std::optional<std::size_t> cos_index;
      for (AtomKind kind : {AtomKind::cosine, AtomKind::sine}) {
        Eigen::VectorXd col(m);
        for (Eigen::Index r = 0; r < m; ++r) {
          const double arg = omega * static_cast<double>(instants[r]);
          col[r] = kind == AtomKind::cosine ? std::cos(arg) : std::sin(arg);
        }
        const double norm = col.norm();
        if (norm <= vanishing) continue;
        col /= norm;
        const std::size_t index = dict.atoms.size();
        dict.atoms.push_back({f, kind, label, norm, gain, std::nullopt});
        columns.push_back(std::move(col));
        if (kind == AtomKind::cosine) {
          cos_index = index;
        } else if (cos_index) {
          dict.atoms[*cos_index].partner = index;
          dict.atoms[index].partner = *cos_index;
        }
      }
      if (!dict.atoms.empty() && dict.atoms.back().freq_hz == f) dict.atom_freqs.push_back(f);
    }
  }
  if (dict.atoms.empty()) throw InvalidSpec("dictionary has no non-vanishing atoms");

  std::sort(dict.atom_freqs.begin(), dict.atom_freqs.end());
  dict.matrix.resize(m, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    dict.matrix.col(static_cast<Eigen::Index>(j)) = columns[j];
  return dict;
}

std::vector<double> Dictionary::synthesize_desired(
    const std::map<std::size_t, double>& coefficients) const {
  std::vector<double> out(grid.length(), 0.0);
  for (const auto& [j, c] : coefficients) {
    const AtomInfo& a = atoms.at(j);
    if (a.label != BandLabel::desired_band || c == 0.0) continue;
    const double amplitude = c / (a.norm * a.channel_gain);
    const double omega = 2.0 * std::numbers::pi * a.freq_hz / grid.grid_rate();
    const double phase = a.kind == AtomKind::cosine ? 0.0 : -std::numbers::pi / 2.0;
    kernels::add_tone(out, amplitude, omega, phase);
  }
  return out;
}

namespace {

Eigen::Map<const Eigen::VectorXd> observation_vector(const Observation& obs,
                                                    const Dictionary& dict) {
  if (obs.values.empty()) throw InvalidSpec("empty observation");
  if (static_cast<Eigen::Index>(obs.values.size()) != dict.matrix.rows())
    throw InvalidSpec(fmt::format("observation has {} values but the dictionary has {} rows",
                                  obs.values.size(), dict.matrix.rows()));
  return {obs.values.data(), static_cast<Eigen::Index>(obs.values.size())};
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& a, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = a.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

constexpr double kRankThreshold = 1e-10;

bool full_column_rank(const Eigen::MatrixXd& a) {
  if (a.cols() > a.rows()) return false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(kRankThreshold);
  return qr.rank() == a.cols();
}

}  // namespace

ReconResult omp_solve(const Observation& obs, const Dictionary& dict, const OmpSettings& settings) {
  const auto y = observation_vector(obs, dict);
  const Eigen::MatrixXd& a = dict.matrix;
  if (settings.max_atoms > dict.size())
    throw InvalidConfig(fmt::format("max_atoms {} exceeds the {} dictionary atoms",
                                    settings.max_atoms, dict.size()));

  ReconResult result;
  const double y_norm = y.norm();
  Eigen::VectorXd residual = y;
  result.residual_norm = y_norm;
  result.residual_history.push_back(y_norm);

  std::vector<std::size_t> selected;
  std::vector<bool> excluded(dict.size(), false);
  Eigen::VectorXd coef;

  while (result.residual_norm > settings.residual_tol * y_norm &&
         selected.size() < settings.max_atoms) {
    const Eigen::VectorXd corr = a.transpose() * residual;
    std::optional<std::size_t> best;
    double best_abs = 0.0;
    for (std::size_t j = 0; j < dict.size(); ++j) {
      const double c = std::abs(corr[static_cast<Eigen::Index>(j)]);
      if (!excluded[j] && c > best_abs) {
        best = j;
        best_abs = c;
      }
    }
    if (!best) break;

    std::vector<std::size_t> incoming{*best};
    if (auto p = dict.atoms[*best].partner; p && !excluded[*p] && selected.size() + 2 <= settings.max_atoms)
      incoming.push_back(*p);

    bool grew = false;
    for (std::size_t j : incoming) {
      excluded[j] = true;
      selected.push_back(j);
      if (!full_column_rank(gather_columns(a, selected))) {
        selected.pop_back();
        result.warnings.push_back(
            fmt::format("rank-deficient support: dropped atom {} ({})", j, atom_name(dict.atoms[j])));
        continue;
      }
      grew = true;
    }
    if (!grew) continue;

    const Eigen::MatrixXd sub = gather_columns(a, selected);
    coef = sub.colPivHouseholderQr().solve(y);
    residual = y - sub * coef;
    result.residual_norm = residual.norm();
    result.residual_history.push_back(result.residual_norm);
  }

  for (std::size_t k = 0; k < selected.size(); ++k)
    result.coefficients[selected[k]] = coef[static_cast<Eigen::Index>(k)];
  result.reconstructed_desired = dict.synthesize_desired(result.coefficients);
  return result;
}

ReconResult irls_bp_solve(const Observation& obs, const Dictionary& dict,
                          const IrlsSettings& settings) {
  const auto y = observation_vector(obs, dict);
  const Eigen::MatrixXd& a = dict.matrix;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();

  ReconResult result;
  const double y_norm = y.norm();
  result.residual_history.push_back(y_norm);
  if (y_norm == 0.0) {
    result.residual_norm = 0.0;
    result.reconstructed_desired.assign(dict.grid.length(), 0.0);
    return result;
  }

  const Eigen::VectorXd aty = a.transpose() * y;
  const double lambda = settings.penalty * aty.cwiseAbs().maxCoeff();

  // Weighted ridge step: minimizes |A c - y|^2 / 2 + lambda / 2 * sum c_j^2 / w_j.
  auto weighted_solve = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    if (m <= n) {
      Eigen::MatrixXd g = a * w.asDiagonal() * a.transpose();
      g.diagonal().array() += lambda;
      return w.asDiagonal() * (a.transpose() * g.ldlt().solve(y));
    }
    Eigen::MatrixXd h = a.transpose() * a;
    h.diagonal() += lambda * w.cwiseInverse();
    return h.ldlt().solve(aty);
  };

  Eigen::VectorXd c = weighted_solve(Eigen::VectorXd::Ones(n));
  const double scale = c.cwiseAbs().maxCoeff();
  const double floor = settings.epsilon_floor * scale;
  double eps = scale;
  result.converged = false;

  for (std::size_t it = 0; it < settings.max_iters; ++it) {
    const Eigen::VectorXd w = (c.array().square() + eps * eps).sqrt().matrix();
    Eigen::VectorXd next = weighted_solve(w);
    const double change = (next - c).norm() / std::max(next.norm(), std::numeric_limits<double>::min());
    c = std::move(next);
    if (eps <= floor && change < 1e-10) {
      result.converged = true;
      break;
    }
    eps = std::max(eps * 0.1, floor);
  }
  if (!result.converged)
    result.warnings.push_back(
        fmt::format("IRLS did not converge within {} iterations", settings.max_iters));

  const double cmax = c.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(c[j]) < 1e-4 * cmax) {
      c[j] = 0.0;
    } else {
      result.coefficients[static_cast<std::size_t>(j)] = c[j];
    }
  }
  result.residual_norm = (y - a * c).norm();
  result.residual_history.push_back(result.residual_norm);
  result.reconstructed_desired = dict.synthesize_desired(result.coefficients);
  return result;
}

double desired_snr_db(std::span<const double> desired, std::span<const double> reconstructed,
                      double applied_gain) {
  if (desired.size() != reconstructed.size())
    throw InvalidSpec("desired and reconstructed signals differ in length");
  if (!(applied_gain > 0.0)) throw InvalidSpec("applied gain must be positive");
  double signal = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i < desired.size(); ++i) {
    const double e = desired[i] - reconstructed[i] / applied_gain;
    signal += desired[i] * desired[i];
    error += e * e;
  }
  if (signal == 0.0) throw InvalidSpec("desired component has zero energy; SNR undefined");
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / error);
}

void assess(ReconResult& result, const SignalFrame& frame, double applied_gain,
            double success_threshold_db) {
  result.desired_snr_db = desired_snr_db(frame.desired, result.reconstructed_desired, applied_gain);
  result.success = result.desired_snr_db >= success_threshold_db;
}

}  // namespace csdcr
