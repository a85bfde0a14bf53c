#ifndef GREYBOX_IO_HPP
#define GREYBOX_IO_HPP

// CSV and JSON forms of signals, parameters, and reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "greybox/certificates.hpp"
#include "greybox/error.hpp"
#include "greybox/physical.hpp"
#include "greybox/residual.hpp"
#include "greybox/signal.hpp"

namespace greybox::io {

using nlohmann::json;

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

// Header `t,value`, one sample per line, 15 significant digits.
inline void write_signal_csv(const Signal& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "t,value\n";
  for (std::size_t i = 0; i < s.size(); ++i) out << format_number(s.time(i)) << ',' << format_number(s[i]) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

inline Signal read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("missing signal file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0) {
    throw ManifestError(path.string() + ": expected header 't,value'");
  }
  std::vector<double> t;
  std::vector<double> v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ManifestError(path.string() + ": malformed line '" + line + "'");
    t.push_back(std::stod(line.substr(0, comma)));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  if (t.size() < 2) throw ManifestError(path.string() + ": fewer than two samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  return Signal(t.front(), dt, std::move(v));
}

inline json to_json(const Signal& s) {
  return json{{"t0", s.t0()}, {"dt", s.dt()}, {"samples", std::vector<double>(s.samples().begin(), s.samples().end())}};
}

inline Signal signal_from_json(const json& j) {
  return Signal(j.at("t0").get<double>(), j.at("dt").get<double>(), j.at("samples").get<std::vector<double>>());
}

// {alpha, m, n, A: [A_1..A_m], B: [[B_{d,1}..B_{d,n}] for d = 1..m]}.
inline json to_json(const ResidualParams& p) {
  json b = json::array();
  for (int d = 0; d < p.m; ++d) {
    std::vector<double> row(static_cast<std::size_t>(p.n));
    for (int k = 0; k < p.n; ++k) row[static_cast<std::size_t>(k)] = p.b(d, k);
    b.push_back(row);
  }
  return json{{"alpha", p.alpha},
              {"m", p.m},
              {"n", p.n},
              {"convention",
               "sum_{d=1}^m A_d r^(d-1) = sum_{d=1}^m sum_{k=1}^n B_{d,k} d^(d-1)/dt^(d-1) T_{2k+1}(u/alpha) from rest; "
               "D(s) = sum_d A_d s^(d-1) with D(0) = A_1 = 1"},
              {"A", p.a},
              {"B", b}};
}

// Checks dimensions and the Hurwitz property.
inline ResidualParams residual_from_json(const json& j) {
  ResidualParams p;
  try {
    p.alpha = j.at("alpha").get<double>();
    p.m = j.at("m").get<int>();
    p.n = j.at("n").get<int>();
    p.a = j.at("A").get<std::vector<double>>();
    const auto rows = j.at("B").get<std::vector<std::vector<double>>>();
    if (rows.size() != static_cast<std::size_t>(p.m)) throw ParameterError("residual: B must have m rows");
    p.b.resize(p.m, p.n);
    for (int d = 0; d < p.m; ++d) {
      if (rows[static_cast<std::size_t>(d)].size() != static_cast<std::size_t>(p.n)) {
        throw ParameterError("residual: every row of B must have n entries");
      }
      for (int k = 0; k < p.n; ++k) p.b(d, k) = rows[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)];
    }
  } catch (const json::exception& e) {
    throw ParameterError(std::string("residual: malformed JSON: ") + e.what());
  }
  p.validate();
  return p;
}

inline json to_json(const ZetaFit& f) {
  json iterations = json::array();
  for (const auto& it : f.iterations) {
    iterations.push_back({{"lo", it.lo}, {"hi", it.hi}, {"zeta", it.zeta}, {"loss", it.loss}});
  }
  json grid = json::array();
  for (const auto& [z, l] : f.grid) grid.push_back({{"zeta", z}, {"loss", l}});
  return json{{"zeta_hat", f.zeta_hat},
              {"mismatch", f.mismatch},
              {"loss", f.loss},
              {"search_interval", {f.search.lo, f.search.hi}},
              {"grid_step", f.search.grid_step},
              {"tolerance", f.search.tolerance},
              {"burn_in", f.search.burn_in},
              {"grid", grid},
              {"iterations", iterations}};
}

inline json to_json(const ResidualFit& f) {
  return json{{"loss", f.loss},
              {"initial_loss", f.initial_loss},
              {"relative_error", f.relative_error},
              {"gradient_norm", f.gradient_norm},
              {"iterations", f.iterations},
              {"termination", f.termination},
              {"loss_trace", f.loss_trace}};
}

inline json to_json(const CertificateReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"zeta", c.zeta},
                     {"gamma", c.gamma_index},
                     {"normalized", c.normalized},
                     {"raw", c.raw},
                     {"envelope", c.envelope},
                     {"decay_ratios", c.decay_ratios},
                     {"pointwise_ratios", c.pointwise_ratios},
                     {"decay_ok", c.decay_ok}});
  }
  return json{{"order", to_string(r.order)},
              {"features", to_string(r.features)},
              {"witness",
               {{"alpha", r.witness.amplitude}, {"omega", r.witness.frequency}, {"phi", r.witness.phase}}},
              {"zeta_grid", r.options.zeta_grid},
              {"horizons", r.options.horizons},
              {"burn_in", r.options.burn_in},
              {"tolerance", r.options.tolerance},
              {"decay_factor", r.options.decay_factor},
              {"max_abs_normalized", r.max_abs_final},
              {"max_decay_ratio", r.max_decay_ratio},
              {"pointwise_decay_violations", r.pointwise_decay_violations},
              {"decay_ok", r.decay_ok},
              {"verdict", r.pass ? "PASS" : "FAIL"},
              {"notes", r.notes},
              {"cells", cells}};
}

// Human-readable summary: one row per zeta with the worst cell over gamma.
inline std::string certificate_table(const CertificateReport& r) {
  std::ostringstream os;
  os << to_string(r.order) << "-order certificate (" << to_string(r.features) << "), witness alpha="
     << r.witness.amplitude << " omega=" << r.witness.frequency << "\n";
  os << "  zeta  ";
  for (double T : r.options.horizons) os << "  max|c|(T=" << T << ")";
  os << "  max decay ratio\n";
  for (double zeta : r.options.zeta_grid) {
    std::vector<double> worst(r.options.horizons.size(), 0.0);
    double ratio = 0.0;
    for (const auto& c : r.cells) {
      if (c.zeta != zeta) continue;
      for (std::size_t h = 0; h < worst.size(); ++h) worst[h] = std::max(worst[h], std::abs(c.normalized[h]));
      for (double q : c.decay_ratios) ratio = std::max(ratio, q);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-5.2f ", zeta);
    os << buf;
    for (double w : worst) {
      std::snprintf(buf, sizeof buf, "  %14.3e    ", w);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "  %.3f\n", ratio);
    os << buf;
  }
  os << "  verdict: " << (r.pass ? "PASS" : "FAIL") << " (max|c| = " << r.max_abs_final << ", tolerance "
     << r.options.tolerance << "; max decay ratio " << r.max_decay_ratio << ", limit " << r.options.decay_factor
     << ")\n";
  return os.str();
}

inline void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("missing file " + path.string());
  return json::parse(in);
}

}  // namespace greybox::io

#endif  // GREYBOX_IO_HPP
