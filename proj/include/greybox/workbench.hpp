#ifndef GREYBOX_WORKBENCH_HPP
#define GREYBOX_WORKBENCH_HPP

// Experiment configuration and the three-step hybrid modeling workflow:
// identify zeta on a sinusoid, fit the residual on a pseudorandom input,
// validate on a fresh pseudorandom input.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "greybox/certificates.hpp"
#include "greybox/error.hpp"
#include "greybox/excitation.hpp"
#include "greybox/io.hpp"
#include "greybox/physical.hpp"
#include "greybox/plant.hpp"
#include "greybox/residual.hpp"
#include "greybox/signal.hpp"

namespace greybox::workbench {

struct ExperimentConfig {
  std::string name = "medium";
  PlantParams plant{0.5, 2.0};
  double horizon = 80.0;
  double dt = 0.01;
  double burn_in = 20.0;      // second variant of every reported norm
  double fit_burn_in = 0.0;   // window of both estimation losses

  // alpha * cos(w t + 3pi/2) = alpha * sin(w t)
  ExcitationSpec identification = ExcitationSpec::make_sinusoid(4.0, 1.0, 1.5 * std::numbers::pi);
  ZetaSearch search{};
  double max_search_hi = 64.0;  // upper bound when widening a failed bracket

  ExcitationSpec training = ExcitationSpec::make_pseudorandom(4.0, 1);
  double training_horizon = 80.0;
  ExcitationSpec validation = ExcitationSpec::make_pseudorandom(4.0, 1001);
  double validation_horizon = 80.0;

  double residual_alpha = 4.0;
  int m = 5;
  int n = 6;
  ResidualFitOptions fit{};

  ExcitationSpec witness = ExcitationSpec::make_sinusoid(4.0, 1.0, 0.0);
  CertificateOptions certificate{};
  std::size_t gamma_samples = 20;
  std::uint64_t gamma_seed = 7;

  void validate() const {
    try {
      plant.validate();
      identification.validate();
      training.validate();
      validation.validate();
      witness.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (identification.kind != ExcitationKind::sinusoid || witness.kind != ExcitationKind::sinusoid) {
      throw ConfigError("identification and witness excitations must be sinusoids");
    }
    if (training.kind != ExcitationKind::pseudorandom || validation.kind != ExcitationKind::pseudorandom) {
      throw ConfigError("training and validation excitations must be pseudorandom");
    }
    if (residual_alpha != training.amplitude || residual_alpha != validation.amplitude) {
      throw ConfigError("residual alpha must equal the training and validation amplitudes");
    }
    if (witness.amplitude != residual_alpha) throw ConfigError("certificate witness amplitude must equal residual alpha");
    if (training.seed == validation.seed) throw ConfigError("validation seed must differ from training seed");
    if (!(dt > 0.0) || !(horizon > dt) || !(training_horizon > dt) || !(validation_horizon > dt)) {
      throw ConfigError("horizons and dt must be positive with horizon > dt");
    }
    if (!(burn_in >= 0.0) || burn_in >= std::min({horizon, training_horizon, validation_horizon})) {
      throw ConfigError("burn_in must lie in [0, horizon)");
    }
    if (m < 1 || n < 1) throw ConfigError("residual m and n must be at least one");
    if (!(search.lo > 0.0) || !(search.hi > search.lo) || !(max_search_hi >= search.hi)) {
      throw ConfigError("invalid zeta search interval");
    }
  }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": '" + tok + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError("config key " + key + " is empty");
  return out;
}

}  // namespace detail

// INI file, sections [experiment] [plant] [identification] [training]
// [validation] [residual] [certificate]. Unknown keys are rejected. Missing
// keys keep their defaults. [experiment] alpha sets every amplitude.
inline ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  static const std::map<std::string, std::set<std::string>> allowed{
      {"experiment", {"name", "alpha", "horizon", "dt", "burn_in", "fit_burn_in"}},
      {"plant", {"zeta", "omega0"}},
      {"identification",
       {"frequency", "phase", "search_lo", "search_hi", "grid_step", "tolerance", "max_search_hi"}},
      {"training", {"seed", "node_period", "horizon"}},
      {"validation", {"seed", "horizon"}},
      {"residual", {"m", "n", "omega_c", "max_iterations", "gradient_tolerance"}},
      {"certificate",
       {"frequency", "phase", "zeta_grid", "horizons", "gamma_samples", "gamma_seed", "tolerance", "burn_in",
        "decay_factor"}},
  };
  for (const auto& [section, body] : tree) {
    const auto it = allowed.find(section);
    if (it == allowed.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
  }

  auto num = [&](const std::string& path, double fallback) {
    const auto v = tree.get_optional<std::string>(path);
    if (!v) return fallback;
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw ConfigError("config key " + path + ": '" + *v + "' is not a number");
    }
  };
  auto integer = [&](const std::string& path, std::uint64_t fallback) {
    const auto v = tree.get_optional<std::string>(path);
    if (!v) return fallback;
    try {
      std::size_t used = 0;
      const auto parsed = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return static_cast<std::uint64_t>(parsed);
    } catch (const std::exception&) {
      throw ConfigError("config key " + path + ": '" + *v + "' is not a nonnegative integer");
    }
  };

  ExperimentConfig c;
  c.name = tree.get("experiment.name", c.name);
  const double alpha = num("experiment.alpha", c.residual_alpha);
  c.horizon = num("experiment.horizon", c.horizon);
  c.dt = num("experiment.dt", c.dt);
  c.burn_in = num("experiment.burn_in", c.burn_in);
  c.fit_burn_in = num("experiment.fit_burn_in", c.fit_burn_in);
  c.search.burn_in = c.fit_burn_in;
  c.fit.burn_in = c.fit_burn_in;

  c.plant.zeta = num("plant.zeta", c.plant.zeta);
  c.plant.omega0 = num("plant.omega0", c.plant.omega0);

  c.identification.amplitude = alpha;
  c.identification.frequency = num("identification.frequency", c.identification.frequency);
  c.identification.phase = num("identification.phase", c.identification.phase);
  c.search.lo = num("identification.search_lo", c.search.lo);
  c.search.hi = num("identification.search_hi", c.search.hi);
  c.search.grid_step = num("identification.grid_step", c.search.grid_step);
  c.search.tolerance = num("identification.tolerance", c.search.tolerance);
  c.max_search_hi = num("identification.max_search_hi", c.max_search_hi);

  c.training.amplitude = alpha;
  c.training.seed = integer("training.seed", c.training.seed);
  c.training.node_period = num("training.node_period", c.training.node_period);
  c.training_horizon = num("training.horizon", c.horizon);
  c.validation.amplitude = alpha;
  c.validation.seed = integer("validation.seed", c.validation.seed);
  c.validation.node_period = c.training.node_period;
  c.validation_horizon = num("validation.horizon", c.horizon);

  c.residual_alpha = alpha;
  c.m = static_cast<int>(integer("residual.m", static_cast<std::uint64_t>(c.m)));
  c.n = static_cast<int>(integer("residual.n", static_cast<std::uint64_t>(c.n)));
  c.fit.omega_c = num("residual.omega_c", 2.0 * c.plant.omega0);
  c.fit.max_iterations = static_cast<int>(integer("residual.max_iterations", 500));
  c.fit.gradient_tolerance = num("residual.gradient_tolerance", c.fit.gradient_tolerance);

  c.witness.amplitude = alpha;
  c.witness.frequency = num("certificate.frequency", c.witness.frequency);
  c.witness.phase = num("certificate.phase", c.witness.phase);
  if (const auto v = tree.get_optional<std::string>("certificate.zeta_grid")) {
    c.certificate.zeta_grid = detail::parse_list(*v, "certificate.zeta_grid");
  }
  if (const auto v = tree.get_optional<std::string>("certificate.horizons")) {
    c.certificate.horizons = detail::parse_list(*v, "certificate.horizons");
  }
  c.gamma_samples = integer("certificate.gamma_samples", c.gamma_samples);
  c.gamma_seed = integer("certificate.gamma_seed", c.gamma_seed);
  c.certificate.tolerance = num("certificate.tolerance", c.certificate.tolerance);
  c.certificate.burn_in = num("certificate.burn_in", c.burn_in);
  c.certificate.decay_factor = num("certificate.decay_factor", c.certificate.decay_factor);
  c.certificate.omega0 = c.plant.omega0;
  c.certificate.dt = c.dt;

  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse_config(in);
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;
  std::optional<double> alpha;
};

// The seed override moves the training seed and keeps the validation offset.
inline ExperimentConfig apply_overrides(ExperimentConfig c, const Overrides& o) {
  if (o.seed) {
    const std::uint64_t offset = c.validation.seed - c.training.seed;
    c.training.seed = *o.seed;
    c.validation.seed = *o.seed + offset;
  }
  if (o.horizon) {
    c.horizon = *o.horizon;
    c.training_horizon = *o.horizon;
    c.validation_horizon = *o.horizon;
  }
  if (o.alpha) {
    c.identification.amplitude = *o.alpha;
    c.training.amplitude = *o.alpha;
    c.validation.amplitude = *o.alpha;
    c.witness.amplitude = *o.alpha;
    c.residual_alpha = *o.alpha;
  }
  c.validate();
  return c;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  auto excitation = [](const ExcitationSpec& e) {
    nlohmann::json j{{"kind", e.kind == ExcitationKind::sinusoid ? "sinusoid" : "pseudorandom"},
                     {"alpha", e.amplitude}};
    if (e.kind == ExcitationKind::sinusoid) {
      j["omega"] = e.frequency;
      j["phi"] = e.phase;
    } else {
      j["node_period"] = e.node_period;
      j["seed"] = e.seed;
    }
    return j;
  };
  return {{"name", c.name},
          {"plant", {{"zeta", c.plant.zeta}, {"omega0", c.plant.omega0}}},
          {"horizon", c.horizon},
          {"dt", c.dt},
          {"burn_in", c.burn_in},
          {"fit_burn_in", c.fit_burn_in},
          {"identification", excitation(c.identification)},
          {"search", {{"lo", c.search.lo}, {"hi", c.search.hi}, {"grid_step", c.search.grid_step},
                      {"tolerance", c.search.tolerance}, {"max_hi", c.max_search_hi}}},
          {"training", excitation(c.training)},
          {"training_horizon", c.training_horizon},
          {"validation", excitation(c.validation)},
          {"validation_horizon", c.validation_horizon},
          {"residual", {{"alpha", c.residual_alpha}, {"m", c.m}, {"n", c.n}, {"omega_c", c.fit.omega_c},
                        {"max_iterations", c.fit.max_iterations},
                        {"gradient_tolerance", c.fit.gradient_tolerance}}},
          {"certificate", {{"witness", excitation(c.witness)}, {"zeta_grid", c.certificate.zeta_grid},
                           {"horizons", c.certificate.horizons}, {"gamma_samples", c.gamma_samples},
                           {"gamma_seed", c.gamma_seed}, {"tolerance", c.certificate.tolerance},
                           {"burn_in", c.certificate.burn_in}, {"decay_factor", c.certificate.decay_factor}}}};
}

// Mismatch norm over the whole record and after the burn-in.
struct NormPair {
  double whole = 0.0;
  double after_burn_in = 0.0;
};

inline NormPair mismatch_pair(const Signal& reference, const Signal& candidate, double burn_in) {
  return {mismatch_norm(reference, candidate, 0.0), mismatch_norm(reference, candidate, burn_in)};
}

struct StageSignals {
  Signal u;
  Signal y;
  Signal y_hat;
  std::optional<Signal> r;
};

struct IdentificationResult {
  ZetaFit fit;
  std::vector<std::string> notes;
  StageSignals signals;
};

// Step 1. Widens the upper end of the search interval (doubling) while the
// loss minimum sits on that boundary.
inline IdentificationResult identify(const ExperimentConfig& c) {
  IdentificationResult out;
  const Grid grid = Grid::covering(c.horizon, c.dt);
  const Signal u = sinusoid(c.identification, grid);
  const Signal y = simulate_true(c.plant, u);
  ZetaSearch search = c.search;
  for (;;) {
    try {
      out.fit = estimate_zeta(u, y, c.plant.omega0, search);
      break;
    } catch (const BracketingError& e) {
      if (!e.at_upper() || search.hi >= c.max_search_hi) throw;
      const double wider = std::min(2.0 * search.hi, c.max_search_hi);
      out.notes.push_back(std::string(e.what()) + "; retrying with hi = " + io::format_number(wider));
      search.hi = wider;
    }
  }
  out.signals = {u, y, simulate_physical({out.fit.zeta_hat, c.plant.omega0}, u), std::nullopt};
  return out;
}

struct TrainingResult {
  ResidualFit fit;
  StageSignals signals;
};

// Step 2.
inline TrainingResult fit_residual_stage(const ExperimentConfig& c, double zeta_hat) {
  const Grid grid = Grid::covering(c.training_horizon, c.dt);
  const Signal u = pseudorandom(c.training, grid);
  const Signal y = simulate_true(c.plant, u);
  const Signal y_hat = simulate_physical({zeta_hat, c.plant.omega0}, u);
  TrainingResult out;
  out.fit = fit_residual(u, y - y_hat, c.residual_alpha, c.m, c.n, c.fit);
  out.signals = {u, y, y_hat, simulate_residual(out.fit.params, u)};
  return out;
}

// Step 3.
inline StageSignals validate_stage(const ExperimentConfig& c, double zeta_hat, const ResidualParams& residual) {
  const Grid grid = Grid::covering(c.validation_horizon, c.dt);
  const Signal u = pseudorandom(c.validation, grid);
  const Signal y = simulate_true(c.plant, u);
  return {u, y, simulate_physical({zeta_hat, c.plant.omega0}, u), simulate_residual(residual, u)};
}

struct CertificateSet {
  CertificateReport zeroth;
  CertificateReport first;
  CertificateReport zeroth_mutation;
  CertificateReport first_mutation;

  // Class certificates pass and both mutation controls are rejected.
  bool ok() const { return zeroth.pass && first.pass && !zeroth_mutation.pass && !first_mutation.pass; }
};

inline CertificateSet certify(const ExperimentConfig& c) {
  const auto gammas = sample_residuals(c.residual_alpha, c.m, c.n, c.gamma_samples, c.gamma_seed);
  CertificateOptions opt = c.certificate;
  CertificateOptions mutated = opt;
  mutated.features = FeatureSet::linear_feature;
  return {check_zeroth_order(c.witness, gammas, opt), check_first_order(c.witness, gammas, opt),
          check_zeroth_order(c.witness, gammas, mutated), check_first_order(c.witness, gammas, mutated)};
}

struct RunRecord {
  ExperimentConfig config;
  std::string status = "incomplete";
  std::vector<std::string> notes;
  std::optional<ZetaFit> identification;
  std::optional<NormPair> identification_mismatch;
  std::optional<ResidualFit> residual;
  std::optional<NormPair> training_physical;
  std::optional<NormPair> training_hybrid;
  std::optional<NormPair> validation_physical;
  std::optional<NormPair> validation_hybrid;
  std::optional<OneStepConvergence> one_step;
  std::optional<CertificateSet> certificates;
  std::map<std::string, StageSignals> signals;  // "identification", "training", "validation"
  std::vector<std::string> manifest;            // paths relative to the run directory
};

inline nlohmann::json to_json(const RunRecord& r) {
  using nlohmann::json;
  auto pair = [](const std::optional<NormPair>& p) -> json {
    if (!p) return nullptr;
    return {{"whole", p->whole}, {"after_burn_in", p->after_burn_in}};
  };
  json j{{"status", r.status}, {"notes", r.notes}, {"config", to_json(r.config)}};
  j["zeta_hat"] = r.identification ? json(r.identification->zeta_hat) : json(nullptr);
  j["mismatch"] = {{"identification_physical", pair(r.identification_mismatch)},
                   {"training_physical", pair(r.training_physical)},
                   {"training_hybrid", pair(r.training_hybrid)},
                   {"validation_physical", pair(r.validation_physical)},
                   {"validation_hybrid", pair(r.validation_hybrid)}};
  j["residual"] = r.residual ? io::to_json(r.residual->params) : json(nullptr);
  j["residual_fit"] = r.residual ? io::to_json(*r.residual) : json(nullptr);
  if (r.one_step) {
    j["one_step_convergence"] = {{"zeta_hat", r.one_step->zeta_hat},
                                 {"zeta_iterated", r.one_step->zeta_iterated},
                                 {"relative_change", r.one_step->relative_change}};
  } else {
    j["one_step_convergence"] = nullptr;
  }
  if (r.certificates) {
    j["certificates"] = {{"zeroth", r.certificates->zeroth.pass ? "PASS" : "FAIL"},
                         {"first", r.certificates->first.pass ? "PASS" : "FAIL"},
                         {"zeroth_mutation", r.certificates->zeroth_mutation.pass ? "PASS" : "FAIL"},
                         {"first_mutation", r.certificates->first_mutation.pass ? "PASS" : "FAIL"}};
  } else {
    j["certificates"] = nullptr;
  }
  j["manifest"] = r.manifest;
  return j;
}

// Creates <parent>/<name>-<UTC timestamp>[-k], never reusing an existing directory.
inline std::filesystem::path fresh_run_directory(const std::filesystem::path& parent, const std::string& name) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  std::filesystem::create_directories(parent);
  const std::string base = name + "-" + stamp;
  for (int k = 0;; ++k) {
    const auto candidate = parent / (k == 0 ? base : base + "-" + std::to_string(k));
    if (std::filesystem::create_directory(candidate)) return candidate;
  }
}

namespace detail {

inline void persist_stage(RunRecord& record, const std::filesystem::path& dir, const std::string& stage,
                          const StageSignals& s) {
  std::filesystem::create_directories(dir / "signals");
  auto put = [&](const std::string& what, const Signal& sig) {
    const std::string rel = "signals/" + stage + "_" + what + ".csv";
    io::write_signal_csv(sig, dir / rel);
    record.manifest.push_back(rel);
  };
  put("u", s.u);
  put("y", s.y);
  put("y_hat", s.y_hat);
  if (s.r) put("r", *s.r);
}

}  // namespace detail

// Writes every persisted artifact of the record into dir and refreshes the manifest.
inline void persist(RunRecord& record, const std::filesystem::path& dir) {
  record.manifest.clear();
  for (const auto& [stage, s] : record.signals) detail::persist_stage(record, dir, stage, s);
  std::filesystem::create_directories(dir / "params");
  if (record.identification) {
    io::write_json(io::to_json(*record.identification), dir / "params/physical.json");
    record.manifest.push_back("params/physical.json");
  }
  if (record.residual) {
    io::write_json(io::to_json(record.residual->params), dir / "params/residual.json");
    record.manifest.push_back("params/residual.json");
  }
  if (record.certificates) {
    std::filesystem::create_directories(dir / "certificates");
    const std::pair<const char*, const CertificateReport*> certs[] = {
        {"zeroth", &record.certificates->zeroth},
        {"first", &record.certificates->first},
        {"zeroth_mutation", &record.certificates->zeroth_mutation},
        {"first_mutation", &record.certificates->first_mutation}};
    for (const auto& [name, rep] : certs) {
      const std::string rel = std::string("certificates/") + name + ".json";
      io::write_json(io::to_json(*rep), dir / rel);
      record.manifest.push_back(rel);
    }
  }
  record.manifest.push_back("report.json");
  io::write_json(to_json(record), dir / "report.json");
}

enum class Stage { identify = 0, fit_residual = 1, validate = 2, certify = 3 };

// Stages up to and including the given one.
// When dir is set, artifacts are persisted there, including on failure, in
// which case report.json carries status "failed: <stage>: <message>" and the
// error is rethrown.
inline RunRecord run_pipeline(const ExperimentConfig& config, const std::optional<std::filesystem::path>& dir = {},
                              Stage through = Stage::certify) {
  config.validate();
  RunRecord record;
  record.config = config;
  const double b = config.burn_in;
  std::string stage = "identify";
  try {
    auto id = identify(config);
    record.identification = id.fit;
    record.notes = id.notes;
    record.identification_mismatch = mismatch_pair(id.signals.y, id.signals.y_hat, b);
    record.signals["identification"] = id.signals;

    if (through >= Stage::fit_residual) {
      stage = "fit-residual";
      auto train = fit_residual_stage(config, id.fit.zeta_hat);
      record.residual = train.fit;
      record.training_physical = mismatch_pair(train.signals.y, train.signals.y_hat, b);
      record.training_hybrid = mismatch_pair(train.signals.y, train.signals.y_hat + *train.signals.r, b);
      record.signals["training"] = train.signals;
      record.signals["identification"].r = simulate_residual(train.fit.params, id.signals.u);
    }

    if (through >= Stage::validate) {
      stage = "validate";
      const ResidualParams& residual = record.residual->params;
      auto val = validate_stage(config, id.fit.zeta_hat, residual);
      record.validation_physical = mismatch_pair(val.y, val.y_hat, b);
      record.validation_hybrid = mismatch_pair(val.y, val.y_hat + *val.r, b);
      record.signals["validation"] = val;

      stage = "one-step";
      ZetaSearch search = config.search;
      search.hi = id.fit.search.hi;
      record.one_step = one_step_convergence_check(id.signals.u, id.signals.y, id.fit.zeta_hat, residual,
                                                   config.plant.omega0, search);
    }

    if (through >= Stage::certify) {
      stage = "certify";
      record.certificates = certify(config);
    }
    record.status = "complete";
  } catch (const Error& e) {
    record.status = "failed: " + stage + ": " + e.what();
    if (dir) persist(record, *dir);
    throw;
  }
  if (dir) persist(record, *dir);
  return record;
}

// Figures 1-3 belong to the medium-signal run, 4-6 to the large-signal run;
// within each triple: identification, residual fit, validation.
struct FigureSpec {
  int figure = 0;
  std::string stage;
  std::string regime;
};

inline FigureSpec figure_spec(int figure) {
  static const char* stages[] = {"identification", "training", "validation"};
  if (figure < 1 || figure > 6) throw ArgumentError("unknown figure id " + std::to_string(figure));
  return {figure, stages[(figure - 1) % 3], figure <= 3 ? "medium" : "large"};
}

// Writes plots/fig<k>.csv and plots/fig<k>.schema.json from the persisted
// signals of a run directory. Identification figures carry (t, y_real,
// y_physical); the others add residual_target = y - y_hat and
// residual_predicted = r.
inline std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& run_dir, int figure) {
  const FigureSpec spec = figure_spec(figure);
  const auto report = io::read_json(run_dir / "report.json");
  const std::string name = report.at("config").at("name").get<std::string>();
  if ((name == "medium" || name == "large") && name != spec.regime) {
    throw ManifestError("figure " + std::to_string(figure) + " belongs to the " + spec.regime +
                        "-signal run, this run is '" + name + "'");
  }
  const auto path = [&](const std::string& what) { return run_dir / ("signals/" + spec.stage + "_" + what + ".csv"); };
  const Signal y = io::read_signal_csv(path("y"));
  const Signal y_hat = io::read_signal_csv(path("y_hat"));
  Signal::require_same_grid(y, y_hat);
  const bool with_residual = spec.stage != "identification";
  std::optional<Signal> r;
  if (with_residual) {
    r = io::read_signal_csv(path("r"));
    Signal::require_same_grid(y, *r);
  }

  std::filesystem::create_directories(run_dir / "plots");
  const auto csv = run_dir / ("plots/fig" + std::to_string(figure) + ".csv");
  const auto schema = run_dir / ("plots/fig" + std::to_string(figure) + ".schema.json");
  {
    std::ofstream out(csv);
    if (!out) throw Error("cannot write " + csv.string());
    out << (with_residual ? "t,y_real,y_physical,residual_target,residual_predicted\n" : "t,y_real,y_physical\n");
    for (std::size_t i = 0; i < y.size(); ++i) {
      out << io::format_number(y.time(i)) << ',' << io::format_number(y[i]) << ',' << io::format_number(y_hat[i]);
      if (with_residual) out << ',' << io::format_number(y[i] - y_hat[i]) << ',' << io::format_number((*r)[i]);
      out << '\n';
    }
  }
  nlohmann::json columns = nlohmann::json::array(
      {{{"name", "t"}, {"unit", "s"}, {"description", "sample time"}},
       {{"name", "y_real"}, {"description", "output sin(x) of the nonlinear pendulum"}},
       {{"name", "y_physical"}, {"description", "output of the linear model at the identified zeta"}}});
  if (with_residual) {
    columns.push_back({{"name", "residual_target"}, {"description", "y_real - y_physical"}});
    columns.push_back({{"name", "residual_predicted"}, {"description", "output r of the fitted residual model"}});
  }
  io::write_json({{"figure", figure}, {"stage", spec.stage}, {"regime", spec.regime}, {"columns", columns}}, schema);
  return {csv, schema};
}

// Recomputes every mismatch norm of report.json from the persisted CSV signals.
// Returns the largest absolute deviation.
inline double verify_manifest(const std::filesystem::path& run_dir) {
  const auto report = io::read_json(run_dir / "report.json");
  for (const auto& rel : report.at("manifest")) {
    if (!std::filesystem::exists(run_dir / rel.get<std::string>())) {
      throw ManifestError("manifest lists missing file " + rel.get<std::string>());
    }
  }
  const double b = report.at("config").at("burn_in").get<double>();
  const auto& mm = report.at("mismatch");
  double worst = 0.0;
  auto check = [&](const std::string& key, const std::string& stage, bool hybrid) {
    if (mm.at(key).is_null()) return;
    const auto load = [&](const std::string& what) {
      return io::read_signal_csv(run_dir / ("signals/" + stage + "_" + what + ".csv"));
    };
    const Signal y = load("y");
    Signal candidate = load("y_hat");
    if (hybrid) candidate += load("r");
    worst = std::max(worst, std::abs(mismatch_norm(y, candidate, 0.0) - mm.at(key).at("whole").get<double>()));
    worst = std::max(worst, std::abs(mismatch_norm(y, candidate, b) - mm.at(key).at("after_burn_in").get<double>()));
  };
  check("identification_physical", "identification", false);
  check("training_physical", "training", false);
  check("training_hybrid", "training", true);
  check("validation_physical", "validation", false);
  check("validation_hybrid", "validation", true);
  return worst;
}

}  // namespace greybox::workbench

#endif  // GREYBOX_WORKBENCH_HPP
