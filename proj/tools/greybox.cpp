// Command-line front end for the grey-box pendulum workflow.
//
// Exit codes: 0 ok, 2 certificate failure, 3 estimation failure, 4 config error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "greybox/io.hpp"
#include "greybox/workbench.hpp"

namespace {

namespace wb = greybox::workbench;

constexpr int kOk = 0;
constexpr int kCertificateFailure = 2;
constexpr int kEstimationFailure = 3;
constexpr int kConfigError = 4;

struct CommonArgs {
  std::string config;
  std::string out = "runs";
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;
  std::optional<double> alpha;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "experiment configuration (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "parent directory of the run directory")->capture_default_str();
  cmd->add_option("--seed-override", args.seed, "training seed; the validation seed keeps its offset");
  cmd->add_option("--horizon", args.horizon, "simulation horizon in seconds for every stage");
  cmd->add_option("--alpha", args.alpha, "input amplitude for every stage");
}

wb::ExperimentConfig load(const CommonArgs& args) {
  return wb::apply_overrides(wb::load_config(args.config), {args.seed, args.horizon, args.alpha});
}

void summarize(const wb::RunRecord& r, const std::filesystem::path& dir) {
  std::cout << "run directory: " << dir.string() << "\n";
  for (const auto& note : r.notes) std::cout << "note: " << note << "\n";
  if (r.identification) {
    std::cout << "zeta_hat = " << greybox::io::format_number(r.identification->zeta_hat)
              << ", physical mismatch " << 100.0 * r.identification_mismatch->whole << "%\n";
  }
  if (r.residual) {
    std::cout << "residual fit: " << r.residual->iterations << " iterations, " << r.residual->termination
              << "; training mismatch physical " << 100.0 * r.training_physical->whole << "%, hybrid "
              << 100.0 * r.training_hybrid->whole << "%\n";
  }
  if (r.validation_hybrid) {
    std::cout << "validation mismatch physical " << 100.0 * r.validation_physical->whole << "%, hybrid "
              << 100.0 * r.validation_hybrid->whole << "%\n";
  }
  if (r.one_step) {
    std::cout << "one-step convergence: zeta " << r.one_step->zeta_hat << " -> " << r.one_step->zeta_iterated
              << " (" << 100.0 * r.one_step->relative_change << "%)\n";
  }
  if (r.certificates) {
    std::cout << greybox::io::certificate_table(r.certificates->zeroth) << greybox::io::certificate_table(r.certificates->first)
              << "mutation controls: zeroth " << (r.certificates->zeroth_mutation.pass ? "PASS" : "FAIL") << ", first "
              << (r.certificates->first_mutation.pass ? "PASS" : "FAIL") << " (both must FAIL)\n";
  }
}

int run_stage(const CommonArgs& args, wb::Stage through) {
  const auto config = load(args);
  const auto dir = wb::fresh_run_directory(args.out, config.name);
  const auto record = wb::run_pipeline(config, dir, through);
  summarize(record, dir);
  if (record.certificates && !record.certificates->ok()) return kCertificateFailure;
  return kOk;
}

int run_certify(const CommonArgs& args) {
  const auto config = load(args);
  const auto dir = wb::fresh_run_directory(args.out, config.name);
  wb::RunRecord record;
  record.config = config;
  record.certificates = wb::certify(config);
  record.status = "complete";
  wb::persist(record, dir);
  summarize(record, dir);
  return record.certificates->ok() ? kOk : kCertificateFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grey-box pendulum identification with a Hammerstein-Chebyshev residual"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* identify = app.add_subcommand("identify", "estimate zeta from the sinusoidal identification experiment");
  auto* fit = app.add_subcommand("fit-residual", "identify, then fit the residual on the training record");
  auto* validate = app.add_subcommand("validate", "identify, fit, and evaluate on the validation record");
  auto* certify = app.add_subcommand("certify", "check the zeroth- and first-order incompatibility certificates");
  auto* pipeline = app.add_subcommand("pipeline", "every stage including certificates");
  for (auto* cmd : {identify, fit, validate, certify, pipeline}) add_common(cmd, args);

  std::string run_dir;
  std::vector<int> figures;
  auto* plots = app.add_subcommand("emit-plots", "write plot data for figures of a finished run");
  plots->add_option("--run", run_dir, "run directory produced by pipeline")->required()->check(CLI::ExistingDirectory);
  plots->add_option("--figure", figures, "figure ids 1-6; default: the three of the run's regime");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*identify) return run_stage(args, wb::Stage::identify);
    if (*fit) return run_stage(args, wb::Stage::fit_residual);
    if (*validate) return run_stage(args, wb::Stage::validate);
    if (*pipeline) return run_stage(args, wb::Stage::certify);
    if (*certify) return run_certify(args);
    if (*plots) {
      if (figures.empty()) {
        const auto name = greybox::io::read_json(std::filesystem::path(run_dir) / "report.json")
                              .at("config")
                              .at("name")
                              .get<std::string>();
        figures = name == "large" ? std::vector<int>{4, 5, 6} : std::vector<int>{1, 2, 3};
      }
      for (int k : figures) {
        for (const auto& p : wb::emit_plot_data(run_dir, k)) std::cout << p.string() << "\n";
      }
      return kOk;
    }
  } catch (const greybox::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const greybox::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return kConfigError;
  } catch (const greybox::ManifestError& e) {
    std::cerr << "run directory error: " << e.what() << "\n";
    return kConfigError;
  } catch (const greybox::Error& e) {
    std::cerr << "estimation failure: " << e.what() << "\n";
    return kEstimationFailure;
  }
  return kOk;
}
