#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spongedim/io.hpp"
#include "spongedim/spongedim.hpp"
#include "spongedim/suites.hpp"

namespace {

using namespace spongedim;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;
constexpr int kExitComputation = 3;

struct ConfigArg {
  std::string flag;
  std::string positional;

  std::string path() const {
    if (!flag.empty()) return flag;
    if (!positional.empty()) return positional;
    fail(ErrorKind::ConfigError, "a config file is required (--config PATH)");
  }
};

void add_config(CLI::App* cmd, ConfigArg& arg) {
  cmd->add_option("--config,-c", arg.flag, "Analysis config (JSON)");
  cmd->add_option("config_file", arg.positional, "Analysis config (JSON), same as --config");
}

void emit(const nlohmann::json& doc, const std::optional<std::string>& path) {
  const std::string text = doc.dump(2) + "\n";
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path);
  if (!out) fail(ErrorKind::ConfigError, "cannot write '" + *path + "'");
  out << text;
}

ShiftMeasure<double> default_measure(const Analysis& a) {
  if (a.x.is_full()) return ShiftMeasure<double>::bernoulli(a.x.digits(), full_dim_marginal(a.x.digits(), a.spec).marginal);
  return maximal_entropy_measure(a.x);
}

double default_gamma(const Analysis& a) {
  if (a.x.is_full()) return hausdorff_dimension_sponge(a.x.digits(), a.spec);
  return box_dimension(a.x, a.spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimensions, maximal-entropy measures and approximate-cube statistics of diagonal sponges"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  ConfigArg report_cfg, pressure_cfg, cubes_cfg, sample_cfg;
  std::optional<std::string> report_out;
  auto* report = app.add_subcommand("report", "Dimensions, verdicts and witnesses as a JSON report");
  add_config(report, report_cfg);
  report->add_option("--out,-o", report_out, "Write the report here instead of the configured path or stdout");

  int kmax = 0;
  auto* pressure = app.add_subcommand("pressure", "Weighted pressure estimates log Z(k)/k");
  add_config(pressure, pressure_cfg);
  pressure->add_option("--kmax", kmax, "Largest word length (defaults to budgets.k_max)")->check(CLI::PositiveNumber);

  int cube_k = 0, cube_kmin = 1;
  bool count = false, empirical = false;
  auto* cubes = app.add_subcommand("cubes", "Approximate-cube counts");
  add_config(cubes, cubes_cfg);
  cubes->add_option("--k", cube_k, "Cube level")->required()->check(CLI::PositiveNumber);
  auto* count_flag = cubes->add_flag("--count", count, "Print #Q_k(X)");
  cubes->add_flag("--empirical", empirical, "Fit log #Q_k against k log n_s over [kmin, k]")->excludes(count_flag);
  cubes->add_option("--kmin", cube_kmin, "Smallest level for --empirical")->check(CLI::PositiveNumber);

  int sample_k = 0;
  std::optional<std::uint64_t> sample_n, sample_seed;
  std::optional<double> gamma;
  std::optional<std::string> dump_path;
  bool nu = false;
  double delta = 0.5;
  auto* sample = app.add_subcommand("sample", "Monte Carlo statistics of log-densities on approximate cubes");
  add_config(sample, sample_cfg);
  sample->add_option("--k", sample_k, "Cube level")->required()->check(CLI::PositiveNumber);
  sample->add_option("--n", sample_n, "Sample count (defaults to budgets.samples)");
  sample->add_option("--seed", sample_seed, "Seed (defaults to budgets.seed)");
  sample->add_option("--gamma", gamma, "Power gauge exponent (defaults to the Hausdorff dimension)");
  sample->add_flag("--nu", nu, "Sample from the perturbed product measure");
  sample->add_option("--delta", delta, "Perturbation strength in (0, log 2]");
  sample->add_option("--dump", dump_path, "CSV of seed_index,k,log_density");

  std::string suite_name;
  auto* verify = app.add_subcommand("verify", "Run a named check suite");
  verify->add_option("--suite", suite_name, "acceptance, paper-examples, identities or equivalence")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*verify) {
      return suites::run_suite(suites::suite(suite_name)) == 0 ? kExitOk : kExitVerification;
    }
    if (*report) {
      const auto t0 = std::chrono::steady_clock::now();
      const AnalysisConfig cfg = load_config(report_cfg.path());
      const Analysis a = build_analysis(cfg);
      const DimensionReport r = coincidence_report(a.x, a.spec, a.options);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      emit(report_document(r, a, cfg, secs), report_out ? report_out : cfg.outputs.report);
      return kExitOk;
    }
    if (*pressure) {
      const AnalysisConfig cfg = load_config(pressure_cfg.path());
      const Analysis a = build_analysis(cfg);
      emit(to_json(weighted_pressure(a.x, a.spec, kmax > 0 ? kmax : cfg.budgets.k_max, a.options.budget)), std::nullopt);
      return kExitOk;
    }
    if (*cubes) {
      const AnalysisConfig cfg = load_config(cubes_cfg.path());
      const Analysis a = build_analysis(cfg);
      if (empirical) {
        emit(to_json(empirical_box_dimension(a.x, a.spec, cube_kmin, cube_k, a.options.budget)), std::nullopt);
      } else {
        std::cout << count_cubes(a.x, a.spec, cube_k, a.options.budget) << "\n";
      }
      return kExitOk;
    }
    if (*sample) {
      const AnalysisConfig cfg = load_config(sample_cfg.path());
      const Analysis a = build_analysis(cfg);
      DensityOptions opt;
      opt.n_samples = sample_n.value_or(cfg.budgets.samples);
      opt.seed = sample_seed.value_or(cfg.budgets.seed);
      opt.nu_mode = nu;
      opt.delta = delta;
      const auto path = dump_path ? dump_path : cfg.outputs.dump;
      std::unique_ptr<std::FILE, int (*)(std::FILE*)> dump(nullptr, &std::fclose);
      if (path) {
        dump.reset(std::fopen(path->c_str(), "w"));
        if (!dump) fail(ErrorKind::ConfigError, "cannot write '" + *path + "'");
        std::fputs("seed_index,k,log_density\n", dump.get());
        opt.dump = dump.get();
      }
      const DensityDiagnostic dd = density_diagnostic(a.x, a.spec, default_measure(a), Gauge{gamma.value_or(default_gamma(a))}, sample_k, opt);
      emit(to_json(dd), std::nullopt);
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "spongedim: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigError ? kExitConfig : kExitComputation;
  } catch (const std::exception& e) {
    std::cerr << "spongedim: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitOk;
}
