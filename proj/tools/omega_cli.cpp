// Command-line front end for the experiment layer.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>

#include "omega/experiment.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kResource = 3, kIo = 4 };

bool use_color() {
  const char* no_color = std::getenv("NO_COLOR");
  if (no_color != nullptr && no_color[0] != '\0') return false;
  return isatty(STDERR_FILENO) != 0;
}

int report_error(const char* kind, const std::exception& e, int code) {
  if (use_color()) {
    std::cerr << "\033[1;31merror\033[0m (" << kind << "): " << e.what() << '\n';
  } else {
    std::cerr << "error (" << kind << "): " << e.what() << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and Monte Carlo statistics for maximal cyclic submodules of Omega_n^2"};
  app.set_version_flag("--version", std::string(omega::kVersion));

  std::optional<std::string> mode, prime, levels, trials, seed, shape, output, format, threads, config_path;
  bool timing = false;
  app.add_option("--mode", mode, "count | exhaustive | montecarlo | tower | isotropic");
  app.add_option("--prime,-p", prime, "odd prime p <= 97");
  app.add_option("--levels,-n", levels, "comma-separated levels (rank levels in isotropic mode)");
  app.add_option("--trials", trials, "Monte Carlo trials (montecarlo, tower)");
  app.add_option("--seed", seed, "RNG seed (default 0)");
  app.add_option("--shape", shape, "comma-separated torsion block levels (isotropic mode)");
  app.add_option("--output,-o", output, "output path prefix; .csv/.json is appended");
  app.add_option("--format", format, "csv | json | both");
  app.add_option("--threads", threads, "worker threads, 0 = all cores; results do not depend on it");
  app.add_option("--config", config_path, "key=value file; command-line flags override it");
  app.add_flag("--timing", timing, "fill the runtime_ms CSV column (makes CSV output run-dependent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    omega::ConfigMap values;
    if (config_path) values = omega::read_config_file(*config_path);
    auto overlay = [&](const char* key, const std::optional<std::string>& v) {
      if (v) values[key] = *v;
    };
    overlay("mode", mode);
    overlay("prime", prime);
    overlay("levels", levels);
    overlay("trials", trials);
    overlay("seed", seed);
    overlay("shape", shape);
    overlay("output", output);
    overlay("format", format);
    overlay("threads", threads);
    if (timing) values["timing"] = "true";

    const auto config = omega::config_from_map(values);
    const auto report = omega::run(config);
    for (const auto& path : omega::emit(report)) std::cout << path.string() << '\n';
    return kOk;
  } catch (const omega::usage_error& e) {
    return report_error("usage", e, kUsage);
  } catch (const omega::resource_error& e) {
    return report_error("resource", e, kResource);
  } catch (const omega::io_error& e) {
    return report_error("io", e, kIo);
  } catch (const std::exception& e) {
    return report_error("internal", e, kFailure);
  }
}
