#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "residue_lab/error.hpp"
#include "residue_lab/runner/config.hpp"
#include "residue_lab/runner/experiments.hpp"

namespace rl = residue_lab::runner;

namespace {

const std::vector<std::pair<std::string, std::string>> kValueFlags = {
    {"q", "explicit moduli, comma separated"},
    {"q-family", "primorial:N (primorials with omega <= N)"},
    {"q-range", "a..b (all squarefree q in the range)"},
    {"offsets", "offset sets, e.g. 0,2 or 0;0,2;0,2,6"},
    {"h", "window lengths, comma separated"},
    {"h-grid", "list, a..b, log2 or pinv"},
    {"k", "moment orders"},
    {"lambda", "gap exponents"},
    {"centering", "exact or paper"},
    {"x", "scales X for corollary1"},
    {"bounds", "bound kinds for bounds-sweep, or all"},
    {"system", "JSON class system for omega-sets"},
    {"corpus", "built-in omega-sets corpus: singleton, qr or random"},
    {"out", "output path (- for stdout)"},
    {"format", "csv or json"},
    {"pins", "oracle pin manifest to check against"},
    {"sweeps", "pin id prefixes to compute, all or none"},
    {"mem-budget", "largest sieve in bits"},
    {"term-budget", "largest exponential-sum enumeration"},
    {"threads", "worker threads"},
};

const std::map<std::string, std::string> kDescriptions = {
    {"verify-identities", "check the k_q, tuple-product, singular-series and representation identities"},
    {"moments", "exact window moments against the moment bounds"},
    {"gaps", "gap power sums V_lambda between tuple starts"},
    {"squares", "window variance of squares modulo q"},
    {"omega-sets", "variance bound for general residue-class systems"},
    {"corollary1", "lower-bound statistic for the D* construction"},
    {"bounds-sweep", "every bound kind over a parameter grid"},
    {"pin", "recompute the pinned sweep extrema"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residue-class and tuple-start window statistics", "residue-lab"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", rl::version());
  app.require_subcommand(1);

  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::string> config_path;
  std::map<std::string, bool> no_timing;
  for (const auto& name : rl::experiment_names()) {
    auto* sub = app.add_subcommand(name, kDescriptions.at(name));
    auto& values = given[name];
    for (const auto& [flag, help] : kValueFlags) {
      sub->add_option_function<std::string>(
          "--" + flag, [&values, key = flag](const std::string& v) { values[key] = v; }, help);
    }
    sub->add_option("--config", config_path[name], "JSON config file (flags win over it)");
    sub->add_flag("--no-timing", no_timing[name], "write runtime_ms = 0 for byte-identical reruns");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    rl::RawConfig raw = rl::default_config(experiment);
    if (!config_path[experiment].empty()) raw = rl::merge(raw, rl::load_config_file(config_path[experiment]));
    rl::RawConfig flags(given[experiment].begin(), given[experiment].end());
    if (no_timing[experiment]) flags["no-timing"] = "true";
    raw = rl::merge(raw, flags);

    std::optional<std::string> threads_env;
    if (const char* env = std::getenv("RESIDUE_LAB_THREADS")) threads_env = env;
    const auto config = rl::resolve_config(experiment, raw, threads_env);

    const auto start = std::chrono::steady_clock::now();
    const auto outcome = rl::run_experiment(config);
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    if (outcome.manifest) {
      if (config.out.empty() || config.out == "-") {
        std::cout << outcome.manifest->to_json().dump(2) << '\n';
      } else {
        outcome.manifest->save(config.out);
      }
    } else {
      rl::write_result(outcome.table, config.to_json(), config.timing ? elapsed : 0.0, config.out, config.format);
    }
    for (const auto& f : outcome.failures) std::cerr << "FAIL: " << f << '\n';
    return outcome.failures.empty() ? 0 : 1;
  } catch (const residue_lab::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return 2;
  } catch (const residue_lab::BudgetExceeded& err) {
    std::cerr << "budget exceeded: " << err.what() << '\n';
    return 2;
  } catch (const residue_lab::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
}
