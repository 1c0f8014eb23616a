#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/io.hpp"
#include "microtrap/repro.hpp"
#include "microtrap/runner.hpp"
#include "microtrap/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"microlens microtrap register simulator"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "execute a scenario file");
  run_cmd->add_option("scenario", scenario_file, "scenario JSON file")
      ->required();
  run_cmd->add_option("--out", run_out, "override the scenario's output_dir");

  std::string repro_out;
  auto* repro_cmd = app.add_subcommand(
      "repro", "run the built-in reference checks and write the report");
  repro_cmd->add_option("--out", repro_out, "output directory")->required();

  std::string sweep_array;
  double tmin_s = 0.0, tmax_s = 0.0;
  int points = 0;
  std::string sweep_out = ".";
  auto* sweep_cmd = app.add_subcommand(
      "sweep-transport", "heating sweep for a built-in array");
  sweep_cmd->add_option("--array", sweep_array, "register30 or register55")
      ->required();
  sweep_cmd->add_option("--tmin", tmin_s, "shortest duration, seconds")
      ->required();
  sweep_cmd->add_option("--tmax", tmax_s, "longest duration, seconds")
      ->required();
  sweep_cmd->add_option("--points", points, "sample count")->required();
  sweep_cmd->add_option("--out", sweep_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      auto s = microtrap::scenario::load_scenario(scenario_file);
      auto base_dir = std::filesystem::path(scenario_file).parent_path();
      microtrap::runner::run_scenario(s, base_dir, run_out);
      std::cout << "outputs written to "
                << (run_out.empty() ? s.output_dir : run_out) << "\n";
      return kExitOk;
    }
    if (repro_cmd->parsed()) {
      auto checks = microtrap::repro::builtin_checks();
      std::string report = microtrap::repro::format_report(checks);
      std::filesystem::create_directories(repro_out);
      microtrap::io::write_text(
          std::filesystem::path(repro_out) / "repro_report.txt", report);
      std::cout << report;
      return microtrap::repro::all_passed(checks) ? kExitOk
                                                  : kExitChecksFailed;
    }
    if (sweep_cmd->parsed()) {
      const auto& a = microtrap::scenario::builtin_array(sweep_array);
      std::filesystem::create_directories(sweep_out);
      auto csv = std::filesystem::path(sweep_out) /
                 ("sweep_" + sweep_array + ".csv");
      microtrap::runner::write_transport_sweep(
          csv, a.lens_spec().site_spacing_m(), a.trap_params().omega_r,
          microtrap::constants::rb85_mass_kg, tmin_s, tmax_s, points);
      std::cout << "wrote " << csv.string() << "\n";
      return kExitOk;
    }
  } catch (const microtrap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const microtrap::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::out_of_range& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
