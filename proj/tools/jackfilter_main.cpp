#include <CLI11.hpp>
#include <cstdint>
#include <iostream>

#include "jackfilter/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitNumeric = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive jackknife-ensemble Kalman filter"};
  app.require_subcommand(1);

  std::string config_path;
  std::string meas_path;
  std::string estimates_path;
  std::string truth_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int n = 8;
  int r = 6;

  auto* sim = app.add_subcommand("simulate", "simulate truth + measurements");
  sim->add_option("-c,--config", config_path, "run configuration")
      ->required();

  auto* filt = app.add_subcommand("filter", "run the adaptive filter");
  filt->add_option("-c,--config", config_path, "run configuration")
      ->required();
  filt->add_option("-i,--input", meas_path, "measurement CSV")->required();
  filt->add_option("-o,--output", out_path, "estimates CSV")->required();
  filt->add_option("--truth", truth_path, "truth CSV for error column");

  auto* oracle = app.add_subcommand("oracle",
                                    "brute-force jackknife enumeration");
  oracle->add_option("-n", n, "data count")->required();
  oracle->add_option("-r", r, "subset size")->required();
  oracle->add_option("--seed", seed, "rng seed");
  oracle->add_option("-o,--output", out_path, "oracle CSV")->required();

  auto* eval = app.add_subcommand("evaluate", "error norms vs truth");
  eval->add_option("-e,--estimates", estimates_path, "estimates CSV")
      ->required();
  eval->add_option("-t,--truth", truth_path, "truth CSV")->required();
  eval->add_option("-o,--output", out_path, "summary CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      jackfilter::cmd_simulate(config_path);
    } else if (filt->parsed()) {
      jackfilter::cmd_filter(config_path, meas_path, out_path, truth_path);
    } else if (oracle->parsed()) {
      jackfilter::cmd_oracle(n, r, seed, out_path);
    } else if (eval->parsed()) {
      jackfilter::cmd_evaluate(estimates_path, truth_path, out_path);
    }
  } catch (const jackfilter::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const jackfilter::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const jackfilter::GridMismatch& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const jackfilter::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    // surface nested step context when present
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      std::cerr << "  caused by: " << inner.what() << '\n';
    } catch (...) {
    }
    return kExitNumeric;
  }
  return 0;
}
