#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "upwave/config.hpp"
#include "upwave/operators.hpp"
#include "upwave/parallel.hpp"
#include "upwave/simulation.hpp"

namespace {

int verify_operators(const std::string& kind, int order, std::size_t n, const std::string& dump) {
  const auto k = upwave::parse_operator_kind(kind);
  const auto op = upwave::build_operator(k, order, n, 1.0 / static_cast<double>(n - 1));
  upwave::CertifyOptions opt;
  opt.random_vectors = 1000;
  const auto rep = upwave::certify(op, opt);
  std::cout << upwave::to_text(rep);
  if (!dump.empty()) {
    std::ofstream out(dump);
    if (!out) throw upwave::Error(upwave::ErrorCode::IoError, "cannot open '" + dump + "' for writing");
    upwave::write_operator_dump(out, op);
  }
  return rep.passed() ? 0 : 1;
}

int run(const std::string& path, bool quiet) {
  const auto cfg = upwave::parse_config(path);
  upwave::RunOptions opt;
  opt.log = quiet ? nullptr : &std::cerr;
  const auto res = upwave::simulate(cfg, opt);
  std::cout << "steps: " << res.steps_done << "\ndt: " << upwave::format_g17(res.plan.dt) << "\n";
  for (const auto& f : res.files) std::cout << "wrote: " << f << "\n";
  return 0;
}

int convergence(const std::string& path, std::size_t levels) {
  const auto cfg = upwave::parse_config(path);
  const auto rep = upwave::convergence_study(cfg, levels, &std::cerr);
  std::cout << upwave::to_text(rep);
  return 0;
}

int energy_audit(const std::string& path) {
  const auto cfg = upwave::parse_config(path);
  const auto rep = upwave::energy_audit(cfg);
  std::cout << upwave::to_text(rep);
  return rep.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"upwave: upwind SBP elastic wave solver"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread count (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

  auto* run_cmd = app.add_subcommand("run", "run a simulation from a config file");
  std::string config;
  bool quiet = false;
  run_cmd->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_flag("--quiet", quiet, "suppress progress lines");

  auto* verify_cmd = app.add_subcommand("verify-operators", "certify one SBP operator pair");
  std::string kind = "upwind";
  int order = 6;
  std::size_t n = 32;
  std::string dump;
  verify_cmd->add_option("--kind", kind, "upwind or central")->check(CLI::IsMember({"upwind", "central"}));
  verify_cmd->add_option("--order", order, "interior order");
  verify_cmd->add_option("--n", n, "number of grid points")->check(CLI::Range(2, 100000));
  verify_cmd->add_option("--dump", dump, "also write the dense matrices to this file");

  auto* conv_cmd = app.add_subcommand("convergence", "manufactured-solution study on refined grids");
  std::size_t levels = 3;
  conv_cmd->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  conv_cmd->add_option("--levels", levels, "number of grids")->check(CLI::Range(2, 6));

  auto* audit_cmd = app.add_subcommand("energy-audit", "step a config and check the discrete energy law");
  audit_cmd->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  upwave::set_num_threads(threads);
  try {
    if (*run_cmd) return run(config, quiet);
    if (*verify_cmd) return verify_operators(kind, order, n, dump);
    if (*conv_cmd) return convergence(config, levels);
    if (*audit_cmd) return energy_audit(config);
  } catch (const upwave::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
