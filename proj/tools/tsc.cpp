// tsc: command-line front end.
//
// exit codes: 0 ok, 1 invariant failure (or non-converged eigensolve),
// 2 bad input, 3 budget exceeded.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsc/common.hpp"
#include "tsc/fmax_estimate.hpp"
#include "tsc/parallel.hpp"
#include "tsc/report.hpp"
#include "tsc/tensor_model.hpp"
#include "tsc/verify.hpp"

namespace {

struct InstanceArgs {
  std::string tensor_path;
  int n = 0;
  int d = 0;
  std::string model = "rademacher";
  std::optional<std::uint64_t> seed;
};

void add_instance_options(CLI::App* app, InstanceArgs& a) {
  app->add_option("--tensor", a.tensor_path, "tensor file written by `tsc gen`");
  app->add_option("--n", a.n, "dimension");
  app->add_option("--d", a.d, "tensor order");
  app->add_option("--model", a.model, "rademacher | gaussian")->capture_default_str();
  app->add_option("--seed", a.seed, "PRNG seed");
}

tsc::DenseTensor resolve_instance(const InstanceArgs& a) {
  if (!a.tensor_path.empty()) return tsc::load_tensor(a.tensor_path);
  if (a.n <= 0 || a.d <= 0) throw tsc::InputError("give --tensor FILE or --n, --d and --seed");
  if (!a.seed) throw tsc::InputError("--seed is required when no --tensor file is given");
  return tsc::sample_tensor(a.n, a.d, tsc::parse_model(a.model), *a.seed);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tsc::InputError("cannot open '" + path + "' for writing");
  out << text;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral certificates for sum-of-squares relaxations of random tensor maximization"};
  app.set_version_flag("--version", std::string(tsc::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<unsigned> threads;
  app.add_option("--threads", threads, "worker threads (overrides TSC_THREADS)");

  // gen
  auto* gen = app.add_subcommand("gen", "sample a tensor and write it to a file");
  InstanceArgs gen_args;
  std::string gen_out;
  bool seed_only = false;
  gen->add_option("--n", gen_args.n, "dimension")->required();
  gen->add_option("--d", gen_args.d, "tensor order")->required();
  gen->add_option("--model", gen_args.model, "rademacher | gaussian")->capture_default_str();
  gen->add_option("--seed", gen_args.seed, "PRNG seed (fresh entropy when omitted)");
  gen->add_option("--out", gen_out, "output path (stdout when omitted)");
  gen->add_flag("--seed-only", seed_only, "store only the header; entries are regenerated from the seed");

  // certify
  auto* cert = app.add_subcommand("certify", "compute certified bounds and write a JSON report");
  InstanceArgs cert_args;
  tsc::CertifyConfig cfg;
  std::string which = "both";
  std::string cert_out;
  int fmax_restarts = 20;
  add_instance_options(cert, cert_args);
  cert->add_option("--q", cfg.q, "relaxation degree")->required();
  cert->add_option("--which", which, "upper | lower | both")->capture_default_str();
  cert->add_option("--tol", cfg.spectral.tol, "eigensolver tolerance")->capture_default_str();
  cert->add_option("--max-iter", cfg.spectral.max_iter, "eigensolver iteration cap (0 = automatic)");
  cert->add_option("--fmax-restarts", fmax_restarts, "restarts for the heuristic maximum (0 disables)")
      ->capture_default_str();
  cert->add_option("--out", cert_out, "report path (stdout when omitted)");
  cert->add_flag("--timings", cfg.timings, "add wall-clock timings and a timestamp (breaks byte stability)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a configured experiment sweep");
  std::string sweep_config;
  std::string sweep_out;
  std::string sweep_format = "csv";
  std::optional<int> sweep_trials;
  sweep->add_option("config", sweep_config, "sweep config JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--trials", sweep_trials, "override the trial count of the config");
  sweep->add_option("--out", sweep_out, "write PREFIX.csv and PREFIX.jsonl instead of stdout");
  sweep->add_option("--format", sweep_format, "stdout format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  std::string verify_format = "csv";
  verify->add_option("--format", verify_format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  // fmax
  auto* fmax = app.add_subcommand("fmax", "heuristic (uncertified) sphere maximum");
  InstanceArgs fmax_args;
  tsc::FmaxOptions fopt;
  add_instance_options(fmax, fmax_args);
  fmax->add_option("--restarts", fopt.restarts, "random restarts")->capture_default_str();
  fmax->add_option("--max-iter", fopt.max_iter, "iterations per restart")->capture_default_str();
  fmax->add_option("--tol", fopt.tol, "step-size stopping tolerance")->capture_default_str();
  fmax->add_option("--start-seed", fopt.seed, "seed of the restart stream")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      if (!gen_args.seed) gen_args.seed = fresh_seed();
      const tsc::DenseTensor t =
          tsc::sample_tensor(gen_args.n, gen_args.d, tsc::parse_model(gen_args.model), *gen_args.seed);
      if (gen_out.empty()) {
        std::cout << tsc::tensor_to_json(t, !seed_only).dump() << '\n';
      } else {
        tsc::save_tensor(gen_out, t, !seed_only);
      }
      return 0;
    }
    if (*cert) {
      const tsc::DenseTensor t = resolve_instance(cert_args);
      cfg.which = tsc::parse_which(which);
      cfg.include_fmax = fmax_restarts > 0;
      cfg.fmax.restarts = std::max(1, fmax_restarts);
      const nlohmann::ordered_json report = tsc::certify(t, cfg);
      write_text(cert_out, report.dump(2) + "\n");
      return tsc::report_has_violation(report) ? 1 : 0;
    }
    if (*sweep) {
      std::ifstream in(sweep_config);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw tsc::InputError(std::string("sweep config is not valid JSON: ") + e.what());
      }
      tsc::SweepConfig sc = tsc::sweep_config_from_json(j);
      if (sweep_trials) sc.trials = *sweep_trials;
      const auto rows = tsc::run_sweep(sc, tsc::resolve_threads(threads));
      const nlohmann::ordered_json summary = tsc::sweep_summary(sc, rows);
      std::ostringstream csv;
      csv << tsc::kSweepCsvHeader << '\n';
      for (const auto& r : rows) csv << tsc::sweep_row_csv(r) << '\n';
      std::ostringstream jsonl;
      for (const auto& r : rows) jsonl << tsc::sweep_row_json(r).dump() << '\n';
      jsonl << summary.dump() << '\n';
      if (!sweep_out.empty()) {
        write_text(sweep_out + ".csv", csv.str());
        write_text(sweep_out + ".jsonl", jsonl.str());
        std::cout << summary.dump(2) << '\n';
      } else {
        std::cout << (sweep_format == "csv" ? csv.str() : jsonl.str());
      }
      for (const auto& r : rows)
        if (!r.error.empty()) std::cerr << "row n=" << r.n << " q=" << r.q << " seed=" << r.seed << ": " << r.error << '\n';
      return summary["violations"].get<std::size_t>() > 0 ? 1 : 0;
    }
    if (*verify) {
      const auto results = tsc::run_verify_suite();
      bool ok = true;
      if (verify_format == "json") {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& r : results) {
          out.push_back({{"check", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"runtime_ms", r.runtime_ms}});
          ok = ok && r.passed;
        }
        std::cout << out.dump(2) << '\n';
      } else {
        auto quoted = [](const std::string& v) {
          std::string q = "\"";
          for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
          return q + "\"";
        };
        std::cout << "check,passed,detail,runtime_ms\n";
        for (const auto& r : results) {
          std::cout << r.name << ',' << (r.passed ? "true" : "false") << ',' << quoted(r.detail) << ','
                    << tsc::format_double(r.runtime_ms) << '\n';
          ok = ok && r.passed;
        }
      }
      return ok ? 0 : 1;
    }
    if (*fmax) {
      const tsc::DenseTensor t = resolve_instance(fmax_args);
      const tsc::MaxEstimate m = tsc::heuristic_fmax(t, fopt);
      nlohmann::ordered_json out;
      out["operation"] = "heuristic_fmax";
      out["certified"] = false;
      out["value"] = m.value;
      out["restarts"] = m.restarts;
      out["iterations"] = m.iterations;
      out["converged"] = m.converged;
      out["argmax"] = std::vector<double>(m.argmax.data(), m.argmax.data() + m.argmax.size());
      std::cout << out.dump(2) << '\n';
      return 0;
    }
  } catch (const tsc::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const tsc::InputError& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return 2;
  } catch (const tsc::ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
