// Command-line front end for the two-copy decoherence-rate toolkit.
//
//   twocopy run --config exp.json [--out report.json] [--csv table.csv]
//   twocopy sweep --config exp.json --param probe.q --values 0.8,0.9,1
//   twocopy purity --eta source.json --shots 10000 [--seed 1]
//   twocopy twirl-check --d 3 --samples 20000 [--seed 1]
//
// Exit codes: 0 success, 2 configuration error, 3 singular configuration,
// 1 anything else.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "twocopy/twocopy.hpp"

namespace {

using nlohmann::json;
using namespace twocopy;

constexpr int kExitConfig = 2;
constexpr int kExitSingular = 3;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse sweep value '" + item + "'");
    }
  }
  if (values.empty()) throw ConfigError("no sweep values given");
  return values;
}

std::string run_csv(const RunReport& report) {
  const auto num = [](double v) { return json(v).dump(); };
  std::ostringstream out;
  out << "param_value,mean,std_error,estimate\n";
  for (const auto& m : report.measurements) {
    out << ',' << num(m.mean) << ',';
    if (m.std_error) out << num(*m.std_error);
    out << ',' << num(report.avg_lambda_squared) << '\n';
  }
  return out.str();
}

json twirl_check(int d, std::uint64_t samples, Seed seed) {
  if (d < 2 || d > kMaxDimension) throw ConfigError("--d must lie in [2, 32]");
  // Random full-rank input state on d (x) d.
  RandomStream stream(split(seed, 0));
  const int n = d * d;
  ComplexMatrix g(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) g(r, c) = Complex(stream.normal(), stream.normal());
  }
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  const DensityMatrix rho(0.5 * (m + m.adjoint()), {d, d});
  const Observable swap = swap_operator(d);
  const double s_before = expectation(swap, rho);
  const ComplexMatrix target = haar_twirl_exact(rho.matrix(), d);

  TwirlConfig cfg;
  cfg.mode = TwirlMode::kHaarMonteCarlo;
  cfg.samples = samples;
  cfg.seed = split(seed, 1);
  const DensityMatrix haar = twirl(rho, cfg);

  json out = {{"d", d},
              {"samples", samples},
              {"seed", seed.value},
              {"swap_before", s_before},
              {"q_from_swap", 0.5 * (1.0 + s_before)},
              {"design_bound", unitary_design_bound(d)},
              {"haar",
               {{"swap_after", expectation(swap, haar)},
                {"trace_distance_to_werner", trace_distance(haar.matrix(), target)},
                {"invariance_residual", twirl_invariance_residual(haar.matrix(), d, split(seed, 2))}}},
              {"exact_design", nullptr}};
  if (d == 2) {
    TwirlConfig exact;
    exact.mode = TwirlMode::kExactDesign;
    const DensityMatrix tw = twirl(rho, exact);
    out["exact_design"] = {{"size", clifford_2design_qubit().size()},
                           {"swap_after", expectation(swap, tw)},
                           {"trace_distance_to_werner", trace_distance(tw.matrix(), target)},
                           {"invariance_residual", twirl_invariance_residual(tw.matrix(), d, split(seed, 2))}};
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-copy direct estimation of decoherence rates"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path, param, values_csv, eta_path;
  std::uint64_t shots = 1000, samples = 20000, seed = 0;
  int d = 2;

  auto* run_cmd = app.add_subcommand("run", "Run one experiment from a JSON config");
  run_cmd->add_option("--config", config_path, "Experiment config")->required();
  run_cmd->add_option("--out", out_path, "Write the JSON report here instead of stdout");
  run_cmd->add_option("--csv", csv_path, "Also write a CSV table");

  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat an experiment over values of one config field");
  sweep_cmd->add_option("--config", config_path, "Experiment config template")->required();
  sweep_cmd->add_option("--param", param, "Dotted path of the swept field, e.g. probe.q")->required();
  sweep_cmd->add_option("--values", values_csv, "Comma-separated values")->required();
  sweep_cmd->add_option("--out", out_path, "Write the JSON reports here instead of stdout");
  sweep_cmd->add_option("--csv", csv_path, "Write the plot table (param_value,mean,std_error,estimate)");

  auto* purity_cmd = app.add_subcommand("purity", "Estimate source purity with SWAP shots on two copies");
  purity_cmd->add_option("--eta", eta_path, "Source state (JSON probability list or matrix)")->required();
  purity_cmd->add_option("--shots", shots, "Number of SWAP shots")->required()->check(CLI::PositiveNumber);
  purity_cmd->add_option("--seed", seed, "Random seed");
  purity_cmd->add_option("--out", out_path, "Write JSON here instead of stdout");

  auto* twirl_cmd = app.add_subcommand("twirl-check", "Check Haar twirling convergence on a random state");
  twirl_cmd->add_option("--d", d, "Subsystem dimension")->required();
  twirl_cmd->add_option("--samples", samples, "Haar samples")->required()->check(CLI::PositiveNumber);
  twirl_cmd->add_option("--seed", seed, "Random seed");
  twirl_cmd->add_option("--out", out_path, "Write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) {
      const RunReport report = run(parse_config(read_json_file(config_path)));
      write_text(out_path, to_json(report).dump(2) + "\n");
      if (!csv_path.empty()) write_text(csv_path, run_csv(report));
    } else if (*sweep_cmd) {
      const auto values = parse_values(values_csv);
      const auto reports = sweep(read_json_file(config_path), param, values);
      json runs = json::array();
      for (std::size_t i = 0; i < reports.size(); ++i) {
        runs.push_back({{"param_value", values[i]}, {"report", to_json(reports[i])}});
      }
      write_text(out_path, json{{"param", param}, {"runs", runs}}.dump(2) + "\n");
      if (!csv_path.empty()) write_text(csv_path, sweep_csv(values, reports));
    } else if (*purity_cmd) {
      json eta_json = read_json_file(eta_path);
      if (eta_json.is_object()) {
        json_io::reject_unknown_keys(eta_json, {"eta"}, "purity file");
        eta_json = json_io::require(eta_json, "eta", "purity file");
      }
      const DensityMatrix eta = json_io::state_from_json(eta_json);
      const SampledMean s = purity_via_swap(eta, shots, Seed{seed});
      const json out = {{"purity_exact", purity(eta)}, {"mean", s.mean},          {"std_error", s.std_error},
                        {"shots", s.shots},            {"seed", s.seed.value},   {"q_predicted", 0.5 * (1.0 + s.mean)}};
      write_text(out_path, out.dump(2) + "\n");
    } else if (*twirl_cmd) {
      write_text(out_path, twirl_check(d, samples, Seed{seed}).dump(2) + "\n");
    }
  } catch (const SingularConfigurationError& e) {
    std::cerr << "singular configuration: " << e.what() << "\n";
    return kExitSingular;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
