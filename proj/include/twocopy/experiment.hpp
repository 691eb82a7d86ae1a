#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "twocopy/channels.hpp"
#include "twocopy/estimators.hpp"
#include "twocopy/json_io.hpp"
#include "twocopy/measurement.hpp"
#include "twocopy/states.hpp"
#include "twocopy/twirl.hpp"

namespace twocopy {

inline constexpr const char* kToolkitName = "twocopy";
inline constexpr const char* kToolkitVersion = "0.1.0";

enum class Scheme { kSwap, kQubitZ, kQubitXY, kPPOVM };

struct WernerProbe {
  double q = 1.0;
};

struct TwirledSourceProbe {
  nlohmann::json eta;  // validated on use
  TwirlConfig twirl;
};

struct GammaFitConfig {
  double delta = 1.0;
  double hbar = 1.0;
  int d = 2;
};

/// One experiment: probe preparation, two channel uses, measurement and
/// estimation. `shots == nullopt` means exact expectation values.
struct ExperimentConfig {
  nlohmann::json channel;
  std::optional<std::variant<WernerProbe, TwirledSourceProbe>> probe;
  Scheme scheme = Scheme::kSwap;
  std::optional<std::uint64_t> shots;
  Seed seed{};
  std::optional<GammaFitConfig> gamma_fit;
  /// The JSON this config was parsed from, echoed into reports.
  nlohmann::json source;
};

struct MeasurementRecord {
  std::string observable;
  double mean = 0.0;
  std::optional<double> std_error;
  std::optional<std::uint64_t> shots;
  std::optional<Seed> seed;
};

struct RunReport {
  nlohmann::json config;
  std::optional<double> probe_q;
  std::vector<MeasurementRecord> measurements;
  std::vector<EstimateResult> estimates;
  double avg_lambda_squared = 0.0;
  std::optional<GammaEstimate> gamma;
  std::optional<std::string> gamma_boundary;
  double wall_time_s = 0.0;
};

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kSwap: return "swap";
    case Scheme::kQubitZ: return "qubit_z";
    case Scheme::kQubitXY: return "qubit_xy";
    case Scheme::kPPOVM: return "ppovm";
  }
  return "?";
}

namespace detail {

inline Scheme parse_scheme(const nlohmann::json& value) {
  if (!value.is_string()) throw ConfigError("scheme must be a string");
  const auto s = value.get<std::string>();
  if (s == "swap") return Scheme::kSwap;
  if (s == "qubit_z") return Scheme::kQubitZ;
  if (s == "qubit_xy") return Scheme::kQubitXY;
  if (s == "ppovm") return Scheme::kPPOVM;
  throw ConfigError("unknown scheme '" + s + "'");
}

inline std::uint64_t parse_count(const nlohmann::json& value, const std::string& what) {
  if (value.is_number_integer() && value.get<long long>() >= 1) return value.get<std::uint64_t>();
  if (value.is_number_float()) {
    const double v = value.get<double>();
    if (v >= 1.0 && v == std::floor(v) && v < 1.8e19) return static_cast<std::uint64_t>(v);
  }
  throw ConfigError(what + " must be a positive integer");
}

inline Seed parse_seed(const nlohmann::json& value) {
  if (value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0)) {
    return Seed{value.get<std::uint64_t>()};
  }
  throw ConfigError("seed must be a non-negative integer");
}

inline TwirlConfig parse_twirl(const nlohmann::json& value, Seed fallback) {
  json_io::reject_unknown_keys(value, {"mode", "samples", "seed", "threads"}, "twirl");
  TwirlConfig cfg;
  const auto& mode = json_io::require(value, "mode", "twirl");
  if (mode == "haar-monte-carlo") {
    cfg.mode = TwirlMode::kHaarMonteCarlo;
    cfg.samples = parse_count(json_io::require(value, "samples", "twirl"), "twirl samples");
  } else if (mode == "exact-design") {
    cfg.mode = TwirlMode::kExactDesign;
    if (value.contains("samples")) cfg.samples = parse_count(value["samples"], "twirl samples");
  } else {
    throw ConfigError("twirl mode must be 'haar-monte-carlo' or 'exact-design'");
  }
  cfg.seed = value.contains("seed") ? parse_seed(value["seed"]) : fallback;
  if (value.contains("threads")) cfg.threads = static_cast<unsigned>(parse_count(value["threads"], "threads"));
  return cfg;
}

}  // namespace detail

/// Parses and validates an experiment configuration. Unknown keys are
/// rejected. Channel/scheme compatibility is checked here so a bad config
/// fails before any simulation work.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using namespace json_io;
  reject_unknown_keys(j, {"channel", "probe", "scheme", "shots", "seed", "gamma_fit"}, "config");
  ExperimentConfig cfg;
  cfg.source = j;
  cfg.channel = require(j, "channel", "config");
  const int d = channel_from_json(cfg.channel).dim();
  cfg.scheme = detail::parse_scheme(require(j, "scheme", "config"));
  if (j.contains("seed")) cfg.seed = detail::parse_seed(j["seed"]);

  const auto& shots = require(j, "shots", "config");
  if (shots.is_string()) {
    if (shots.get<std::string>() != "exact") throw ConfigError("shots must be a positive integer or \"exact\"");
  } else {
    cfg.shots = detail::parse_count(shots, "shots");
  }

  if (cfg.scheme != Scheme::kSwap && d != 2) {
    throw ConfigError("scheme " + to_string(cfg.scheme) + " needs a qubit channel, got d = " + std::to_string(d));
  }

  if (cfg.scheme == Scheme::kSwap) {
    const auto& probe = require(j, "probe", "config");
    if (!probe.is_object()) throw ConfigError("probe must be an object");
    const auto& type = require(probe, "type", "probe");
    if (type == "werner") {
      reject_unknown_keys(probe, {"type", "q"}, "werner probe");
      const double q = number(require(probe, "q", "werner probe"), "q");
      if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("werner q must lie in [0, 1]");
      cfg.probe = WernerProbe{q};
    } else if (type == "twirled_source") {
      reject_unknown_keys(probe, {"type", "eta", "twirl"}, "twirled_source probe");
      TwirledSourceProbe p;
      p.eta = require(probe, "eta", "twirled_source probe");
      if (state_from_json(p.eta).dim() != d) throw ConfigError("source dimension does not match the channel");
      p.twirl = detail::parse_twirl(require(probe, "twirl", "twirled_source probe"), split(cfg.seed, 3));
      cfg.probe = p;
    } else {
      throw ConfigError("probe type must be 'werner' or 'twirled_source'");
    }
  } else if (j.contains("probe")) {
    throw ConfigError("scheme " + to_string(cfg.scheme) + " fixes its own probe; remove 'probe'");
  }

  if (j.contains("gamma_fit")) {
    const auto& g = j["gamma_fit"];
    reject_unknown_keys(g, {"delta", "hbar", "d"}, "gamma_fit");
    GammaFitConfig fit;
    fit.delta = number(require(g, "delta", "gamma_fit"), "delta");
    if (g.contains("hbar")) fit.hbar = number(g["hbar"], "hbar");
    const auto& gd = require(g, "d", "gamma_fit");
    if (!gd.is_number_integer()) throw ConfigError("gamma_fit d must be an integer");
    fit.d = gd.get<int>();
    if (fit.d != d) throw ConfigError("gamma_fit d does not match the channel dimension");
    if (fit.delta == 0.0) throw ConfigError("gamma_fit delta must be non-zero");
    if (!(fit.hbar > 0.0)) throw ConfigError("gamma_fit hbar must be positive");
    cfg.gamma_fit = fit;
  }
  return cfg;
}

namespace detail {

inline MeasurementRecord measure(const Observable& obs, const DensityMatrix& state, const ExperimentConfig& cfg,
                                 std::uint64_t stream) {
  MeasurementRecord rec;
  rec.observable = obs.name();
  if (!cfg.shots) {
    rec.mean = expectation(obs, state);
    return rec;
  }
  const Seed seed = split(cfg.seed, stream);
  const SampledMean s = sample_expectation(obs, state, *cfg.shots, seed);
  rec.mean = s.mean;
  rec.std_error = s.std_error;
  rec.shots = s.shots;
  rec.seed = seed;
  return rec;
}

// lambda^2 from a lambda estimate, with first-order error propagation.
inline EstimateResult squared(const EstimateResult& lambda) {
  EstimateResult r = lambda;
  r.formula = lambda.formula + "_squared";
  r.value = lambda.value * lambda.value;
  if (lambda.std_error) r.std_error = 2.0 * lambda.value * *lambda.std_error;
  r.outside_physical_range = r.value < 0.0 || r.value > 1.0;
  return r;
}

}  // namespace detail

/// Runs the experiment. The channel is used only through its action on
/// states (and, for the PPOVM scheme, on |j><k| to form the process
/// operator); estimators see measured numbers only.
inline RunReport run(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const PureDecoherenceChannel channel = json_io::channel_from_json(cfg.channel);
  const int d = channel.dim();

  RunReport report;
  report.config = cfg.source;

  switch (cfg.scheme) {
    case Scheme::kSwap: {
      if (!cfg.probe) throw ConfigError("swap scheme needs a probe");
      double q = 0.0;
      std::optional<DensityMatrix> probe_state;
      if (const auto* w = std::get_if<WernerProbe>(&*cfg.probe)) {
        q = w->q;
      } else {
        const auto& src = std::get<TwirledSourceProbe>(*cfg.probe);
        q = 0.5 * (1.0 + purity(json_io::state_from_json(src.eta)));
      }
      if (std::abs(2.0 * q * d - (d + 1.0)) <= detail::kSingularTol) {
        throw SingularConfigurationError("probe weight q = d+/d^2 = " + std::to_string(q) +
                                         " makes the SWAP estimator singular");
      }
      if (std::holds_alternative<WernerProbe>(*cfg.probe)) {
        probe_state = werner_state({d, q});
      } else {
        const auto& src = std::get<TwirledSourceProbe>(*cfg.probe);
        probe_state = werner_from_source(json_io::state_from_json(src.eta), src.twirl).state;
      }
      report.probe_q = q;
      const DensityMatrix out = apply_two_copies(channel, *probe_state);
      const auto rec = detail::measure(swap_operator(d), out, cfg, 1);
      report.measurements.push_back(rec);
      report.estimates.push_back(qudit_avg_lambda_squared(rec.mean, q, d, rec.std_error));
      if (d == 2) report.estimates.push_back(qubit_lambda_from_swap(rec.mean, q, rec.std_error));
      report.avg_lambda_squared = report.estimates.front().value;
      break;
    }
    case Scheme::kQubitZ: {
      const DensityMatrix probe = pure_state(detail::phi(+1), {2, 2});
      const auto rec = detail::measure(z_operator(), apply_two_copies(channel, probe), cfg, 1);
      report.measurements.push_back(rec);
      const auto lambda = qubit_lambda_from_z(rec.mean, rec.std_error);
      report.estimates.push_back(lambda);
      report.estimates.push_back(detail::squared(lambda));
      report.avg_lambda_squared = report.estimates.back().value;
      break;
    }
    case Scheme::kQubitXY: {
      const DensityMatrix out = apply(channel, pure_state(ComplexVector::Ones(2)));
      const auto x = detail::measure(sigma_x(), out, cfg, 1);
      const auto y = detail::measure(sigma_y(), out, cfg, 2);
      report.measurements.push_back(x);
      report.measurements.push_back(y);
      const auto lambda = qubit_lambda_from_xy(x.mean, y.mean, x.std_error, y.std_error);
      report.estimates.push_back(lambda);
      report.estimates.push_back(detail::squared(lambda));
      report.avg_lambda_squared = report.estimates.back().value;
      break;
    }
    case Scheme::kPPOVM: {
      // Outcomes F+, F-, Fo carry the Z eigenvalues +1/2, -1/2, 0.
      const auto probs = phi_plus_povm().probabilities(channel);
      const std::vector<double> values{0.5, -0.5, 0.0};
      MeasurementRecord rec;
      rec.observable = "ppovm_phi_plus_z";
      std::vector<double> clipped;
      double total = 0.0;
      for (double p : probs) {
        if (p < -kPositivityTol) throw StateValidityError("negative PPOVM probability");
        clipped.push_back(std::max(p, 0.0));
        total += clipped.back();
      }
      for (double& p : clipped) p /= total;
      if (!cfg.shots) {
        for (std::size_t i = 0; i < values.size(); ++i) rec.mean += clipped[i] * values[i];
      } else {
        const Seed seed = split(cfg.seed, 1);
        const auto s = sample_outcomes(values, clipped, *cfg.shots, seed);
        rec.mean = s.mean;
        rec.std_error = s.std_error;
        rec.shots = s.shots;
        rec.seed = seed;
      }
      report.measurements.push_back(rec);
      const auto lambda = qubit_lambda_from_z(rec.mean, rec.std_error);
      report.estimates.push_back(lambda);
      report.estimates.push_back(detail::squared(lambda));
      report.avg_lambda_squared = report.estimates.back().value;
      break;
    }
  }

  if (cfg.gamma_fit) {
    try {
      report.gamma = gamma_from_avg_lambda(report.avg_lambda_squared, cfg.gamma_fit->d, cfg.gamma_fit->delta,
                                           cfg.gamma_fit->hbar);
    } catch (const OutOfRangeError& e) {
      switch (e.boundary()) {
        case OutOfRangeError::Boundary::kUpper: report.gamma_boundary = "gamma_infinite"; break;
        case OutOfRangeError::Boundary::kLower: report.gamma_boundary = "gamma_zero"; break;
        case OutOfRangeError::Boundary::kNone:
          report.gamma_boundary = report.avg_lambda_squared >= 1.0 ? "gamma_infinite" : "gamma_zero";
          break;
      }
    }
  }

  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

inline RunReport run(const nlohmann::json& config) { return run(parse_config(config)); }

namespace detail {

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json to_json(const EstimateResult& r) {
  return {{"formula", r.formula},
          {"value", r.value},
          {"inputs", r.inputs},
          {"std_error", detail::optional_json(r.std_error)},
          {"clamped", r.clamped},
          {"outside_physical_range", r.outside_physical_range}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json measurements = nlohmann::json::array();
  for (const auto& m : r.measurements) {
    measurements.push_back({{"observable", m.observable},
                            {"mean", m.mean},
                            {"std_error", detail::optional_json(m.std_error)},
                            {"shots", m.shots ? nlohmann::json(*m.shots) : nlohmann::json("exact")},
                            {"seed", m.seed ? nlohmann::json(m.seed->value) : nlohmann::json(nullptr)}});
  }
  nlohmann::json estimates = nlohmann::json::array();
  for (const auto& e : r.estimates) estimates.push_back(to_json(e));

  nlohmann::json gamma = nullptr;
  if (r.gamma) {
    nlohmann::json lambda = nlohmann::json::array();
    for (Eigen::Index j = 0; j < r.gamma->lambda_jk.rows(); ++j) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < r.gamma->lambda_jk.cols(); ++k) row.push_back(r.gamma->lambda_jk(j, k));
      lambda.push_back(std::move(row));
    }
    gamma = {{"gamma", r.gamma->gamma},
             {"K", r.gamma->K},
             {"lambda_jk", std::move(lambda)},
             {"delta", detail::optional_json(r.gamma->delta)},
             {"boundary", nullptr}};
  } else if (r.gamma_boundary) {
    gamma = {{"gamma", nullptr}, {"K", nullptr}, {"lambda_jk", nullptr}, {"delta", nullptr},
             {"boundary", *r.gamma_boundary}};
  }

  return {{"toolkit", kToolkitName},
          {"version", kToolkitVersion},
          {"config", r.config},
          {"probe_q", detail::optional_json(r.probe_q)},
          {"measurements", std::move(measurements)},
          {"estimates", std::move(estimates)},
          {"avg_lambda_squared", r.avg_lambda_squared},
          {"gamma", std::move(gamma)},
          {"wall_time_s", r.wall_time_s}};
}

namespace detail {

// Walks a dotted path ("probe.q", "channel.energies.2") to an existing node.
inline nlohmann::json& resolve_path(nlohmann::json& root, const std::string& path) {
  if (path.empty()) throw ConfigError("empty parameter path");
  nlohmann::json* node = &root;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else if (node->is_array() && !part.empty() &&
               part.find_first_not_of("0123456789") == std::string::npos &&
               std::stoul(part) < node->size()) {
      node = &(*node)[std::stoul(part)];
    } else {
      throw ConfigError("parameter path '" + path + "' does not address a config field");
    }
  }
  if (!node->is_number() && !(node->is_string() && *node == "exact")) {
    throw ConfigError("parameter path '" + path + "' does not address a numeric field");
  }
  return *node;
}

}  // namespace detail

/// Runs `config_template` once per value of the field at `param_path`.
/// Run i uses the seed split(template seed, i) unless the swept field is
/// the seed itself.
inline std::vector<RunReport> sweep(const nlohmann::json& config_template, const std::string& param_path,
                                    const std::vector<double>& values) {
  {
    nlohmann::json probe = config_template;
    detail::resolve_path(probe, param_path);
  }
  const Seed base = config_template.contains("seed") ? detail::parse_seed(config_template["seed"]) : Seed{};
  std::vector<nlohmann::json> configs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    nlohmann::json cfg = config_template;
    if (param_path != "seed") cfg["seed"] = split(base, i).value;
    auto& field = detail::resolve_path(cfg, param_path);
    const double v = values[i];
    if (v == std::floor(v) && std::abs(v) < 9e15 && (field.is_number_integer() || field.is_string())) {
      field = static_cast<std::int64_t>(v);
    } else {
      field = v;
    }
    configs.push_back(std::move(cfg));
  }
  std::vector<ExperimentConfig> parsed;
  for (const auto& c : configs) parsed.push_back(parse_config(c));
  std::vector<RunReport> reports;
  for (const auto& c : parsed) reports.push_back(run(c));
  return reports;
}

/// Plot table with columns param_value, mean, std_error, estimate.
inline std::string sweep_csv(const std::vector<double>& values, const std::vector<RunReport>& reports) {
  const auto num = [](double v) { return nlohmann::json(v).dump(); };
  std::ostringstream out;
  out << "param_value,mean,std_error,estimate\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& m = r.measurements.front();
    out << num(values[i]) << ',' << num(m.mean) << ',';
    if (m.std_error) out << num(*m.std_error);
    out << ',' << num(r.avg_lambda_squared) << '\n';
  }
  return out.str();
}

}  // namespace twocopy
