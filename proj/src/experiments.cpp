#include "cvs/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "cvs/bounds.hpp"
#include "cvs/csv.hpp"
#include "cvs/errors.hpp"
#include "cvs/gram.hpp"
#include "cvs/quad.hpp"
#include "cvs/sympoly.hpp"

namespace cvs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// z-score tolerance for Monte Carlo agreement with closed forms.
constexpr double kZLimit = 4.0;

const std::set<std::string> kConfigKeys{"model",  "n_values",   "m_values", "replicates",
                                        "seed",   "sampler",    "output",   "truncation",
                                        "pairs",  "f",          "g",        "mcmc"};

std::size_t line_at(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_at(text, pos);
}

[[noreturn]] void config_error(const std::string& text, const std::string& key,
                               const std::string& message) {
  throw ConfigError("line " + std::to_string(line_of_key(text, key)) + ": '" + key + "': " +
                    message);
}

std::size_t positive_int(const json& v, const std::string& text, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    config_error(text, key, "expected a positive integer, got " + v.dump());
  }
  return v.get<std::size_t>();
}

std::vector<std::size_t> positive_list(const json& v, const std::string& text,
                                       const std::string& key) {
  if (!v.is_array()) config_error(text, key, "expected an array of positive integers");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(positive_int(e, text, key));
  if (out.empty()) config_error(text, key, "must not be empty");
  return out;
}

CoefficientVector parse_coefficients(const json& v, const std::string& text,
                                     const std::string& key) {
  if (!v.is_object() || v.empty()) {
    config_error(text, key, "expected a non-empty object {\"index\": coefficient}");
  }
  CoefficientVector c(Basis::L2);
  for (const auto& [idx, value] : v.items()) {
    std::size_t m = 0;
    try {
      std::size_t used = 0;
      m = std::stoul(idx, &used);
      if (used != idx.size() || m < 1) throw std::invalid_argument(idx);
    } catch (const std::exception&) {
      config_error(text, key, "coefficient index '" + idx + "' is not a positive integer");
    }
    if (!value.is_number()) config_error(text, key, "coefficient for " + idx + " is not a number");
    c.set(m, value.get<double>());
  }
  return c;
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(double v) { return csv::format(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
template <class T>
std::string fmt(const std::optional<T>& v) {
  return v ? fmt(*v) : std::string();
}

void write_record(std::ostream& out, const ResultRecord& r) {
  csv::write_row(out, {r.experiment, r.model, fmt(r.N), fmt(r.m1), fmt(r.m2), fmt(r.estimate),
                       fmt(r.std_error), fmt(r.closed_form), fmt(r.bound), csv::format(r.seed)});
}

// Distinct stream per (model, N, replicate).
std::uint64_t stream_index(std::size_t model_idx, std::size_t n_idx, std::size_t n_count,
                           std::size_t replicate, std::size_t replicates) {
  return static_cast<std::uint64_t>(replicate) +
         static_cast<std::uint64_t>(replicates) *
             (static_cast<std::uint64_t>(n_idx) +
              static_cast<std::uint64_t>(n_count) * static_cast<std::uint64_t>(model_idx));
}

using DesignSource = std::function<Design(RngStream&)>;

DesignSource make_source(const ExperimentConfig& config, const SpectralModel& model,
                         std::size_t N) {
  switch (config.sampler) {
    case SamplerKind::Exact: {
      auto sampler = std::make_shared<ExactVsSampler>(model, N);
      return [sampler](RngStream& rng) { return sampler->sample(rng); };
    }
    case SamplerKind::Mcmc: {
      McmcOptions options = config.mcmc;
      options.samples = 1;
      return [model, N, options](RngStream& rng) {
        const KernelFunction k = [&model](double x, double y) { return model.kernel(x, y); };
        return sample_vs_mcmc(k, N, options, rng).designs.back();
      };
    }
    case SamplerKind::Iid:
      return [N](RngStream& rng) { return sample_iid(N, rng); };
  }
  throw std::logic_error("unknown sampler");
}

void check_agreement(CommandResult& result, const std::string& where, const RunningStats& stats,
                     double closed_form) {
  const double diff = std::abs(stats.mean() - closed_form);
  const double se = stats.std_error();
  const bool ok = se > 0.0 ? diff <= kZLimit * se : diff <= 1e-12;
  if (!ok) {
    result.failures.push_back(where + ": estimate " + csv::format(stats.mean()) + " vs closed form " +
                              csv::format(closed_form) + " (|z| = " +
                              csv::format(se > 0.0 ? diff / se : INFINITY) + ")");
  }
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Exact: return "exact";
    case SamplerKind::Mcmc: return "mcmc";
    case SamplerKind::Iid: return "iid";
  }
  return "exact";
}

const std::vector<std::string> kExpectedErrorHeader{
    "model",       "M",           "N",          "m",         "epsilon_m",
    "sigma_m",     "thm1_upper",  "lower_bound", "expected_leverage", "tail_ratio"};

const std::vector<std::string> kResultRecordHeader{
    "experiment", "model", "N", "m1", "m2", "estimate", "std_error", "closed_form", "bound", "seed"};

const std::vector<std::string> kBoundsHeader{
    "model",      "N",          "beta_N",         "argmin_M", "upper_bound_thm1",
    "lower_bound_nwidth", "prop2_constant", "tail_lo", "tail_hi", "epsilon_1"};

std::vector<std::string> sample_header(std::size_t N) {
  std::vector<std::string> h{"replicate", "step"};
  for (std::size_t i = 1; i <= N; ++i) h.push_back("node_" + std::to_string(i));
  h.push_back("logdet");
  return h;
}

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double RunningStats::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

json CommandResult::summary() const {
  json files_json = json::array();
  for (const auto& f : files) files_json.push_back(f.string());
  return json{{"command", command}, {"ok", ok()}, {"files", files_json}, {"failures", failures}};
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_at(text, e.byte)) + ": invalid JSON: " +
                      e.what());
  }
  if (!root.is_object()) throw ConfigError("line 1: configuration must be a JSON object");
  for (const auto& [key, _] : root.items()) {
    if (!kConfigKeys.count(key)) config_error(text, key, "unknown key");
  }

  ExperimentConfig c;
  if (!root.contains("model")) throw ConfigError("line 1: missing required key 'model'");
  const json& models = root.at("model");
  if (models.is_object()) {
    c.models.push_back(models);
  } else if (models.is_array() && !models.empty()) {
    for (const auto& m : models) c.models.push_back(m);
  } else {
    config_error(text, "model", "expected a descriptor object or a non-empty array");
  }
  for (const auto& m : c.models) {
    try {
      (void)SpectralModel::from_json(m);
    } catch (const std::exception& e) {
      config_error(text, "model", e.what());
    }
  }

  if (!root.contains("n_values")) throw ConfigError("line 1: missing required key 'n_values'");
  const json& nv = root.at("n_values");
  if (nv.is_object()) {
    if (!nv.contains("from") || !nv.contains("to")) {
      config_error(text, "n_values", "range object needs 'from' and 'to'");
    }
    const std::size_t from = positive_int(nv.at("from"), text, "n_values");
    const std::size_t to = positive_int(nv.at("to"), text, "n_values");
    if (from > to) config_error(text, "n_values", "empty N range");
    for (std::size_t n = from; n <= to; ++n) c.n_values.push_back(n);
  } else if (nv.is_array() && nv.empty()) {
    config_error(text, "n_values", "empty N range");
  } else {
    c.n_values = positive_list(nv, text, "n_values");
  }

  if (root.contains("m_values")) c.m_values = positive_list(root.at("m_values"), text, "m_values");
  if (root.contains("replicates")) c.replicates = positive_int(root.at("replicates"), text, "replicates");
  if (root.contains("seed") && !root.at("seed").is_null()) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned()) config_error(text, "seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (root.contains("sampler")) {
    const json& s = root.at("sampler");
    const std::string name = s.is_string() ? s.get<std::string>() : "";
    if (name == "exact") {
      c.sampler = SamplerKind::Exact;
    } else if (name == "mcmc") {
      c.sampler = SamplerKind::Mcmc;
    } else if (name == "iid") {
      c.sampler = SamplerKind::Iid;
    } else {
      config_error(text, "sampler", "expected \"exact\", \"mcmc\" or \"iid\"");
    }
  }
  if (root.contains("output")) {
    if (!root.at("output").is_string()) config_error(text, "output", "expected a string");
    c.output = root.at("output").get<std::string>();
  }
  if (root.contains("truncation") && !root.at("truncation").is_null()) {
    c.truncation = positive_int(root.at("truncation"), text, "truncation");
  }
  if (root.contains("pairs")) {
    const json& p = root.at("pairs");
    if (!p.is_array()) config_error(text, "pairs", "expected an array of [m1, m2]");
    for (const auto& e : p) {
      if (!e.is_array() || e.size() != 2) config_error(text, "pairs", "each pair must be [m1, m2]");
      const std::size_t a = positive_int(e[0], text, "pairs");
      const std::size_t b = positive_int(e[1], text, "pairs");
      if (a == b) config_error(text, "pairs", "cross-leverage pairs need m1 != m2");
      c.pairs.emplace_back(a, b);
    }
  } else {
    for (std::size_t i = 0; i + 1 < c.m_values.size(); ++i) {
      if (c.m_values[i] != c.m_values[i + 1]) c.pairs.emplace_back(c.m_values[i], c.m_values[i + 1]);
    }
  }
  if (root.contains("f")) c.f = parse_coefficients(root.at("f"), text, "f");
  if (root.contains("g")) c.g = parse_coefficients(root.at("g"), text, "g");
  if (root.contains("mcmc")) {
    const json& m = root.at("mcmc");
    if (!m.is_object()) config_error(text, "mcmc", "expected an object");
    for (const auto& [key, value] : m.items()) {
      if (key == "burn_in") {
        c.mcmc.burn_in = positive_int(value, text, "mcmc");
      } else if (key == "thin") {
        c.mcmc.thin = positive_int(value, text, "mcmc");
      } else if (key == "samples") {
        c.mcmc.samples = positive_int(value, text, "mcmc");
      } else {
        config_error(text, "mcmc", "unknown option '" + key + "'");
      }
    }
  }

  for (std::size_t i = 0; i < c.models.size(); ++i) {
    std::size_t M = 0;
    try {
      M = c.model(i).truncation();
    } catch (const std::exception& e) {
      config_error(text, "truncation", e.what());
    }
    if (c.max_n() > M) {
      config_error(text, "n_values", "N = " + std::to_string(c.max_n()) +
                                         " exceeds the truncation M = " + std::to_string(M));
    }
    for (std::size_t m : c.m_values) {
      if (m > M) config_error(text, "m_values", "mode " + std::to_string(m) + " exceeds M");
    }
    for (const auto& [a, b] : c.pairs) {
      if (a > M || b > M) config_error(text, "pairs", "mode index exceeds M");
    }
    if (c.f.max_index() > M) config_error(text, "f", "support exceeds M");
    if (c.g.max_index() > M) config_error(text, "g", "support exceeds M");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::size_t ExperimentConfig::max_n() const {
  return n_values.empty() ? 0 : *std::max_element(n_values.begin(), n_values.end());
}

SpectralModel ExperimentConfig::model(std::size_t i) const {
  json j = models.at(i);
  const bool has_truncation = j.contains("truncation") && !j.at("truncation").is_null();
  if (truncation) {
    j["truncation"] = *truncation;
  } else if (!has_truncation && j.value("family", "") != "custom") {
    j["truncation"] = default_truncation(max_n());
  }
  return SpectralModel::from_json(j);
}

std::uint64_t resolve_seed(const ExperimentConfig& config, std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (config.seed) return *config.seed;
  if (const char* env = std::getenv("CVS_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("CVS_SEED is not an unsigned integer: '" + std::string(env) + "'");
  }
  return 0;
}

CommandResult cmd_expected_error(const ExperimentConfig& config, const fs::path& out_dir) {
  CommandResult result{"expected-error", {}, {}};
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const SpectralModel model = config.model(mi);
    const fs::path path = out_dir / ("expected_error_" + model.tag() + ".csv");
    std::ofstream out = open_output(path);
    csv::write_row(out, kExpectedErrorHeader);
    const double tail_ratio = model.tail_mass(model.truncation()).hi / model.trace();
    for (std::size_t N : config.n_values) {
      const VsExpectations ex(model, N);
      const std::optional<double> upper =
          N >= 2 ? std::optional<double>(thm1_upper(model, N)) : std::nullopt;
      const double lower = nwidth_lower_bound(model, N);
      for (std::size_t m : config.m_values) {
        const double sigma = model.eigenvalues()[m - 1];
        const double eps = ex.eig_error(m);
        csv::write_row(out, {model.tag(), fmt(model.truncation()), fmt(N), fmt(m), fmt(eps),
                             fmt(sigma), fmt(upper), fmt(lower), fmt(ex.leverage(m)),
                             fmt(tail_ratio)});
        const std::string where =
            model.tag() + " N=" + std::to_string(N) + " m=" + std::to_string(m);
        if (eps > sigma) result.failures.push_back(where + ": epsilon_m exceeds sigma_m");
        if (upper && eps > *upper) {
          result.failures.push_back(where + ": epsilon_m exceeds the sigma_N (1 + beta_N) bound");
        }
      }
    }
    result.files.push_back(path);
  }
  return result;
}

CommandResult cmd_bounds(const ExperimentConfig& config, const fs::path& out_dir) {
  CommandResult result{"bounds", {}, {}};
  for (std::size_t N : config.n_values) {
    if (N < 2) throw ConfigError("bounds: every N must be >= 2 (beta_N is a minimum over [2, N])");
  }
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const SpectralModel model = config.model(mi);
    const fs::path path = out_dir / ("bounds_" + model.tag() + ".csv");
    std::ofstream out = open_output(path);
    csv::write_row(out, kBoundsHeader);
    for (std::size_t N : config.n_values) {
      const BoundReport r = bound_report(model, N);
      csv::write_row(out, {model.tag(), fmt(N), fmt(r.beta_N), fmt(r.argmin_M),
                           fmt(r.upper_bound_thm1), fmt(r.lower_bound_nwidth),
                           fmt(r.prop2_constant), fmt(r.tail_rN.lo), fmt(r.tail_rN.hi),
                           fmt(r.epsilon_1)});
      const std::string where = model.tag() + " N=" + std::to_string(N);
      if (r.prop2_constant && r.beta_N > *r.prop2_constant) {
        result.failures.push_back(where + ": beta_N exceeds the uniform constant");
      }
      if (r.lower_bound_nwidth > r.upper_bound_thm1) {
        result.failures.push_back(where + ": lower bound exceeds upper bound");
      }
      if (r.epsilon_1 > r.upper_bound_thm1) {
        result.failures.push_back(where + ": epsilon_1 exceeds the upper bound");
      }
    }
    result.files.push_back(path);
  }
  return result;
}

CommandResult cmd_mc_validate(const ExperimentConfig& config, const fs::path& out_dir) {
  CommandResult result{"mc-validate", {}, {}};
  const bool assert_vs = config.sampler != SamplerKind::Iid;
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const SpectralModel model = config.model(mi);
    const fs::path path = out_dir / ("mc_validate_" + model.tag() + ".csv");
    std::ofstream out = open_output(path);
    csv::write_row(out, kResultRecordHeader);

    for (std::size_t ni = 0; ni < config.n_values.size(); ++ni) {
      const std::size_t N = config.n_values[ni];
      const DesignSource source = make_source(config, model, N);
      const auto samples = run_replicates(config.replicates, config.threads, [&](std::size_t r) {
        RngStream rng(config.resolved_seed,
                      stream_index(mi, ni, config.n_values.size(), r, config.replicates));
        const InterpolationSystem sys(model, source(rng));
        std::vector<double> v;
        for (std::size_t m : config.m_values) v.push_back(sys.leverage(m));
        for (const auto& [a, b] : config.pairs) v.push_back(sys.cross_leverage(a, b));
        for (std::size_t m : config.m_values) {
          v.push_back(sys.interpolation_error_sq(embed(model, CoefficientVector::unit(Basis::L2, m)))
                          .value);
        }
        return v;
      });

      std::vector<RunningStats> stats(samples.empty() ? 0 : samples.front().size());
      for (const auto& v : samples) {
        for (std::size_t k = 0; k < v.size(); ++k) stats[k].add(v[k]);
      }

      const VsExpectations ex(model, N);
      const std::optional<double> upper =
          N >= 2 ? std::optional<double>(thm1_upper(model, N)) : std::nullopt;
      std::size_t k = 0;
      auto emit = [&](const std::string& name, std::optional<std::size_t> m1,
                      std::optional<std::size_t> m2, double closed, std::optional<double> bound) {
        const RunningStats& s = stats[k++];
        write_record(out, {name, model.tag(), N, m1, m2, s.mean(), s.std_error(), closed, bound,
                           config.resolved_seed});
        if (assert_vs) {
          std::string where = model.tag() + " N=" + std::to_string(N) + " " + name + " m=" +
                              std::to_string(*m1);
          if (m2) where += "," + std::to_string(*m2);
          check_agreement(result, where, s, closed);
        }
      };
      for (std::size_t m : config.m_values) emit("leverage", m, std::nullopt, ex.leverage(m), 1.0);
      for (const auto& [a, b] : config.pairs) {
        emit("cross_leverage", a, b, expected_cross_leverage(a, b), 1.0);
      }
      for (std::size_t m : config.m_values) emit("eig_error", m, std::nullopt, ex.eig_error(m), upper);
    }
    result.files.push_back(path);
  }
  return result;
}

CommandResult cmd_quad_bias(const ExperimentConfig& config, const fs::path& out_dir) {
  CommandResult result{"quad-bias", {}, {}};
  const bool assert_vs = config.sampler != SamplerKind::Iid;
  const bool single_mode_diag = config.f.coeffs().size() == 1 && config.g.coeffs().size() == 1 &&
                                config.f.max_index() == config.g.max_index();
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const SpectralModel model = config.model(mi);
    const fs::path path = out_dir / ("quad_bias_" + model.tag() + ".csv");
    std::ofstream out = open_output(path);
    csv::write_row(out, kResultRecordHeader);
    const double truth = exact_integral(model, config.f, config.g);
    const double f_norm = std::sqrt(rkhs_norm_sq(model, config.f));

    std::vector<std::pair<std::size_t, double>> curve;
    for (std::size_t ni = 0; ni < config.n_values.size(); ++ni) {
      const std::size_t N = config.n_values[ni];
      const DesignSource source = make_source(config, model, N);
      const auto diffs = run_replicates(config.replicates, config.threads, [&](std::size_t r) {
        RngStream rng(config.resolved_seed,
                      stream_index(mi, ni, config.n_values.size(), r, config.replicates));
        const QuadratureRule rule(model, source(rng), config.g);
        return truth - rule.estimate(config.f);
      });
      RunningStats stats;
      for (double d : diffs) stats.add(d);
      const double closed = bias_closed_form(model, config.f, config.g, N);
      // |B_N| <= ||f||_F E[E(mu_g; x)] <= ||f||_F sqrt(sum_m g_m^2 eps_m).
      const double bound = f_norm * std::sqrt(expected_embedding_error(model, config.g, N));
      write_record(out, {"quad_bias", model.tag(), N, std::nullopt, std::nullopt, stats.mean(),
                         stats.std_error(), closed, bound, config.resolved_seed});
      const std::string where = model.tag() + " N=" + std::to_string(N) + " quad_bias";
      if (assert_vs) check_agreement(result, where, stats, closed);
      if (std::abs(closed) > bound * (1.0 + 1e-12)) {
        result.failures.push_back(where + ": closed-form bias exceeds its bound");
      }
      curve.emplace_back(N, closed);
    }
    if (single_mode_diag) {
      std::sort(curve.begin(), curve.end());
      for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].first != curve[i - 1].first && !(curve[i].second < curve[i - 1].second)) {
          result.failures.push_back(model.tag() + ": closed-form bias not strictly decreasing at N=" +
                                    std::to_string(curve[i].first));
        }
      }
    }
    result.files.push_back(path);
  }
  return result;
}

CommandResult cmd_sample(const ExperimentConfig& config, const fs::path& out_dir) {
  CommandResult result{"sample", {}, {}};
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const SpectralModel model = config.model(mi);
    for (std::size_t ni = 0; ni < config.n_values.size(); ++ni) {
      const std::size_t N = config.n_values[ni];
      const std::string stem = "sample_" + model.tag() + "_N" + std::to_string(N);
      const fs::path csv_path = out_dir / (stem + ".csv");
      const fs::path json_path = out_dir / (stem + ".json");

      struct Chain {
        std::vector<Design> designs;
        std::vector<double> logdets;
        std::optional<McmcDiagnostics> diagnostics;
      };
      const auto chains = run_replicates(config.replicates, config.threads, [&](std::size_t r) {
        RngStream rng(config.resolved_seed,
                      stream_index(mi, ni, config.n_values.size(), r, config.replicates));
        Chain c;
        if (config.sampler == SamplerKind::Mcmc) {
          const KernelFunction k = [&model](double x, double y) { return model.kernel(x, y); };
          McmcRun run = sample_vs_mcmc(k, N, config.mcmc, rng);
          c.designs = std::move(run.designs);
          c.logdets = run.diagnostics.logdet_trace;
          c.diagnostics = std::move(run.diagnostics);
        } else {
          Design d = config.sampler == SamplerKind::Exact ? sample_vs_exact(model, N, rng)
                                                          : sample_iid(N, rng);
          c.logdets.push_back(gram(model, d).log_det());
          c.designs.push_back(std::move(d));
        }
        return c;
      });

      std::ofstream out = open_output(csv_path);
      csv::write_row(out, sample_header(N));
      json diag{{"sampler", to_string(config.sampler)},
                {"model", model.to_json()},
                {"N", N},
                {"seed", config.resolved_seed},
                {"replicates", json::array()}};
      RunningStats acceptance;
      for (std::size_t r = 0; r < chains.size(); ++r) {
        const Chain& c = chains[r];
        for (std::size_t step = 0; step < c.designs.size(); ++step) {
          std::vector<std::string> row{fmt(r), fmt(step)};
          for (double x : c.designs[step].nodes) row.push_back(fmt(x));
          row.push_back(fmt(c.logdets[step]));
          csv::write_row(out, row);
        }
        json rep{{"replicate", r}, {"kept", c.designs.size()}};
        if (c.diagnostics) {
          const McmcDiagnostics& d = *c.diagnostics;
          rep["acceptance_rate"] = d.acceptance_rate;
          rep["acceptance_per_coordinate"] = d.acceptance_per_coordinate;
          rep["burn_in"] = d.burn_in;
          rep["thin"] = d.thin;
          rep["sweeps"] = d.sweeps;
          rep["init_attempts"] = d.init_attempts;
          acceptance.add(d.acceptance_rate);
          if (!(d.acceptance_rate > 0.0 && d.acceptance_rate <= 1.0)) {
            result.failures.push_back(stem + " replicate " + std::to_string(r) +
                                      ": acceptance rate outside (0, 1]");
          }
        }
        diag["replicates"].push_back(rep);
      }
      if (config.sampler == SamplerKind::Mcmc) diag["acceptance_rate"] = acceptance.mean();
      std::ofstream dj = open_output(json_path);
      dj << diag.dump(2) << "\n";
      result.files.push_back(csv_path);
      result.files.push_back(json_path);
    }
  }
  return result;
}

}  // namespace cvs
