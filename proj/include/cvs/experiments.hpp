#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cvs/sampler.hpp"
#include "cvs/spectra.hpp"

namespace cvs {

enum class SamplerKind { Exact, Mcmc, Iid };

std::string to_string(SamplerKind kind);

// Experiment description read from a JSON document. Recognized keys:
//   model       descriptor object or array of descriptors (required)
//   n_values    array of N, or {"from": a, "to": b} (required)
//   m_values    array of mode indices            (default [1..5])
//   replicates  Monte Carlo replicates >= 1      (default 1)
//   seed        master seed or null              (default null)
//   sampler     "exact" | "mcmc" | "iid"         (default "exact")
//   output      output directory                 (default ".")
//   truncation  Mercer truncation M or null      (default: model's, else max(4 N_max, 128))
//   pairs       [[m1, m2], ...] cross-leverage targets (default: consecutive m_values)
//   f, g        {"index": coefficient} in the L2 basis (default e_1)
//   mcmc        {"burn_in": sweeps, "thin": sweeps, "samples": kept}
struct ExperimentConfig {
  std::vector<nlohmann::json> models;
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> m_values{1, 2, 3, 4, 5};
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t replicates = 1;
  std::optional<std::uint64_t> seed;
  SamplerKind sampler = SamplerKind::Exact;
  std::string output = ".";
  std::optional<std::size_t> truncation;
  CoefficientVector f = CoefficientVector::unit(Basis::L2, 1);
  CoefficientVector g = CoefficientVector::unit(Basis::L2, 1);
  McmcOptions mcmc;

  // Runtime settings, not read from the document.
  std::uint64_t resolved_seed = 0;
  std::size_t threads = 1;

  // Throws ConfigError with "line L: ..." locations.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  std::size_t max_n() const;
  // Model i with the effective truncation.
  SpectralModel model(std::size_t i) const;
};

// Seed precedence: explicit flag, then the document, then $CVS_SEED, then 0.
std::uint64_t resolve_seed(const ExperimentConfig& config, std::optional<std::uint64_t> flag);

struct ResultRecord {
  std::string experiment;
  std::string model;
  std::size_t N = 0;
  std::optional<std::size_t> m1;
  std::optional<std::size_t> m2;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> closed_form;
  std::optional<double> bound;
  std::uint64_t seed = 0;
};

struct CommandResult {
  std::string command;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
  nlohmann::json summary() const;
};

// Frozen CSV headers.
extern const std::vector<std::string> kExpectedErrorHeader;
extern const std::vector<std::string> kResultRecordHeader;
extern const std::vector<std::string> kBoundsHeader;
std::vector<std::string> sample_header(std::size_t N);

CommandResult cmd_expected_error(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir);
CommandResult cmd_mc_validate(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_bounds(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_sample(const ExperimentConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_quad_bias(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// Runs fn(0..count-1) on `threads` workers and returns the results ordered by
// index. The first exception thrown by any replicate is rethrown.
template <class Fn>
auto run_replicates(std::size_t count, std::size_t threads, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, count));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// Mean and standard error accumulated in a fixed order.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace cvs
