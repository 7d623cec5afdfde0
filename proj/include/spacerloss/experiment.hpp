#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spacerloss/process.hpp"
#include "spacerloss/tree.hpp"

namespace spacerloss {

/// Worker count: SPACERLOSS_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Work items
/// must write only to their own slot; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// One coalescent replicate: tree, arrays, and the seed that produced them.
struct Replicate {
  UltrametricTree tree;
  LeafArrays arrays;
};

/// Tree from stream mix_seed(seed, 1), arrays from mix_seed(seed, 2).
Replicate simulate_coalescent_replicate(std::size_t sample_size, const ModelParams& params,
                                        std::uint64_t seed);

struct ExperimentConfig {
  std::size_t sample_size = 2;
  std::vector<double> rho_grid{0.25, 0.5, 1.0, 2.0};
  double theta_factor = 100.0;  // theta = theta_factor * rho
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: worker_count()

  void validate() const;
};

struct Fig1Row {
  double rho = 0.0;
  std::size_t replicate = 0;
  std::optional<double> rho_hat;  // empty when skipped
  std::string skipped_reason;
  double ratio() const { return *rho_hat / rho; }
};

/// Replicate i at grid index j uses seed mix_seed(mix_seed(seed, j), i).
/// Rows are ordered by grid index, then replicate.
std::vector<Fig1Row> run_fig1(const ExperimentConfig& config);

/// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double prob);

inline constexpr std::array<double, 5> kFig1Probs{0.025, 0.25, 0.5, 0.75, 0.975};

struct Fig1Summary {
  double rho = 0.0;
  std::size_t estimated = 0;
  std::size_t skipped = 0;
  std::vector<double> quantiles;  // at kFig1Probs; empty if nothing estimated
};

std::vector<Fig1Summary> summarize_fig1(const std::vector<Fig1Row>& rows);

/// `rho,replicate,rho_hat,ratio,skipped`
void write_fig1_csv(std::ostream& out, const std::vector<Fig1Row>& rows);
/// `rho,estimated,skipped,q025,q25,q50,q75,q975`
void write_fig1_summary(std::ostream& out, const std::vector<Fig1Summary>& summary);

}  // namespace spacerloss
