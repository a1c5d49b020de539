#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "synthrel/error.hpp"
#include "synthrel/fidelity.hpp"
#include "synthrel/random.hpp"

namespace synthrel {

void BootstrapSpec::check() const {
  if (replications < 100) throw InvalidArgument("bootstrap needs at least 100 replications");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (support.low > support.high) throw InvalidArgument("metric support is empty");
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  q = std::clamp(q, 0.0, 1.0);
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double vlo = values[lo];
  if (hi == lo) return vlo;
  const double vhi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return vlo + (h - static_cast<double>(lo)) * (vhi - vlo);
}

std::vector<double> bootstrap_replicates(const TableMetric& metric, const Table& real, const BootstrapSpec& spec) {
  spec.check();
  if (real.row_count() == 0) throw InvalidArgument("bootstrap needs a non-empty real table");

  const auto reps = static_cast<std::size_t>(spec.replications);
  std::vector<double> out(reps, 0.0);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_at = reps;
  std::string failure;

  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= reps) return;
      try {
        Rng rng(derive_seed(spec.seed, r));
        auto a = real.take(rng.resample_indices(real.row_count()));
        auto b = real.take(rng.resample_indices(real.row_count()));
        out[r] = metric(a, b);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (r < failed_at) {
          failed_at = r;
          failure = e.what();
        }
      }
    }
  };

  const unsigned workers = std::clamp<unsigned>(spec.workers, 1u, static_cast<unsigned>(std::max<std::size_t>(reps, 1)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failed_at < reps) throw Error("bootstrap replicate " + std::to_string(failed_at) + " failed: " + failure);
  return out;
}

MetricResult bootstrap_separability(const TableMetric& metric, const Table& real, double observed,
                                    const BootstrapSpec& spec, std::string metric_name, Granularity granularity) {
  auto values = bootstrap_replicates(metric, real, spec);
  Interval ci{percentile(values, spec.alpha / 2.0), percentile(values, 1.0 - spec.alpha / 2.0)};
  ci.low = std::clamp(ci.low, spec.support.low, spec.support.high);
  ci.high = std::clamp(ci.high, spec.support.low, spec.support.high);
  auto r = MetricResult::with_ci(std::move(metric_name), granularity, observed, ci, spec.alpha);
  r.table = real.name();
  r.details["replications"] = spec.replications;
  r.details["goal"] = std::string(to_string(spec.goal));
  r.details["seed"] = spec.seed;
  return r;
}

}  // namespace synthrel
