#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ogb::perf {

/// Batch tile-query model parameters. Times in ms, D_s in bytes, B_w in bits/s.
struct ModelParams
{
  double c1 = 3.0;
  double c2 = 0.008;
  double c3 = 20.0;
  double p_db = 0.85;
  double p_qh = 0.15;
  double d_s = 55;
  double b_w = 200e6;
  double h = 0;
  double n_db = 1;
  double n_q = 1;
  double n_i = 1;

  /// Throws std::invalid_argument when an invariant is violated.
  void
  validate() const;
};

/// Per tile-query processing time: C1 + C2 * N_i.
double
model_tq(const ModelParams& p);

/// Batch duration: C3 + N_q((1-H)P_db/N_db + P_qh) TQ + N_q N_i D_s / B_w.
double
model_tb(const ModelParams& p);

/// Transmission term alone, in ms.
double
model_transmission(const ModelParams& p);

struct Measurement
{
  double n_q = 0;
  double n_i = 0;
  double n_db = 1;
  double h = 0;
  double duration_ms = 0;
  /// Known transmission share of duration_ms.
  double transmission_ms = 0;
};

struct FitResult
{
  ModelParams params;
  double r2 = 0;
  double rmse_ms = 0;
  std::size_t iterations = 0;
};

class FitError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Least-squares fit of C1, C2, C3 and P_db (P_qh = 1 - P_db).
FitResult
fit_constants(const std::vector<Measurement>& data);

/// Predicted duration of a measurement under fitted params.
double
predict(const ModelParams& p, const Measurement& m);

struct TrendTest
{
  double s = 0;
  double z = 0;
  /// One-sided p-value for an increasing trend.
  double p_increasing = 1;
  /// Theil-Sen slope per sample.
  double slope = 0;
};

/// Mann-Kendall trend test with tie correction.
TrendTest
mann_kendall(const std::vector<double>& series);

/// Stable when there is no increasing trend at the given level.
bool
stable(const std::vector<double>& latencies, double alpha = 0.05);

struct RateSearch
{
  double rate = 0;      // highest rate found stable
  double unstable = 0;  // lowest rate found unstable (0 if none)
  std::vector<std::pair<double, bool>> probes;
};

/// Bisection for the highest stable arrival rate in [lo, hi]. `probe`
/// runs the workload at a rate and returns the latency series.
template<typename Probe>
RateSearch
max_rate_search(Probe&& probe, double lo, double hi, double resolution, double alpha = 0.05)
{
  RateSearch out;
  auto run = [&](double rate) {
    bool ok = stable(probe(rate), alpha);
    out.probes.emplace_back(rate, ok);
    return ok;
  };
  if (!run(lo)) {
    out.unstable = lo;
    return out;
  }
  out.rate = lo;
  if (run(hi)) {
    out.rate = hi;
    return out;
  }
  out.unstable = hi;
  while (out.unstable - out.rate > resolution) {
    double mid = (out.rate + out.unstable) / 2;
    if (run(mid))
      out.rate = mid;
    else
      out.unstable = mid;
  }
  return out;
}

} // namespace ogb::perf
