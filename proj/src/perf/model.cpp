#include "ogb/perf/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace ogb::perf {

void
ModelParams::validate() const
{
  for (double v : {c1, c2, c3, p_db, p_qh, d_s, b_w, h, n_db, n_q, n_i})
    if (!(v >= 0))
      throw std::invalid_argument("model parameters must be nonnegative");
  if (std::abs(p_db + p_qh - 1) > 1e-9)
    throw std::invalid_argument("P_db + P_qh must equal 1");
  if (h > 1)
    throw std::invalid_argument("H must be at most 1");
  if (n_db <= 0 || b_w <= 0)
    throw std::invalid_argument("N_db and B_w must be positive");
}

double
model_tq(const ModelParams& p)
{
  p.validate();
  return p.c1 + p.c2 * p.n_i;
}

double
model_transmission(const ModelParams& p)
{
  p.validate();
  return p.n_q * p.n_i * p.d_s * 8 / p.b_w * 1000;
}

double
model_tb(const ModelParams& p)
{
  double tq = model_tq(p);
  return p.c3 + p.n_q * ((1 - p.h) * p.p_db / p.n_db + p.p_qh) * tq + model_transmission(p);
}

double
predict(const ModelParams& p, const Measurement& m)
{
  double w = (1 - m.h) * p.p_db / m.n_db + p.p_qh;
  return p.c3 + m.n_q * w * (p.c1 + p.c2 * m.n_i) + m.transmission_ms;
}

FitResult
fit_constants(const std::vector<Measurement>& data)
{
  std::set<std::tuple<double, double, double, double>> configs;
  for (const auto& m : data)
    configs.emplace(m.n_q, m.n_i, m.n_db, m.h);
  if (configs.size() < 3)
    throw FitError("at least 3 distinct configurations are needed");

  // Linear stage: with a = P_db C1, b = P_db C2, c = P_qh C1, d = P_qh C2
  // the duration is linear in (C3, a, b, c, d).
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd a(n, 5);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& m = data[static_cast<std::size_t>(r)];
    double s = (1 - m.h) / m.n_db;
    a.row(r) << 1, m.n_q * s, m.n_q * s * m.n_i, m.n_q, m.n_q * m.n_i;
    y(r) = m.duration_ms - m.transmission_ms;
  }
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < 5; ++c)
    if (scale(c) == 0)
      throw FitError("rank-deficient design matrix");
  Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
  qr.setThreshold(1e-10);
  if (qr.rank() < 5)
    throw FitError("rank-deficient design matrix");
  Eigen::VectorXd lin = qr.solve(y).cwiseQuotient(scale);

  ModelParams p;
  p.c3 = lin(0);
  p.c1 = lin(1) + lin(3);
  p.c2 = lin(2) + lin(4);
  double denom = lin(1) + lin(2) + lin(3) + lin(4);
  p.p_db = std::clamp(denom != 0 ? (lin(1) + lin(2)) / denom : 0.5, 0.0, 1.0);

  // Gauss-Newton (Levenberg damped) on theta = (C1, C2, C3, P_db).
  auto residuals = [&](const ModelParams& q) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i)
      r(i) = data[static_cast<std::size_t>(i)].duration_ms - predict(q, data[static_cast<std::size_t>(i)]);
    return r;
  };
  auto with = [](ModelParams q, const Eigen::Vector4d& t) {
    q.c1 = t(0);
    q.c2 = t(1);
    q.c3 = t(2);
    q.p_db = std::clamp(t(3), 0.0, 1.0);
    q.p_qh = 1 - q.p_db;
    return q;
  };
  Eigen::Vector4d theta(p.c1, p.c2, p.c3, p.p_db);
  p = with(p, theta);
  double sse = residuals(p).squaredNorm();
  double lambda = 1e-6;
  std::size_t it = 0;
  for (; it < 200; ++it) {
    Eigen::MatrixXd j(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& m = data[static_cast<std::size_t>(i)];
      double w = (1 - m.h) * p.p_db / m.n_db + p.p_qh;
      double tq = p.c1 + p.c2 * m.n_i;
      j.row(i) << m.n_q * w, m.n_q * w * m.n_i, 1, m.n_q * tq * ((1 - m.h) / m.n_db - 1);
    }
    Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::Vector4d g = j.transpose() * residuals(p);
    bool improved = false;
    for (int tries = 0; tries < 20 && !improved; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal();
      Eigen::Vector4d step = damped.ldlt().solve(g);
      auto cand = with(p, theta + step);
      double s = residuals(cand).squaredNorm();
      if (s <= sse) {
        improved = sse - s > 1e-30 * std::max(1.0, sse);
        theta << cand.c1, cand.c2, cand.c3, cand.p_db;
        p = cand;
        sse = s;
        lambda = std::max(lambda / 10, 1e-12);
        if (!improved)
          break;
      }
      else {
        lambda *= 10;
      }
    }
    if (!improved)
      break;
  }

  FitResult out;
  out.params = p;
  out.iterations = it;
  double mean = 0;
  for (const auto& m : data)
    mean += m.duration_ms;
  mean /= static_cast<double>(n);
  double sst = 0;
  for (const auto& m : data)
    sst += (m.duration_ms - mean) * (m.duration_ms - mean);
  out.r2 = sst > 0 ? 1 - sse / sst : 1;
  out.rmse_ms = std::sqrt(sse / static_cast<double>(n));
  return out;
}

TrendTest
mann_kendall(const std::vector<double>& series)
{
  TrendTest out;
  const auto n = series.size();
  if (n < 3)
    return out;
  double s = 0;
  std::vector<double> slopes;
  slopes.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = series[j] - series[i];
      s += (d > 0) - (d < 0);
      slopes.push_back(d / static_cast<double>(j - i));
    }
  std::vector<double> sorted(series);
  std::sort(sorted.begin(), sorted.end());
  double ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t k = i;
    while (k < n && sorted[k] == sorted[i])
      ++k;
    double t = static_cast<double>(k - i);
    ties += t * (t - 1) * (2 * t + 5);
    i = k;
  }
  double nn = static_cast<double>(n);
  double var = (nn * (nn - 1) * (2 * nn + 5) - ties) / 18;
  out.s = s;
  if (var > 0)
    out.z = s > 0 ? (s - 1) / std::sqrt(var) : s < 0 ? (s + 1) / std::sqrt(var) : 0;
  out.p_increasing = 0.5 * std::erfc(out.z / std::sqrt(2.0));
  auto mid = slopes.begin() + static_cast<std::ptrdiff_t>(slopes.size() / 2);
  std::nth_element(slopes.begin(), mid, slopes.end());
  out.slope = *mid;
  return out;
}

bool
stable(const std::vector<double>& latencies, double alpha)
{
  // keep the quadratic test bounded on long windows
  std::vector<double> s;
  const std::size_t cap = 2000;
  if (latencies.size() > cap) {
    double step = static_cast<double>(latencies.size()) / cap;
    for (std::size_t i = 0; i < cap; ++i)
      s.push_back(latencies[static_cast<std::size_t>(static_cast<double>(i) * step)]);
  }
  else {
    s = latencies;
  }
  return mann_kendall(s).p_increasing >= alpha;
}

} // namespace ogb::perf
