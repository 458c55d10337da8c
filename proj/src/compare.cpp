#include "sympatch/compare.hpp"

#include <algorithm>
#include <cmath>

namespace sympatch {

namespace {

void check_increasing(const std::vector<double>& x, const char* which) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw DomainError(std::string(which) + " abscissae are not strictly increasing");
}

template <class V>
CompareMetrics compare_impl(const std::vector<double>& xr, const std::vector<V>& yr, const std::vector<double>& xt,
                            const std::vector<V>& yt, auto&& magnitude, auto&& max_abs) {
  check_increasing(xr, "reference");
  check_increasing(xt, "test");
  if (xr.empty() || xt.empty()) throw DomainError("nothing to compare");
  CompareMetrics m;
  double err2 = 0.0, ref2 = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < xr.size(); ++i) {
    m.peak = std::max(m.peak, magnitude(yr[i]));
    const double x = xr[i];
    if (x < xt.front() || x > xt.back()) continue;
    const auto hi = std::lower_bound(xt.begin(), xt.end(), x);
    const std::size_t j = static_cast<std::size_t>(hi - xt.begin());
    V y = yt[j];
    if (*hi != x) {
      const double w = (x - xt[j - 1]) / (xt[j] - xt[j - 1]);
      y = (1.0 - w) * yt[j - 1] + w * yt[j];
    }
    const V d = y - yr[i];
    err2 += magnitude(d) * magnitude(d);
    ref2 += magnitude(yr[i]) * magnitude(yr[i]);
    worst = std::max(worst, max_abs(d));
    ++m.samples;
  }
  if (m.samples == 0) throw DomainError("abscissa ranges do not overlap");
  m.l2_rel = ref2 > 0.0 ? std::sqrt(err2 / ref2) : std::sqrt(err2);
  m.linf_rel_peak = m.peak > 0.0 ? worst / m.peak : worst;
  return m;
}

}  // namespace

CompareMetrics compare_lines(const ProbeLine& ref, const ProbeLine& test) {
  return compare_impl<CVec3>(
      ref.coords, ref.fields, test.coords, test.fields, [](const CVec3& v) { return v.norm(); },
      [](const CVec3& v) { return v.cwiseAbs().maxCoeff(); });
}

CompareMetrics compare_series(const ProbeSeries& ref, const ProbeSeries& test) {
  return compare_impl<double>(
      ref.times, ref.values, test.times, test.values, [](double v) { return std::abs(v); },
      [](double v) { return std::abs(v); });
}

}  // namespace sympatch
