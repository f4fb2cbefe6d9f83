#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <cmath>
#include <limits>

#include "brx/errors.hpp"
#include "brx/eval.hpp"

namespace brx::eval {

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw EvalError("pearson inputs differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw EvalError("pearson needs at least 3 pairs");

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw EvalError("correlation is undefined for a constant input");

  PearsonResult res;
  res.n = static_cast<int>(n);
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  if (std::abs(res.r) == 1.0) {
    res.t = std::copysign(std::numeric_limits<double>::infinity(), res.r);
    res.p = 0.0;
    return res;
  }
  res.t = res.r * std::sqrt(df / (1.0 - res.r * res.r));
  const boost::math::students_t dist(df);
  res.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.t)));
  return res;
}

}  // namespace brx::eval
