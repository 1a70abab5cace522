#include "dcdir/grad_check.hpp"

#include <cmath>

#include "dcdir/optim.hpp"

namespace dcdir {

GradCheckReport grad_check(const std::function<double(bool record_grads)>& f,
                           std::span<Parameter* const> params, double h, double tol) {
  zero_grads(params);
  f(true);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);
  zero_grads(params);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data[i];
      p.value.data[i] = saved + h;
      const double up = f(false);
      p.value.data[i] = saved - h;
      const double dn = f(false);
      p.value.data[i] = saved;
      const double numeric = (up - dn) / (2.0 * h);
      const double a = analytic[pi].data[i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-6});
      const double rel = std::fabs(a - numeric) / denom;
      report.max_rel_err = std::max(report.max_rel_err, rel);
      if (rel > tol) report.failures.push_back({p.id, i, a, numeric, rel});
    }
  }
  return report;
}

}  // namespace dcdir
