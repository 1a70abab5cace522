#include "dcdir/optim.hpp"

#include <cmath>

namespace dcdir {

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  for (Parameter* p : params) {
    p->step_count += 1;
    const double t = static_cast<double>(p->step_count);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad.data[i];
      double& m = p->adam_m.data[i];
      double& v = p->adam_v.data[i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double mhat = m / c1;
      const double vhat = v / c2;
      p->value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      p->grad.data[i] = 0.0;
    }
  }
}

void sgd_step(std::span<Parameter* const> params, double lr) {
  for (Parameter* p : params) {
    p->step_count += 1;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->value.data[i] -= lr * p->grad.data[i];
      p->grad.data[i] = 0.0;
    }
  }
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->grad.fill(0.0);
}

}  // namespace dcdir
