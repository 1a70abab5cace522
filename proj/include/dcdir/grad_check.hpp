#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcdir/autodiff.hpp"

namespace dcdir {

struct GradCheckFailure {
  std::string parameter;
  std::size_t index;
  double analytic;
  double numeric;
  double rel_err;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::vector<GradCheckFailure> failures;
  bool ok() const { return failures.empty(); }
};

/// Compares tape gradients with central finite differences
/// (f(t+h) - f(t-h)) / 2h, coordinate by coordinate.
///
/// `f` must be deterministic in the parameter values: called with
/// record_grads=true it must run a backward pass that accumulates into
/// Parameter::grad; with record_grads=false it only returns the loss.
GradCheckReport grad_check(const std::function<double(bool record_grads)>& f,
                           std::span<Parameter* const> params, double h, double tol);

}  // namespace dcdir
