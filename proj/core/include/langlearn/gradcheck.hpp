#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "langlearn/agent.hpp"

namespace langlearn {

// A differentiable scalar loss over the agent's parameters. The callable
// must evaluate the loss and, when grad is non-null, accumulate analytic
// gradients into it.
using LossFn =
    std::function<double(const AgentState& agent, Eigen::VectorXd* grad)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  long worst_index = -1;
  long checked = 0;
  bool passed(double tolerance) const { return max_relative_error < tolerance; }
  std::string summary() const;
};

// Central finite differences on a random subset of the parameters (default
// 5%), compared against the analytic gradient of loss_fn.
GradCheckReport finite_difference_check(const AgentState& agent, const LossFn& loss_fn,
                                        std::uint64_t seed, double fraction = 0.05,
                                        double step = 1e-5);

}  // namespace langlearn
