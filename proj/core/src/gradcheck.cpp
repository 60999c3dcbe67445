#include "langlearn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "langlearn/error.hpp"
#include "langlearn/rng.hpp"

namespace langlearn {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << "checked " << checked << " parameters, max relative error "
     << max_relative_error;
  if (worst_index >= 0) os << " at index " << worst_index;
  return os.str();
}

GradCheckReport finite_difference_check(const AgentState& agent, const LossFn& loss_fn,
                                        std::uint64_t seed, double fraction,
                                        double step) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw ValidationError("finite_difference_check: fraction must be in (0, 1]");
  }

  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(agent.params.size());
  loss_fn(agent, &analytic);

  const long total = agent.params.size();
  long subset = std::max<long>(1, std::lround(fraction * static_cast<double>(total)));
  subset = std::min(subset, total);

  // Sample without replacement via a partial Fisher-Yates.
  Rng rng(mix_seed(seed, 0x6664636b));
  std::vector<long> indices(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) indices[static_cast<std::size_t>(i)] = i;
  for (long i = 0; i < subset; ++i) {
    const long j = i + static_cast<long>(rng.index(static_cast<std::size_t>(total - i)));
    std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
  }

  GradCheckReport report;
  report.checked = subset;
  AgentState probe = agent;
  for (long k = 0; k < subset; ++k) {
    const long idx = indices[static_cast<std::size_t>(k)];
    const double original = probe.params[idx];
    probe.params[idx] = original + step;
    const double up = loss_fn(probe, nullptr);
    probe.params[idx] = original - step;
    const double down = loss_fn(probe, nullptr);
    probe.params[idx] = original;

    const double fd = (up - down) / (2.0 * step);
    const double an = analytic[idx];
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
    const double rel = std::abs(fd - an) / denom;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_index = idx;
    }
  }
  return report;
}

}  // namespace langlearn
