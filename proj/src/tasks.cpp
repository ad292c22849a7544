#include "disc/tasks.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace disc {

TaskSpec TaskSpec::shared(int dim, int num_agents) {
  TaskSpec spec;
  spec.dim = dim;
  std::vector<int> all(static_cast<std::size_t>(std::max(dim, 0)));
  std::iota(all.begin(), all.end(), 0);
  spec.index_sets.assign(static_cast<std::size_t>(std::max(num_agents, 0)), all);
  return spec;
}

TaskSpec TaskSpec::from_one_based(int dim, const std::vector<std::vector<int>>& sets) {
  TaskSpec spec;
  spec.dim = dim;
  spec.index_sets.reserve(sets.size());
  for (const auto& set : sets) {
    std::vector<int> zero_based;
    zero_based.reserve(set.size());
    for (int k : set) zero_based.push_back(k - 1);
    spec.index_sets.push_back(std::move(zero_based));
  }
  return spec;
}

std::vector<std::string> validate(const TaskSpec& spec) {
  std::vector<std::string> errors;
  if (spec.dim <= 0) errors.emplace_back("shared dimension must be positive");
  if (spec.index_sets.empty()) errors.emplace_back("at least one agent is required");

  for (std::size_t i = 0; i < spec.index_sets.size(); ++i) {
    const auto& set = spec.index_sets[i];
    const std::string agent = "agent " + std::to_string(i + 1);
    if (set.empty()) errors.push_back(agent + ": index set is empty");
    for (std::size_t p = 0; p < set.size(); ++p) {
      if (set[p] < 0 || set[p] >= spec.dim) {
        errors.push_back(agent + ": index out of range (" + std::to_string(set[p] + 1) + " not in 1.." +
                         std::to_string(spec.dim) + ")");
      }
      if (p > 0 && set[p] <= set[p - 1]) {
        errors.push_back(agent + ": indices must be strictly increasing");
      }
    }
    if (i > 0 && set.size() > spec.index_sets[i - 1].size()) {
      errors.push_back(agent + ": local dimensions must be nonincreasing across agents");
    }
  }

  if (!spec.index_sets.empty() && spec.dim > 0) {
    const auto& first = spec.index_sets.front();
    bool owns_all = static_cast<int>(first.size()) == spec.dim;
    for (std::size_t p = 0; owns_all && p < first.size(); ++p) owns_all = first[p] == static_cast<int>(p);
    if (!owns_all) errors.emplace_back("agent 1 must own all features");
  }
  return errors;
}

void require_valid(const TaskSpec& spec) {
  const auto errors = validate(spec);
  if (errors.empty()) return;
  std::ostringstream msg;
  msg << "invalid task spec:";
  for (const auto& e : errors) msg << "\n  " << e;
  throw std::invalid_argument(msg.str());
}

Eigen::VectorXd lift_feature(const Eigen::VectorXd& local, const TaskSpec& spec, int agent) {
  const auto& set = spec.index_sets.at(static_cast<std::size_t>(agent));
  if (local.size() != static_cast<Eigen::Index>(set.size())) {
    throw std::invalid_argument("lift_feature: local feature has dimension " + std::to_string(local.size()) +
                                ", agent " + std::to_string(agent + 1) + " expects " +
                                std::to_string(set.size()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.dim);
  for (std::size_t p = 0; p < set.size(); ++p) out(set[p]) = local(static_cast<Eigen::Index>(p));
  return out;
}

Eigen::VectorXd restrict_parameter(const Eigen::VectorXd& shared, const TaskSpec& spec, int agent) {
  if (shared.size() != spec.dim) {
    throw std::invalid_argument("restrict_parameter: parameter has dimension " + std::to_string(shared.size()) +
                                ", expected " + std::to_string(spec.dim));
  }
  const auto& set = spec.index_sets.at(static_cast<std::size_t>(agent));
  Eigen::VectorXd out(static_cast<Eigen::Index>(set.size()));
  for (std::size_t p = 0; p < set.size(); ++p) out(static_cast<Eigen::Index>(p)) = shared(set[p]);
  return out;
}

Eigen::VectorXd coordinate_mask(const TaskSpec& spec, int agent) {
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(spec.dim);
  for (int k : spec.index_sets.at(static_cast<std::size_t>(agent))) mask(k) = 1.0;
  return mask;
}

}  // namespace disc
