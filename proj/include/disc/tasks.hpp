#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace disc {

/// Which coordinates of the shared parameter each agent's task uses.
/// Index sets are stored 0-based; configs and docs use 1-based indices.
struct TaskSpec {
  int dim = 0;                                 // shared dimension d (= d_1)
  std::vector<std::vector<int>> index_sets;    // one sorted set per agent

  int num_agents() const { return static_cast<int>(index_sets.size()); }
  int local_dim(int agent) const { return static_cast<int>(index_sets.at(agent).size()); }

  /// Every agent owns all d coordinates.
  static TaskSpec shared(int dim, int num_agents);

  /// Build from 1-based index sets. No validation; call validate().
  static TaskSpec from_one_based(int dim, const std::vector<std::vector<int>>& sets);
};

/// All invariant violations of `spec`; empty means valid.
std::vector<std::string> validate(const TaskSpec& spec);

/// Throws std::invalid_argument listing every violation.
void require_valid(const TaskSpec& spec);

/// Zero-pads an agent's d_i-dimensional feature into the shared d-dimensional space.
Eigen::VectorXd lift_feature(const Eigen::VectorXd& local, const TaskSpec& spec, int agent);

/// theta restricted to the agent's coordinates, order preserved.
Eigen::VectorXd restrict_parameter(const Eigen::VectorXd& shared, const TaskSpec& spec, int agent);

/// 0/1 mask of the agent's coordinates in the shared space.
Eigen::VectorXd coordinate_mask(const TaskSpec& spec, int agent);

}  // namespace disc
