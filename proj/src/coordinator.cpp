#include "disc/coordinator.hpp"

#include <stdexcept>
#include <string>

namespace disc {

SyncUp make_sync_up(const AgentState& state) { return {state.id, state.w_loc, state.u_loc}; }

Server::Server(int num_agents, int dim)
    : num_agents_(num_agents), dim_(dim), w_syn_(SymPsd::zero(dim)), u_syn_(Eigen::VectorXd::Zero(dim)) {
  if (num_agents < 1) throw std::invalid_argument("Server: need at least one agent");
}

SyncDown Server::aggregate(const std::vector<SyncUp>& ups) {
  std::vector<bool> seen(static_cast<std::size_t>(num_agents_), false);
  for (const auto& up : ups) {
    if (up.agent < 0 || up.agent >= num_agents_) {
      throw std::invalid_argument("aggregate: unknown agent " + std::to_string(up.agent));
    }
    if (seen[static_cast<std::size_t>(up.agent)]) {
      throw std::invalid_argument("aggregate: duplicate upload from agent " + std::to_string(up.agent));
    }
    if (up.w_loc.dim() != dim_ || up.u_loc.size() != dim_) {
      throw std::invalid_argument("aggregate: payload dimension mismatch from agent " + std::to_string(up.agent));
    }
    seen[static_cast<std::size_t>(up.agent)] = true;
  }
  for (int i = 0; i < num_agents_; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("aggregate: missing upload from agent " + std::to_string(i));
    }
  }

  // sum in agent-id order so the result does not depend on upload order
  std::vector<const SyncUp*> by_agent(static_cast<std::size_t>(num_agents_));
  for (const auto& up : ups) by_agent[static_cast<std::size_t>(up.agent)] = &up;
  for (const SyncUp* up : by_agent) {
    w_syn_ += up->w_loc;
    u_syn_ += up->u_loc;
  }

  const std::int64_t per_message = message_scalars(dim_);
  ledger_.epochs += 1;
  ledger_.scalars_up += per_message * num_agents_;
  ledger_.scalars_down += per_message * num_agents_;
  return {w_syn_, u_syn_};
}

void apply_sync(AgentState& state, const SyncDown& down, int t) {
  state.w_syn = down.w_syn;
  state.u_syn = down.u_syn;
  state.w_loc = SymPsd::zero(state.dim());
  state.u_loc.setZero();
  state.t_last = t;
  state.logdet_v_last = logdet(state.w_syn.shifted(state.params.lambda));
}

}  // namespace disc
