#pragma once

#include "disc/agent.hpp"
#include "disc/numerics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace disc {

struct SyncUp {
  int agent = 0;
  SymPsd w_loc;
  Eigen::VectorXd u_loc;
};

struct SyncDown {
  SymPsd w_syn;
  Eigen::VectorXd u_syn;
};

/// Cumulative communication. Each direction carries the full d x d matrix plus the d-vector per agent.
struct CommLedger {
  std::int64_t epochs = 0;
  std::int64_t scalars_up = 0;
  std::int64_t scalars_down = 0;

  std::int64_t total_scalars() const { return scalars_up + scalars_down; }
};

SyncUp make_sync_up(const AgentState& state);

/// In-process server: holds the running W_syn/U_syn sums and the ledger.
class Server {
 public:
  Server(int num_agents, int dim);

  /// Adds every agent's local statistics. Exactly one upload per agent is required.
  SyncDown aggregate(const std::vector<SyncUp>& ups);

  const CommLedger& ledger() const { return ledger_; }
  const SymPsd& w_syn() const { return w_syn_; }
  const Eigen::VectorXd& u_syn() const { return u_syn_; }

  static std::int64_t message_scalars(int dim) { return static_cast<std::int64_t>(dim) * dim + dim; }

 private:
  int num_agents_;
  int dim_;
  SymPsd w_syn_;
  Eigen::VectorXd u_syn_;
  CommLedger ledger_;
};

/// Installs the broadcast, clears local statistics and records the sync round.
void apply_sync(AgentState& state, const SyncDown& down, int t);

}  // namespace disc
