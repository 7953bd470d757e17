#include "acsim/agents/controller.hpp"

#include <cmath>

namespace acsim::agents {

Decision FixedPolicyController::decide(const WorldState&, const EntityId&,
                                       const Observation& obs) {
  return {kind_, control_policy(kind_, obs)};
}

std::string FixedPolicyController::name() const { return std::string(combat::to_string(kind_)); }

MixedController::MixedController(MixedStrategy strategy) : strategy_(strategy) {
  if (!strategy_.valid()) throw ContractViolation("MixedController: invalid weights");
}

void MixedController::begin_episode(const WorldState& world, Team team, std::uint64_t seed) {
  std::vector<EntityId> members;
  for (const auto& [id, rec] : world.aircraft) {
    if (rec.team == team) members.push_back(id);
  }
  std::mt19937_64 rng(seed);
  assignment_ = mixed_opponent_assign(strategy_, members, rng);
}

Decision MixedController::decide(const WorldState&, const EntityId& id, const Observation& obs) {
  const auto it = assignment_.find(id);
  if (it == assignment_.end()) {
    throw ContractViolation("MixedController: entity not assigned " + dis::to_string(id));
  }
  return {it->second, control_policy(it->second, obs)};
}

CommanderController::CommanderController(CommanderParams params, SelectMode mode, bool record)
    : params_(params), mode_(mode), record_(record) {}

void CommanderController::begin_episode(const WorldState&, Team, std::uint64_t seed) {
  rng_.seed(seed);
  current_.clear();
  samples_.clear();
}

Decision CommanderController::decide(const WorldState& world, const EntityId& id,
                                     const Observation& obs) {
  const auto period_steps = static_cast<std::uint64_t>(
      std::llround(kDecisionPeriod / world.config.rules.decision_dt));
  auto it = current_.find(id);
  if (it == current_.end() || world.step_count % period_steps == 0) {
    const CommanderDecision d =
        commander_select(params_, commander_features(obs), rng_, mode_, world.time);
    current_[id] = d;
    if (record_) samples_.push_back({id, d.features, d.chosen, d.decision_time});
    it = current_.find(id);
  }
  const PolicyKind kind = it->second.chosen;
  return {kind, control_policy(kind, obs)};
}

ControllerFactory make_controller_factory(const std::string& name, const CommanderParams* params) {
  if (auto kind = combat::parse_policy(name)) {
    const PolicyKind k = *kind;
    return [k] { return std::make_unique<FixedPolicyController>(k); };
  }
  if (name == "mixed") {
    return [] { return std::make_unique<MixedController>(kReferenceMix); };
  }
  if (name == "commander") {
    const CommanderParams p = params != nullptr ? *params : rule_commander_params();
    return [p] { return std::make_unique<CommanderController>(p, SelectMode::kGreedy); };
  }
  throw ContractViolation("unknown controller '" + name + "'");
}

bool is_known_controller(const std::string& name) {
  return combat::parse_policy(name).has_value() || name == "mixed" || name == "commander";
}

}  // namespace acsim::agents
