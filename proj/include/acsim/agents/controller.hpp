#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "acsim/agents/commander.hpp"
#include "acsim/agents/policies.hpp"

namespace acsim::agents {

using combat::Team;
using combat::WorldState;

struct Decision {
  PolicyKind policy = PolicyKind::kAttack;
  ActionCommand command;
};

// Drives every aircraft of one team. Instances hold per-episode state and are
// not shared between concurrently running episodes.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual void begin_episode(const WorldState& world, Team team, std::uint64_t seed) = 0;
  virtual Decision decide(const WorldState& world, const EntityId& id,
                          const Observation& obs) = 0;
  virtual std::string name() const = 0;
};

using ControllerFactory = std::function<std::unique_ptr<Controller>()>;

class FixedPolicyController : public Controller {
 public:
  explicit FixedPolicyController(PolicyKind kind) : kind_(kind) {}

  void begin_episode(const WorldState&, Team, std::uint64_t) override {}
  Decision decide(const WorldState& world, const EntityId& id, const Observation& obs) override;
  std::string name() const override;

 private:
  PolicyKind kind_;
};

class MixedController : public Controller {
 public:
  explicit MixedController(MixedStrategy strategy);

  void begin_episode(const WorldState& world, Team team, std::uint64_t seed) override;
  Decision decide(const WorldState& world, const EntityId& id, const Observation& obs) override;
  std::string name() const override { return "mixed"; }

  const std::map<EntityId, PolicyKind>& assignment() const { return assignment_; }

 private:
  MixedStrategy strategy_;
  std::map<EntityId, PolicyKind> assignment_;
};

// One recorded commander choice, kept for policy-gradient updates.
struct DecisionSample {
  EntityId entity;
  CommanderFeatures features;
  PolicyKind chosen = PolicyKind::kAttack;
  double time = 0.0;
};

// Hierarchical controller: a commander re-selects the active control policy
// at 1 Hz on simulation time; the control policy flies every decision step.
class CommanderController : public Controller {
 public:
  CommanderController(CommanderParams params, SelectMode mode, bool record = false);

  void begin_episode(const WorldState& world, Team team, std::uint64_t seed) override;
  Decision decide(const WorldState& world, const EntityId& id, const Observation& obs) override;
  std::string name() const override { return "commander"; }

  const std::vector<DecisionSample>& samples() const { return samples_; }
  const std::map<EntityId, CommanderDecision>& current() const { return current_; }

  static constexpr double kDecisionPeriod = 1.0;

 private:
  CommanderParams params_;
  SelectMode mode_;
  bool record_;
  std::mt19937_64 rng_;
  std::map<EntityId, CommanderDecision> current_;
  std::vector<DecisionSample> samples_;
};

// Known names: attack, engage, defend, mixed, commander. "commander" uses the
// hand-initialized rule parameters unless params are given.
ControllerFactory make_controller_factory(const std::string& name,
                                          const CommanderParams* params = nullptr);
bool is_known_controller(const std::string& name);

}  // namespace acsim::agents
