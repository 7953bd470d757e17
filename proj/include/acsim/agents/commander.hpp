#pragma once

#include <array>
#include <map>
#include <random>
#include <vector>

#include "acsim/combat/world.hpp"

namespace acsim::agents {

using combat::EntityId;
using combat::PolicyKind;

inline constexpr int kFeatureCount = 5;
inline constexpr int kInputCount = kFeatureCount + 1;  // + bias

struct CommanderFeatures {
  double hp = 1.0;
  double threat_range = 0.0;   // m, capped at kMaxThreatRange
  double threat_aspect = 0.0;  // rad, 0 = own aircraft sits on the threat's tail
  double numerical_advantage = 0.0;  // (self + allies) - enemies within 5 km
  double energy = 0.0;         // m, h + v^2 / 2g

  // Scaled model inputs, last entry is the bias term.
  std::array<double, kInputCount> inputs() const;
  bool finite() const;
};

inline constexpr double kMaxThreatRange = 50000.0;
inline constexpr double kAdvantageRadius = 5000.0;

CommanderFeatures commander_features(const combat::Observation& obs);

using Logits = std::array<double, combat::kPolicyCount>;
using WeightMatrix = std::array<std::array<double, kInputCount>, combat::kPolicyCount>;

// Linear softmax commander: logits = weights * inputs.
struct CommanderParams {
  WeightMatrix weights{};
  int version = 1;

  bool finite() const;
  bool operator==(const CommanderParams&) const = default;
};

// Hand-initialized rule: attack, or defend once hp drops below 0.5.
CommanderParams rule_commander_params();

Logits commander_logits(const CommanderParams& params, const CommanderFeatures& feats);
Logits softmax(const Logits& logits);

enum class SelectMode { kSample, kGreedy };

struct CommanderDecision {
  PolicyKind chosen = PolicyKind::kAttack;
  double decision_time = 0.0;
  CommanderFeatures features;
};

CommanderDecision commander_select(const CommanderParams& params, const CommanderFeatures& feats,
                                   std::mt19937_64& rng, SelectMode mode,
                                   double decision_time = 0.0);

double log_probability(const CommanderParams& params, const CommanderFeatures& feats,
                       PolicyKind chosen);
// d log pi(chosen | feats) / d weights
WeightMatrix log_probability_gradient(const CommanderParams& params,
                                      const CommanderFeatures& feats, PolicyKind chosen);

struct MixedStrategy {
  std::array<double, combat::kPolicyCount> weights{1.0, 0.0, 0.0};

  bool valid() const;
  bool operator==(const MixedStrategy&) const = default;
};

// Attack 40 %, engage 40 %, defend 20 %.
inline constexpr MixedStrategy kReferenceMix{{0.4, 0.4, 0.2}};

PolicyKind sample_policy(const MixedStrategy& strategy, std::mt19937_64& rng);

// Independent per-aircraft draw, made once per episode.
std::map<EntityId, PolicyKind> mixed_opponent_assign(const MixedStrategy& strategy,
                                                     const std::vector<EntityId>& team,
                                                     std::mt19937_64& rng);

}  // namespace acsim::agents
