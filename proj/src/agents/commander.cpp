#include "acsim/agents/commander.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace acsim::agents {

std::array<double, kInputCount> CommanderFeatures::inputs() const {
  return {hp, threat_range / 10000.0, threat_aspect / kPi, numerical_advantage / 4.0,
          energy / 10000.0, 1.0};
}

bool CommanderFeatures::finite() const {
  return std::isfinite(hp) && std::isfinite(threat_range) && std::isfinite(threat_aspect) &&
         std::isfinite(numerical_advantage) && std::isfinite(energy);
}

CommanderFeatures commander_features(const combat::Observation& obs) {
  CommanderFeatures f;
  f.hp = obs.own.hp;
  f.energy = obs.own.altitude + obs.own.speed * obs.own.speed / (2.0 * kGravity);
  f.threat_range = kMaxThreatRange;
  f.threat_aspect = kPi;
  int enemies_close = 0;
  for (int i = 0; i < combat::kEnemySlots; ++i) {
    if (obs.enemy_mask[i] == 0) continue;
    const auto& b = obs.enemies[i];
    if (b.range < f.threat_range) {
      f.threat_range = b.range;
      f.threat_aspect = b.aspect_angle;
    }
    if (b.range <= kAdvantageRadius) ++enemies_close;
  }
  int allies_close = 1;
  for (int i = 0; i < combat::kAllySlots; ++i) {
    if (obs.ally_mask[i] != 0 && obs.allies[i].range <= kAdvantageRadius) ++allies_close;
  }
  f.numerical_advantage = allies_close - enemies_close;
  return f;
}

bool CommanderParams::finite() const {
  for (const auto& row : weights) {
    for (const double w : row) {
      if (!std::isfinite(w)) return false;
    }
  }
  return true;
}

CommanderParams rule_commander_params() {
  CommanderParams p;
  // inputs: hp, range/10km, aspect/pi, advantage/4, energy/10km, bias
  // Attack unless damaged below half health, then defend. Engage is left to
  // training: in desk rollouts against the reference mix every hand rule that
  // switched to engage or defend on range, aspect or numbers lost win rate.
  p.weights[0] = {0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
  p.weights[1] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  p.weights[2] = {-3.0, 0.0, 0.0, 0.0, 0.0, 2.5};
  return p;
}

Logits commander_logits(const CommanderParams& params, const CommanderFeatures& feats) {
  const auto x = feats.inputs();
  Logits z{};
  for (int k = 0; k < combat::kPolicyCount; ++k) {
    for (int j = 0; j < kInputCount; ++j) z[k] += params.weights[k][j] * x[j];
  }
  return z;
}

Logits softmax(const Logits& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  Logits p{};
  double sum = 0.0;
  for (int k = 0; k < combat::kPolicyCount; ++k) {
    p[k] = std::exp(logits[k] - top);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  return p;
}

CommanderDecision commander_select(const CommanderParams& params, const CommanderFeatures& feats,
                                   std::mt19937_64& rng, SelectMode mode, double decision_time) {
  if (!feats.finite()) throw ContractViolation("commander_select: non-finite features");
  const Logits z = commander_logits(params, feats);
  int chosen = 0;
  if (mode == SelectMode::kGreedy) {
    chosen = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  } else {
    const Logits p = softmax(z);
    const double u = uniform01(rng);
    double cumulative = 0.0;
    chosen = combat::kPolicyCount - 1;
    for (int k = 0; k < combat::kPolicyCount; ++k) {
      cumulative += p[k];
      if (u < cumulative) {
        chosen = k;
        break;
      }
    }
  }
  return {static_cast<PolicyKind>(chosen), decision_time, feats};
}

double log_probability(const CommanderParams& params, const CommanderFeatures& feats,
                       PolicyKind chosen) {
  const Logits z = commander_logits(params, feats);
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (const double v : z) sum += std::exp(v - top);
  return z[static_cast<int>(chosen)] - top - std::log(sum);
}

WeightMatrix log_probability_gradient(const CommanderParams& params,
                                      const CommanderFeatures& feats, PolicyKind chosen) {
  const Logits p = softmax(commander_logits(params, feats));
  const auto x = feats.inputs();
  WeightMatrix g{};
  for (int k = 0; k < combat::kPolicyCount; ++k) {
    const double coefficient = (k == static_cast<int>(chosen) ? 1.0 : 0.0) - p[k];
    for (int j = 0; j < kInputCount; ++j) g[k][j] = coefficient * x[j];
  }
  return g;
}

bool MixedStrategy::valid() const {
  double sum = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

PolicyKind sample_policy(const MixedStrategy& strategy, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  int last_positive = 0;
  for (int k = 0; k < combat::kPolicyCount; ++k) {
    if (strategy.weights[k] <= 0.0) continue;
    last_positive = k;
    cumulative += strategy.weights[k];
    if (u < cumulative) return static_cast<PolicyKind>(k);
  }
  return static_cast<PolicyKind>(last_positive);
}

std::map<EntityId, PolicyKind> mixed_opponent_assign(const MixedStrategy& strategy,
                                                     const std::vector<EntityId>& team,
                                                     std::mt19937_64& rng) {
  if (!strategy.valid()) throw ContractViolation("mixed_opponent_assign: invalid weights");
  std::map<EntityId, PolicyKind> out;
  for (const auto& id : team) out[id] = sample_policy(strategy, rng);
  return out;
}

}  // namespace acsim::agents
