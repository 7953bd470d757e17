#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "acsim/agents/episode.hpp"

namespace acsim::agents {

struct OpponentSpec {
  enum class Kind { kFixed, kMixed, kSelfPlay };

  Kind kind = Kind::kFixed;
  PolicyKind fixed = PolicyKind::kDefend;
  MixedStrategy mix = kReferenceMix;

  static OpponentSpec fixed_policy(PolicyKind k) { return {Kind::kFixed, k, kReferenceMix}; }
  static OpponentSpec mixed(MixedStrategy m = kReferenceMix) {
    return {Kind::kMixed, PolicyKind::kAttack, m};
  }
  static OpponentSpec self_play() { return {Kind::kSelfPlay, PolicyKind::kAttack, kReferenceMix}; }

  bool operator==(const OpponentSpec&) const = default;
};

struct CurriculumStage {
  int id = 0;
  int blue_count = 1;
  int red_count = 1;
  OpponentSpec opponent;
  double threshold = 0.7;  // win rate over the window needed to promote
  int window = 100;

  bool operator==(const CurriculumStage&) const = default;
};

// Throws ConfigError unless ids strictly increase and thresholds lie in (0.5, 1).
void validate_curriculum(const std::vector<CurriculumStage>& stages);

// 1v1 vs defend, 1v1 vs the reference mix, 2v2 vs the reference mix.
std::vector<CurriculumStage> default_curriculum();

// Training signal for one episode: the return credited to each of `samples`
// (all decisions made by the learning team, in decision order).
using ReturnFn = std::function<std::vector<double>(
    const EpisodeResult& episode, Team team, const std::vector<DecisionSample>& samples)>;

struct CommanderReturnWeights {
  double gamma = 0.99;             // per second of simulated time
  double closure_scale = 10000.0;  // m of nearest-threat range worth 1.0
};

// Default commander objective. Each decision at time t is credited with
//   +1 per later kill scored and -1 on own death, discounted by gamma^(dt in s),
//   +1 for a team win and -1 for a loss or draw, discounted to the episode end,
//   plus the discounted sum of per-decision closure terms: the drop in
//   nearest-threat range until the same aircraft's next decision, over
//   closure_scale. The closure term is potential-based shaping on range.
std::vector<double> commander_returns(const EpisodeResult& episode, Team team,
                                      const std::vector<DecisionSample>& samples,
                                      const CommanderReturnWeights& weights = {});

struct TrainerOptions {
  double learning_rate = 0.01;
  CommanderReturnWeights objective;
  int baseline_window = 100;
  std::uint64_t seed = 0;
  ReturnFn return_fn;  // empty selects commander_returns with `objective`
  combat::ScenarioConfig scenario;  // template; team sizes come from the stage
};

struct TrainResult {
  CommanderParams params;  // best seen (by full-window stage win rate), else latest
  CommanderParams latest;
  bool completed = false;  // false when the budget ran out before the last promotion
  int episodes = 0;
  int final_stage = 0;
  int updates = 0;
};

// REINFORCE with a running-mean baseline: after every episode
//   w += lr * sum_over_decisions((G - b) * grad log pi(decision)),
// where b is the mean per-decision return over the last baseline_window
// episodes (0 before the first).
TrainResult train_commander(const CommanderParams& initial,
                            const std::vector<CurriculumStage>& curriculum, int budget,
                            const TrainerOptions& options = {});

}  // namespace acsim::agents
