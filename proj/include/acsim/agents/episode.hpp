#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "acsim/agents/controller.hpp"

namespace acsim::agents {

using combat::Winner;

struct EpisodeOptions {
  double gamma = 0.99;  // per decision step
};

struct EpisodeResult {
  Winner winner = Winner::kDraw;
  std::vector<combat::Event> events;
  std::map<EntityId, double> returns;  // discounted, per aircraft
  std::map<EntityId, std::vector<double>> reward_streams;
  std::map<EntityId, Team> teams;
  std::uint64_t steps = 0;
  double duration = 0.0;

  bool operator==(const EpisodeResult&) const = default;
};

// Per-team controller seeds are derived from the episode seed.
std::uint64_t controller_seed(std::uint64_t episode_seed, Team team);

// Asks each team's controller to fly every living, non-external aircraft not
// listed in `skip`, records the active policy and returns the joint action.
combat::JointAction decide_joint(WorldState& world, Controller& blue, Controller& red,
                                 const std::set<EntityId>& skip = {});

EpisodeResult run_episode(const combat::ScenarioConfig& scenario, Controller& blue,
                          Controller& red, std::uint64_t seed,
                          const EpisodeOptions& options = {});

struct WinRate {
  int episodes = 0;
  int wins = 0;
  int losses = 0;
  int draws = 0;
  double rate = 0.0;
  double ci_low = 0.0;   // 95 % Wilson score interval
  double ci_high = 0.0;
  std::uint64_t first_seed = 0;
  std::uint64_t last_seed = 0;
};

// 95 % Wilson score interval for `wins` successes out of `n`.
WinRate wilson_interval(int wins, int n);

// Controller A flies blue. Draws count as losses. Seeds base_seed .. base_seed + n - 1.
WinRate evaluate_winrate(const combat::ScenarioConfig& scenario, const ControllerFactory& a,
                         const ControllerFactory& b, int n_episodes, std::uint64_t base_seed,
                         const EpisodeOptions& options = {});

}  // namespace acsim::agents
