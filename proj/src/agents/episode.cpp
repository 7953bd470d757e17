#include "acsim/agents/episode.hpp"

#include <cmath>

namespace acsim::agents {

std::uint64_t controller_seed(std::uint64_t episode_seed, Team team) {
  return splitmix64(episode_seed * 2 + (team == Team::kBlue ? 0 : 1));
}

combat::JointAction decide_joint(WorldState& world, Controller& blue, Controller& red,
                                 const std::set<EntityId>& skip) {
  combat::JointAction joint;
  for (auto& [id, rec] : world.aircraft) {
    if (!rec.alive || rec.external || skip.count(id)) continue;
    const Observation obs = combat::observe(world, id);
    Controller& controller = rec.team == Team::kBlue ? blue : red;
    const Decision d = controller.decide(world, id, obs);
    rec.active_policy = d.policy;
    joint.emplace(id, d.command);
  }
  return joint;
}

EpisodeResult run_episode(const combat::ScenarioConfig& scenario, Controller& blue,
                          Controller& red, std::uint64_t seed, const EpisodeOptions& options) {
  combat::ScenarioConfig config = scenario;
  config.seed = seed;
  WorldState world = combat::reset(config);
  blue.begin_episode(world, Team::kBlue, controller_seed(seed, Team::kBlue));
  red.begin_episode(world, Team::kRed, controller_seed(seed, Team::kRed));

  EpisodeResult result;
  for (const auto& [id, rec] : world.aircraft) {
    result.teams[id] = rec.team;
    result.reward_streams[id];
  }

  while (!world.done) {
    const combat::StepResult step = combat::step(world, decide_joint(world, blue, red));
    for (const auto& [id, r] : step.rewards) result.reward_streams[id].push_back(r);
  }

  result.winner = world.winner;
  result.events = world.event_log;
  result.steps = world.step_count;
  result.duration = world.time;
  for (const auto& [id, stream] : result.reward_streams) {
    result.returns[id] = combat::discounted_return(stream, options.gamma);
  }
  return result;
}

WinRate wilson_interval(int wins, int n) {
  if (n < 1) throw ContractViolation("wilson_interval: n must be >= 1");
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double p = wins / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  WinRate w;
  w.episodes = n;
  w.wins = wins;
  w.rate = p;
  w.ci_low = std::max(0.0, center - half);
  w.ci_high = std::min(1.0, center + half);
  return w;
}

WinRate evaluate_winrate(const combat::ScenarioConfig& scenario, const ControllerFactory& a,
                         const ControllerFactory& b, int n_episodes, std::uint64_t base_seed,
                         const EpisodeOptions& options) {
  if (n_episodes < 1) throw ContractViolation("evaluate_winrate: n_episodes must be >= 1");
  int wins = 0, losses = 0, draws = 0;
  for (int i = 0; i < n_episodes; ++i) {
    auto blue = a();
    auto red = b();
    const auto result = run_episode(scenario, *blue, *red, base_seed + i, options);
    switch (result.winner) {
      case Winner::kBlue: ++wins; break;
      case Winner::kRed: ++losses; break;
      case Winner::kDraw: ++draws; break;
    }
  }
  WinRate w = wilson_interval(wins, n_episodes);
  w.losses = losses;
  w.draws = draws;
  w.first_seed = base_seed;
  w.last_seed = base_seed + static_cast<std::uint64_t>(n_episodes) - 1;
  return w;
}

}  // namespace acsim::agents
