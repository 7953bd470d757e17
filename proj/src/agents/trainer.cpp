#include "acsim/agents/trainer.hpp"

#include <cmath>
#include <deque>
#include <numeric>

namespace acsim::agents {

void validate_curriculum(const std::vector<CurriculumStage>& stages) {
  if (stages.empty()) throw combat::ConfigError("curriculum: no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    if (i > 0 && s.id <= stages[i - 1].id) {
      throw combat::ConfigError("curriculum: stage ids must strictly increase");
    }
    if (!(s.threshold > 0.5 && s.threshold < 1.0)) {
      throw combat::ConfigError("curriculum: threshold must lie in (0.5, 1)");
    }
    if (s.window < 1) throw combat::ConfigError("curriculum: window must be >= 1");
    if (s.blue_count < 1 || s.blue_count > combat::kMaxTeamSize || s.red_count < 1 ||
        s.red_count > combat::kMaxTeamSize) {
      throw combat::ConfigError("curriculum: team size out of range");
    }
    if (s.opponent.kind == OpponentSpec::Kind::kMixed && !s.opponent.mix.valid()) {
      throw combat::ConfigError("curriculum: invalid mixed strategy");
    }
  }
}

std::vector<CurriculumStage> default_curriculum() {
  return {
      {0, 1, 1, OpponentSpec::fixed_policy(PolicyKind::kDefend), 0.7, 100},
      {1, 1, 1, OpponentSpec::mixed(), 0.6, 100},
      {2, 2, 2, OpponentSpec::mixed(), 0.55, 200},
  };
}

std::vector<double> commander_returns(const EpisodeResult& episode, Team team,
                                      const std::vector<DecisionSample>& samples,
                                      const CommanderReturnWeights& weights) {
  const double gamma = weights.gamma;
  const bool won = (team == Team::kBlue && episode.winner == Winner::kBlue) ||
                   (team == Team::kRed && episode.winner == Winner::kRed);

  // Closure term per decision, from the next decision of the same aircraft.
  std::vector<double> closure(samples.size(), 0.0);
  std::map<EntityId, std::size_t> last;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto it = last.find(samples[i].entity);
    if (it != last.end()) {
      const auto& prev = samples[it->second];
      const double drop = prev.features.threat_range - samples[i].features.threat_range;
      // A jump no pair of aircraft could fly means the nearest threat changed
      // (a kill or a death), which is not closure.
      const double reachable = 2.0 * flightdyn::kDefaultAirframe.max_speed *
                               (samples[i].time - prev.time);
      if (std::abs(drop) <= reachable) closure[it->second] = drop / weights.closure_scale;
    }
    last[samples[i].entity] = i;
  }

  std::vector<double> out(samples.size(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    double g = 0.0;
    for (const auto& e : episode.events) {
      if (e.time < s.time) continue;
      const double discount = std::pow(gamma, e.time - s.time);
      if (e.kind == combat::EventKind::kKill && e.shooter == s.entity) g += discount;
      const bool died =
          (e.kind == combat::EventKind::kKill || e.kind == combat::EventKind::kCrash) &&
          e.target == s.entity;
      if (died) g -= discount;
    }
    g += (won ? 1.0 : -1.0) * std::pow(gamma, std::max(0.0, episode.duration - s.time));
    for (std::size_t j = i; j < samples.size(); ++j) {
      if (samples[j].entity == s.entity && closure[j] != 0.0) {
        g += std::pow(gamma, samples[j].time - s.time) * closure[j];
      }
    }
    out[i] = g;
  }
  return out;
}

namespace {

std::unique_ptr<Controller> make_opponent(const OpponentSpec& spec, const CommanderParams& current) {
  switch (spec.kind) {
    case OpponentSpec::Kind::kFixed:
      return std::make_unique<FixedPolicyController>(spec.fixed);
    case OpponentSpec::Kind::kMixed:
      return std::make_unique<MixedController>(spec.mix);
    case OpponentSpec::Kind::kSelfPlay:
      return std::make_unique<CommanderController>(current, SelectMode::kSample);
  }
  throw ContractViolation("unknown opponent kind");
}

}  // namespace

TrainResult train_commander(const CommanderParams& initial,
                            const std::vector<CurriculumStage>& curriculum, int budget,
                            const TrainerOptions& options) {
  if (budget < 1) throw ContractViolation("train_commander: budget must be >= 1");
  if (!initial.finite()) throw ContractViolation("train_commander: non-finite initial params");
  if (options.baseline_window < 1) throw ContractViolation("train_commander: bad baseline window");
  validate_curriculum(curriculum);

  const ReturnFn return_fn =
      options.return_fn ? options.return_fn
                        : ReturnFn([w = options.objective](const EpisodeResult& ep, Team team,
                                                           const std::vector<DecisionSample>& s) {
                            return commander_returns(ep, team, s, w);
                          });

  TrainResult result;
  CommanderParams params = initial;
  CommanderParams best = initial;
  double best_score = -1.0;
  double last_score = -1.0;
  bool have_best = false;

  std::deque<double> baseline_history;
  std::size_t stage_index = 0;
  std::deque<int> stage_outcomes;

  for (int episode = 0; episode < budget; ++episode) {
    const CurriculumStage& stage = curriculum[stage_index];
    combat::ScenarioConfig scenario = options.scenario;
    scenario.blue_count = stage.blue_count;
    scenario.red_count = stage.red_count;
    scenario.curriculum_stage = stage.id;
    scenario.human_slots = {0, 0};

    CommanderController learner(params, SelectMode::kSample, true);
    auto opponent = make_opponent(stage.opponent, params);
    const std::uint64_t seed = splitmix64(options.seed + static_cast<std::uint64_t>(episode));
    const EpisodeResult ep = run_episode(scenario, learner, *opponent, seed);

    // Baseline from earlier episodes only; zero before the first.
    double baseline = 0.0;
    if (!baseline_history.empty()) {
      baseline = std::accumulate(baseline_history.begin(), baseline_history.end(), 0.0) /
                 static_cast<double>(baseline_history.size());
    }

    const auto& samples = learner.samples();
    const std::vector<double> returns = return_fn(ep, Team::kBlue, samples);
    if (returns.size() != samples.size()) {
      throw ContractViolation("train_commander: return function size mismatch");
    }
    WeightMatrix grad{};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double advantage = returns[i] - baseline;
      if (advantage == 0.0) continue;
      const WeightMatrix g = log_probability_gradient(params, samples[i].features, samples[i].chosen);
      for (int k = 0; k < combat::kPolicyCount; ++k) {
        for (int j = 0; j < kInputCount; ++j) grad[k][j] += advantage * g[k][j];
      }
    }
    if (!samples.empty()) {
      for (int k = 0; k < combat::kPolicyCount; ++k) {
        for (int j = 0; j < kInputCount; ++j) {
          params.weights[k][j] += options.learning_rate * grad[k][j];
        }
      }
      ++result.updates;
      baseline_history.push_back(std::accumulate(returns.begin(), returns.end(), 0.0) /
                                 static_cast<double>(returns.size()));
      if (static_cast<int>(baseline_history.size()) > options.baseline_window) {
        baseline_history.pop_front();
      }
    }

    result.episodes = episode + 1;
    stage_outcomes.push_back(ep.winner == Winner::kBlue ? 1 : 0);
    if (static_cast<int>(stage_outcomes.size()) > stage.window) stage_outcomes.pop_front();
    if (static_cast<int>(stage_outcomes.size()) == stage.window) {
      const double rate = std::accumulate(stage_outcomes.begin(), stage_outcomes.end(), 0) /
                          static_cast<double>(stage.window);
      // A later stage always outranks an earlier one.
      const double score = static_cast<double>(stage_index) + rate;
      last_score = score;
      if (!have_best || score >= best_score) {
        best = params;
        best_score = score;
        have_best = true;
      }
      if (rate >= stage.threshold) {
        stage_outcomes.clear();
        if (stage_index + 1 == curriculum.size()) {
          result.completed = true;
          break;
        }
        ++stage_index;
      }
    }
  }

  // Latest params win unless an earlier full window scored strictly better.
  result.latest = params;
  result.params = (!have_best || last_score >= best_score) ? params : best;
  result.final_stage = curriculum[stage_index].id;
  return result;
}

}  // namespace acsim::agents
