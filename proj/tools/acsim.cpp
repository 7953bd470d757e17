// acsim command line: serve, evaluate, replay, bridge, peer, train.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "acsim/agents/files.hpp"
#include "acsim/bridge/peer.hpp"
#include "acsim/gateway/server.hpp"

using namespace acsim;

namespace {

constexpr int kUsageError = 2;

// SIGINT and SIGTERM request a stop instead of killing the process. Call
// before starting any thread so every thread inherits the blocked mask.
class SignalStop {
 public:
  SignalStop() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    watcher_ = std::jthread([this](std::stop_token own) {
      const timespec poll{0, 100'000'000};
      while (!own.stop_requested()) {
        if (sigtimedwait(&set_, nullptr, &poll) > 0) {
          source_.request_stop();
          return;
        }
      }
    });
  }

  std::stop_token token() const { return source_.get_token(); }
  void request_stop() { source_.request_stop(); }

 private:
  sigset_t set_{};
  std::stop_source source_;
  std::jthread watcher_;
};

// Stops `source` after `seconds` of wall time; 0 means never.
std::jthread stop_after(double seconds, SignalStop& signals) {
  if (seconds <= 0.0) return {};
  return std::jthread([seconds, &signals](std::stop_token own) {
    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lock(m);
    cv.wait_for(lock, own, std::chrono::duration<double>(seconds), [] { return false; });
    if (!own.stop_requested()) signals.request_stop();
  });
}

std::optional<agents::CommanderParams> maybe_params(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return agents::load_params(path);
}

const std::vector<std::string> kControllers = {"attack", "engage", "defend", "mixed", "commander"};

void print_counters(const char* label, const bridge::BridgeCounters& c) {
  std::printf("%s: received %llu accepted %llu dropped %llu malformed %llu unsupported %llu filtered %llu "
              "ignored %llu sent %llu send_failed %llu\n",
              label, static_cast<unsigned long long>(c.received), static_cast<unsigned long long>(c.accepted),
              static_cast<unsigned long long>(c.dropped), static_cast<unsigned long long>(c.malformed),
              static_cast<unsigned long long>(c.unsupported), static_cast<unsigned long long>(c.filtered),
              static_cast<unsigned long long>(c.ignored), static_cast<unsigned long long>(c.sent),
              static_cast<unsigned long long>(c.send_failed));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Air combat simulation with DIS bridge and pilot gateway"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run a live scenario for pilot clients");
  std::string scenario_path, record_path, params_path, blue = "commander", red = "mixed";
  std::string address = "0.0.0.0";
  std::uint16_t port = 8080;
  std::uint64_t seed = 0;
  double time_scale = 1.0;
  bool dis_bridge = false;
  std::string dis_listen = "0.0.0.0:0", dis_dest = "127.0.0.1:3001", mode_name = "state";
  int exercise = 1;
  serve->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  serve->add_option("--address", address, "Listen address");
  serve->add_option("--port", port, "WebSocket port (0 picks one)");
  serve->add_option("--seed", seed, "Episode seed");
  serve->add_option("--blue", blue, "Blue agent controller")->check(CLI::IsMember(kControllers));
  serve->add_option("--red", red, "Red agent controller")->check(CLI::IsMember(kControllers));
  serve->add_option("--params", params_path, "Commander params JSON")->check(CLI::ExistingFile);
  serve->add_option("--time-scale", time_scale, "Simulated seconds per wall second")
      ->check(CLI::PositiveNumber);
  serve->add_flag("--dis-bridge", dis_bridge, "Publish the world over DIS");
  serve->add_option("--listen", dis_listen, "DIS local endpoint host:port");
  serve->add_option("--dest", dis_dest, "DIS destination host:port");
  serve->add_option("--mode", mode_name, "DIS mode")->check(CLI::IsMember({"state", "action"}));
  serve->add_option("--exercise", exercise, "DIS exercise id")->check(CLI::Range(0, 255));
  serve->add_option("--record", record_path, "Write the episode record (JSONL)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Win rate of one controller against another");
  int episodes = 100;
  evaluate->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--blue", blue, "Controller flying blue")->required()->check(CLI::IsMember(kControllers));
  evaluate->add_option("--red", red, "Controller flying red")->required()->check(CLI::IsMember(kControllers));
  evaluate->add_option("-n,--episodes", episodes, "Episode count")->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", seed, "First episode seed");
  evaluate->add_option("--params", params_path, "Commander params JSON")->check(CLI::ExistingFile);

  // replay
  auto* replay = app.add_subcommand("replay", "Re-simulate an episode record and verify it");
  std::string replay_path;
  replay->add_option("record", replay_path, "Episode record (JSONL)")->required()->check(CLI::ExistingFile);

  // bridge
  auto* bridge_cmd = app.add_subcommand("bridge", "Exchange DIS traffic with an external simulator");
  std::string listen = "0.0.0.0:3000", dest = "127.0.0.1:3001";
  double rate = 10.0, duration = 0.0;
  bool broadcast = false;
  bridge_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  bridge_cmd->add_option("--listen", listen, "Local endpoint host:port");
  bridge_cmd->add_option("--dest", dest, "Destination host:port");
  bridge_cmd->add_option("--mode", mode_name, "state or action")->check(CLI::IsMember({"state", "action"}));
  bridge_cmd->add_option("--rate", rate, "Send and decision rate, Hz")->check(CLI::Range(1.0, 100.0));
  bridge_cmd->add_option("--exercise", exercise, "DIS exercise id")->check(CLI::Range(0, 255));
  bridge_cmd->add_option("--seed", seed, "Episode seed");
  bridge_cmd->add_option("--blue", blue, "Blue agent controller")->check(CLI::IsMember(kControllers));
  bridge_cmd->add_option("--red", red, "Red agent controller")->check(CLI::IsMember(kControllers));
  bridge_cmd->add_option("--params", params_path, "Commander params JSON")->check(CLI::ExistingFile);
  bridge_cmd->add_option("--duration", duration, "Wall seconds to run; 0 runs until interrupted")
      ->check(CLI::NonNegativeNumber);
  bridge_cmd->add_flag("--broadcast", broadcast, "Allow a broadcast destination");

  // peer
  auto* peer_cmd = app.add_subcommand("peer", "Stand-in external simulator for a bridge");
  peer_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  peer_cmd->add_option("--listen", listen, "Local endpoint host:port");
  peer_cmd->add_option("--dest", dest, "Bridge endpoint host:port");
  peer_cmd->add_option("--mode", mode_name, "Mode of the bridge")->check(CLI::IsMember({"state", "action"}));
  peer_cmd->add_option("--rate", rate, "Tick rate, Hz")->check(CLI::Range(1.0, 100.0));
  peer_cmd->add_option("--exercise", exercise, "DIS exercise id")->check(CLI::Range(0, 255));
  peer_cmd->add_option("--seed", seed, "Episode seed");
  peer_cmd->add_option("--duration", duration, "Wall seconds to run; 0 runs until interrupted")
      ->check(CLI::NonNegativeNumber);

  // train
  auto* train = app.add_subcommand("train", "Train commander params through the curriculum");
  std::string out_path;
  int budget = 300;
  train->add_option("--scenario", scenario_path, "Scenario JSON with the curriculum")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", out_path, "Output params JSON")->required();
  train->add_option("--budget", budget, "Episode budget")->check(CLI::PositiveNumber);
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--params", params_path, "Initial params JSON (default: all zeros)")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*evaluate) {
      const auto scenario = agents::load_scenario(scenario_path);
      const auto params = maybe_params(params_path);
      const agents::CommanderParams* p = params ? &*params : nullptr;
      const auto result = agents::evaluate_winrate(scenario.scenario, agents::make_controller_factory(blue, p),
                                                   agents::make_controller_factory(red, p), episodes, seed);
      std::printf("%-10s %-10s %8s %-13s %5s %6s %5s %8s %16s\n", "blue", "red", "episodes", "seeds", "wins",
                  "losses", "draws", "win_rate", "wilson_95");
      const std::string seeds = std::to_string(result.first_seed) + ".." + std::to_string(result.last_seed);
      std::printf("%-10s %-10s %8d %-13s %5d %6d %5d %8.4f  [%.4f, %.4f]\n", blue.c_str(), red.c_str(),
                  result.episodes, seeds.c_str(), result.wins, result.losses, result.draws, result.rate,
                  result.ci_low, result.ci_high);
      return 0;
    }

    if (*replay) {
      const auto record = gateway::load_record(replay_path);
      const auto result = gateway::replay(record);
      std::printf("%s: %s\n", result.verified ? "verified" : "DIVERGED", result.message.c_str());
      return result.verified ? 0 : 1;
    }

    if (*train) {
      const auto scenario = agents::load_scenario(scenario_path);
      const auto initial = maybe_params(params_path).value_or(agents::CommanderParams{});
      agents::TrainerOptions options;
      options.seed = seed;
      options.scenario = scenario.scenario;
      const auto result = agents::train_commander(initial, scenario.curriculum, budget, options);
      agents::save_params(result.params, out_path);
      std::printf("episodes %d updates %d final stage %d completed %s -> %s\n", result.episodes, result.updates,
                  result.final_stage, result.completed ? "yes" : "no", out_path.c_str());
      return 0;
    }

    SignalStop signals;

    if (*serve) {
      const auto scenario = agents::load_scenario(scenario_path);
      gateway::LiveOptions live;
      live.blue = blue;
      live.red = red;
      live.params = maybe_params(params_path);
      std::unique_ptr<gateway::FileRecorder> recorder;
      if (!record_path.empty()) recorder = std::make_unique<gateway::FileRecorder>(record_path);
      gateway::LiveSim sim(scenario, seed, live, recorder.get());

      gateway::ServerOptions options;
      options.address = address;
      options.port = port;
      options.time_scale = time_scale;
      if (dis_bridge) {
        gateway::DisOutput dis;
        dis.listen = bridge::parse_endpoint(dis_listen);
        dis.destination = bridge::parse_endpoint(dis_dest);
        dis.mode = *bridge::parse_mode(mode_name);
        dis.exercise_id = static_cast<std::uint8_t>(exercise);
        options.dis = dis;
      }
      gateway::GatewayServer server(sim, options);
      std::printf("serving on %s:%u\n", address.c_str(), static_cast<unsigned>(server.port()));
      std::fflush(stdout);
      server.run(signals.token());
      const auto stats = server.stats();
      std::printf("ticks %llu winner %s connections %llu snapshots sent %llu dropped %llu\n",
                  static_cast<unsigned long long>(stats.ticks),
                  std::string(combat::to_string(sim.world().winner)).c_str(),
                  static_cast<unsigned long long>(stats.connections),
                  static_cast<unsigned long long>(stats.snapshots_sent),
                  static_cast<unsigned long long>(stats.snapshots_dropped));
      return 0;
    }

    if (*bridge_cmd) {
      const auto scenario = agents::load_scenario(scenario_path);
      const auto params = maybe_params(params_path);
      const agents::CommanderParams* p = params ? &*params : nullptr;
      bridge::BridgeConfig config;
      config.listen = bridge::parse_endpoint(listen);
      config.destination = bridge::parse_endpoint(dest);
      config.mode = *bridge::parse_mode(mode_name);
      config.send_rate = rate;
      config.filter.exercise_id = static_cast<std::uint8_t>(exercise);
      config.broadcast = broadcast;
      bridge::Bridge runner(std::make_unique<bridge::BridgeCore>(config, scenario,
                                                                 agents::make_controller_factory(blue, p),
                                                                 agents::make_controller_factory(red, p), seed));
      std::printf("bridge %s on %s -> %s\n", mode_name.c_str(), runner.local_endpoint().to_string().c_str(),
                  config.destination.to_string().c_str());
      std::fflush(stdout);
      auto timer = stop_after(duration, signals);
      runner.run(signals.token());
      print_counters("bridge", runner.stats().snapshot());
      return 0;
    }

    if (*peer_cmd) {
      const auto scenario = agents::load_scenario(scenario_path);
      bridge::PeerOptions options;
      options.mode = *bridge::parse_mode(mode_name);
      options.rate = rate;
      options.filter.exercise_id = static_cast<std::uint8_t>(exercise);
      auto core = std::make_unique<bridge::PeerCore>(scenario, bridge::default_roster(scenario.scenario), options,
                                                     seed);
      bridge::LoopbackPeer runner(std::move(core), bridge::parse_endpoint(listen), bridge::parse_endpoint(dest));
      std::printf("peer on %s\n", runner.local_endpoint().to_string().c_str());
      std::fflush(stdout);
      auto timer = stop_after(duration, signals);
      runner.run(signals.token());
      const auto& mirror = runner.core().mirror();
      std::printf("mirror samples %llu violations %llu max error %.3f m\n",
                  static_cast<unsigned long long>(mirror.samples()),
                  static_cast<unsigned long long>(mirror.violations()), mirror.max_error());
      print_counters("peer", runner.core().stats().snapshot());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
