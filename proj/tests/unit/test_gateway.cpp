#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "acsim/gateway/client.hpp"
#include "acsim/gateway/server.hpp"

using namespace acsim;
using namespace acsim::gateway;
using namespace std::chrono_literals;
using combat::Team;
using nlohmann::json;

namespace {

const EntityId kBlue1{1, 1, 1};
const EntityId kBlue2{1, 1, 2};

agents::ScenarioFile two_v_two(double time_limit, int human_blue = 2) {
  agents::ScenarioFile f;
  f.scenario.blue_count = 2;
  f.scenario.red_count = 2;
  f.scenario.time_limit = time_limit;
  f.scenario.human_slots = {human_blue, 0};
  f.origin = dis::geodetic_from_degrees(36.0, -115.0, 0.0);
  return f;
}

std::string protocol_code(std::string_view text) {
  try {
    parse_client_message(text);
  } catch (const ProtocolError& e) {
    return e.code();
  }
  return "";
}

EpisodeRecord run_recorded(const agents::ScenarioFile& f, std::uint64_t seed, int human_ticks) {
  MemoryRecorder recorder;
  LiveSim sim(f, seed, {}, &recorder);
  REQUIRE(std::holds_alternative<EntityId>(sim.join(1, Team::kBlue)));
  for (int i = 0; !sim.finished(); ++i) {
    if (i < human_ticks) {
      const double s = std::sin(0.1 * i);
      sim.set_input(1, {{0.5 + 0.5 * s, 0.2 * s, 0.6 * s}, i % 7 == 0});
    }
    sim.tick();
  }
  std::istringstream in(recorder.text());
  return parse_jsonl(in);
}

const json* entity_in(const json& tick, const EntityId& id) {
  for (const auto& e : tick["entities"]) {
    if (e["id"] == json::array({id.site, id.application, id.entity})) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("gateway") {

TEST_CASE("client messages parse and serialize") {
  const auto join = std::get<JoinMessage>(parse_client_message(R"({"type":"join","team":"red"})"));
  CHECK(join.team == Team::kRed);
  CHECK_FALSE(join.entity);
  const auto claim = std::get<JoinMessage>(parse_client_message(R"({"type":"join","team":"blue","entity":[1,1,2]})"));
  CHECK(claim.entity == kBlue2);

  const auto control = std::get<ControlMessage>(
      parse_client_message(R"({"type":"control","throttle":0.7,"pitch":-0.2,"roll":0.4,"fire":true,"x":1})"));
  CHECK(control.command == combat::ActionCommand{{0.7, -0.2, 0.4}, true});
  const auto clamped = std::get<ControlMessage>(
      parse_client_message(R"({"type":"control","throttle":3,"pitch":-9,"roll":2,"fire":false})"));
  CHECK(clamped.command == combat::ActionCommand{{1.0, -1.0, 1.0}, false});

  CHECK(std::get<PingMessage>(parse_client_message(R"({"type":"ping","t":12.5})")).t == 12.5);
  CHECK(std::holds_alternative<LeaveMessage>(parse_client_message(R"({"type":"leave"})")));

  for (const ClientMessage& m : std::vector<ClientMessage>{join, claim, control, PingMessage{3.0}, LeaveMessage{}}) {
    const ClientMessage back = parse_client_message(to_json(m).dump());
    CHECK(back.index() == m.index());
  }
  CHECK(joined_message(kBlue2) == json::parse(R"({"type":"joined","entity":[1,1,2]})"));
  CHECK(error_message("slot-taken") == json::parse(R"({"type":"error","code":"slot-taken"})"));
  CHECK(pong_message(5.0, 9.0) == json::parse(R"({"type":"pong","t":5.0,"server_t":9.0})"));
}

TEST_CASE("off-schema messages are bad-message") {
  for (const char* text : {
           "not json",
           "[1,2]",
           R"({"team":"blue"})",
           R"({"type":"dance"})",
           R"({"type":7})",
           R"({"type":"join"})",
           R"({"type":"join","team":"green"})",
           R"({"type":"join","team":"blue","entity":[1,1]})",
           R"({"type":"join","team":"blue","entity":[1,1,70000]})",
           R"({"type":"control","throttle":1,"pitch":0,"roll":0})",
           R"({"type":"control","throttle":"1","pitch":0,"roll":0,"fire":false})",
           R"({"type":"control","throttle":1,"pitch":0,"roll":0,"fire":1})",
           R"({"type":"ping"})",
           R"({"type":"ping","t":"now"})",
       }) {
    CAPTURE(text);
    CHECK(protocol_code(text) == error_code::kBadMessage);
  }
}

TEST_CASE("seats: slot-taken, already-joined, unknown-entity") {
  LiveSim sim(two_v_two(30.0, 1), 1);
  CHECK(std::get<EntityId>(sim.join(1, Team::kBlue)) == kBlue1);
  CHECK(std::get<JoinRejected>(sim.join(1, Team::kBlue)).code == error_code::kAlreadyJoined);
  CHECK(std::get<JoinRejected>(sim.join(2, Team::kBlue)).code == error_code::kSlotTaken);
  CHECK(std::get<JoinRejected>(sim.join(2, Team::kBlue, kBlue1)).code == error_code::kSlotTaken);
  CHECK(std::get<JoinRejected>(sim.join(2, Team::kBlue, kBlue2)).code == error_code::kUnknownEntity);
  CHECK(std::get<JoinRejected>(sim.join(2, Team::kRed)).code == error_code::kSlotTaken);
  CHECK(sim.seat_of(1) == kBlue1);
  CHECK_FALSE(sim.set_input(2, {}));
  sim.leave(1);
  CHECK_FALSE(sim.seat_of(1));
  CHECK(std::get<EntityId>(sim.join(2, Team::kBlue, kBlue1)) == kBlue1);
  CHECK(sim.participants().size() == 2);
}

TEST_CASE("joining after the end is episode-over") {
  LiveSim sim(two_v_two(0.1), 1);
  while (!sim.finished()) sim.tick();
  CHECK(std::get<JoinRejected>(sim.join(1, Team::kBlue)).code == error_code::kEpisodeOver);
  CHECK_THROWS_AS(sim.tick(), ContractViolation);
}

TEST_CASE("pilot input flies the seat on the next tick, last write wins") {
  LiveSim sim(two_v_two(30.0), 4);
  REQUIRE(std::holds_alternative<EntityId>(sim.join(7, Team::kBlue)));
  sim.set_input(7, {{0.2, 0.0, 0.0}, false});
  sim.set_input(7, {{1.0, 0.1, -0.3}, false});
  const TickOutput out = sim.tick();
  CHECK(out.record.actions.at(kBlue1) == combat::ActionCommand{{1.0, 0.1, -0.3}, false});
  CHECK(out.record.human == std::vector<EntityId>{kBlue1});
  CHECK(out.record.joined.size() == 1);
  const Seat& seat = sim.seats().at(7);
  CHECK(seat.latency.inputs == 1);
  CHECK(seat.latency.max_ticks <= 2);
  CHECK(sim.world().aircraft.at(kBlue1).state.throttle > 0.2);

  // Received during the previous tick and applied on this one: two ticks.
  sim.set_input(7, {{1.0, 0.0, 0.0}, false}, sim.ticks() - 1);
  sim.tick();
  CHECK(sim.seats().at(7).latency.max_ticks == 2);
  CHECK(clamp_input({{2.0, -3.0, 0.5}, true}) == combat::ActionCommand{{1.0, -1.0, 0.5}, true});
}

TEST_CASE("snapshots every second tick with strictly increasing time") {
  LiveSim sim(two_v_two(2.0), 9);
  double last_t = -1.0;
  int snapshots = 0;
  std::size_t events = 0;
  while (!sim.finished()) {
    const TickOutput out = sim.tick();
    if (!out.snapshot) continue;
    ++snapshots;
    const json& s = *out.snapshot;
    CHECK(s["type"] == "tick");
    CHECK(s["t"].get<double>() > last_t);
    last_t = s["t"];
    CHECK(s["entities"].size() == 4);
    events += s["events"].size();
    for (const auto& e : s["entities"]) {
      for (const char* key : {"id", "team", "pos", "vel", "att", "speed", "alt", "throttle", "hp", "policy",
                              "alive", "human"}) {
        CHECK(e.contains(key));
      }
    }
  }
  CHECK(snapshots == 20);
  CHECK(events == sim.world().event_log.size());
  CHECK(sim.end_message() == json::parse(R"({"type":"end","winner":"draw"})"));
}

TEST_CASE("records replay, including human input") {
  for (const std::uint64_t seed : {1, 2, 3}) {
    const EpisodeRecord record = run_recorded(two_v_two(20.0), seed, 150);
    REQUIRE(record.footer);
    const ReplayResult r = replay(record);
    CHECK(r.verified);
    CHECK(r.ticks_checked == record.ticks.size());
    CHECK_FALSE(r.first_divergence);
  }
}

TEST_CASE("a tampered action diverges at its tick") {
  EpisodeRecord record = run_recorded(two_v_two(10.0), 5, 200);
  REQUIRE(record.ticks.size() > 50);
  auto& action = record.ticks[40].actions.at(kBlue1);
  action.control.throttle = action.control.throttle > 0.5 ? 0.0 : 1.0;
  const ReplayResult r = replay(record);
  CHECK_FALSE(r.verified);
  REQUIRE(r.first_divergence);
  CHECK(*r.first_divergence == 40);
  CHECK_FALSE(r.message.empty());

  EpisodeRecord winner = run_recorded(two_v_two(5.0), 5, 0);
  winner.footer->winner = combat::Winner::kBlue;
  CHECK_FALSE(replay(winner).verified);
}

TEST_CASE("an empty episode is a valid record") {
  MemoryRecorder recorder;
  LiveSim sim(two_v_two(0.0), 1, {}, &recorder);
  CHECK(sim.finished());
  std::istringstream in(recorder.text());
  const EpisodeRecord record = parse_jsonl(in);
  CHECK(record.ticks.empty());
  REQUIRE(record.footer);
  CHECK(record.footer->winner == combat::Winner::kDraw);
  CHECK(replay(record).verified);
}

TEST_CASE("record lines round trip and malformed streams are rejected") {
  const EpisodeRecord record = run_recorded(two_v_two(3.0), 8, 30);
  const std::string text = to_jsonl(record);
  std::istringstream in(text);
  const EpisodeRecord back = parse_jsonl(in);
  CHECK(back.ticks == record.ticks);
  CHECK(back.footer == record.footer);
  CHECK(to_jsonl(back) == text);

  auto rejects = [](const std::string& s) {
    std::istringstream bad(s);
    CHECK_THROWS_AS(parse_jsonl(bad), RecordError);
  };
  rejects("");
  rejects(text.substr(text.find('\n') + 1));                        // no header
  rejects(text + R"({"kind":"tick"})" + "\n");                      // after the footer
  rejects(text.substr(0, text.find('\n') + 1) + "{not json\n");     // garbage line
  rejects(text.substr(0, text.find('\n') + 1) + R"({"kind":"tock"})" + "\n");

  // A record cut short by a shutdown has no footer and still parses.
  const std::string cut = text.substr(0, text.rfind(R"({"kind":"footer")"));
  std::istringstream partial(cut);
  CHECK_FALSE(parse_jsonl(partial).footer);
}

TEST_CASE("the file recorder keeps every line") {
  const auto path = std::filesystem::temp_directory_path() / "acsim_unit_recorder.jsonl";
  {
    FileRecorder recorder(path, 8);
    std::vector<std::jthread> writers;
    for (int w = 0; w < 4; ++w) {
      writers.emplace_back([&recorder, w] {
        for (int i = 0; i < 2500; ++i) recorder.write_line(std::to_string(w * 10000 + i));
      });
    }
    writers.clear();
    recorder.flush();
  }
  std::ifstream in(path);
  std::set<int> seen;
  std::string line;
  while (std::getline(in, line)) seen.insert(std::stoi(line));
  CHECK(seen.size() == 10000);
}

TEST_CASE("the DIS publisher emits decodable PDUs") {
  LiveSim sim(two_v_two(5.0), 2);
  const TickOutput out = sim.tick();
  DisPublisher state(sim.scenario().origin, bridge::BridgeMode::kState);
  const auto es = state.datagrams(sim.world(), out.record);
  REQUIRE(es.size() == 4);
  std::set<EntityId> ids;
  for (const auto& d : es) {
    const auto pdu = std::get<dis::EntityStatePdu>(dis::decode(d));
    ids.insert(pdu.entity_id);
    CHECK(pdu.header.timestamp == dis::relative_timestamp(sim.world().time));
  }
  CHECK(ids.size() == 4);

  DisPublisher action(sim.scenario().origin, bridge::BridgeMode::kAction);
  const auto ad = action.datagrams(sim.world(), out.record);
  CHECK(ad.size() == out.record.actions.size());
  for (const auto& d : ad) {
    const auto pdu = std::get<dis::ActionDataPdu>(dis::decode(d));
    CHECK(bridge::from_action_data(pdu) == bridge::quantize(out.record.actions.at(pdu.entity_id)));
  }
}

TEST_CASE("server: headless run to completion") {
  LiveSim sim(two_v_two(3.0), 6);
  ServerOptions options;
  options.address = "127.0.0.1";
  options.port = 0;
  options.time_scale = 50.0;
  GatewayServer server(sim, options);
  CHECK(server.port() != 0);
  server.run(std::stop_token{});
  CHECK(sim.finished());
  CHECK(server.stats().ticks == 60);
  CHECK(server.stats().connections == 0);
}

TEST_CASE("server: join, fly and see the aircraft accelerate") {
  LiveSim sim(two_v_two(4.0), 12);
  ServerOptions options;
  options.address = "127.0.0.1";
  options.port = 0;
  GatewayServer server(sim, options);
  std::jthread loop([&](std::stop_token st) { server.run(st); });

  PilotClient pilot("127.0.0.1", server.port());
  pilot.send(JoinMessage{Team::kBlue, kBlue1});
  const auto joined = pilot.wait_for("joined", 2000ms);
  REQUIRE(joined);
  CHECK((*joined)["entity"] == json::array({1, 1, 1}));

  PilotClient rival("127.0.0.1", server.port());
  rival.send(JoinMessage{Team::kBlue, kBlue1});
  const auto rejected = rival.wait_for("error", 2000ms);
  REQUIRE(rejected);
  CHECK((*rejected)["code"] == error_code::kSlotTaken);
  rival.send(ControlMessage{{{1.0, 0.0, 0.0}, false}});
  CHECK((*rival.wait_for("error", 2000ms))["code"] == error_code::kNotJoined);
  rival.send(PingMessage{42.0});
  const auto pong = rival.wait_for("pong", 2000ms);
  REQUIRE(pong);
  CHECK((*pong)["t"] == 42.0);

  const auto before = pilot.wait_for("tick", 2000ms);
  REQUIRE(before);
  const double speed0 = (*entity_in(*before, kBlue1))["speed"];
  pilot.send(ControlMessage{{{1.0, 0.0, 0.0}, false}});
  // The input lands on the next tick; snapshots go out every second tick.
  bool faster = false;
  double last_t = (*before)["t"];
  for (int i = 0; i < 2 && !faster; ++i) {
    const auto tick = pilot.wait_for("tick", 2000ms);
    REQUIRE(tick);
    CHECK((*tick)["t"].get<double>() > last_t);
    last_t = (*tick)["t"];
    const json& me = *entity_in(*tick, kBlue1);
    CHECK(me["human"] == true);
    faster = me["throttle"] == 1.0 && me["speed"].get<double>() > speed0;
  }
  CHECK(faster);

  while (const auto m = pilot.next(3000ms)) {
    if ((*m)["type"] == "tick") {
      CHECK((*m)["t"].get<double>() > last_t);
      last_t = (*m)["t"];
    }
    if ((*m)["type"] == "end") break;
  }
  CHECK(pilot.wait_closed(2000ms));
  CHECK(pilot.close_code() == 1000);
  loop.join();
  CHECK(sim.seats().at(sim.seats().begin()->first).latency.max_ticks <= 2);
  CHECK(server.stats().protocol_errors == 0);
}

TEST_CASE("server: a bad message gets an error and a policy close, the sim goes on") {
  LiveSim sim(two_v_two(2.0), 3);
  ServerOptions options;
  options.address = "127.0.0.1";
  options.port = 0;
  options.time_scale = 4.0;
  GatewayServer server(sim, options);
  std::jthread loop([&](std::stop_token st) { server.run(st); });

  PilotClient client("127.0.0.1", server.port());
  client.send_raw("{\"type\":\"warp\"}");
  const auto error = client.wait_for("error", 2000ms);
  REQUIRE(error);
  CHECK((*error)["code"] == error_code::kBadMessage);
  CHECK(client.wait_closed(2000ms));
  CHECK(client.close_code() == 1008);
  loop.join();
  CHECK(sim.finished());
  CHECK(server.stats().protocol_errors == 1);
}

TEST_CASE("server: a stop mid-episode closes with going-away and no end") {
  LiveSim sim(two_v_two(600.0), 3);
  ServerOptions options;
  options.address = "127.0.0.1";
  options.port = 0;
  options.linger = 50ms;
  GatewayServer server(sim, options);
  std::stop_source stop;
  std::jthread loop([&] { server.run(stop.get_token()); });
  PilotClient client("127.0.0.1", server.port());
  REQUIRE(client.wait_for("tick", 2000ms));
  stop.request_stop();
  CHECK_FALSE(client.wait_for("end", 1000ms));
  CHECK(client.wait_closed(2000ms));
  CHECK(client.close_code() == 1001);
  loop.join();
  CHECK_FALSE(sim.finished());
}

TEST_CASE("server options are checked") {
  LiveSim sim(two_v_two(1.0), 1);
  ServerOptions options;
  options.port = 0;
  options.time_scale = 0.0;
  CHECK_THROWS_AS(GatewayServer(sim, options), ContractViolation);
  options.time_scale = 1.0;
  options.send_queue = 0;
  CHECK_THROWS_AS(GatewayServer(sim, options), ContractViolation);
}

}  // TEST_SUITE
