#include "acsim/gateway/record.hpp"

#include <bit>
#include <cstdio>
#include <sstream>

namespace acsim::gateway {

using nlohmann::json;

namespace {

json id_json(const EntityId& id) { return json::array({id.site, id.application, id.entity}); }

EntityId id_from_json(const json& doc) {
  if (!doc.is_array() || doc.size() != 3) throw RecordError("entity id must be [site, app, entity]");
  EntityId id;
  std::uint16_t* fields[3] = {&id.site, &id.application, &id.entity};
  for (int i = 0; i < 3; ++i) {
    if (!doc[i].is_number_unsigned() || doc[i].get<std::uint64_t>() > 0xFFFF) {
      throw RecordError("entity id fields must be integers in [0, 65535]");
    }
    *fields[i] = static_cast<std::uint16_t>(doc[i].get<std::uint64_t>());
  }
  return id;
}

EntityId id_from_key(const std::string& key) {
  unsigned s = 0, a = 0, e = 0;
  char tail = 0;
  if (std::sscanf(key.c_str(), "%u:%u:%u%c", &s, &a, &e, &tail) != 3 || s > 0xFFFF || a > 0xFFFF ||
      e > 0xFFFF) {
    throw RecordError("bad entity key '" + key + "'");
  }
  return {static_cast<std::uint16_t>(s), static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(e)};
}

json event_json(const combat::Event& e) {
  json j{{"t", e.time}, {"kind", combat::to_string(e.kind)}};
  j["shooter"] = e.shooter ? id_json(*e.shooter) : json(nullptr);
  j["target"] = e.target ? id_json(*e.target) : json(nullptr);
  return j;
}

combat::Event event_from_json(const json& j) {
  combat::Event e;
  e.time = j.at("t").get<double>();
  const auto kind = combat::parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw RecordError("unknown event kind");
  e.kind = *kind;
  if (!j.at("shooter").is_null()) e.shooter = id_from_json(j.at("shooter"));
  if (!j.at("target").is_null()) e.target = id_from_json(j.at("target"));
  return e;
}

json participant_json(const Participant& p) {
  return {{"client", p.client},
          {"entity", id_json(p.entity)},
          {"team", combat::to_string(p.team)},
          {"joined_at", p.joined_at}};
}

Participant participant_from_json(const json& j) {
  Participant p;
  p.client = j.at("client").get<std::uint64_t>();
  p.entity = id_from_json(j.at("entity"));
  const auto team = combat::parse_team(j.at("team").get<std::string>());
  if (!team) throw RecordError("unknown team");
  p.team = *team;
  p.joined_at = j.at("joined_at").get<double>();
  return p;
}

template <typename T, typename F>
json list_json(const std::vector<T>& items, F f) {
  json out = json::array();
  for (const auto& item : items) out.push_back(f(item));
  return out;
}

json per_entity(const std::map<EntityId, double>& values) {
  json out = json::object();
  for (const auto& [id, v] : values) out[dis::to_string(id)] = v;
  return out;
}

std::map<EntityId, double> per_entity_from_json(const json& j) {
  std::map<EntityId, double> out;
  for (const auto& [key, v] : j.items()) out[id_from_key(key)] = v.get<double>();
  return out;
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001B3ULL;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      const unsigned char b = static_cast<unsigned char>(v >> (8 * i));
      bytes(&b, 1);
    }
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

}  // namespace

json to_json(const RecordHeader& h) {
  json j{{"kind", "header"},
         {"version", kRecordVersion},
         {"scenario", agents::to_json(h.scenario)},
         {"seed", h.seed},
         {"blue", h.blue},
         {"red", h.red},
         {"mode", h.mode}};
  j["params"] = h.params ? agents::to_json(*h.params) : json(nullptr);
  return j;
}

json to_json(const TickRecord& t) {
  json actions = json::object();
  for (const auto& [id, a] : t.actions) {
    actions[dis::to_string(id)] = {a.control.throttle, a.control.pitch_cmd, a.control.roll_cmd, a.fire};
  }
  json policies = json::object();
  for (const auto& [id, p] : t.policies) policies[dis::to_string(id)] = combat::to_string(p);
  return {{"kind", "tick"},
          {"step", t.step},
          {"t", t.time},
          {"hash", hash_hex(t.hash)},
          {"actions", actions},
          {"policies", policies},
          {"human", list_json(t.human, id_json)},
          {"rewards", per_entity(t.rewards)},
          {"events", list_json(t.events, event_json)},
          {"joined", list_json(t.joined, participant_json)}};
}

json to_json(const RecordFooter& f) {
  return {{"kind", "footer"},
          {"winner", combat::to_string(f.winner)},
          {"returns", per_entity(f.returns)},
          {"steps", f.steps},
          {"participants", list_json(f.participants, participant_json)}};
}

RecordHeader header_from_json(const json& j) {
  if (j.at("version").get<int>() != kRecordVersion) throw RecordError("unsupported record version");
  RecordHeader h;
  h.scenario = agents::scenario_from_json(j.at("scenario"));
  h.seed = j.at("seed").get<std::uint64_t>();
  h.blue = j.at("blue").get<std::string>();
  h.red = j.at("red").get<std::string>();
  h.mode = j.at("mode").get<std::string>();
  if (!j.at("params").is_null()) h.params = agents::params_from_json(j.at("params"));
  return h;
}

TickRecord tick_from_json(const json& j) {
  TickRecord t;
  t.step = j.at("step").get<std::uint64_t>();
  t.time = j.at("t").get<double>();
  t.hash = std::stoull(j.at("hash").get<std::string>(), nullptr, 16);
  for (const auto& [key, a] : j.at("actions").items()) {
    if (!a.is_array() || a.size() != 4) throw RecordError("action must be [throttle, pitch, roll, fire]");
    combat::ActionCommand c;
    c.control.throttle = a[0].get<double>();
    c.control.pitch_cmd = a[1].get<double>();
    c.control.roll_cmd = a[2].get<double>();
    c.fire = a[3].get<bool>();
    t.actions[id_from_key(key)] = c;
  }
  for (const auto& [key, p] : j.at("policies").items()) {
    const auto kind = combat::parse_policy(p.get<std::string>());
    if (!kind) throw RecordError("unknown policy");
    t.policies[id_from_key(key)] = *kind;
  }
  for (const auto& id : j.at("human")) t.human.push_back(id_from_json(id));
  t.rewards = per_entity_from_json(j.at("rewards"));
  for (const auto& e : j.at("events")) t.events.push_back(event_from_json(e));
  for (const auto& p : j.at("joined")) t.joined.push_back(participant_from_json(p));
  return t;
}

RecordFooter footer_from_json(const json& j) {
  RecordFooter f;
  const std::string w = j.at("winner").get<std::string>();
  if (w == "blue") {
    f.winner = combat::Winner::kBlue;
  } else if (w == "red") {
    f.winner = combat::Winner::kRed;
  } else if (w == "draw") {
    f.winner = combat::Winner::kDraw;
  } else {
    throw RecordError("unknown winner '" + w + "'");
  }
  f.returns = per_entity_from_json(j.at("returns"));
  f.steps = j.at("steps").get<std::uint64_t>();
  for (const auto& p : j.at("participants")) f.participants.push_back(participant_from_json(p));
  return f;
}

std::string to_jsonl(const EpisodeRecord& record) {
  std::string out = to_json(record.header).dump() + "\n";
  for (const auto& t : record.ticks) out += to_json(t).dump() + "\n";
  if (record.footer) out += to_json(*record.footer).dump() + "\n";
  return out;
}

EpisodeRecord parse_jsonl(std::istream& in) {
  EpisodeRecord record;
  std::string line;
  int number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        if (have_header) throw RecordError("second header");
        record.header = header_from_json(j);
        have_header = true;
      } else if (!have_header) {
        throw RecordError("record does not start with a header");
      } else if (record.footer) {
        throw RecordError("line after the footer");
      } else if (kind == "tick") {
        record.ticks.push_back(tick_from_json(j));
      } else if (kind == "footer") {
        record.footer = footer_from_json(j);
      } else {
        throw RecordError("unknown line kind '" + kind + "'");
      }
    } catch (const RecordError& e) {
      throw RecordError("line " + std::to_string(number) + ": " + e.what());
    } catch (const std::exception& e) {
      throw RecordError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (!have_header) throw RecordError("empty record");
  return record;
}

EpisodeRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RecordError("cannot open " + path.string());
  return parse_jsonl(in);
}

std::uint64_t world_hash(const combat::WorldState& world) {
  Fnv1a h;
  h.f64(world.time);
  h.u64(world.step_count);
  h.u64(world.event_log.size());
  h.u64(world.done ? 1 : 0);
  h.u64(static_cast<std::uint64_t>(world.winner));
  for (const auto& [id, rec] : world.aircraft) {
    h.u64((std::uint64_t{id.site} << 32) | (std::uint64_t{id.application} << 16) | id.entity);
    const auto& s = rec.state;
    for (const double v : {s.position.x, s.position.y, s.position.z, s.speed, s.heading,
                           s.flight_path_angle, s.bank, s.throttle, s.fuel_fraction}) {
      h.f64(v);
    }
    h.u64(static_cast<std::uint64_t>(rec.team));
    h.f64(rec.hp);
    h.u64(static_cast<std::uint64_t>(rec.active_policy));
    h.u64((rec.alive ? 1u : 0u) | (rec.external ? 2u : 0u) | (rec.lock_rewarded ? 4u : 0u));
    h.f64(rec.gun_ready_time);
    h.f64(rec.lock_time);
    h.f64(rec.nearest_threat_range);
  }
  return h.value();
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ReplayResult replay(const EpisodeRecord& record) {
  ReplayResult result;
  combat::ScenarioConfig config = record.header.scenario.scenario;
  config.seed = record.header.seed;
  combat::WorldState world;
  try {
    world = combat::reset(config);
  } catch (const std::exception& e) {
    result.message = std::string("reset failed: ") + e.what();
    return result;
  }

  const auto diverged = [&](std::uint64_t index, const std::string& why) {
    result.first_divergence = index;
    result.message = "tick " + std::to_string(index) + ": " + why;
    return result;
  };

  std::size_t events_seen = 0;
  for (std::uint64_t i = 0; i < record.ticks.size(); ++i) {
    const TickRecord& t = record.ticks[i];
    if (world.done) return diverged(i, "episode already finished");
    for (const auto& [id, policy] : t.policies) {
      const auto it = world.aircraft.find(id);
      if (it == world.aircraft.end()) return diverged(i, "unknown entity " + dis::to_string(id));
      it->second.active_policy = policy;
    }
    combat::StepResult step;
    try {
      step = combat::step(world, t.actions);
    } catch (const std::exception& e) {
      return diverged(i, std::string("step rejected: ") + e.what());
    }
    ++result.ticks_checked;
    if (world_hash(world) != t.hash) return diverged(i, "world hash mismatch");
    if (step.rewards != t.rewards) return diverged(i, "reward mismatch");
    const std::vector<combat::Event> events(world.event_log.begin() + static_cast<long>(events_seen),
                                            world.event_log.end());
    events_seen = world.event_log.size();
    if (events != t.events) return diverged(i, "event mismatch");
  }
  if (record.footer) {
    if (!world.done) return diverged(record.ticks.size(), "footer present but episode not finished");
    if (world.winner != record.footer->winner) return diverged(record.ticks.size(), "winner mismatch");
  }
  result.verified = true;
  result.message = "verified " + std::to_string(result.ticks_checked) + " ticks";
  return result;
}

std::string MemoryRecorder::text() const {
  std::string out;
  for (const auto& line : lines_) out += line + "\n";
  return out;
}

FileRecorder::FileRecorder(const std::filesystem::path& path, std::size_t capacity)
    : out_(path), capacity_(capacity) {
  if (!out_) throw RecordError("cannot write " + path.string());
  flusher_ = std::thread([this] { run(); });
}

FileRecorder::~FileRecorder() {
  {
    std::lock_guard lock(mutex_);
    closing_ = true;
  }
  changed_.notify_all();
  flusher_.join();
}

void FileRecorder::write_line(std::string line) {
  std::unique_lock lock(mutex_);
  changed_.wait(lock, [&] { return pending_.size() < capacity_; });
  pending_.push_back(std::move(line));
  changed_.notify_all();
}

void FileRecorder::flush() {
  std::unique_lock lock(mutex_);
  changed_.wait(lock, [&] { return pending_.empty() && in_flight_ == 0; });
}

void FileRecorder::run() {
  std::unique_lock lock(mutex_);
  while (true) {
    changed_.wait(lock, [&] { return closing_ || !pending_.empty(); });
    if (pending_.empty() && closing_) break;
    std::deque<std::string> batch;
    batch.swap(pending_);
    in_flight_ = batch.size();
    lock.unlock();
    changed_.notify_all();
    for (const auto& line : batch) out_ << line << '\n';
    out_.flush();
    lock.lock();
    in_flight_ = 0;
    changed_.notify_all();
  }
}

}  // namespace acsim::gateway
