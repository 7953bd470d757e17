#pragma once

// Episode records: newline-delimited JSON with one header line, one line per
// decision tick and one footer line. Schema in docs/protocol.md.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "acsim/agents/files.hpp"

namespace acsim::gateway {

using combat::EntityId;
using combat::Team;

inline constexpr int kRecordVersion = 1;

class RecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Participant {
  std::uint64_t client = 0;
  EntityId entity;
  Team team = Team::kBlue;
  double joined_at = 0.0;  // s of simulation time

  bool operator==(const Participant&) const = default;
};

struct RecordHeader {
  agents::ScenarioFile scenario;
  std::uint64_t seed = 0;
  std::string blue = "commander";
  std::string red = "mixed";
  std::optional<agents::CommanderParams> params;  // used by "commander" controllers
  std::string mode = "live";                      // live | headless
};

struct TickRecord {
  std::uint64_t step = 0;  // world step count after the tick
  double time = 0.0;
  std::uint64_t hash = 0;  // world_hash after the tick
  combat::JointAction actions;
  std::map<EntityId, combat::PolicyKind> policies;  // active policy at decision time
  std::vector<EntityId> human;                      // entities flown by a pilot this tick
  std::map<EntityId, double> rewards;
  std::vector<combat::Event> events;                // logged during the tick
  std::vector<Participant> joined;                  // claims made before the tick

  bool operator==(const TickRecord&) const = default;
};

struct RecordFooter {
  combat::Winner winner = combat::Winner::kDraw;
  std::map<EntityId, double> returns;  // discounted per aircraft, gamma 0.99 per tick
  std::uint64_t steps = 0;
  std::vector<Participant> participants;

  bool operator==(const RecordFooter&) const = default;
};

struct EpisodeRecord {
  RecordHeader header;
  std::vector<TickRecord> ticks;
  std::optional<RecordFooter> footer;
};

nlohmann::json to_json(const RecordHeader& header);
nlohmann::json to_json(const TickRecord& tick);
nlohmann::json to_json(const RecordFooter& footer);
RecordHeader header_from_json(const nlohmann::json& doc);
TickRecord tick_from_json(const nlohmann::json& doc);
RecordFooter footer_from_json(const nlohmann::json& doc);

std::string to_jsonl(const EpisodeRecord& record);
// Throws RecordError naming the offending line.
EpisodeRecord parse_jsonl(std::istream& in);
EpisodeRecord load_record(const std::filesystem::path& path);

// 64-bit FNV-1a over the bit patterns of every field that drives the
// simulation: time, step count, each aircraft record and the event log length.
std::uint64_t world_hash(const combat::WorldState& world);
std::string hash_hex(std::uint64_t hash);

struct ReplayResult {
  bool verified = false;
  std::uint64_t ticks_checked = 0;
  std::optional<std::uint64_t> first_divergence;  // index into the tick stream
  std::string message;
};

// Re-simulates from the header and the recorded joint actions and compares
// every tick hash and the final winner.
ReplayResult replay(const EpisodeRecord& record);

// Sink for record lines. Implementations never drop a line.
class RecordWriter {
 public:
  virtual ~RecordWriter() = default;
  virtual void write_line(std::string line) = 0;
  // Blocks until every line written so far is durable.
  virtual void flush() = 0;
};

class MemoryRecorder : public RecordWriter {
 public:
  void write_line(std::string line) override { lines_.push_back(std::move(line)); }
  void flush() override {}
  const std::vector<std::string>& lines() const { return lines_; }
  std::string text() const;

 private:
  std::vector<std::string> lines_;
};

// Writes lines to a file from a flusher thread. The buffer is bounded:
// write_line blocks while it is full.
class FileRecorder : public RecordWriter {
 public:
  explicit FileRecorder(const std::filesystem::path& path, std::size_t capacity = 1024);
  ~FileRecorder() override;

  void write_line(std::string line) override;
  void flush() override;

 private:
  void run();

  std::ofstream out_;
  const std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable changed_;
  std::deque<std::string> pending_;
  std::size_t in_flight_ = 0;
  bool closing_ = false;
  std::thread flusher_;
};

}  // namespace acsim::gateway
