#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bdsm/search.hpp"

namespace bdsm {

enum class StealMode { kOff, kPassive, kActive };

StealMode parse_steal_mode(const std::string& s);
std::string to_string(StealMode m);

struct SchedulerConfig {
  std::size_t workers = 1;
  std::size_t group_size = 4;   // stealing happens only within a group
  StealMode stealing = StealMode::kOff;
  std::uint32_t passive_scan_interval = 64;
};

struct WorkerUsage {
  std::size_t worker;
  double busy_seconds;
  double total_seconds;
  double fraction;
};

struct UtilizationReport {
  std::vector<WorkerUsage> workers;
  double aggregate = 0.0;  // mean busy fraction

  std::string to_csv() const;
};

// Board published by a running task; thieves inspect and claim under `m`.
struct ProgressBoard {
  std::mutex m;
  SearchState* state = nullptr;
  const MatchTask* task = nullptr;
  std::atomic<bool> idle{true};
};

struct StolenWork {
  std::size_t victim;
  std::uint32_t level;
  std::vector<VertexId> range;    // upper half of the victim's unexplored span
  std::vector<VertexId> prefix;   // victim's assignment below `level`
};

// Steal arithmetic over a published state (caller holds the board mutex).
std::uint64_t estimate_remaining(const SearchState& st);
int pick_steal_level(const SearchState& st);  // shallowest with >= 2 unexplored, or -1
std::vector<VertexId> claim_upper_half(SearchState& st, std::uint32_t level);

class WorkerContext;

struct TaskEngine {
  // Runs one task to completion on the calling worker.
  std::function<void(const MatchTask&, WorkerContext&)> run;
  // Builds the continuation task for a claimed slice; called under the
  // victim's board mutex.
  std::function<MatchTask(const MatchTask&, const SearchState&, std::uint32_t,
                          std::vector<VertexId>)> make_stolen;
};

class WorkerPool {
 public:
  explicit WorkerPool(SchedulerConfig config);

  struct RunOutput {
    std::vector<Match> matches;
    UtilizationReport utilization;
    bool aborted = false;
    bool deadline_hit = false;
    std::string error;
  };

  RunOutput run_tasks(std::vector<MatchTask> tasks, const TaskEngine& engine,
                      MatchStats& stats,
                      std::optional<std::chrono::steady_clock::time_point> deadline = {});

  const SchedulerConfig& config() const { return config_; }

 private:
  SchedulerConfig config_;
};

class WorkerContext {
 public:
  ProgressBoard& board() { return *board_; }
  std::vector<Match>& sink() { return sink_; }
  MatchStats& stats() { return stats_; }

  // Enqueues a continuation onto the group queue.
  void spawn(MatchTask task);

  // True when the run has been aborted or the deadline passed; poll cheaply.
  bool should_stop();

  // Passive stealing: called by the running task every explored candidate;
  // scans for an idle group member every `passive_scan_interval` calls and
  // hands off half of this worker's shallowest unexplored range.
  void passive_tick();

  StealMode steal_mode() const;

 private:
  friend class WorkerPool;
  struct Shared;
  WorkerContext(Shared& shared, std::size_t worker, std::size_t group);

  Shared& shared_;
  std::size_t worker_;
  std::size_t group_;
  ProgressBoard* board_;
  std::vector<Match> sink_;
  MatchStats stats_;
  std::uint32_t tick_counter_ = 0;
};

}  // namespace bdsm
