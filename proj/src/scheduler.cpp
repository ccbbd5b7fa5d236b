#include "bdsm/scheduler.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bdsm {

StealMode parse_steal_mode(const std::string& s) {
  if (s == "off") return StealMode::kOff;
  if (s == "passive") return StealMode::kPassive;
  if (s == "active") return StealMode::kActive;
  throw std::invalid_argument("unknown stealing mode: " + s);
}

std::string to_string(StealMode m) {
  switch (m) {
    case StealMode::kOff: return "off";
    case StealMode::kPassive: return "passive";
    case StealMode::kActive: return "active";
  }
  return "off";
}

std::string UtilizationReport::to_csv() const {
  std::ostringstream os;
  os << "worker,busy_seconds,total_seconds,fraction\n";
  for (const WorkerUsage& w : workers) {
    os << w.worker << ',' << w.busy_seconds << ',' << w.total_seconds << ','
       << w.fraction << '\n';
  }
  return os.str();
}

std::uint64_t estimate_remaining(const SearchState& st) {
  // Shallow levels root larger subtrees; weight them geometrically.
  std::uint64_t total = 0;
  std::uint32_t max_level = st.level;
  for (std::uint32_t l = st.start_level; l <= max_level && l < st.levels.size(); ++l) {
    std::uint64_t weight = std::uint64_t{1} << std::min<std::uint32_t>(2 * (max_level - l), 40);
    total += weight * st.levels[l].unexplored();
  }
  return total;
}

int pick_steal_level(const SearchState& st) {
  for (std::uint32_t l = st.start_level; l <= st.level && l < st.levels.size(); ++l) {
    if (st.levels[l].unexplored() >= 2) return static_cast<int>(l);
  }
  return -1;
}

std::vector<VertexId> claim_upper_half(SearchState& st, std::uint32_t level) {
  SearchLevel& lv = st.levels[level];
  std::uint32_t remaining = lv.unexplored();
  std::uint32_t take = remaining / 2;  // victim keeps the cursor's half
  std::vector<VertexId> range(lv.candidates.begin() + (lv.limit - take),
                              lv.candidates.begin() + lv.limit);
  lv.limit -= take;
  return range;
}

struct WorkerContext::Shared {
  Shared(const SchedulerConfig& c, const TaskEngine& e) : config(c), engine(e) {}
  const SchedulerConfig& config;
  const TaskEngine& engine;
  std::vector<std::deque<MatchTask>> queues;  // per group
  std::vector<std::unique_ptr<std::mutex>> queue_mutexes;
  std::vector<std::unique_ptr<ProgressBoard>> boards;  // per worker
  std::atomic<std::size_t> inflight{0};
  std::atomic<bool> abort{false};
  std::atomic<bool> deadline_hit{false};
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::mutex cv_mutex;
  std::condition_variable cv;
  std::mutex error_mutex;
  std::string error;

  std::size_t group_of(std::size_t worker) const { return worker / config.group_size; }

  bool pop(std::size_t group, MatchTask& out) {
    std::lock_guard<std::mutex> lk(*queue_mutexes[group]);
    if (queues[group].empty()) return false;
    out = std::move(queues[group].front());
    queues[group].pop_front();
    return true;
  }

  void push(std::size_t group, MatchTask task) {
    inflight.fetch_add(1);
    {
      std::lock_guard<std::mutex> lk(*queue_mutexes[group]);
      queues[group].push_back(std::move(task));
    }
    cv.notify_all();
  }

  bool stopping() {
    if (abort.load(std::memory_order_relaxed)) return true;
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      deadline_hit.store(true);
      abort.store(true);
      cv.notify_all();
      return true;
    }
    return false;
  }
};

WorkerContext::WorkerContext(Shared& shared, std::size_t worker, std::size_t group)
    : shared_(shared), worker_(worker), group_(group),
      board_(shared.boards[worker].get()) {}

void WorkerContext::spawn(MatchTask task) { shared_.push(group_, std::move(task)); }

bool WorkerContext::should_stop() { return shared_.stopping(); }

StealMode WorkerContext::steal_mode() const { return shared_.config.stealing; }

void WorkerContext::passive_tick() {
  if (shared_.config.stealing != StealMode::kPassive) return;
  if (++tick_counter_ % shared_.config.passive_scan_interval != 0) return;
  // Look for an idle group member.
  std::size_t first = group_ * shared_.config.group_size;
  std::size_t last = std::min(first + shared_.config.group_size, shared_.boards.size());
  bool idle_peer = false;
  for (std::size_t w = first; w < last && !idle_peer; ++w) {
    if (w != worker_ && shared_.boards[w]->idle.load(std::memory_order_relaxed)) {
      idle_peer = true;
    }
  }
  if (!idle_peer) return;
  // Hand off half of our shallowest unexplored range to the group queue.
  std::optional<MatchTask> handoff;
  {
    std::lock_guard<std::mutex> lk(board_->m);
    if (board_->state == nullptr || board_->task == nullptr) return;
    int level = pick_steal_level(*board_->state);
    if (level < 0) return;
    std::vector<VertexId> range = claim_upper_half(*board_->state, static_cast<std::uint32_t>(level));
    handoff = shared_.engine.make_stolen(*board_->task, *board_->state,
                                         static_cast<std::uint32_t>(level), std::move(range));
  }
  ++stats_.passive_handoffs;
  spawn(std::move(*handoff));
}

WorkerPool::WorkerPool(SchedulerConfig config) : config_(std::move(config)) {
  if (config_.workers == 0) config_.workers = 1;
  if (config_.group_size == 0) config_.group_size = 1;
}

WorkerPool::RunOutput WorkerPool::run_tasks(
    std::vector<MatchTask> tasks, const TaskEngine& engine, MatchStats& stats,
    std::optional<std::chrono::steady_clock::time_point> deadline) {
  using Clock = std::chrono::steady_clock;
  RunOutput out;
  std::size_t group_count = (config_.workers + config_.group_size - 1) / config_.group_size;

  WorkerContext::Shared shared{config_, engine};
  shared.queues.resize(group_count);
  for (std::size_t gi = 0; gi < group_count; ++gi) {
    shared.queue_mutexes.push_back(std::make_unique<std::mutex>());
  }
  for (std::size_t w = 0; w < config_.workers; ++w) {
    shared.boards.push_back(std::make_unique<ProgressBoard>());
  }
  shared.deadline = deadline;

  // Spread initial anchors across groups round-robin.
  shared.inflight.store(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    std::size_t gi = i % group_count;
    shared.queues[gi].push_back(std::move(tasks[i]));
  }

  std::vector<WorkerContext> contexts;
  contexts.reserve(config_.workers);
  for (std::size_t w = 0; w < config_.workers; ++w) {
    contexts.emplace_back(WorkerContext(shared, w, shared.group_of(w)));
  }
  std::vector<double> busy(config_.workers, 0.0);

  Clock::time_point run_start = Clock::now();
  auto worker_main = [&](std::size_t w) {
    WorkerContext& ctx = contexts[w];
    std::size_t group = shared.group_of(w);
    std::size_t group_first = group * config_.group_size;
    std::size_t group_last = std::min(group_first + config_.group_size, config_.workers);

    auto execute = [&](MatchTask task) {
      ctx.board().idle.store(false, std::memory_order_relaxed);
      Clock::time_point t0 = Clock::now();
      try {
        engine.run(task, ctx);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(shared.error_mutex);
        if (shared.error.empty()) shared.error = e.what();
        shared.abort.store(true);
      }
      busy[w] += std::chrono::duration<double>(Clock::now() - t0).count();
      ctx.board().idle.store(true, std::memory_order_relaxed);
      ++ctx.stats().tasks_run;
      if (shared.inflight.fetch_sub(1) == 1) shared.cv.notify_all();
    };

    while (true) {
      if (shared.inflight.load() == 0 || shared.stopping()) break;
      MatchTask task;
      if (shared.pop(group, task)) {
        execute(std::move(task));
        continue;
      }
      if (config_.stealing == StealMode::kActive) {
        // Inspect group members' boards and take from the heaviest victim.
        std::size_t victim = config_.workers;
        std::uint64_t best_estimate = 0;
        for (std::size_t v = group_first; v < group_last; ++v) {
          if (v == w) continue;
          ProgressBoard& b = *shared.boards[v];
          std::lock_guard<std::mutex> lk(b.m);
          if (b.state == nullptr) continue;
          std::uint64_t est = estimate_remaining(*b.state);
          if (est > best_estimate) {
            best_estimate = est;
            victim = v;
          }
        }
        if (victim < config_.workers) {
          std::optional<MatchTask> stolen;
          ProgressBoard& b = *shared.boards[victim];
          {
            std::lock_guard<std::mutex> lk(b.m);
            if (b.state != nullptr && b.task != nullptr) {
              int level = pick_steal_level(*b.state);
              if (level >= 0) {
                std::vector<VertexId> range =
                    claim_upper_half(*b.state, static_cast<std::uint32_t>(level));
                stolen = engine.make_stolen(*b.task, *b.state,
                                            static_cast<std::uint32_t>(level), std::move(range));
              }
            }
          }
          if (stolen) {
            ++ctx.stats().active_steals;
            shared.inflight.fetch_add(1);
            execute(std::move(*stolen));
            continue;
          }
        }
      }
      std::unique_lock<std::mutex> lk(shared.cv_mutex);
      shared.cv.wait_for(lk, std::chrono::microseconds(200));
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(config_.workers);
  for (std::size_t w = 0; w < config_.workers; ++w) threads.emplace_back(worker_main, w);
  for (auto& t : threads) t.join();
  double total = std::chrono::duration<double>(Clock::now() - run_start).count();

  for (std::size_t w = 0; w < config_.workers; ++w) {
    out.matches.insert(out.matches.end(), contexts[w].sink().begin(), contexts[w].sink().end());
    stats.merge(contexts[w].stats());
    double fraction = total > 0 ? busy[w] / total : 0.0;
    out.utilization.workers.push_back({w, busy[w], total, std::min(fraction, 1.0)});
  }
  if (!out.utilization.workers.empty()) {
    double sum = 0;
    for (const auto& u : out.utilization.workers) sum += u.fraction;
    out.utilization.aggregate = sum / static_cast<double>(out.utilization.workers.size());
  }
  out.aborted = shared.abort.load();
  out.deadline_hit = shared.deadline_hit.load();
  out.error = shared.error;
  if (out.deadline_hit) stats.timed_out = true;
  if (!out.error.empty()) {
    throw std::runtime_error("worker failed, batch aborted: " + out.error);
  }
  return out;
}

}  // namespace bdsm
