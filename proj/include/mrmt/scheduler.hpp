#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mrmt {

struct Assignment {
    std::size_t shard_id = 0;
    std::size_t worker = 0;
};

struct FailureRecord {
    std::size_t shard_id = 0;
    std::string worker;
    std::string reason;
    std::string reassigned_to;  // filled when the shard is handed out again
};

// Greedy-pull map-phase scheduler: the lowest-numbered pending shard goes to
// whichever worker asks while idle, a worker never holds two in-flight shards,
// failed shards return to the pending set, and the first RESULT per shard
// wins. Not thread-safe; callers serialize access.
class SchedulerCore {
public:
    enum class WorkerState { Idle, Busy, Quarantined, Removed };
    enum class Disposition { Accepted, Duplicate };

    SchedulerCore(std::size_t shard_count, std::vector<std::string> worker_labels,
                  std::size_t retry_limit);

    // Lowest pending shard for this worker, if it is idle and work remains.
    std::optional<Assignment> try_assign(std::size_t worker);

    Disposition on_result(std::size_t shard, std::size_t worker);

    // Requeues the shard (unless already completed), quarantines the worker,
    // and counts the failure against the shard's retry budget.
    void on_failure(std::size_t shard, std::size_t worker, const std::string& reason);

    void on_worker_recovered(std::size_t worker);

    // Permanent removal; any in-flight shard of the worker is failed first.
    void on_worker_removed(std::size_t worker);

    bool done() const { return completed_count_ == shard_count_; }
    bool failed() const { return failed_; }
    const std::string& failure_reason() const { return failure_reason_; }

    std::size_t shard_count() const { return shard_count_; }
    std::size_t pending_count() const { return pending_.size(); }
    std::size_t in_flight_count() const;
    std::size_t completed_count() const { return completed_count_; }
    std::size_t attempts(std::size_t shard) const { return attempts_[shard]; }
    WorkerState worker_state(std::size_t worker) const { return workers_[worker].state; }
    std::size_t live_worker_count() const;
    const std::string& worker_label(std::size_t worker) const { return workers_[worker].label; }

    const std::vector<FailureRecord>& failures() const { return failures_; }

private:
    struct WorkerSlot {
        std::string label;
        WorkerState state = WorkerState::Idle;
        std::optional<std::size_t> in_flight;
    };

    void check_stalled();

    std::size_t shard_count_;
    std::size_t retry_limit_;
    std::set<std::size_t> pending_;            // ordered: lowest shard first
    std::vector<bool> completed_;
    std::size_t completed_count_ = 0;
    std::vector<std::size_t> attempts_;        // executions started per shard
    std::vector<std::size_t> failure_count_;   // failures per shard
    std::vector<WorkerSlot> workers_;
    std::vector<FailureRecord> failures_;
    bool failed_ = false;
    std::string failure_reason_;
};

}  // namespace mrmt
