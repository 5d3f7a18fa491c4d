#include "mrmt/scheduler.hpp"

#include <stdexcept>

namespace mrmt {

SchedulerCore::SchedulerCore(std::size_t shard_count, std::vector<std::string> worker_labels,
                             std::size_t retry_limit)
    : shard_count_(shard_count),
      retry_limit_(retry_limit),
      completed_(shard_count, false),
      attempts_(shard_count, 0),
      failure_count_(shard_count, 0) {
    if (worker_labels.empty()) throw std::invalid_argument("scheduler needs at least one worker");
    for (std::size_t i = 0; i < shard_count; ++i) pending_.insert(i);
    workers_.reserve(worker_labels.size());
    for (auto& label : worker_labels) workers_.push_back({std::move(label), WorkerState::Idle, {}});
}

std::optional<Assignment> SchedulerCore::try_assign(std::size_t worker) {
    WorkerSlot& slot = workers_.at(worker);
    if (slot.state != WorkerState::Idle || pending_.empty() || failed_) return std::nullopt;

    const std::size_t shard = *pending_.begin();
    pending_.erase(pending_.begin());
    slot.state = WorkerState::Busy;
    slot.in_flight = shard;
    ++attempts_[shard];

    // Close the loop on any failure records waiting to learn where the shard went.
    for (auto& record : failures_)
        if (record.shard_id == shard && record.reassigned_to.empty())
            record.reassigned_to = slot.label;

    return Assignment{shard, worker};
}

SchedulerCore::Disposition SchedulerCore::on_result(std::size_t shard, std::size_t worker) {
    WorkerSlot& slot = workers_.at(worker);
    if (slot.in_flight == shard) {
        slot.in_flight.reset();
        if (slot.state == WorkerState::Busy) slot.state = WorkerState::Idle;
    }
    if (completed_.at(shard)) return Disposition::Duplicate;  // first RESULT won already
    completed_[shard] = true;
    ++completed_count_;
    return Disposition::Accepted;
}

void SchedulerCore::on_failure(std::size_t shard, std::size_t worker, const std::string& reason) {
    WorkerSlot& slot = workers_.at(worker);
    if (slot.in_flight == shard) slot.in_flight.reset();
    if (slot.state != WorkerState::Removed) slot.state = WorkerState::Quarantined;

    if (completed_.at(shard)) return;  // a duplicate attempt failed after success; nothing to redo

    failures_.push_back({shard, slot.label, reason, ""});
    ++failure_count_[shard];
    if (failure_count_[shard] > retry_limit_) {
        failed_ = true;
        failure_reason_ = "shard " + std::to_string(shard) + " failed " +
                          std::to_string(failure_count_[shard]) + " time(s), retry limit " +
                          std::to_string(retry_limit_) + " exhausted; last error: " + reason;
        return;
    }
    pending_.insert(shard);
    check_stalled();
}

void SchedulerCore::on_worker_recovered(std::size_t worker) {
    WorkerSlot& slot = workers_.at(worker);
    if (slot.state == WorkerState::Quarantined) slot.state = WorkerState::Idle;
}

void SchedulerCore::on_worker_removed(std::size_t worker) {
    WorkerSlot& slot = workers_.at(worker);
    if (slot.in_flight)
        on_failure(*slot.in_flight, worker, "worker removed while holding the shard");
    slot.state = WorkerState::Removed;
    check_stalled();
}

std::size_t SchedulerCore::in_flight_count() const {
    std::size_t n = 0;
    for (const auto& w : workers_)
        if (w.in_flight) ++n;
    return n;
}

std::size_t SchedulerCore::live_worker_count() const {
    std::size_t n = 0;
    for (const auto& w : workers_)
        if (w.state != WorkerState::Removed) ++n;
    return n;
}

void SchedulerCore::check_stalled() {
    if (failed_ || done()) return;
    if (live_worker_count() == 0) {
        failed_ = true;
        failure_reason_ = "no live workers left with " + std::to_string(pending_.size()) +
                          " shard(s) still pending";
    }
}

}  // namespace mrmt
