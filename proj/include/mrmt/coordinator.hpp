#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mrmt/corpus.hpp"
#include "mrmt/scheduler.hpp"

namespace mrmt {

// A distributed translation job: shard the source, map the shards over the
// worker pool, reduce the results in order.
struct Job {
    std::string job_id;
    Document source;
    std::size_t shard_size = 1000;
    std::vector<std::string> workers;  // host:port, one per worker
    std::size_t retry_limit = 3;       // max reassignments per shard
};

struct ShardTiming {
    std::size_t shard_id = 0;
    std::string worker;
    std::size_t words = 0;
    double cost_seconds = 0.0;      // engine-accounted (virtual) cost
    double dispatch_seconds = 0.0;  // offset from job start when dispatched
    double wall_seconds = 0.0;      // dispatch-to-result elapsed
    std::size_t attempts = 0;
};

struct JobResult {
    Document output;
    std::vector<ShardTiming> timing;  // exactly one successful entry per shard
    std::vector<FailureRecord> failures;
    double setup_seconds = 0.0;  // pool handshake + manifest build (job-level overhead)
    double total_seconds = 0.0;
    std::size_t words = 0;

    double total_cost_seconds() const;
};

// Runs the job over live TCP workers. Deterministic engines make the output
// byte-identical to a sequential run regardless of scheduling. Throws
// ConnectivityError when no worker is reachable and JobError when a shard
// exhausts its retry budget or the pool dies.
JobResult run_job(const Job& job);

// CSV report: shard_id,worker,words,cost_seconds,wall_seconds,attempts.
std::string timing_csv(const JobResult& result);

// Human-readable job summary (totals plus any failures).
std::string job_summary(const JobResult& result);

}  // namespace mrmt
