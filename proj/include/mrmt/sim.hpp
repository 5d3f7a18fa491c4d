#pragma once

#include <cstddef>
#include <vector>

#include "mrmt/coordinator.hpp"
#include "mrmt/engine.hpp"

namespace mrmt {

// One virtual worker node. `speed` scales elapsed virtual time (cost/speed);
// `kill_after_shards >= 0` makes the node die permanently while running the
// shard after that many completions; `error_on_attempt` injects one transient
// ERROR on its n-th assignment (1-based), after which the node stays healthy.
struct SimWorker {
    double speed = 1.0;
    int kill_after_shards = -1;
    int error_on_attempt = 0;
};

// A job executed against in-process workers under virtual clocks. Engines are
// forced into simulate mode; the run is fully deterministic: events are
// ordered by (time, kind, worker).
struct SimJobSpec {
    Document source;
    std::size_t shard_size = 1000;
    EngineSpec engine;
    Architecture architecture = Architecture::Service;
    std::vector<SimWorker> workers;
    double job_overhead_seconds = 0.0;  // fixed virtual cost charged to the whole job
    std::size_t retry_limit = 3;
};

// Virtual-time analogue of run_job: same scheduler, same reduce, no sockets
// and no sleeping. total_seconds is the virtual makespan plus the job
// overhead. Throws JobError when a shard exhausts its retry budget or every
// worker died.
JobResult run_sim_job(const SimJobSpec& spec);

// Sequential oracle: one engine instance, sentences in document order.
// Returns the translated document plus the summed virtual cost (setup
// included) via `total_cost_seconds`.
Document run_sequential(const EngineSpec& engine_spec, const Document& source,
                        double* total_cost_seconds = nullptr);

}  // namespace mrmt
