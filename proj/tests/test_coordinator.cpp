#include <doctest.h>

#include <chrono>
#include <set>
#include <thread>

#include "mrmt/coordinator.hpp"
#include "mrmt/error.hpp"
#include "mrmt/sim.hpp"
#include "mrmt/worker.hpp"
#include "testutil.hpp"

using namespace mrmt;

namespace {

struct Pool {
    std::vector<std::unique_ptr<WorkerService>> workers;
    std::vector<std::string> addresses;

    Pool() = default;
    Pool(Pool&&) = default;
    Pool& operator=(Pool&&) = default;

    static Pool start(std::size_t count, const EngineSpec& spec,
                      Architecture arch = Architecture::Service) {
        Pool pool;
        for (std::size_t i = 0; i < count; ++i) {
            WorkerConfig config;
            config.listen_address = "127.0.0.1:0";
            config.engine_spec = spec;
            config.architecture = arch;
            auto worker = std::make_unique<WorkerService>(config);
            worker->start();
            pool.addresses.push_back(worker->address());
            pool.workers.push_back(std::move(worker));
        }
        return pool;
    }

    ~Pool() {
        for (auto& worker : workers) worker->stop();
    }
};

}  // namespace

TEST_SUITE("coordinator") {

TEST_CASE("identity job: output equals input, all workers participate") {
    // Small wall-clock delay keeps every session engaged under greedy pull.
    auto pool = Pool::start(4, testutil::delay_spec(0.0, 5e-4, false));
    Document doc = generate_artificial(100, "uno dos tres cuatro");

    Job job;
    job.job_id = "identity";
    job.source = doc;
    job.shard_size = 1;  // 100 shards over 4 workers
    job.workers = pool.addresses;

    JobResult result = run_job(job);
    CHECK(to_text(result.output) == to_text(doc));
    CHECK(result.timing.size() == 100);
    CHECK(result.words == doc.total_words);

    std::set<std::string> served;
    for (const auto& t : result.timing) served.insert(t.worker);
    CHECK(served.size() == 4);
}

TEST_CASE("single worker equals the sequential oracle") {
    auto engine_spec = testutil::toy_rbmt_spec();
    auto pool = Pool::start(1, engine_spec);

    std::mt19937 rng(31);
    Document doc = testutil::random_document(rng, 80);
    Document expected = run_sequential(engine_spec, doc);

    Job job;
    job.job_id = "single";
    job.source = doc;
    job.shard_size = 7;
    job.workers = pool.addresses;

    JobResult result = run_job(job);
    CHECK(to_text(result.output) == to_text(expected));
    for (const auto& t : result.timing) CHECK(t.attempts == 1);
    CHECK(result.failures.empty());
}

TEST_CASE("killing a worker mid-job moves its load and keeps bytes identical") {
    auto engine_spec = testutil::toy_rbmt_spec();
    std::mt19937 rng(77);
    Document doc = testutil::random_document(rng, 400);
    Document expected = run_sequential(engine_spec, doc);

    // The doomed worker runs a slowed engine so it is mid-shard when killed;
    // the healthy pool is mildly delayed so the job outlives the kill.
    auto slow_spec = engine_spec;
    slow_spec.params["per_word_seconds"] = "0.002";
    slow_spec.set_simulate(false);
    auto pool_spec = engine_spec;
    pool_spec.params["per_word_seconds"] = "0.0005";
    pool_spec.set_simulate(false);

    auto pool = Pool::start(3, pool_spec);
    WorkerConfig doomed_config;
    doomed_config.listen_address = "127.0.0.1:0";
    doomed_config.engine_spec = slow_spec;
    auto doomed = std::make_unique<WorkerService>(doomed_config);
    doomed->start();

    Job job;
    job.job_id = "fault";
    job.source = doc;
    job.shard_size = 20;
    job.workers = pool.addresses;
    job.workers.push_back(doomed->address());
    job.retry_limit = 3;

    std::thread killer([&doomed] {
        std::this_thread::sleep_for(std::chrono::milliseconds(60));
        doomed->stop();
    });
    JobResult result = run_job(job);
    killer.join();

    CHECK(to_text(result.output) == to_text(expected));
    CHECK(result.output.size() == doc.size());
    // The dead worker should have dropped at least one shard on the floor.
    CHECK(!result.failures.empty());
}

TEST_CASE("no reachable workers is a connectivity failure") {
    Job job;
    job.job_id = "nobody";
    job.source = generate_artificial(5, "a b");
    job.workers = {"127.0.0.1:1", "127.0.0.1:2"};
    CHECK_THROWS_AS(run_job(job), ConnectivityError);
}

TEST_CASE("a dead worker in the pool is tolerated when others live") {
    auto pool = Pool::start(2, testutil::delay_spec(0, 0));
    Document doc = generate_artificial(30, "x y z");

    Job job;
    job.job_id = "partial-pool";
    job.source = doc;
    job.shard_size = 5;
    job.workers = pool.addresses;
    job.workers.push_back("127.0.0.1:1");  // never reachable

    JobResult result = run_job(job);
    CHECK(to_text(result.output) == to_text(doc));
}

TEST_CASE("empty document completes trivially") {
    auto pool = Pool::start(1, testutil::delay_spec(0, 0));
    Job job;
    job.job_id = "empty";
    job.source = Document{};
    job.workers = pool.addresses;
    JobResult result = run_job(job);
    CHECK(result.output.size() == 0);
    CHECK(result.timing.empty());
}

TEST_CASE("job validation") {
    Job job;
    job.job_id = "invalid";
    job.source = generate_artificial(3, "a");
    CHECK_THROWS_AS(run_job(job), std::invalid_argument);  // no workers
    job.workers = {"127.0.0.1:9"};
    job.shard_size = 0;
    CHECK_THROWS_AS(run_job(job), std::invalid_argument);
}

TEST_CASE("timing CSV carries one row per shard with the documented columns") {
    auto pool = Pool::start(2, testutil::delay_spec(0, 0));
    Document doc = generate_artificial(10, "uno dos tres");

    Job job;
    job.job_id = "csv";
    job.source = doc;
    job.shard_size = 3;
    job.workers = pool.addresses;

    JobResult result = run_job(job);
    const std::string csv = timing_csv(result);
    CHECK(csv.rfind("shard_id,worker,words,cost_seconds,wall_seconds,attempts\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4);  // header + ceil(10/3) shards
}

}  // TEST_SUITE
