#include <doctest.h>

#include "mrmt/scheduler.hpp"

using namespace mrmt;

namespace {

SchedulerCore make(std::size_t shards, std::size_t workers, std::size_t retry_limit = 3) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < workers; ++i) labels.push_back("w" + std::to_string(i));
    return SchedulerCore(shards, labels, retry_limit);
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("lowest pending shard goes to the asking idle worker") {
    auto sched = make(8, 2);
    // Drain shards 0..5 so {5,7}-style ordering can be observed explicitly.
    for (std::size_t s = 0; s < 5; ++s) {
        auto a = sched.try_assign(0);
        REQUIRE(a);
        CHECK(a->shard_id == s);
        sched.on_result(s, 0);
    }
    auto a = sched.try_assign(0);
    REQUIRE(a);
    CHECK(a->shard_id == 5);  // lowest-numbered pending

    auto b = sched.try_assign(1);
    REQUIRE(b);
    CHECK(b->shard_id == 6);

    // A busy worker never gets a second in-flight shard.
    CHECK(!sched.try_assign(0));
    CHECK(!sched.try_assign(1));

    sched.on_result(5, 0);
    sched.on_result(6, 1);
    auto c = sched.try_assign(0);
    REQUIRE(c);
    CHECK(c->shard_id == 7);
    sched.on_result(7, 0);
    CHECK(!sched.try_assign(1));  // one pairing possible, the other stays idle
    CHECK(sched.done());
}

TEST_CASE("first result wins; duplicates are ignored") {
    auto sched = make(2, 2, 3);
    auto a = sched.try_assign(0);
    REQUIRE(a);
    sched.on_failure(a->shard_id, 0, "connection reset");  // worker 0 quarantined
    auto retry = sched.try_assign(1);
    REQUIRE(retry);
    CHECK(retry->shard_id == a->shard_id);

    CHECK(sched.on_result(retry->shard_id, 1) == SchedulerCore::Disposition::Accepted);
    // The original worker's late result for the same shard is a duplicate.
    CHECK(sched.on_result(a->shard_id, 0) == SchedulerCore::Disposition::Duplicate);
    CHECK(sched.completed_count() == 1);

    // The failure record knows where the shard was rerun.
    REQUIRE(sched.failures().size() == 1);
    CHECK(sched.failures()[0].shard_id == a->shard_id);
    CHECK(sched.failures()[0].worker == "w0");
    CHECK(sched.failures()[0].reassigned_to == "w1");
}

TEST_CASE("quarantined workers take no work until recovered") {
    auto sched = make(4, 2);
    auto a = sched.try_assign(0);
    REQUIRE(a);
    sched.on_failure(a->shard_id, 0, "boom");
    CHECK(sched.worker_state(0) == SchedulerCore::WorkerState::Quarantined);
    CHECK(!sched.try_assign(0));

    sched.on_worker_recovered(0);
    CHECK(sched.worker_state(0) == SchedulerCore::WorkerState::Idle);
    CHECK(sched.try_assign(0));
}

TEST_CASE("retry budget escalates to job failure") {
    auto sched = make(1, 1, 2);
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto a = sched.try_assign(0);
        REQUIRE(a);
        sched.on_failure(0, 0, "flaky");
        CHECK(!sched.failed());
        sched.on_worker_recovered(0);
    }
    auto a = sched.try_assign(0);
    REQUIRE(a);
    sched.on_failure(0, 0, "flaky");  // third failure exceeds retry_limit=2
    CHECK(sched.failed());
}

TEST_CASE("retry limit zero fails on the first error") {
    auto sched = make(2, 1, 0);
    auto a = sched.try_assign(0);
    REQUIRE(a);
    sched.on_failure(a->shard_id, 0, "any failure");
    CHECK(sched.failed());
}

TEST_CASE("losing every worker stalls the job into failure") {
    auto sched = make(3, 2);
    auto a = sched.try_assign(0);
    REQUIRE(a);
    sched.on_worker_removed(0);  // fails its in-flight shard on the way out
    CHECK(!sched.failed());
    CHECK(sched.pending_count() == 3);
    sched.on_worker_removed(1);
    CHECK(sched.failed());
}

TEST_CASE("late failure after completion changes nothing") {
    auto sched = make(1, 2, 1);
    auto a = sched.try_assign(0);
    REQUIRE(a);
    sched.on_result(0, 0);
    CHECK(sched.done());
    sched.on_failure(0, 1, "stale attempt");  // monotone: stays done, no requeue
    CHECK(sched.done());
    CHECK(sched.pending_count() == 0);
    CHECK(!sched.failed());
}

}  // TEST_SUITE
