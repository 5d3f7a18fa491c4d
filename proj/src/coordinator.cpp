#include "mrmt/coordinator.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <sstream>
#include <thread>

#include "mrmt/error.hpp"
#include "mrmt/net.hpp"
#include "mrmt/wire.hpp"

namespace mrmt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr int kReconnectAttempts = 20;
constexpr auto kReconnectDelay = std::chrono::milliseconds(50);
constexpr double kConnectTimeoutSeconds = 3.0;

// Shared mutable state of one running job. The scheduler state machine is the
// single source of truth; per-worker sessions serialize on `mutex`.
struct JobState {
    JobState(std::size_t shard_count, std::vector<std::string> labels, std::size_t retry_limit)
        : scheduler(shard_count, std::move(labels), retry_limit),
          total_sessions(scheduler.live_worker_count()),
          results(shard_count),
          timing(shard_count) {}

    std::mutex mutex;
    std::condition_variable cv;
    SchedulerCore scheduler;
    std::size_t total_sessions;
    std::vector<std::vector<std::string>> results;  // indexed slots, first write wins
    std::vector<ShardTiming> timing;
    std::size_t sessions_ready = 0;  // finished their initial connect attempt
    std::size_t sessions_live = 0;   // sessions still willing to take work

    // Dispatch starts only once every session finished its handshake attempt.
    bool handshake_done() const { return sessions_ready == total_sessions; }
};

// One coordinator-side worker session: connect, handshake, then pull shards
// until the job settles. Failures quarantine the worker until a PING succeeds
// on a fresh connection; after too many attempts the worker is removed.
class WorkerSession {
public:
    WorkerSession(std::size_t index, std::string address, const Job& job,
                  const std::vector<Shard>& shards, JobState& state, Clock::time_point job_start)
        : index_(index),
          address_(std::move(address)),
          job_(job),
          shards_(shards),
          state_(state),
          job_start_(job_start) {}

    void run() {
        const bool connected = connect_and_greet();
        {
            std::lock_guard guard(state_.mutex);
            state_.sessions_ready++;
            if (connected) state_.sessions_live++;
        }
        state_.cv.notify_all();
        if (!connected) {
            remove_worker("unreachable at job start");
            return;
        }

        work_loop();

        std::lock_guard guard(state_.mutex);
        state_.sessions_live--;
        state_.cv.notify_all();
    }

private:
    bool connect_and_greet() {
        try {
            auto [host, port] = parse_hostport(address_);
            stream_ = TcpStream::connect(host, port, kConnectTimeoutSeconds);
            write_frame(stream_, make_hello_client());
            auto reply = read_frame(stream_);
            return reply && reply->type == FrameType::Hello;
        } catch (const std::exception&) {
            return false;
        }
    }

    void work_loop() {
        while (true) {
            std::optional<Assignment> assignment;
            {
                std::unique_lock lock(state_.mutex);
                state_.cv.wait(lock, [&] {
                    return state_.scheduler.done() || state_.scheduler.failed() ||
                           state_.scheduler.worker_state(index_) ==
                               SchedulerCore::WorkerState::Removed ||
                           (state_.handshake_done() && state_.scheduler.pending_count() > 0);
                });
                if (state_.scheduler.done() || state_.scheduler.failed()) return;
                if (state_.scheduler.worker_state(index_) == SchedulerCore::WorkerState::Removed)
                    return;
                assignment = state_.scheduler.try_assign(index_);
            }
            if (!assignment) continue;

            if (!run_shard(assignment->shard_id) && !recover()) {
                remove_worker("gave up reconnecting");
                return;
            }
        }
    }

    // Returns false when the worker must be (re)proven healthy before more work.
    bool run_shard(std::size_t shard_id) {
        const Shard& shard = shards_[shard_id];
        std::vector<std::string> sentences;
        sentences.reserve(shard.sentences.size());
        for (const auto& s : shard.sentences) sentences.push_back(s.text);

        const double dispatched_at = seconds_since(job_start_);
        try {
            write_frame(stream_, make_translate(job_.job_id, shard_id, sentences));
            while (true) {
                auto frame = read_frame(stream_);
                if (!frame) throw NetError("connection closed while awaiting RESULT");
                if (frame->type == FrameType::Pong) continue;
                if (frame->type == FrameType::Error) {
                    fail_shard(shard_id, frame_error_message(*frame));
                    return false;
                }
                if (frame->type != FrameType::Result)
                    throw ProtocolError("unexpected " + to_string(frame->type) +
                                        " while awaiting RESULT");
                if (frame_job_id(*frame) != job_.job_id || frame_shard_id(*frame) != shard_id)
                    throw ProtocolError("RESULT for a different request");

                auto translations = frame_translations(*frame);
                if (translations.size() != sentences.size())
                    throw ProtocolError("RESULT carries " + std::to_string(translations.size()) +
                                        " translations for " + std::to_string(sentences.size()) +
                                        " sentences");
                accept_result(shard_id, std::move(translations), frame_cost_seconds(*frame),
                              dispatched_at, seconds_since(job_start_) - dispatched_at);
                return true;
            }
        } catch (const std::exception& e) {
            fail_shard(shard_id, e.what());
            return false;
        }
    }

    void accept_result(std::size_t shard_id, std::vector<std::string> translations, double cost,
                       double dispatched_at, double wall) {
        std::lock_guard guard(state_.mutex);
        if (state_.scheduler.on_result(shard_id, index_) == SchedulerCore::Disposition::Accepted) {
            state_.results[shard_id] = std::move(translations);
            state_.timing[shard_id] = {shard_id,
                                       address_,
                                       shards_[shard_id].word_count,
                                       cost,
                                       dispatched_at,
                                       wall,
                                       state_.scheduler.attempts(shard_id)};
        }
        state_.cv.notify_all();
    }

    void fail_shard(std::size_t shard_id, const std::string& reason) {
        std::lock_guard guard(state_.mutex);
        state_.scheduler.on_failure(shard_id, index_, reason);
        state_.cv.notify_all();
    }

    // Quarantined until a PING answers on a fresh connection.
    bool recover() {
        for (int attempt = 0; attempt < kReconnectAttempts; ++attempt) {
            {
                std::lock_guard guard(state_.mutex);
                if (state_.scheduler.done() || state_.scheduler.failed()) return false;
            }
            if (connect_and_greet()) {
                try {
                    write_frame(stream_, make_ping());
                    auto reply = read_frame(stream_);
                    if (reply && reply->type == FrameType::Pong) {
                        std::lock_guard guard(state_.mutex);
                        state_.scheduler.on_worker_recovered(index_);
                        state_.cv.notify_all();
                        return true;
                    }
                } catch (const std::exception&) {
                }
            }
            std::this_thread::sleep_for(kReconnectDelay);
        }
        return false;
    }

    void remove_worker(const std::string& reason) {
        (void)reason;
        std::lock_guard guard(state_.mutex);
        state_.scheduler.on_worker_removed(index_);
        state_.cv.notify_all();
    }

    std::size_t index_;
    std::string address_;
    const Job& job_;
    const std::vector<Shard>& shards_;
    JobState& state_;
    Clock::time_point job_start_;
    TcpStream stream_;
};

}  // namespace

double JobResult::total_cost_seconds() const {
    double total = 0.0;
    for (const auto& t : timing) total += t.cost_seconds;
    return total;
}

JobResult run_job(const Job& job) {
    if (job.workers.empty()) throw std::invalid_argument("job needs at least one worker");
    if (job.shard_size == 0) throw std::invalid_argument("shard_size must be >= 1");

    const auto job_start = Clock::now();
    const std::vector<Shard> shards = make_shards(job.source, job.shard_size);
    const ShardingManifest manifest = manifest_of(shards);

    JobState state(shards.size(), job.workers, job.retry_limit);

    std::vector<std::unique_ptr<WorkerSession>> sessions;
    std::vector<std::thread> threads;
    sessions.reserve(job.workers.size());
    for (std::size_t i = 0; i < job.workers.size(); ++i)
        sessions.push_back(std::make_unique<WorkerSession>(i, job.workers[i], job, shards, state,
                                                           job_start));
    threads.reserve(sessions.size());
    for (auto& session : sessions)
        threads.emplace_back([&session] { session->run(); });

    double setup_seconds;
    {
        // The job-level setup cost covers the pool handshake and manifest build.
        std::unique_lock lock(state.mutex);
        state.cv.wait(lock, [&] { return state.sessions_ready == job.workers.size(); });
        setup_seconds = seconds_since(job_start);
        if (state.sessions_live == 0 && !state.scheduler.done()) {
            lock.unlock();
            for (auto& t : threads) t.join();
            throw ConnectivityError("no reachable workers in the pool");
        }
    }

    {
        std::unique_lock lock(state.mutex);
        state.cv.wait(lock, [&] {
            return state.scheduler.done() || state.scheduler.failed() || state.sessions_live == 0;
        });
    }
    state.cv.notify_all();
    for (auto& t : threads) t.join();

    if (state.scheduler.failed()) {
        std::string detail = "job " + job.job_id + " failed: " + state.scheduler.failure_reason();
        for (const auto& f : state.scheduler.failures()) {
            detail += "\n  shard " + std::to_string(f.shard_id) + " on " + f.worker + ": " +
                      f.reason;
        }
        throw JobError(detail);
    }
    if (!state.scheduler.done())
        throw JobError("job " + job.job_id + " failed: worker pool drained with " +
                       std::to_string(state.scheduler.pending_count()) + " shard(s) pending");

    std::vector<TranslatedShard> parts;
    parts.reserve(shards.size());
    for (std::size_t i = 0; i < shards.size(); ++i)
        parts.push_back({i, std::move(state.results[i])});

    JobResult result;
    result.output = reassemble(parts, manifest);
    if (result.output.size() != job.source.size())
        throw IntegrityError("output sentence count diverged from the source");
    result.timing = std::move(state.timing);
    result.failures = state.scheduler.failures();
    result.setup_seconds = setup_seconds;
    result.total_seconds = seconds_since(job_start);
    result.words = job.source.total_words;
    return result;
}

std::string timing_csv(const JobResult& result) {
    std::ostringstream out;
    out << "shard_id,worker,words,cost_seconds,wall_seconds,attempts\n";
    for (const auto& t : result.timing) {
        out << t.shard_id << ',' << t.worker << ',' << t.words << ',' << t.cost_seconds << ','
            << t.wall_seconds << ',' << t.attempts << '\n';
    }
    return out.str();
}

std::string job_summary(const JobResult& result) {
    std::ostringstream out;
    out << "shards: " << result.timing.size() << "  words: " << result.words
        << "  setup: " << result.setup_seconds << " s  total: " << result.total_seconds
        << " s  accounted cost: " << result.total_cost_seconds() << " s\n";
    if (!result.failures.empty()) {
        out << "failures (" << result.failures.size() << "):\n";
        for (const auto& f : result.failures) {
            out << "  shard " << f.shard_id << " on " << f.worker << ": " << f.reason;
            if (!f.reassigned_to.empty()) out << " -> reassigned to " << f.reassigned_to;
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace mrmt
