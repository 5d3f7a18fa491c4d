#include "mrmt/worker.hpp"

#include <algorithm>

#include "mrmt/error.hpp"

namespace mrmt {

WorkerService::WorkerService(WorkerConfig config) : config_(std::move(config)) {
    config_.engine_spec.validate();
    if (config_.max_queue == 0) throw std::invalid_argument("max_queue must be positive");
}

WorkerService::~WorkerService() { stop(); }

std::string WorkerService::address() const {
    auto [host, port] = parse_hostport(config_.listen_address);
    (void)port;
    return host + ":" + std::to_string(port_);
}

void WorkerService::start() {
    auto [host, port] = parse_hostport(config_.listen_address);
    listener_ = TcpListener::bind(host, port);
    port_ = listener_.port();

    if (config_.architecture == Architecture::Service) {
        engine_ = create_engine(config_.engine_spec);
        engine_setup_seconds_ = engine_->setup_cost_seconds();
    }

    accept_thread_ = std::thread([this] { accept_loop(); });
    engine_thread_ = std::thread([this] { engine_loop(); });
}

void WorkerService::wait() {
    {
        std::unique_lock lock(done_mutex_);
        done_cv_.wait(lock, [this] { return finished_; });
    }
    join_threads();
}

void WorkerService::stop() {
    stopping_.store(true);
    listener_.shutdown();
    {
        std::lock_guard guard(mutex_);
        queue_.clear();
        for (auto& conn : connections_) conn->stream.shutdown();
    }
    queue_cv_.notify_all();
    {
        std::lock_guard guard(done_mutex_);
        finished_ = true;
    }
    done_cv_.notify_all();
    join_threads();
}

void WorkerService::join_threads() {
    std::lock_guard joiner(join_mutex_);
    if (accept_thread_.joinable()) accept_thread_.join();
    if (engine_thread_.joinable()) engine_thread_.join();
    std::unique_lock lock(mutex_);
    connections_cv_.wait(lock, [this] { return active_connections_ == 0; });
}

WorkerService::Stats WorkerService::stats() const {
    std::lock_guard guard(mutex_);
    Stats s = stats_;
    s.max_engine_concurrency = std::max(s.max_engine_concurrency, 0);
    return s;
}

void WorkerService::accept_loop() {
    while (!stopping_.load()) {
        auto stream = listener_.accept();
        if (!stream) break;  // listener shut down
        auto conn = std::make_shared<Connection>(std::move(*stream));
        std::lock_guard guard(mutex_);
        if (stopping_.load() || draining_) {
            conn->stream.close();
            continue;
        }
        connections_.push_back(conn);
        ++active_connections_;
        std::thread([this, conn] { connection_loop(conn); }).detach();
    }
}

void WorkerService::connection_loop(std::shared_ptr<Connection> conn) {
    bool greeted = false;
    bool drop = false;
    try {
        while (!drop && !stopping_.load()) {
            auto frame = read_frame(conn->stream);
            if (!frame) break;  // client closed

            switch (frame->type) {
                case FrameType::Hello: {
                    const int version = frame->body.value("protocol_version", -1);
                    if (version != kProtocolVersion) {
                        send_frame(*conn, make_error(-1, "unsupported protocol version " +
                                                             std::to_string(version)));
                        drop = true;
                        break;
                    }
                    send_frame(*conn, make_hello_server(to_string(config_.engine_spec.kind),
                                                        to_string(config_.architecture)));
                    greeted = true;
                    break;
                }
                case FrameType::Ping:
                    send_frame(*conn, make_pong());
                    break;
                case FrameType::Translate: {
                    if (!greeted) {
                        send_frame(*conn, make_error(-1, "TRANSLATE before HELLO"));
                        drop = true;
                        break;
                    }
                    // Validate eagerly so a malformed frame answers on this thread.
                    const auto shard_id = frame_shard_id(*frame);
                    frame_job_id(*frame);
                    frame_sentences(*frame);

                    std::lock_guard guard(mutex_);
                    if (draining_) {
                        stats_.errors_sent++;
                        send_frame(*conn, make_error(static_cast<std::int64_t>(shard_id),
                                                     "worker is shutting down", true));
                        break;
                    }
                    if (queue_.size() >= config_.max_queue) {
                        stats_.queue_rejections++;
                        stats_.errors_sent++;
                        send_frame(*conn, make_error(static_cast<std::int64_t>(shard_id),
                                                     "queue full, retry later", true));
                        break;
                    }
                    queue_.push_back({conn, std::move(*frame), arrival_counter_++});
                    stats_.requests_enqueued++;
                    queue_cv_.notify_one();
                    break;
                }
                case FrameType::Shutdown:
                    begin_drain();
                    break;
                default:
                    send_frame(*conn, make_error(-1, "unexpected frame type " +
                                                         to_string(frame->type)));
                    break;
            }
        }
    } catch (const Error&) {
        // Framing/protocol/socket trouble on one connection must not take the
        // worker down; the peer is simply dropped.
    }

    // Only shut the socket down here; the descriptor is closed when the last
    // owner (possibly the engine thread finishing an in-flight reply) lets go.
    conn->stream.shutdown();

    // Notify under the lock: the moment the count hits zero the service may be
    // destroyed, so this thread must be done with it before the waiter wakes.
    std::lock_guard guard(mutex_);
    connections_.erase(std::remove(connections_.begin(), connections_.end(), conn),
                       connections_.end());
    --active_connections_;
    connections_cv_.notify_all();
}

void WorkerService::begin_drain() {
    {
        std::lock_guard guard(mutex_);
        draining_ = true;
    }
    listener_.shutdown();  // no new connections while draining
    queue_cv_.notify_all();
}

void WorkerService::engine_loop() {
    while (true) {
        Request request;
        {
            std::unique_lock lock(mutex_);
            queue_cv_.wait(lock, [this] {
                return stopping_.load() || draining_ || !queue_.empty();
            });
            if (stopping_.load()) return;
            if (queue_.empty()) {
                if (draining_) break;
                continue;
            }
            request = std::move(queue_.front());
            queue_.pop_front();
        }
        serve_request(request);
    }

    // Drain complete: close shop.
    {
        std::lock_guard guard(mutex_);
        for (auto& conn : connections_) conn->stream.shutdown();
    }
    {
        std::lock_guard guard(done_mutex_);
        finished_ = true;
    }
    done_cv_.notify_all();
}

void WorkerService::serve_request(const Request& request) {
    const auto shard_id = frame_shard_id(request.frame);
    const auto job_id = frame_job_id(request.frame);
    const auto sentences = frame_sentences(request.frame);

    const int entries = engine_entries_.fetch_add(1) + 1;
    {
        std::lock_guard guard(mutex_);
        stats_.max_engine_concurrency = std::max(stats_.max_engine_concurrency, entries);
    }

    WireFrame reply;
    try {
        Engine* engine = engine_.get();
        std::unique_ptr<Engine> scratch;
        double cost = 0.0;
        if (config_.architecture == Architecture::Simple) {
            // Fresh engine per request: the setup cost lands on this shard.
            scratch = create_engine(config_.engine_spec);
            engine = scratch.get();
            cost += engine->setup_cost_seconds();
        }

        std::vector<std::string> translations;
        translations.reserve(sentences.size());
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            if (stopping_.load()) {
                engine_entries_.fetch_sub(1);
                return;  // shard abandoned mid-flight; coordinator sees the cut
            }
            try {
                Translation t = engine->translate(make_sentence(i, sentences[i]));
                cost += t.cost_seconds;
                translations.push_back(std::move(t.sentence.text));
            } catch (const EngineError&) {
                throw;
            } catch (const std::exception& e) {
                throw EngineError(i, e.what());
            }
        }

        std::uint64_t service_seq;
        {
            std::lock_guard guard(mutex_);
            service_seq = service_counter_++;
            stats_.results_sent++;
        }
        reply = make_result(job_id, shard_id, translations, cost, request.arrival_seq,
                            service_seq);
    } catch (const std::exception& e) {
        std::lock_guard guard(mutex_);
        service_counter_++;  // the slot was consumed even though it failed
        stats_.errors_sent++;
        reply = make_error(static_cast<std::int64_t>(shard_id), e.what());
    }
    engine_entries_.fetch_sub(1);

    try {
        send_frame(*request.conn, reply);
    } catch (const Error&) {
        // Client went away before the result could be delivered; the
        // coordinator's failure handling owns this case.
    }
}

void WorkerService::send_frame(Connection& conn, const WireFrame& frame) {
    std::lock_guard guard(conn.write_mutex);
    write_frame(conn.stream, frame);
}

}  // namespace mrmt
