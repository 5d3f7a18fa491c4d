#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mrmt/engine.hpp"
#include "mrmt/net.hpp"
#include "mrmt/wire.hpp"

namespace mrmt {

struct WorkerConfig {
    std::string listen_address = "127.0.0.1:0";
    EngineSpec engine_spec;
    Architecture architecture = Architecture::Service;
    std::size_t max_queue = 64;  // pending-request bound; overflow answers ERROR retry-later
};

// One translation node. Connections are accepted concurrently, but TRANSLATE
// requests are serviced strictly in arrival order with exactly one request
// inside the engine at a time. The service architecture keeps one engine
// alive across requests; the simple architecture builds and tears one down
// per request.
class WorkerService {
public:
    explicit WorkerService(WorkerConfig config);
    ~WorkerService();

    WorkerService(const WorkerService&) = delete;
    WorkerService& operator=(const WorkerService&) = delete;

    // Binds, instantiates the engine (service architecture), starts serving.
    void start();

    // Blocks until a SHUTDOWN frame drained the queue, or stop() was called.
    void wait();

    // Immediate teardown: stop accepting, drop the queue, join the threads.
    void stop();

    std::uint16_t port() const { return port_; }
    std::string address() const;

    struct Stats {
        std::uint64_t requests_enqueued = 0;
        std::uint64_t results_sent = 0;
        std::uint64_t errors_sent = 0;
        std::uint64_t queue_rejections = 0;
        int max_engine_concurrency = 0;  // contract: never above 1
    };
    Stats stats() const;

    double engine_setup_seconds() const { return engine_setup_seconds_; }

private:
    struct Connection {
        explicit Connection(TcpStream s) : stream(std::move(s)) {}
        TcpStream stream;
        std::mutex write_mutex;
    };

    struct Request {
        std::shared_ptr<Connection> conn;
        WireFrame frame;
        std::uint64_t arrival_seq = 0;
    };

    void accept_loop();
    void connection_loop(std::shared_ptr<Connection> conn);
    void engine_loop();
    void serve_request(const Request& request);
    void send_frame(Connection& conn, const WireFrame& frame);
    void begin_drain();
    void join_threads();

    WorkerConfig config_;
    TcpListener listener_;
    std::uint16_t port_ = 0;

    std::unique_ptr<Engine> engine_;  // service architecture only
    double engine_setup_seconds_ = 0.0;

    mutable std::mutex mutex_;
    std::condition_variable queue_cv_;
    std::deque<Request> queue_;
    bool draining_ = false;
    std::atomic<bool> stopping_{false};

    std::uint64_t arrival_counter_ = 0;
    std::uint64_t service_counter_ = 0;
    Stats stats_;
    std::atomic<int> engine_entries_{0};

    std::thread accept_thread_;
    std::thread engine_thread_;
    // Connection threads are detached; teardown waits until this count drops
    // to zero, so none of them can outlive the service.
    std::size_t active_connections_ = 0;
    std::condition_variable connections_cv_;
    std::vector<std::shared_ptr<Connection>> connections_;

    std::mutex done_mutex_;
    std::condition_variable done_cv_;
    bool finished_ = false;
    std::mutex join_mutex_;
};

}  // namespace mrmt
