#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "mrmt/error.hpp"
#include "mrmt/rbmt.hpp"
#include "mrmt/strutil.hpp"

namespace mrmt {

namespace {

void ignore_sigpipe_once() {
    static const bool done = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

// Runs `sh -c command` with stdin/stdout piped. The contract is strictly
// line-oriented: one banner line at startup, then one translation line per
// input line, in order.
class ExternalEngine final : public Engine {
public:
    ExternalEngine(EngineSpec spec, CostModel cost) : Engine(std::move(spec), std::move(cost)) {
        ignore_sigpipe_once();
        const std::string command = spec_.params.at("command");

        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
            throw SpawnError("pipe() failed: " + std::string(std::strerror(errno)));

        const auto spawn_start = std::chrono::steady_clock::now();
        pid_ = ::fork();
        if (pid_ < 0) throw SpawnError("fork() failed: " + std::string(std::strerror(errno)));
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        stdin_fd_ = to_child[1];
        stdout_ = ::fdopen(from_child[0], "r");
        if (!stdout_) {
            ::close(from_child[0]);
            throw SpawnError("fdopen() failed");
        }

        // Ready handshake: the child must emit one line before the first
        // sentence is sent. EOF here means it never came up.
        std::string banner;
        if (!read_line(banner)) {
            shutdown_child();
            throw SpawnError("external command produced no ready line: " + command);
        }
        setup_cost_seconds_ =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - spawn_start).count();
    }

    ~ExternalEngine() override { shutdown_child(); }

    ExternalEngine(const ExternalEngine&) = delete;
    ExternalEngine& operator=(const ExternalEngine&) = delete;

protected:
    Translation translate_impl(const Sentence& s) override {
        const auto start = std::chrono::steady_clock::now();
        std::string line = s.text + "\n";
        if (!write_all(line))
            throw EngineError(s.index, "external command stdin closed");
        std::string out;
        if (!read_line(out))
            throw EngineError(s.index, "external command produced no output" + exit_detail());

        Translation t;
        t.sentence = make_sentence(s.index, std::move(out));
        t.cost_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return t;
    }

private:
    bool write_all(const std::string& data) {
        std::size_t off = 0;
        while (off < data.size()) {
            ssize_t n = ::write(stdin_fd_, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    bool read_line(std::string& out) {
        char* buf = nullptr;
        std::size_t cap = 0;
        ssize_t n = ::getline(&buf, &cap, stdout_);
        if (n < 0) {
            ::free(buf);
            return false;
        }
        out.assign(buf, static_cast<std::size_t>(n));
        ::free(buf);
        while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
        return true;
    }

    std::string exit_detail() {
        int status = 0;
        if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
            pid_ = -1;
            if (WIFEXITED(status) && WEXITSTATUS(status) != 0)
                return " (exit status " + std::to_string(WEXITSTATUS(status)) + ")";
        }
        return "";
    }

    void shutdown_child() {
        if (stdin_fd_ >= 0) {
            ::close(stdin_fd_);
            stdin_fd_ = -1;
        }
        if (stdout_) {
            ::fclose(stdout_);
            stdout_ = nullptr;
        }
        if (pid_ > 0) {
            int status = 0;
            if (::waitpid(pid_, &status, WNOHANG) == 0) {
                ::kill(pid_, SIGTERM);
                ::waitpid(pid_, &status, 0);
            }
            pid_ = -1;
        }
    }

    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    FILE* stdout_ = nullptr;
};

}  // namespace

std::unique_ptr<Engine> create_external_engine(const EngineSpec& spec, const CostModel& cost) {
    return std::make_unique<ExternalEngine>(spec, cost);
}

}  // namespace mrmt
