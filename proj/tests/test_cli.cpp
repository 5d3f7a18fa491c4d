#include <doctest.h>

#include <csignal>
#include <chrono>
#include <thread>

#include "mrmt/corpus.hpp"
#include "mrmt/net.hpp"
#include "mrmt/strutil.hpp"
#include "mrmt/wire.hpp"
#include "testutil.hpp"

using testutil::run_command;

namespace {

std::string binary() { return MRMT_BIN; }
std::string data() { return std::string(MRMT_DATA_DIR); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen-data writes the requested geometry") {
    const auto dir = testutil::scratch_dir("cli-gen");
    const auto out = (dir / "doc.txt").string();
    auto result = run_command(binary() + " gen-data --sentences 100 --output " + out, "gen");
    REQUIRE(result.exit_code == 0);

    mrmt::Document doc = mrmt::read_document_file(out);
    CHECK(doc.size() == 100);
    CHECK(doc.total_words == 2000);

    // Results go to stdout when no output path is given.
    auto piped = run_command(binary() + " gen-data --sentences 3", "gen2");
    CHECK(piped.exit_code == 0);
    CHECK(mrmt::segment_sentences(piped.stdout_text).size() == 3);
}

TEST_CASE("unknown subcommands and flags exit with the usage code") {
    CHECK(run_command(binary() + " frobnicate", "usage1").exit_code == 1);
    CHECK(run_command(binary() + " gen-data --no-such-flag 3", "usage2").exit_code == 1);
    CHECK(run_command(binary() + " gen-data", "usage3").exit_code == 1);  // missing required
    CHECK(run_command(binary() + " --help", "usage4").exit_code == 0);
}

TEST_CASE("translate with the identity engine reproduces the input") {
    const auto dir = testutil::scratch_dir("cli-translate");
    const auto in = dir / "in.txt";
    const auto out = dir / "out.txt";
    testutil::write_file(in, "uno dos\ntres\n");

    auto result = run_command(binary() + " translate --engine " + data() +
                                  "/engines/identity.engine --in " + in.string() + " --out " +
                                  out.string() + " --simulate",
                              "translate");
    REQUIRE(result.exit_code == 0);
    CHECK(testutil::read_file(out) == "uno dos\ntres\n");
    CHECK(result.stdout_text.find("words: 3") != std::string::npos);
    CHECK(result.stdout_text.find("words_per_second") != std::string::npos);

    // Missing input file is a runtime failure, not a usage error.
    auto missing = run_command(binary() + " translate --engine " + data() +
                                   "/engines/identity.engine --in /nonexistent --out " +
                                   out.string(),
                               "translate2");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("translate with the toy rbmt engine") {
    const auto dir = testutil::scratch_dir("cli-rbmt");
    const auto in = dir / "in.txt";
    const auto out = dir / "out.txt";
    testutil::write_file(in, "la casa\nel gato zzyzx\n");

    auto result = run_command(binary() + " translate --engine " + data() +
                                  "/engines/rbmt-toy.engine --in " + in.string() + " --out " +
                                  out.string(),
                              "rbmt");
    REQUIRE(result.exit_code == 0);
    CHECK(testutil::read_file(out) == "the house\nthe cat *zzyzx\n");
}

TEST_CASE("breakeven on the bundled measurements prints the expected window") {
    auto result = run_command(
        binary() + " breakeven --observations " + data() + "/samples/arch-times.csv", "breakeven");
    REQUIRE(result.exit_code == 0);
    CHECK(result.stdout_text.find("break-even shard size:") != std::string::npos);

    // The printed crossover sits in the hundreds of sentences.
    const auto pos = result.stdout_text.find("break-even shard size: ");
    const double crossover = std::stod(result.stdout_text.substr(pos + 23));
    CHECK(crossover > 300);
    CHECK(crossover < 700);
}

TEST_CASE("bench-seq emits the table and CSV") {
    const auto dir = testutil::scratch_dir("cli-bench");
    const auto csv = (dir / "rows.csv").string();
    auto result = run_command(binary() + " bench-seq --engine " + data() +
                                  "/engines/delay-calibrated.engine --sizes 2000,20000 " +
                                  "--simulate --csv " + csv,
                              "benchseq");
    REQUIRE(result.exit_code == 0);
    CHECK(result.stdout_text.find("words/s") != std::string::npos);
    const std::string rows = testutil::read_file(csv);
    CHECK(rows.find("2000,100,seq-delay_model") != std::string::npos);
    CHECK(rows.find("20000,1000,seq-delay_model") != std::string::npos);
}

TEST_CASE("simulate-mode runs are byte-identical across invocations") {
    const std::string cmd = binary() + " bench-scaling --engine " + data() +
                            "/engines/delay-calibrated.engine --nodes 2,4 --words 100000 " +
                            "--shard-size 100 --simulate";
    auto first = run_command(cmd, "det1");
    auto second = run_command(cmd, "det2");
    REQUIRE(first.exit_code == 0);
    CHECK(first.stdout_text == second.stdout_text);
}

TEST_CASE("bench-scaling in simulate mode reports efficiency per node count") {
    auto result = run_command(binary() + " bench-scaling --engine " + data() +
                                  "/engines/delay-calibrated.engine --nodes 2,4 " +
                                  "--words 200000 --shard-size 100 --simulate",
                              "scaling");
    REQUIRE(result.exit_code == 0);
    CHECK(result.stdout_text.find("parallel efficiency") != std::string::npos);
    CHECK(result.stdout_text.find("2 node(s):") != std::string::npos);
    CHECK(result.stdout_text.find("4 node(s):") != std::string::npos);
}

namespace {

// Shuts worker processes down over the wire even when an assertion unwinds
// the test early.
struct WorkerShutdownGuard {
    std::vector<std::string> ports;

    ~WorkerShutdownGuard() {
        for (const auto& port : ports) {
            try {
                auto stream = mrmt::TcpStream::connect(
                    "127.0.0.1", static_cast<std::uint16_t>(std::stoi(port)), 1.0);
                mrmt::write_frame(stream, mrmt::make_shutdown());
            } catch (const std::exception&) {
                // already gone
            }
        }
    }
};

}  // namespace

TEST_CASE("worker plus run-job end to end over processes") {
    const auto dir = testutil::scratch_dir("cli-e2e");
    const auto in = dir / "in.txt";
    const auto out = dir / "out.txt";
    const auto seq_out = dir / "seq.txt";
    const auto pool_file = dir / "workers.txt";
    const auto report = dir / "report.csv";

    // A corpus the toy dictionaries fully understand, with one unknown.
    std::string text;
    for (int i = 0; i < 40; ++i)
        text += "la casa blanca tiene una puerta grande\nel gato negro zzyzx\n";
    testutil::write_file(in, text);

    // Two worker processes on ephemeral ports.
    const auto port_a = dir / "a.port";
    const auto port_b = dir / "b.port";
    const std::string engine = data() + "/engines/rbmt-toy.engine";
    const std::string worker_cmd = binary() + " worker --listen 127.0.0.1:0 --engine " + engine;
    const std::string log_a = (dir / "a.log").string();
    const std::string log_b = (dir / "b.log").string();
    const int spawned =
        std::system((worker_cmd + " --port-file " + port_a.string() + " > " + log_a + " 2>&1 & " +
                     worker_cmd + " --architecture simple --port-file " + port_b.string() +
                     " > " + log_b + " 2>&1 &")
                        .c_str());
    REQUIRE(spawned == 0);

    // Wait for both port files.
    WorkerShutdownGuard guard;
    std::string ports[2];
    for (int i = 0; i < 100; ++i) {
        ports[0] = std::string(mrmt::trim(testutil::read_file(port_a)));
        ports[1] = std::string(mrmt::trim(testutil::read_file(port_b)));
        if (!ports[0].empty() && !ports[1].empty()) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    REQUIRE(!ports[0].empty());
    REQUIRE(!ports[1].empty());
    guard.ports = {ports[0], ports[1]};
    testutil::write_file(pool_file,
                         "127.0.0.1:" + ports[0] + "\n127.0.0.1:" + ports[1] + "\n");

    auto job = run_command(binary() + " run-job --workers " + pool_file.string() + " --in " +
                               in.string() + " --out " + out.string() + " --shard-size 10" +
                               " --report " + report.string(),
                           "runjob");
    REQUIRE(job.exit_code == 0);

    auto seq = run_command(binary() + " translate --engine " + engine + " --in " + in.string() +
                               " --out " + seq_out.string() + " --simulate",
                           "seq");
    REQUIRE(seq.exit_code == 0);

    // Distributed output is byte-identical to the sequential run.
    CHECK(testutil::read_file(out) == testutil::read_file(seq_out));
    CHECK(testutil::read_file(out).find("*zzyzx") != std::string::npos);
    CHECK(testutil::read_file(report).rfind("shard_id,", 0) == 0);

    // A job against a dead pool fails with the runtime exit code.
    testutil::write_file(pool_file, "127.0.0.1:1\n");
    auto dead = run_command(binary() + " run-job --workers " + pool_file.string() + " --in " +
                                in.string() + " --out " + out.string(),
                            "deadpool");
    CHECK(dead.exit_code == 2);

    // The guard shuts both workers down via SHUTDOWN frames; they exit on
    // their own.
}

}  // TEST_SUITE
