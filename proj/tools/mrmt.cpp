// Command-line front end: data generation, local translation, worker hosting,
// distributed jobs and benchmark sweeps, all over one binary.

#include <unistd.h>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mrmt/bench.hpp"
#include "mrmt/coordinator.hpp"
#include "mrmt/corpus.hpp"
#include "mrmt/engine.hpp"
#include "mrmt/error.hpp"
#include "mrmt/sim.hpp"
#include "mrmt/strutil.hpp"
#include "mrmt/worker.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Self-pipe for signal-triggered shutdown; the handler only writes a byte.
int g_signal_pipe[2] = {-1, -1};

void on_signal(int) {
    const char byte = 1;
    [[maybe_unused]] auto n = ::write(g_signal_pipe[1], &byte, 1);
}

void write_text_output(const std::string& text, const std::string& output_path) {
    if (output_path.empty() || output_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(output_path, std::ios::binary | std::ios::trunc);
    if (!out) throw mrmt::ResourceError("cannot open output file: " + output_path);
    out << text;
}

std::string read_base_sentence(const std::string& base_file) {
    if (base_file.empty()) return mrmt::default_base_sentence();
    mrmt::Document doc = mrmt::read_document_file(base_file);
    if (doc.size() == 0)
        throw mrmt::ResourceError("base sentence file is empty: " + base_file);
    return doc.sentences.front().text;
}

std::vector<std::size_t> parse_size_list(const std::string& csv, const char* what) {
    std::vector<std::size_t> out;
    for (const auto& piece : mrmt::split(csv, ',')) {
        auto token = mrmt::trim(piece);
        if (token.empty()) continue;
        try {
            long long v = std::stoll(std::string(token));
            if (v <= 0) throw std::out_of_range("non-positive");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": bad entry '" + std::string(token) +
                                        "'");
        }
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

mrmt::EngineSpec load_engine(const std::string& path, bool simulate) {
    mrmt::EngineSpec spec = mrmt::EngineSpec::load(path);
    if (simulate) spec.set_simulate(true);
    return spec;
}

std::string random_job_id() {
    std::random_device rd;
    std::uniform_int_distribution<unsigned> hex(0, 15);
    std::string id = "job-";
    for (int i = 0; i < 12; ++i) id += "0123456789abcdef"[hex(rd)];
    return id;
}

int cmd_gen_data(std::size_t sentences, const std::string& base_file,
                 const std::string& output) {
    const std::string base = read_base_sentence(base_file);
    mrmt::Document doc = mrmt::generate_artificial(sentences, base);
    write_text_output(mrmt::to_text(doc), output);
    std::cerr << "generated " << doc.size() << " sentences, " << doc.total_words << " words\n";
    return kExitOk;
}

int cmd_translate(const std::string& engine_file, const std::string& input,
                  const std::string& output, bool simulate) {
    const mrmt::EngineSpec spec = load_engine(engine_file, simulate);
    const mrmt::Document source = mrmt::read_document_file(input);

    const auto wall_start = std::chrono::steady_clock::now();
    auto engine = mrmt::create_engine(spec);
    const double wall_setup =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

    mrmt::Document out;
    out.sentences.reserve(source.size());
    double cost = 0.0;
    for (const auto& s : source.sentences) {
        mrmt::Translation t = engine->translate(s);
        cost += t.cost_seconds;
        out.total_words += t.sentence.word_count;
        out.sentences.push_back(std::move(t.sentence));
    }
    const double wall_total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

    mrmt::write_document_file(out, output);

    // Virtual accounting in simulate mode, measured wall time otherwise. A
    // zero-cost model has no meaningful virtual time; fall back to the wall.
    const bool virt = spec.simulate() && engine->setup_cost_seconds() + cost > 0;
    const double setup = virt ? engine->setup_cost_seconds() : wall_setup;
    const double translation = virt ? cost : wall_total - wall_setup;
    const auto report = mrmt::compute_throughput(source.total_words, setup, translation);

    std::cout << "words: " << report.words << "\nsentences: " << source.size()
              << "\nsetup_seconds: " << report.setup_seconds
              << "\ntranslation_seconds: " << report.translation_seconds
              << "\ntotal_seconds: " << report.total_seconds << " ("
              << mrmt::format_hmmss(report.total_seconds) << ")"
              << "\nwords_per_second: " << report.words_per_second << "\n";
    return kExitOk;
}

int cmd_worker(const std::string& listen, const std::string& engine_file,
               const std::string& architecture, std::size_t max_queue, bool simulate,
               const std::string& port_file) {
    mrmt::WorkerConfig config;
    config.listen_address = listen;
    config.engine_spec = load_engine(engine_file, simulate);
    config.architecture = mrmt::architecture_from_string(architecture);
    config.max_queue = max_queue;

    mrmt::WorkerService worker(config);
    worker.start();

    if (::pipe(g_signal_pipe) != 0) throw mrmt::ResourceError("cannot create signal pipe");
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread signal_watcher([&worker] {
        char byte = 0;
        if (::read(g_signal_pipe[0], &byte, 1) > 0 && byte == 1) worker.stop();
    });

    if (!port_file.empty()) {
        std::ofstream pf(port_file, std::ios::trunc);
        pf << worker.port() << "\n";
    }
    std::cerr << "worker listening on " << worker.address() << " ("
              << mrmt::to_string(config.architecture) << " architecture)\n";
    worker.wait();

    // Unblock the watcher if the worker drained on its own.
    const char done = 0;
    [[maybe_unused]] auto n = ::write(g_signal_pipe[1], &done, 1);
    signal_watcher.join();
    return kExitOk;
}

int cmd_run_job(const std::string& workers_file, const std::string& input,
                const std::string& output, std::size_t shard_size, std::size_t retry_limit,
                const std::string& csv_path) {
    mrmt::Job job;
    job.job_id = random_job_id();
    job.source = mrmt::read_document_file(input);
    job.shard_size = shard_size;
    job.retry_limit = retry_limit;

    std::ifstream in(workers_file);
    if (!in) throw mrmt::ResourceError("cannot open worker pool file: " + workers_file);
    std::string line;
    while (std::getline(in, line)) {
        auto addr = mrmt::trim(line);
        if (addr.empty() || addr.front() == '#') continue;
        job.workers.emplace_back(addr);
    }

    mrmt::JobResult result = mrmt::run_job(job);
    mrmt::write_document_file(result.output, output);
    if (!csv_path.empty()) write_text_output(mrmt::timing_csv(result), csv_path);
    std::cout << mrmt::job_summary(result);
    return kExitOk;
}

int cmd_bench_seq(const std::string& engine_file, const std::string& sizes_csv, bool simulate,
                  const std::string& base_file, const std::string& csv_path) {
    const mrmt::EngineSpec spec = load_engine(engine_file, simulate);
    const std::string base = read_base_sentence(base_file);
    const std::size_t base_words = mrmt::count_words(base);

    std::vector<mrmt::BenchRow> rows;
    for (std::size_t words : parse_size_list(sizes_csv, "--sizes")) {
        const std::size_t sentences = std::max<std::size_t>(1, words / base_words);
        const mrmt::Document doc = mrmt::generate_artificial(sentences, base);

        double seconds;
        if (spec.simulate()) {
            double cost = 0.0;
            mrmt::run_sequential(spec, doc, &cost);
            seconds = cost;
        } else {
            const auto start = std::chrono::steady_clock::now();
            mrmt::run_sequential(spec, doc);
            seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }

        const auto report = mrmt::compute_throughput(doc.total_words, 0.0, seconds);
        rows.push_back({doc.total_words, doc.size(), "seq-" + mrmt::to_string(spec.kind),
                        seconds, 1, report.words_per_second});
    }

    std::cout << mrmt::render_table(rows);
    if (!csv_path.empty()) write_text_output(mrmt::render_csv(rows), csv_path);
    return kExitOk;
}

int cmd_bench_scaling(const std::string& engine_file, const std::string& nodes_csv,
                      std::size_t words, std::size_t shard_size, bool simulate,
                      double overhead_seconds, const std::string& architecture,
                      const std::string& csv_path) {
    const mrmt::EngineSpec spec = load_engine(engine_file, simulate);
    const auto nodes = parse_size_list(nodes_csv, "--nodes");

    mrmt::ScalingReport scaling = mrmt::run_scaling_experiment(
        spec, words, nodes, shard_size, simulate, overhead_seconds,
        mrmt::architecture_from_string(architecture));

    std::vector<mrmt::BenchRow> rows;
    for (const auto& row : scaling.rows)
        rows.push_back({row.report.words,
                        row.report.words / mrmt::count_words(mrmt::default_base_sentence()),
                        "mr-" + mrmt::to_string(spec.kind), row.report.total_seconds, row.nodes,
                        row.report.words_per_second});
    std::cout << mrmt::render_table(rows);

    std::cout << "\nparallel efficiency vs 1 node:\n";
    for (const auto& row : scaling.rows) {
        std::ostringstream eff;
        eff << std::fixed << std::setprecision(4) << row.efficiency;
        std::cout << "  " << row.nodes << " node(s): " << eff.str() << "\n";
    }
    if (!csv_path.empty()) write_text_output(mrmt::render_csv(rows), csv_path);

    if (!scaling.error.empty()) {
        std::cerr << "scaling sweep aborted: " << scaling.error << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_breakeven(const std::string& observations_csv) {
    std::ifstream in(observations_csv);
    if (!in) throw mrmt::ResourceError("cannot open observations file: " + observations_csv);

    std::map<std::string, std::vector<mrmt::Observation>> series;
    std::vector<std::string> order;
    std::string line;
    std::size_t line_no = 0;
    bool saw_data = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = mrmt::trim(line);
        if (text.empty() || text.front() == '#') continue;
        auto fields = mrmt::split(text, ',');
        if (fields.size() != 3)
            throw mrmt::ResourceError(observations_csv + ":" + std::to_string(line_no) +
                                      ": expected label,sentences,seconds");
        try {
            const double units = std::stod(std::string(mrmt::trim(fields[1])));
            const double seconds = std::stod(std::string(mrmt::trim(fields[2])));
            std::string label{mrmt::trim(fields[0])};
            if (!series.count(label)) order.push_back(label);
            series[label].push_back({units, seconds});
            saw_data = true;
        } catch (const std::exception&) {
            if (!saw_data) continue;  // header row
            throw mrmt::ResourceError(observations_csv + ":" + std::to_string(line_no) +
                                      ": bad numeric fields");
        }
    }
    if (series.size() != 2)
        throw mrmt::ResourceError("break-even needs exactly 2 labeled series, got " +
                                  std::to_string(series.size()));

    std::vector<mrmt::LinearCostModel> models;
    for (const auto& label : order) {
        const auto model = mrmt::fit_cost_model(series[label]);
        models.push_back(model);
        std::cout << label << ": fixed_seconds=" << model.fixed_seconds
                  << " per_sentence_seconds=" << model.per_unit_seconds
                  << " max_relative_error=" << model.residual << "\n";
    }

    const auto crossover = mrmt::find_breakeven_shard(models[0], models[1]);
    if (crossover) {
        std::cout << "break-even shard size: " << *crossover << " sentences (~"
                  << std::llround(*crossover) << ")\n";
    } else {
        std::cout << "break-even shard size: none (lines do not cross at a positive size)\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"map/reduce batch-translation engine and benchmark harness"};
    app.require_subcommand(1);

    // gen-data
    std::size_t gd_sentences = 0;
    std::string gd_base, gd_output;
    auto* gen_data = app.add_subcommand("gen-data", "generate an artificial test document");
    gen_data->add_option("--sentences", gd_sentences, "number of sentences")->required();
    gen_data->add_option("--base", gd_base, "file holding the base sentence (first line)");
    gen_data->add_option("--output,-o", gd_output, "output path (default stdout)");

    // translate
    std::string tr_engine, tr_in, tr_out;
    bool tr_simulate = false;
    auto* translate = app.add_subcommand("translate", "translate a document sequentially");
    translate->add_option("--engine", tr_engine, "engine spec file")->required();
    translate->add_option("--in", tr_in, "input document")->required();
    translate->add_option("--out", tr_out, "output document")->required();
    translate->add_flag("--simulate", tr_simulate, "account costs virtually instead of sleeping");

    // worker
    std::string wk_listen = "127.0.0.1:0", wk_engine, wk_arch = "service", wk_port_file;
    std::size_t wk_max_queue = 64;
    bool wk_simulate = false;
    auto* worker = app.add_subcommand("worker", "host a translation worker");
    worker->add_option("--listen", wk_listen, "host:port to bind (port 0 = ephemeral)");
    worker->add_option("--engine", wk_engine, "engine spec file")->required();
    worker->add_option("--architecture", wk_arch, "simple|service")
        ->check(CLI::IsMember({"simple", "service"}));
    worker->add_option("--max-queue", wk_max_queue, "pending request bound");
    worker->add_flag("--simulate", wk_simulate, "virtual cost accounting");
    worker->add_option("--port-file", wk_port_file, "write the bound port to this file");

    // run-job
    std::string rj_workers, rj_in, rj_out, rj_csv;
    std::size_t rj_shard_size = 1000, rj_retry = 3;
    auto* run_job = app.add_subcommand("run-job", "run a distributed translation job");
    run_job->add_option("--workers", rj_workers, "file with one worker host:port per line")
        ->required();
    run_job->add_option("--in", rj_in, "input document")->required();
    run_job->add_option("--out", rj_out, "output document")->required();
    run_job->add_option("--shard-size", rj_shard_size, "sentences per shard");
    run_job->add_option("--retry-limit", rj_retry, "max reassignments per shard");
    run_job->add_option("--report", rj_csv, "write per-shard timing CSV here");

    // bench-seq
    std::string bs_engine, bs_sizes = "2000,20000,200000", bs_base, bs_csv;
    bool bs_simulate = false;
    auto* bench_seq = app.add_subcommand("bench-seq", "sequential throughput sweep");
    bench_seq->add_option("--engine", bs_engine, "engine spec file")->required();
    bench_seq->add_option("--sizes", bs_sizes, "comma-separated word counts");
    bench_seq->add_option("--base", bs_base, "base sentence file");
    bench_seq->add_flag("--simulate", bs_simulate, "virtual cost accounting");
    bench_seq->add_option("--csv", bs_csv, "write rows as CSV here");

    // bench-scaling
    std::string sc_engine, sc_nodes = "2,4,8,16", sc_arch = "service", sc_csv;
    std::size_t sc_words = 20'000'000, sc_shard = 1000;
    bool sc_simulate = false;
    double sc_overhead = 0.0;
    auto* bench_scaling = app.add_subcommand("bench-scaling", "node-scaling throughput sweep");
    bench_scaling->add_option("--engine", sc_engine, "engine spec file")->required();
    bench_scaling->add_option("--nodes", sc_nodes, "comma-separated node counts");
    bench_scaling->add_option("--words", sc_words, "corpus size in words");
    bench_scaling->add_option("--shard-size", sc_shard, "sentences per shard");
    bench_scaling->add_flag("--simulate", sc_simulate,
                            "virtual clusters (required for full-scale corpora)");
    bench_scaling->add_option("--overhead-seconds", sc_overhead, "fixed per-job overhead");
    bench_scaling->add_option("--architecture", sc_arch, "simple|service")
        ->check(CLI::IsMember({"simple", "service"}));
    bench_scaling->add_option("--csv", sc_csv, "write rows as CSV here");

    // breakeven
    std::string be_csv;
    auto* breakeven = app.add_subcommand("breakeven", "architecture break-even estimate");
    breakeven->add_option("--observations", be_csv, "CSV of label,sentences,seconds")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen_data->parsed()) return cmd_gen_data(gd_sentences, gd_base, gd_output);
        if (translate->parsed()) return cmd_translate(tr_engine, tr_in, tr_out, tr_simulate);
        if (worker->parsed())
            return cmd_worker(wk_listen, wk_engine, wk_arch, wk_max_queue, wk_simulate,
                              wk_port_file);
        if (run_job->parsed())
            return cmd_run_job(rj_workers, rj_in, rj_out, rj_shard_size, rj_retry, rj_csv);
        if (bench_seq->parsed())
            return cmd_bench_seq(bs_engine, bs_sizes, bs_simulate, bs_base, bs_csv);
        if (bench_scaling->parsed())
            return cmd_bench_scaling(sc_engine, sc_nodes, sc_words, sc_shard, sc_simulate,
                                     sc_overhead, sc_arch, sc_csv);
        if (breakeven->parsed()) return cmd_breakeven(be_csv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
