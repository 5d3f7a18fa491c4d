#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mrmt/corpus.hpp"
#include "mrmt/engine.hpp"
#include "mrmt/rbmt.hpp"

namespace testutil {

inline std::filesystem::path data_dir() { return MRMT_DATA_DIR; }

inline std::string num(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline mrmt::EngineSpec toy_rbmt_spec() {
    return mrmt::EngineSpec::load(data_dir() / "engines" / "rbmt-toy.engine");
}

inline mrmt::EngineSpec delay_spec(double setup, double per_word, bool simulate = true) {
    mrmt::EngineSpec spec;
    spec.kind = mrmt::EngineKind::DelayModel;
    spec.params["kind"] = "delay_model";
    spec.params["setup_seconds"] = num(setup);
    spec.params["per_word_seconds"] = num(per_word);
    spec.set_simulate(simulate);
    return spec;
}

inline mrmt::EngineSpec smt_stub_spec(double per_word, bool cache_enabled, double savings,
                                      bool simulate = true) {
    mrmt::EngineSpec spec;
    spec.kind = mrmt::EngineKind::SmtStub;
    spec.params["kind"] = "smt_stub";
    spec.params["per_word_seconds"] = num(per_word);
    spec.params["cache_enabled"] = cache_enabled ? "true" : "false";
    spec.params["cache_hit_savings"] = num(savings);
    spec.set_simulate(simulate);
    return spec;
}

// Small hand-built resource set, independent of the bundled data files. Used
// by stage-level unit tests that need to poke at errors and tie-breaks.
inline mrmt::RbmtResources mini_resources() {
    mrmt::RbmtResources res;
    res.morph["la"] = {{"", "la", {"det", "def", "f", "sg"}, false},
                       {"", "la", {"prn", "f", "sg"}, false}};
    res.morph["casa"] = {{"", "casa", {"n", "f", "sg"}, false}};
    res.morph["casas"] = {{"", "casa", {"n", "f", "pl"}, false}};
    res.tag_model = {{"det", 0.7}, {"prn", 0.3}, {"n", 0.5}};
    res.bilingual[mrmt::RbmtResources::key("la", {"det", "def", "f", "sg"})] =
        {"", "the", {"det", "def"}, false};
    res.bilingual[mrmt::RbmtResources::key("la", {"prn", "f", "sg"})] = {"", "it", {"prn"}, false};
    res.bilingual[mrmt::RbmtResources::key("casa", {"n", "f", "sg"})] = {"", "house", {"n", "sg"}, false};
    res.bilingual[mrmt::RbmtResources::key("casa", {"n", "f", "pl"})] = {"", "house", {"n", "pl"}, false};
    res.gen[mrmt::RbmtResources::key("the", {"det", "def"})] = "the";
    res.gen[mrmt::RbmtResources::key("it", {"prn"})] = "it";
    res.gen[mrmt::RbmtResources::key("house", {"n", "sg"})] = "house";
    res.gen[mrmt::RbmtResources::key("house", {"n", "pl"})] = "houses";
    return res;
}

// Vocabulary drawn from the bundled toy dictionaries plus a couple of unknown
// tokens, for randomized documents that exercise the full pipeline.
inline const std::vector<std::string>& toy_vocabulary() {
    static const std::vector<std::string> words = {
        "la",    "el",    "un",   "una",   "casa",  "casas", "gato",  "gatos", "perro",
        "libro", "pan",   "agua", "flor",  "sol",   "luna",  "patio", "fuente", "puerta",
        "blanca", "negro", "verde", "grande", "roja", "tiene", "duerme", "come", "bebe",
        "canta", "corre", "ve",   "y",     "en",    "de",    "a",     "con",   "sin",
        "sobre", "cerca", "vino", "jardin", "zzyzx", "qwrk"};
    return words;
}

inline mrmt::Document random_document(std::mt19937& rng, std::size_t max_sentences,
                                      std::size_t max_words_per_sentence = 12) {
    const auto& vocab = toy_vocabulary();
    std::uniform_int_distribution<std::size_t> sentence_count(1, max_sentences);
    std::uniform_int_distribution<std::size_t> word_count(1, max_words_per_sentence);
    std::uniform_int_distribution<std::size_t> word_pick(0, vocab.size() - 1);

    mrmt::Document doc;
    const std::size_t n = sentence_count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        const std::size_t words = word_count(rng);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) text += ' ';
            text += vocab[word_pick(rng)];
        }
        doc.sentences.push_back(mrmt::make_sentence(i, std::move(text)));
        doc.total_words += doc.sentences.back().word_count;
    }
    return doc;
}

// Scratch directory for files a test writes; unique per call.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("mrmt-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

struct CommandResult {
    int exit_code = -1;
    std::string stdout_text;
    std::string stderr_text;
};

// Runs a shell command with stdout/stderr captured to files.
inline CommandResult run_command(const std::string& command, const std::string& tag) {
    const auto dir = scratch_dir("cmd-" + tag);
    const auto out_path = dir / "stdout.txt";
    const auto err_path = dir / "stderr.txt";
    const std::string full =
        command + " > " + out_path.string() + " 2> " + err_path.string();
    const int status = std::system(full.c_str());

    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.stdout_text = read_file(out_path);
    result.stderr_text = read_file(err_path);
    return result;
}

}  // namespace testutil
