#include "mrmt/engine.hpp"

#include <cctype>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "mrmt/error.hpp"
#include "mrmt/rbmt.hpp"
#include "mrmt/strutil.hpp"

namespace mrmt {

namespace {

void sleep_seconds(double seconds) {
    if (seconds <= 0) return;
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ResourceError("engine spec: key '" + key + "' is not a boolean: " + value);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return d;
    } catch (const std::exception&) {
        throw ResourceError("engine spec: key '" + key + "' is not a number: " + value);
    }
}

// Keys accepted per engine kind; `kind` and `simulate` are always valid.
const std::set<std::string>& allowed_keys(EngineKind kind) {
    static const std::set<std::string> common = {"kind", "simulate", "setup_seconds",
                                                 "per_word_seconds"};
    static const std::set<std::string> smt = [] {
        auto s = common;
        s.insert("cache_enabled");
        s.insert("cache_hit_savings");
        return s;
    }();
    static const std::set<std::string> rbmt = [] {
        auto s = common;
        s.insert("morph_dict");
        s.insert("tag_model");
        s.insert("bilingual_dict");
        s.insert("gen_dict");
        s.insert("postgen_rules");
        return s;
    }();
    static const std::set<std::string> external = [] {
        auto s = common;
        s.insert("command");
        return s;
    }();
    switch (kind) {
        case EngineKind::SmtStub: return smt;
        case EngineKind::Rbmt: return rbmt;
        case EngineKind::ExternalCommand: return external;
        case EngineKind::DelayModel: return common;
    }
    return common;
}

}  // namespace

std::string to_string(EngineKind kind) {
    switch (kind) {
        case EngineKind::Rbmt: return "rbmt";
        case EngineKind::SmtStub: return "smt_stub";
        case EngineKind::DelayModel: return "delay_model";
        case EngineKind::ExternalCommand: return "external_command";
    }
    return "?";
}

EngineKind engine_kind_from_string(std::string_view name) {
    if (name == "rbmt") return EngineKind::Rbmt;
    if (name == "smt_stub") return EngineKind::SmtStub;
    if (name == "delay_model") return EngineKind::DelayModel;
    if (name == "external_command") return EngineKind::ExternalCommand;
    throw ResourceError("unknown engine kind: " + std::string(name));
}

std::string to_string(Architecture arch) {
    return arch == Architecture::Simple ? "simple" : "service";
}

Architecture architecture_from_string(std::string_view name) {
    if (name == "simple") return Architecture::Simple;
    if (name == "service") return Architecture::Service;
    throw ResourceError("unknown architecture: " + std::string(name));
}

EngineSpec EngineSpec::parse(std::string_view text, std::filesystem::path base_dir) {
    EngineSpec spec;
    spec.base_dir = std::move(base_dir);

    bool kind_seen = false;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ResourceError("engine spec line " + std::to_string(line_no) +
                                ": expected key = value");
        std::string key{trim(line.substr(0, eq))};
        std::string value{trim(line.substr(eq + 1))};
        if (key.empty()) throw ResourceError("engine spec line " + std::to_string(line_no) +
                                             ": empty key");
        if (!spec.params.emplace(key, value).second)
            throw ResourceError("engine spec: duplicate key '" + key + "'");
        if (key == "kind") {
            spec.kind = engine_kind_from_string(value);
            kind_seen = true;
        }
    }
    if (!kind_seen) throw ResourceError("engine spec: missing 'kind'");
    spec.validate();
    return spec;
}

EngineSpec EngineSpec::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ResourceError("cannot open engine spec: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), file.parent_path());
}

void EngineSpec::validate() const {
    const auto& allowed = allowed_keys(kind);
    for (const auto& [key, value] : params)
        if (!allowed.count(key))
            throw ResourceError("engine spec: key '" + key + "' is not valid for kind " +
                                to_string(kind));

    const CostModel model = cost();  // range-checks numeric params
    if (model.setup_seconds < 0 || model.per_word_seconds < 0)
        throw ResourceError("engine spec: costs must be non-negative");
    if (model.cache_hit_savings < 0 || model.cache_hit_savings >= 1)
        throw ResourceError("engine spec: cache_hit_savings must be in [0, 1)");

    if (kind == EngineKind::Rbmt) {
        for (const char* key : {"morph_dict", "tag_model", "bilingual_dict", "gen_dict"})
            if (!params.count(key))
                throw ResourceError(std::string("engine spec: rbmt requires '") + key + "'");
    }
    if (kind == EngineKind::ExternalCommand && !params.count("command"))
        throw ResourceError("engine spec: external_command requires 'command'");
}

CostModel EngineSpec::cost() const {
    CostModel model;
    for (const auto& [key, value] : params) {
        if (key == "setup_seconds") model.setup_seconds = parse_double(key, value);
        else if (key == "per_word_seconds") model.per_word_seconds = parse_double(key, value);
        else if (key == "cache_hit_savings") model.cache_hit_savings = parse_double(key, value);
        else if (key == "cache_enabled") model.cache_enabled = parse_bool(key, value);
        else if (key == "simulate") model.simulate = parse_bool(key, value);
    }
    return model;
}

std::filesystem::path EngineSpec::resolve_path(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw ResourceError("engine spec: missing path key '" + key + "'");
    std::filesystem::path p = it->second;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p;
}

std::string EngineSpec::dump() const {
    std::string out = "kind = " + to_string(kind) + "\n";
    for (const auto& [key, value] : params) {
        if (key == "kind") continue;
        out += key + " = " + value + "\n";
    }
    return out;
}

Translation Engine::translate(const Sentence& s) {
    Translation t = translate_impl(s);
    t.sentence.index = s.index;
    if (!cost_.simulate) sleep_seconds(t.cost_seconds);
    return t;
}

namespace {

// Pure setup + per-word cost; text passes through unchanged.
class DelayEngine final : public Engine {
public:
    DelayEngine(EngineSpec spec, CostModel cost) : Engine(std::move(spec), std::move(cost)) {}

protected:
    Translation translate_impl(const Sentence& s) override {
        return {s, static_cast<double>(s.word_count) * cost_.per_word_seconds};
    }
};

// Deterministic stand-in for a statistical decoder. The output is a token-wise
// uppercase rewrite; the cost model carries the substance: linear per-word
// cost, optionally reduced on exact-sentence cache hits.
class SmtStubEngine final : public Engine {
public:
    SmtStubEngine(EngineSpec spec, CostModel cost) : Engine(std::move(spec), std::move(cost)) {}

protected:
    Translation translate_impl(const Sentence& s) override {
        Translation t;
        t.sentence = s;
        auto words = split_words(s.text);
        for (auto& w : words)
            for (auto& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        t.sentence.text = join(words, " ");
        t.sentence.word_count = words.size();

        double cost = static_cast<double>(s.word_count) * cost_.per_word_seconds;
        if (cost_.cache_enabled) {
            if (cache_.count(s.text)) {
                cost *= 1.0 - cost_.cache_hit_savings;
            } else {
                cache_.insert(s.text);
            }
        }
        t.cost_seconds = cost;
        return t;
    }

private:
    std::unordered_set<std::string> cache_;  // keyed by exact source sentence
};

}  // namespace

std::unique_ptr<Engine> create_engine(const EngineSpec& spec) {
    spec.validate();
    const CostModel model = spec.cost();

    std::unique_ptr<Engine> engine;
    switch (spec.kind) {
        case EngineKind::DelayModel:
            engine = std::make_unique<DelayEngine>(spec, model);
            break;
        case EngineKind::SmtStub:
            engine = std::make_unique<SmtStubEngine>(spec, model);
            break;
        case EngineKind::Rbmt:
            engine = make_rbmt_engine(RbmtResources::load_from_spec(spec), spec, model);
            break;
        case EngineKind::ExternalCommand:
            return create_external_engine(spec, model);  // setup measured, not modeled
    }

    engine->setup_cost_seconds_ = model.setup_seconds;
    if (!model.simulate) sleep_seconds(model.setup_seconds);
    return engine;
}

}  // namespace mrmt
