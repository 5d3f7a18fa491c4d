#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "mrmt/corpus.hpp"

namespace mrmt {

enum class EngineKind { Rbmt, SmtStub, DelayModel, ExternalCommand };

std::string to_string(EngineKind kind);
EngineKind engine_kind_from_string(std::string_view name);

// Worker deployment style: `Simple` instantiates a fresh engine per shard and
// pays the setup cost every time; `Service` keeps one engine alive and
// amortizes it.
enum class Architecture { Simple, Service };

std::string to_string(Architecture arch);
Architecture architecture_from_string(std::string_view name);

// Cost parameters shared by the model-driven engines. With `simulate` set,
// costs are accounted virtually; otherwise they are slept. Either way the
// translated text is identical.
struct CostModel {
    double setup_seconds = 0.0;
    double per_word_seconds = 0.0;
    double cache_hit_savings = 0.0;  // fraction of per-sentence cost avoided on a hit, [0,1)
    bool cache_enabled = false;
    bool simulate = false;
};

// Pluggable translator definition: a kind plus kind-specific parameters, as
// parsed from a flat key=value config section. Relative resource paths are
// resolved against `base_dir`.
struct EngineSpec {
    EngineKind kind = EngineKind::DelayModel;
    std::map<std::string, std::string> params;
    std::filesystem::path base_dir;

    static EngineSpec parse(std::string_view text, std::filesystem::path base_dir = {});
    static EngineSpec load(const std::filesystem::path& file);

    // Throws ResourceError when params are incomplete or invalid for the kind.
    void validate() const;

    CostModel cost() const;
    std::filesystem::path resolve_path(const std::string& key) const;
    std::string dump() const;

    bool simulate() const { return cost().simulate; }
    void set_simulate(bool on) { params["simulate"] = on ? "true" : "false"; }
};

struct Translation {
    Sentence sentence;
    double cost_seconds = 0.0;
};

// A ready translator. Instances are single-threaded: exactly one in-flight
// translate call at a time. Distinct instances may run concurrently; loaded
// resource tables are immutable and shared.
class Engine {
public:
    virtual ~Engine() = default;

    // Deterministic: same input text, same output text. The returned cost is
    // the per-sentence cost under the engine's CostModel; in wall-clock mode
    // the call also sleeps for it.
    Translation translate(const Sentence& s);

    const EngineSpec& spec() const { return spec_; }

    // Setup cost paid at instantiation (model value, or measured wall time for
    // external commands).
    double setup_cost_seconds() const { return setup_cost_seconds_; }

protected:
    Engine(EngineSpec spec, CostModel cost) : spec_(std::move(spec)), cost_(std::move(cost)) {}

    virtual Translation translate_impl(const Sentence& s) = 0;

    EngineSpec spec_;
    CostModel cost_;
    double setup_cost_seconds_ = 0.0;

    friend std::unique_ptr<Engine> create_engine(const EngineSpec& spec);
};

// Instantiates an engine, paying its setup cost (slept in wall-clock mode,
// accounted in simulate mode). Throws ResourceError / SpawnError.
std::unique_ptr<Engine> create_engine(const EngineSpec& spec);

}  // namespace mrmt
