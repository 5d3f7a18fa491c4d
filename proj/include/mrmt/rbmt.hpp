#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrmt/engine.hpp"

namespace mrmt {

// One morphological reading of a word. Unknown units carry the surface only.
struct LexicalUnit {
    std::string surface;
    std::string lemma;
    std::vector<std::string> tags;
    bool unknown = false;

    bool operator==(const LexicalUnit&) const = default;
};

// The five resource tables of the shallow-transfer pipeline, immutable after
// load. Dictionary files are UTF-8 TSV; see the bundled data/es-en set.
struct RbmtResources {
    struct PostgenRule {
        std::string left;
        std::string right;
        std::vector<std::string> replacement;
    };

    // surface -> analyses (lemma + tags) in dictionary order
    std::unordered_map<std::string, std::vector<LexicalUnit>> morph;
    // first-tag unigram probabilities
    std::unordered_map<std::string, double> tag_model;
    // "lemma\ttags" -> target (lemma, tags)
    std::unordered_map<std::string, LexicalUnit> bilingual;
    // "lemma\ttags" -> target surface
    std::unordered_map<std::string, std::string> gen;
    std::vector<PostgenRule> postgen;

    static RbmtResources load(const std::filesystem::path& morph_file,
                              const std::filesystem::path& tag_model_file,
                              const std::filesystem::path& bilingual_file,
                              const std::filesystem::path& gen_file,
                              const std::filesystem::path& postgen_file = {});
    static RbmtResources load_from_spec(const EngineSpec& spec);

    // No generation dead-ends; tag probabilities finite and positive; every
    // ambiguous analysis scorable. Throws ResourceError.
    void validate() const;

    static std::string key(const std::string& lemma, const std::vector<std::string>& tags);
};

// Stage 1: all dictionary analyses of one word; a single unknown-flagged unit
// when the word is absent.
std::vector<LexicalUnit> rbmt_analyze(const std::string& word, const RbmtResources& res);

// Stage 2: one unit per word, picking the analysis whose first tag is most
// probable; ties keep dictionary order. Throws CoverageError for unscorable
// tags.
std::vector<LexicalUnit> rbmt_tag(const std::vector<std::vector<LexicalUnit>>& analyses,
                                  const RbmtResources& res);

// Stage 3: lexical transfer into the target language; unknown units pass
// through unchanged.
LexicalUnit rbmt_transfer(const LexicalUnit& unit, const RbmtResources& res);

// Stage 4: target surface form; unknown units emit "*" + source surface.
std::string rbmt_generate(const LexicalUnit& unit, const RbmtResources& res);

// Stage 5: adjacent-pair rewrites, each rule applied left-to-right.
std::vector<std::string> rbmt_postgenerate(std::vector<std::string> words,
                                           const RbmtResources& res);

// Full pipeline: postgenerate ∘ map(generate ∘ transfer) ∘ tag ∘ map(analyze).
std::string rbmt_translate_text(const std::string& text, const RbmtResources& res);

std::unique_ptr<Engine> make_rbmt_engine(RbmtResources resources, EngineSpec spec,
                                         CostModel cost);

// Adapter around a line-oriented subprocess: sentences go in on stdin, one
// translation per line comes back on stdout. The child signals readiness with
// one banner line; spawn-to-banner is the measured setup cost.
std::unique_ptr<Engine> create_external_engine(const EngineSpec& spec, const CostModel& cost);

}  // namespace mrmt
