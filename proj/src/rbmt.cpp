#include "mrmt/rbmt.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include "mrmt/error.hpp"
#include "mrmt/strutil.hpp"

namespace mrmt {

namespace {

std::vector<std::string> parse_tags(std::string_view joined) {
    std::vector<std::string> tags;
    for (auto& t : split(joined, ','))
        if (auto tv = trim(t); !tv.empty()) tags.emplace_back(tv);
    return tags;
}

// TSV rows with exactly `columns` fields; blank lines and #-comments skipped.
void for_each_row(const std::filesystem::path& file, std::size_t columns,
                  const std::function<void(const std::vector<std::string>&)>& fn) {
    std::ifstream in(file);
    if (!in) throw ResourceError("cannot open dictionary file: " + file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line).front() == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != columns)
            throw ResourceError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                                std::to_string(columns) + " tab-separated fields, got " +
                                std::to_string(fields.size()));
        for (auto& f : fields) f = std::string(trim(f));
        fn(fields);
    }
}

}  // namespace

std::string RbmtResources::key(const std::string& lemma, const std::vector<std::string>& tags) {
    return lemma + "\t" + join(tags, ",");
}

RbmtResources RbmtResources::load(const std::filesystem::path& morph_file,
                                  const std::filesystem::path& tag_model_file,
                                  const std::filesystem::path& bilingual_file,
                                  const std::filesystem::path& gen_file,
                                  const std::filesystem::path& postgen_file) {
    RbmtResources res;

    for_each_row(morph_file, 3, [&](const auto& f) {
        LexicalUnit unit;
        unit.lemma = f[1];
        unit.tags = parse_tags(f[2]);
        if (unit.tags.empty())
            throw ResourceError(morph_file.string() + ": entry '" + f[0] + "' has no tags");
        res.morph[f[0]].push_back(std::move(unit));
    });

    for_each_row(tag_model_file, 2, [&](const auto& f) {
        try {
            res.tag_model[f[0]] = std::stod(f[1]);
        } catch (const std::exception&) {
            throw ResourceError(tag_model_file.string() + ": bad probability for tag " + f[0]);
        }
    });

    for_each_row(bilingual_file, 4, [&](const auto& f) {
        LexicalUnit target;
        target.lemma = f[2];
        target.tags = parse_tags(f[3]);
        res.bilingual[key(f[0], parse_tags(f[1]))] = std::move(target);
    });

    for_each_row(gen_file, 3, [&](const auto& f) {
        res.gen[key(f[0], parse_tags(f[1]))] = f[2];
    });

    if (!postgen_file.empty()) {
        for_each_row(postgen_file, 3, [&](const auto& f) {
            res.postgen.push_back({f[0], f[1], split_words(f[2])});
        });
    }

    res.validate();
    return res;
}

RbmtResources RbmtResources::load_from_spec(const EngineSpec& spec) {
    std::filesystem::path postgen;
    if (spec.params.count("postgen_rules")) postgen = spec.resolve_path("postgen_rules");
    return load(spec.resolve_path("morph_dict"), spec.resolve_path("tag_model"),
                spec.resolve_path("bilingual_dict"), spec.resolve_path("gen_dict"), postgen);
}

void RbmtResources::validate() const {
    for (const auto& [tag, p] : tag_model)
        if (!std::isfinite(p) || p <= 0)
            throw ResourceError("tag model: probability for tag '" + tag +
                                "' must be finite and positive");

    // Every bilingual target must be generatable: no dead-ends past transfer.
    for (const auto& [source, target] : bilingual)
        if (!gen.count(key(target.lemma, target.tags)))
            throw ResourceError("generation dead-end: bilingual entry '" + source +
                                "' maps to '" + key(target.lemma, target.tags) +
                                "' which has no generation entry");

    // Competing analyses must be scorable against the tag model.
    for (const auto& [surface, analyses] : morph) {
        if (analyses.size() < 2) continue;
        for (const auto& a : analyses)
            if (!tag_model.count(a.tags.front()))
                throw ResourceError("ambiguous entry '" + surface + "' has analysis tag '" +
                                    a.tags.front() + "' missing from the tag model");
    }

    for (const auto& rule : postgen)
        if (rule.left.empty() || rule.right.empty() || rule.replacement.empty())
            throw ResourceError("post-generation rules need a left word, a right word and a "
                                "non-empty replacement");
}

std::vector<LexicalUnit> rbmt_analyze(const std::string& word, const RbmtResources& res) {
    auto it = res.morph.find(word);
    if (it == res.morph.end()) {
        LexicalUnit unknown;
        unknown.surface = word;
        unknown.unknown = true;
        return {unknown};
    }
    std::vector<LexicalUnit> out = it->second;
    for (auto& unit : out) unit.surface = word;
    return out;
}

std::vector<LexicalUnit> rbmt_tag(const std::vector<std::vector<LexicalUnit>>& analyses,
                                  const RbmtResources& res) {
    std::vector<LexicalUnit> out;
    out.reserve(analyses.size());
    for (const auto& candidates : analyses) {
        if (candidates.empty())
            throw std::invalid_argument("rbmt_tag: a word with no analyses");
        if (candidates.size() == 1) {  // no ambiguity, model irrelevant
            out.push_back(candidates.front());
            continue;
        }
        const LexicalUnit* best = nullptr;
        double best_p = -1.0;
        for (const auto& unit : candidates) {
            auto it = res.tag_model.find(unit.tags.front());
            if (it == res.tag_model.end())
                throw CoverageError(CoverageError::Stage::TagModel, unit.tags.front());
            if (it->second > best_p) {  // strict: ties keep the earlier analysis
                best_p = it->second;
                best = &unit;
            }
        }
        out.push_back(*best);
    }
    return out;
}

LexicalUnit rbmt_transfer(const LexicalUnit& unit, const RbmtResources& res) {
    if (unit.unknown) return unit;
    auto it = res.bilingual.find(RbmtResources::key(unit.lemma, unit.tags));
    if (it == res.bilingual.end())
        throw CoverageError(CoverageError::Stage::Transfer,
                            RbmtResources::key(unit.lemma, unit.tags));
    LexicalUnit target = it->second;
    target.surface = unit.surface;
    return target;
}

std::string rbmt_generate(const LexicalUnit& unit, const RbmtResources& res) {
    if (unit.unknown) return "*" + unit.surface;
    auto it = res.gen.find(RbmtResources::key(unit.lemma, unit.tags));
    if (it == res.gen.end())
        throw CoverageError(CoverageError::Stage::Generation,
                            RbmtResources::key(unit.lemma, unit.tags));
    return it->second;
}

std::vector<std::string> rbmt_postgenerate(std::vector<std::string> words,
                                           const RbmtResources& res) {
    for (const auto& rule : res.postgen) {
        std::vector<std::string> next;
        next.reserve(words.size());
        std::size_t i = 0;
        while (i < words.size()) {
            if (i + 1 < words.size() && words[i] == rule.left && words[i + 1] == rule.right) {
                next.insert(next.end(), rule.replacement.begin(), rule.replacement.end());
                i += 2;
            } else {
                next.push_back(std::move(words[i]));
                ++i;
            }
        }
        words = std::move(next);
    }
    return words;
}

std::string rbmt_translate_text(const std::string& text, const RbmtResources& res) {
    std::vector<std::vector<LexicalUnit>> analyses;
    for (const auto& word : split_words(text)) analyses.push_back(rbmt_analyze(word, res));

    std::vector<std::string> surfaces;
    surfaces.reserve(analyses.size());
    for (const auto& unit : rbmt_tag(analyses, res))
        surfaces.push_back(rbmt_generate(rbmt_transfer(unit, res), res));

    return join(rbmt_postgenerate(std::move(surfaces), res), " ");
}

namespace {

class RbmtEngine final : public Engine {
public:
    RbmtEngine(RbmtResources resources, EngineSpec spec, CostModel cost)
        : Engine(std::move(spec), std::move(cost)), resources_(std::move(resources)) {}

protected:
    Translation translate_impl(const Sentence& s) override {
        Translation t;
        t.sentence = make_sentence(s.index, rbmt_translate_text(s.text, resources_));
        t.cost_seconds = static_cast<double>(s.word_count) * cost_.per_word_seconds;
        return t;
    }

private:
    RbmtResources resources_;
};

}  // namespace

std::unique_ptr<Engine> make_rbmt_engine(RbmtResources resources, EngineSpec spec,
                                         CostModel cost) {
    resources.validate();
    return std::make_unique<RbmtEngine>(std::move(resources), std::move(spec), std::move(cost));
}

}  // namespace mrmt
