#include "mrmt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mrmt/error.hpp"
#include "mrmt/strutil.hpp"

namespace mrmt {

Sentence make_sentence(std::size_t index, std::string text) {
    Sentence s;
    s.index = index;
    s.word_count = count_words(text);
    s.text = std::move(text);
    return s;
}

std::size_t ShardingManifest::total_sentences() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.sentence_count;
    return n;
}

std::string ShardingManifest::serialize() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries)
        rows.push_back({e.shard_id, e.first_index, e.sentence_count});
    return rows.dump();
}

ShardingManifest ShardingManifest::deserialize(std::string_view text) {
    nlohmann::json rows = nlohmann::json::parse(text, nullptr, false);
    if (rows.is_discarded() || !rows.is_array())
        throw ResourceError("manifest must be a JSON array of triples");
    ShardingManifest manifest;
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != 3 || !row[0].is_number_unsigned() ||
            !row[1].is_number_unsigned() || !row[2].is_number_unsigned())
            throw ResourceError("manifest rows are [shard_id, first_index, sentence_count]");
        manifest.entries.push_back({row[0].get<std::size_t>(), row[1].get<std::size_t>(),
                                    row[2].get<std::size_t>()});
    }
    return manifest;
}

std::size_t count_words(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

std::optional<std::size_t> find_invalid_utf8(std::string_view bytes) {
    const std::size_t n = bytes.size();
    std::size_t i = 0;
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(bytes[i]);
        if (b0 < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = 0;
        if ((b0 & 0xE0) == 0xC0) len = 2;
        else if ((b0 & 0xF0) == 0xE0) len = 3;
        else if ((b0 & 0xF8) == 0xF0) len = 4;
        else return i;
        if (i + len > n) return i;

        unsigned cp = b0 & (0x7F >> len);
        for (std::size_t k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(bytes[i + k]);
            if ((bk & 0xC0) != 0x80) return i;
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (len == 2 && cp < 0x80) return i;                           // overlong
        if (len == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) return i;
        if (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) return i;
        i += len;
    }
    return std::nullopt;
}

Document segment_sentences(std::string_view raw_text) {
    if (auto bad = find_invalid_utf8(raw_text)) throw Utf8Error(*bad);

    Document doc;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= raw_text.size(); ++i) {
        if (i != raw_text.size() && raw_text[i] != '\n') continue;
        if (i == raw_text.size() && start == i) break;  // no dangling empty line
        std::string_view line = raw_text.substr(start, i - start);
        start = i + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        doc.sentences.push_back(make_sentence(doc.sentences.size(), std::string(line)));
        doc.total_words += doc.sentences.back().word_count;
    }
    return doc;
}

Document generate_artificial(std::size_t sentence_count, std::string_view base_sentence) {
    if (sentence_count == 0)
        throw std::invalid_argument("generate_artificial: sentence_count must be positive");
    Sentence base = make_sentence(0, std::string(trim(base_sentence)));
    if (base.word_count == 0)
        throw std::invalid_argument("generate_artificial: base sentence is empty");

    Document doc;
    doc.sentences.reserve(sentence_count);
    for (std::size_t i = 0; i < sentence_count; ++i) {
        base.index = i;
        doc.sentences.push_back(base);
    }
    doc.total_words = sentence_count * base.word_count;
    return doc;
}

const std::string& default_base_sentence() {
    static const std::string kBase =
        "la casa blanca tiene una puerta grande y el gato negro duerme en un patio "
        "verde cerca de la fuente";
    return kBase;
}

std::vector<Shard> make_shards(const Document& doc, std::size_t shard_size) {
    if (shard_size == 0) throw std::invalid_argument("make_shards: shard_size must be >= 1");

    std::vector<Shard> shards;
    const std::size_t n = doc.sentences.size();
    shards.reserve((n + shard_size - 1) / shard_size);
    for (std::size_t at = 0; at < n; at += shard_size) {
        Shard shard;
        shard.shard_id = shards.size();
        shard.first_index = at;
        const std::size_t end = std::min(at + shard_size, n);
        shard.sentences.assign(doc.sentences.begin() + static_cast<std::ptrdiff_t>(at),
                               doc.sentences.begin() + static_cast<std::ptrdiff_t>(end));
        for (const auto& s : shard.sentences) shard.word_count += s.word_count;
        shards.push_back(std::move(shard));
    }
    return shards;
}

ShardingManifest manifest_of(const std::vector<Shard>& shards) {
    ShardingManifest m;
    m.entries.reserve(shards.size());
    for (const auto& s : shards)
        m.entries.push_back({s.shard_id, s.first_index, s.sentences.size()});
    return m;
}

Document reassemble(const std::vector<TranslatedShard>& parts, const ShardingManifest& manifest) {
    std::map<std::size_t, const TranslatedShard*> by_id;
    for (const auto& part : parts) {
        auto [it, inserted] = by_id.emplace(part.shard_id, &part);
        if (!inserted) {
            if (it->second->texts != part.texts)
                throw IntegrityError("conflicting duplicate results for shard " +
                                     std::to_string(part.shard_id));
            // exact duplicate: first result already accepted
        }
    }

    std::vector<std::size_t> missing;
    for (const auto& entry : manifest.entries)
        if (!by_id.count(entry.shard_id)) missing.push_back(entry.shard_id);
    if (!missing.empty()) throw IncompleteJobError(std::move(missing));

    if (by_id.size() > manifest.entries.size())
        throw IntegrityError("results carry shard ids outside the manifest");

    Document doc;
    doc.sentences.reserve(manifest.total_sentences());
    for (const auto& entry : manifest.entries) {
        const TranslatedShard& part = *by_id.at(entry.shard_id);
        if (part.texts.size() != entry.sentence_count)
            throw IntegrityError("shard " + std::to_string(entry.shard_id) + " returned " +
                                 std::to_string(part.texts.size()) + " sentences, manifest says " +
                                 std::to_string(entry.sentence_count));
        for (std::size_t i = 0; i < part.texts.size(); ++i) {
            Sentence s = make_sentence(entry.first_index + i, part.texts[i]);
            doc.total_words += s.word_count;
            doc.sentences.push_back(std::move(s));
        }
    }
    return doc;
}

std::string to_text(const Document& doc) {
    std::string out;
    for (const auto& s : doc.sentences) {
        out += s.text;
        out += '\n';
    }
    return out;
}

Document read_document_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResourceError("cannot open document file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return segment_sentences(buf.str());
}

void write_document_file(const Document& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot open output file: " + path);
    out << to_text(doc);
    if (!out) throw ResourceError("write failed: " + path);
}

}  // namespace mrmt
