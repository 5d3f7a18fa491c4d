#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrmt {

// The unit of independent translation. `text` never contains line breaks;
// `word_count` is the number of whitespace-delimited tokens.
struct Sentence {
    std::size_t index = 0;
    std::string text;
    std::size_t word_count = 0;
};

Sentence make_sentence(std::size_t index, std::string text);

// Ordered source text. Sentence indices are exactly 0..size-1.
struct Document {
    std::vector<Sentence> sentences;
    std::size_t total_words = 0;

    std::size_t size() const { return sentences.size(); }
};

// Contiguous, index-tagged block of sentences; the map-phase work unit.
struct Shard {
    std::size_t shard_id = 0;
    std::size_t first_index = 0;
    std::vector<Sentence> sentences;
    std::size_t word_count = 0;
};

struct ManifestEntry {
    std::size_t shard_id = 0;
    std::size_t first_index = 0;
    std::size_t sentence_count = 0;
};

// Records how a document was split, so the reduce phase can check completeness
// and restore global sentence order.
struct ShardingManifest {
    std::vector<ManifestEntry> entries;

    std::size_t total_sentences() const;

    std::string serialize() const;  // JSON array of [shard_id, first_index, sentence_count]
    static ShardingManifest deserialize(std::string_view text);
};

// Translated sentences for one shard, as returned by a worker.
struct TranslatedShard {
    std::size_t shard_id = 0;
    std::vector<std::string> texts;
};

std::size_t count_words(std::string_view text);

// Byte offset of the first invalid UTF-8 sequence, or nullopt if valid.
std::optional<std::size_t> find_invalid_utf8(std::string_view bytes);

// One sentence per input line (LF convention, trailing CR stripped); empty
// lines are dropped. Throws Utf8Error on invalid input.
Document segment_sentences(std::string_view raw_text);

// `sentence_count` copies of `base_sentence`. Throws std::invalid_argument on
// a zero count or an empty base sentence.
Document generate_artificial(std::size_t sentence_count, std::string_view base_sentence);

// The stock 20-word test sentence; every word is covered by the bundled
// translation dictionaries.
const std::string& default_base_sentence();

// ceil(size/shard_size) shards, all of size shard_size except possibly the
// last. Concatenating the shards reproduces the document exactly.
std::vector<Shard> make_shards(const Document& doc, std::size_t shard_size);

ShardingManifest manifest_of(const std::vector<Shard>& shards);

// Order-preserving reduce. Parts may arrive in any order; exact duplicates are
// tolerated. Throws IncompleteJobError when shards are missing and
// IntegrityError on conflicting duplicates or count mismatches.
Document reassemble(const std::vector<TranslatedShard>& parts, const ShardingManifest& manifest);

std::string to_text(const Document& doc);
Document read_document_file(const std::string& path);
void write_document_file(const Document& doc, const std::string& path);

}  // namespace mrmt
