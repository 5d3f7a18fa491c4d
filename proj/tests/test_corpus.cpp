#include <doctest.h>

#include <algorithm>
#include <random>

#include "mrmt/corpus.hpp"
#include "mrmt/error.hpp"
#include "testutil.hpp"

using namespace mrmt;

TEST_SUITE("corpus") {

TEST_CASE("segment_sentences splits on newlines and drops empties") {
    Document doc = segment_sentences("hello world\nbye\n");
    REQUIRE(doc.size() == 2);
    CHECK(doc.sentences[0].text == "hello world");
    CHECK(doc.sentences[0].index == 0);
    CHECK(doc.sentences[0].word_count == 2);
    CHECK(doc.sentences[1].text == "bye");
    CHECK(doc.sentences[1].index == 1);
    CHECK(doc.sentences[1].word_count == 1);
    CHECK(doc.total_words == 3);

    Document empty = segment_sentences("");
    CHECK(empty.size() == 0);
    CHECK(empty.total_words == 0);

    Document blanks = segment_sentences("a b c\n\n\nd\n");
    REQUIRE(blanks.size() == 2);
    CHECK(blanks.total_words == 4);
    CHECK(blanks.sentences[1].text == "d");
}

TEST_CASE("segment_sentences handles missing trailing newline and CRLF") {
    Document doc = segment_sentences("uno\r\ndos");
    REQUIRE(doc.size() == 2);
    CHECK(doc.sentences[0].text == "uno");
    CHECK(doc.sentences[1].text == "dos");
}

TEST_CASE("segment_sentences reports the invalid byte offset") {
    std::string bad = "ok\n";
    bad += '\xFF';
    try {
        segment_sentences(bad);
        FAIL("expected Utf8Error");
    } catch (const Utf8Error& e) {
        CHECK(e.byte_offset == 3);
    }

    // Truncated multibyte sequence at the very end.
    std::string truncated = "ab";
    truncated += '\xC3';
    try {
        segment_sentences(truncated);
        FAIL("expected Utf8Error");
    } catch (const Utf8Error& e) {
        CHECK(e.byte_offset == 2);
    }

    // Valid multibyte text passes.
    CHECK(segment_sentences("a\xC3\xB1o nuevo\n").total_words == 2);
}

TEST_CASE("word counting ignores repeated whitespace") {
    CHECK(count_words("") == 0);
    CHECK(count_words("   ") == 0);
    CHECK(count_words("one") == 1);
    CHECK(count_words("  one   two\tthree ") == 3);
}

TEST_CASE("generate_artificial replicates the base sentence") {
    Document doc = generate_artificial(100, default_base_sentence());
    CHECK(doc.size() == 100);
    CHECK(doc.total_words == 2000);  // 20-word base sentence
    CHECK(doc.sentences[0].text == doc.sentences[99].text);
    CHECK(doc.sentences[99].index == 99);

    Document tiny = generate_artificial(1, "a b");
    CHECK(tiny.size() == 1);
    CHECK(tiny.total_words == 2);

    CHECK_THROWS_AS(generate_artificial(0, "a"), std::invalid_argument);
    CHECK_THROWS_AS(generate_artificial(3, "   "), std::invalid_argument);
}

TEST_CASE("generate_artificial covers the large geometry") {
    Document doc = generate_artificial(100'000, default_base_sentence());
    CHECK(doc.size() == 100'000);
    CHECK(doc.total_words == 2'000'000);
}

TEST_CASE("make_shards partitions exactly") {
    Document doc = generate_artificial(1500, "w1 w2 w3");

    auto shards = make_shards(doc, 1000);
    REQUIRE(shards.size() == 2);
    CHECK(shards[0].sentences.size() == 1000);
    CHECK(shards[1].sentences.size() == 500);
    CHECK(shards[0].shard_id == 0);
    CHECK(shards[1].first_index == 1000);
    CHECK(shards[1].sentences.front().index == 1000);

    auto exact = make_shards(generate_artificial(4000, "a b"), 1000);
    CHECK(exact.size() == 4);
    for (const auto& s : exact) CHECK(s.sentences.size() == 1000);

    CHECK(make_shards(Document{}, 5).empty());
    CHECK_THROWS_AS(make_shards(doc, 0), std::invalid_argument);
}

TEST_CASE("word conservation across any sharding") {
    std::mt19937 rng(7);
    for (int round = 0; round < 20; ++round) {
        Document doc = testutil::random_document(rng, 200);
        std::uniform_int_distribution<std::size_t> size_pick(1, 50);
        auto shards = make_shards(doc, size_pick(rng));
        std::size_t words = 0;
        for (const auto& s : shards) words += s.word_count;
        CHECK(words == doc.total_words);
    }
}

TEST_CASE("reassemble is order independent") {
    Document doc = segment_sentences("s0\ns1\ns2\ns3\ns4\n");
    auto shards = make_shards(doc, 2);
    auto manifest = manifest_of(shards);

    auto part_of = [&](std::size_t id) {
        TranslatedShard part{id, {}};
        for (const auto& s : shards[id].sentences) part.texts.push_back(s.text);
        return part;
    };

    Document in_order = reassemble({part_of(0), part_of(1), part_of(2)}, manifest);
    Document shuffled = reassemble({part_of(2), part_of(0), part_of(1)}, manifest);
    CHECK(to_text(in_order) == to_text(doc));
    CHECK(to_text(shuffled) == to_text(doc));
}

TEST_CASE("reassemble single shard is a pass-through") {
    Document doc = segment_sentences("a\nb\n");
    auto shards = make_shards(doc, 10);
    auto manifest = manifest_of(shards);
    Document out = reassemble({{0, {"a", "b"}}}, manifest);
    CHECK(to_text(out) == "a\nb\n");
}

TEST_CASE("reassemble reports missing and conflicting shards") {
    Document doc = segment_sentences("a\nb\nc\n");
    auto manifest = manifest_of(make_shards(doc, 1));

    try {
        reassemble({{0, {"a"}}, {2, {"c"}}}, manifest);
        FAIL("expected IncompleteJobError");
    } catch (const IncompleteJobError& e) {
        REQUIRE(e.missing_shards.size() == 1);
        CHECK(e.missing_shards[0] == 1);
    }

    // Identical duplicate is fine; conflicting duplicate is not.
    CHECK_NOTHROW(reassemble({{0, {"a"}}, {0, {"a"}}, {1, {"b"}}, {2, {"c"}}}, manifest));
    CHECK_THROWS_AS(reassemble({{0, {"a"}}, {0, {"A"}}, {1, {"b"}}, {2, {"c"}}}, manifest),
                    IntegrityError);

    // Wrong per-shard sentence count.
    CHECK_THROWS_AS(reassemble({{0, {"a", "x"}}, {1, {"b"}}, {2, {"c"}}}, manifest),
                    IntegrityError);
}

TEST_CASE("property: identity round-trip through sharding for random docs and sizes") {
    std::mt19937 rng(42);
    for (int round = 0; round < 50; ++round) {
        Document doc = testutil::random_document(rng, 120);
        std::uniform_int_distribution<std::size_t> size_pick(1, 150);
        const std::size_t shard_size = size_pick(rng);

        auto shards = make_shards(doc, shard_size);
        auto manifest = manifest_of(shards);
        std::vector<TranslatedShard> parts;
        for (const auto& s : shards) {
            TranslatedShard part{s.shard_id, {}};
            for (const auto& sentence : s.sentences) part.texts.push_back(sentence.text);
            parts.push_back(std::move(part));
        }
        std::shuffle(parts.begin(), parts.end(), rng);

        Document round_trip = reassemble(parts, manifest);
        REQUIRE(round_trip.size() == doc.size());
        CHECK(to_text(round_trip) == to_text(doc));
        CHECK(round_trip.total_words == doc.total_words);
    }
}

TEST_CASE("manifest serialization round trip") {
    auto manifest = manifest_of(make_shards(generate_artificial(25, "a b c"), 10));
    auto back = ShardingManifest::deserialize(manifest.serialize());
    REQUIRE(back.entries.size() == 3);
    CHECK(back.entries[2].shard_id == 2);
    CHECK(back.entries[2].first_index == 20);
    CHECK(back.entries[2].sentence_count == 5);
    CHECK(back.total_sentences() == 25);
    CHECK_THROWS_AS(ShardingManifest::deserialize("{\"no\":1}"), ResourceError);
}

TEST_CASE("document file round trip") {
    const auto dir = testutil::scratch_dir("corpus");
    Document doc = segment_sentences("uno dos\ntres\n");
    write_document_file(doc, (dir / "doc.txt").string());
    Document back = read_document_file((dir / "doc.txt").string());
    CHECK(to_text(back) == to_text(doc));
    CHECK_THROWS_AS(read_document_file((dir / "missing.txt").string()), ResourceError);
}

}  // TEST_SUITE
