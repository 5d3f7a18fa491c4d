#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrmt {

// Base class for every error thrown by the library. Argument-validation
// failures use std::invalid_argument directly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid UTF-8 in an input document; carries the offset of the first bad byte.
class Utf8Error : public Error {
public:
    explicit Utf8Error(std::size_t byte_offset)
        : Error("invalid UTF-8 at byte offset " + std::to_string(byte_offset)),
          byte_offset(byte_offset) {}

    std::size_t byte_offset;
};

// Missing or malformed resource: dictionary files, engine spec files, CSV inputs.
class ResourceError : public Error {
public:
    using Error::Error;
};

// External command could not be started or never became ready.
class SpawnError : public Error {
public:
    using Error::Error;
};

// A lexical unit fell outside the loaded RBMT resources at a stage where
// silent pass-through is not allowed.
class CoverageError : public Error {
public:
    enum class Stage { TagModel, Transfer, Generation };

    CoverageError(Stage stage, const std::string& item)
        : Error(stage_name(stage) + std::string(" coverage error: ") + item),
          stage(stage),
          item(item) {}

    Stage stage;
    std::string item;

private:
    static const char* stage_name(Stage s) {
        switch (s) {
            case Stage::TagModel: return "tag model";
            case Stage::Transfer: return "transfer";
            case Stage::Generation: return "generation";
        }
        return "?";
    }
};

// Engine failed while translating one sentence; carries the sentence index.
class EngineError : public Error {
public:
    EngineError(std::size_t sentence_index, const std::string& detail)
        : Error("engine error at sentence " + std::to_string(sentence_index) + ": " + detail),
          sentence_index(sentence_index) {}

    std::size_t sentence_index;
};

// Semantically invalid frame: oversize length, unknown type, bad payload.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Byte-level framing problem: truncated header or payload.
class FramingError : public Error {
public:
    using Error::Error;
};

// Reduce phase is missing shards.
class IncompleteJobError : public Error {
public:
    explicit IncompleteJobError(std::vector<std::size_t> missing)
        : Error(describe(missing)), missing_shards(std::move(missing)) {}

    std::vector<std::size_t> missing_shards;

private:
    static std::string describe(const std::vector<std::size_t>& missing) {
        std::string s = "incomplete job, missing shard(s):";
        for (auto id : missing) s += " " + std::to_string(id);
        return s;
    }
};

// Conflicting duplicate results or manifest mismatches in the reduce phase.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// No worker in the pool could be reached.
class ConnectivityError : public Error {
public:
    using Error::Error;
};

// A job could not be completed (shard exceeded its retry budget, or the
// worker pool died under it).
class JobError : public Error {
public:
    using Error::Error;
};

// A throughput computation was asked of physically meaningless inputs.
class MeasurementError : public Error {
public:
    using Error::Error;
};

// Cost-model fitting failed: degenerate observations or a non-physical result.
class FitError : public Error {
public:
    enum class Kind { Degenerate, NonPhysical };

    FitError(Kind kind, const std::string& detail)
        : Error(detail), kind(kind) {}

    Kind kind;
};

}  // namespace mrmt
