#include "mrmt/wire.hpp"

#include "mrmt/error.hpp"
#include "mrmt/net.hpp"

namespace mrmt {

namespace {

using nlohmann::json;

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void write_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
}

WireFrame parse_payload(std::string_view payload) {
    json body = json::parse(payload, nullptr, false);
    if (body.is_discarded() || !body.is_object())
        throw ProtocolError("frame payload is not a JSON object");
    if (!body.contains("type") || !body["type"].is_string())
        throw ProtocolError("frame payload has no type field");
    WireFrame frame;
    frame.type = frame_type_from_string(body["type"].get<std::string>());
    frame.body = std::move(body);
    return frame;
}

const json& require_field(const WireFrame& frame, const char* name) {
    if (!frame.body.contains(name))
        throw ProtocolError(to_string(frame.type) + " frame missing field '" + name + "'");
    return frame.body.at(name);
}

std::vector<std::string> string_array(const WireFrame& frame, const char* name) {
    const json& field = require_field(frame, name);
    if (!field.is_array())
        throw ProtocolError(std::string("frame field '") + name + "' is not an array");
    std::vector<std::string> out;
    out.reserve(field.size());
    for (const auto& item : field) {
        if (!item.is_string())
            throw ProtocolError(std::string("frame field '") + name + "' holds a non-string");
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

std::string to_string(FrameType type) {
    switch (type) {
        case FrameType::Hello: return "HELLO";
        case FrameType::Translate: return "TRANSLATE";
        case FrameType::Result: return "RESULT";
        case FrameType::Error: return "ERROR";
        case FrameType::Ping: return "PING";
        case FrameType::Pong: return "PONG";
        case FrameType::Shutdown: return "SHUTDOWN";
    }
    return "?";
}

FrameType frame_type_from_string(std::string_view name) {
    if (name == "HELLO") return FrameType::Hello;
    if (name == "TRANSLATE") return FrameType::Translate;
    if (name == "RESULT") return FrameType::Result;
    if (name == "ERROR") return FrameType::Error;
    if (name == "PING") return FrameType::Ping;
    if (name == "PONG") return FrameType::Pong;
    if (name == "SHUTDOWN") return FrameType::Shutdown;
    throw ProtocolError("unknown frame type: " + std::string(name));
}

std::string encode_frame(const WireFrame& frame) {
    std::string payload = frame.body.dump();
    if (payload.size() > kMaxFramePayload)
        throw ProtocolError("frame payload of " + std::to_string(payload.size()) +
                            " bytes exceeds the 64 MiB limit");
    std::string out;
    out.reserve(4 + payload.size());
    write_be32(out, static_cast<std::uint32_t>(payload.size()));
    out += payload;
    return out;
}

WireFrame decode_frame(std::string_view bytes) {
    if (bytes.size() < 4) throw FramingError("frame shorter than its 4-byte length header");
    const auto length = read_be32(reinterpret_cast<const unsigned char*>(bytes.data()));
    if (length > kMaxFramePayload)
        throw ProtocolError("declared frame length " + std::to_string(length) +
                            " exceeds the 64 MiB limit");
    if (bytes.size() - 4 < length) throw FramingError("frame payload truncated");
    return parse_payload(bytes.substr(4, length));
}

void write_frame(TcpStream& stream, const WireFrame& frame) {
    stream.write_all(encode_frame(frame));
}

std::optional<WireFrame> read_frame(TcpStream& stream) {
    unsigned char header[4];
    const std::size_t got = stream.read_upto(header, 4);
    if (got == 0) return std::nullopt;  // clean close at frame boundary
    if (got < 4) throw FramingError("connection closed inside a frame header");

    const auto length = read_be32(header);
    if (length > kMaxFramePayload)
        throw ProtocolError("declared frame length " + std::to_string(length) +
                            " exceeds the 64 MiB limit");
    std::string payload(length, '\0');
    if (stream.read_upto(payload.data(), length) < length)
        throw FramingError("connection closed inside a frame payload");
    return parse_payload(payload);
}

WireFrame make_hello_client() {
    WireFrame f;
    f.type = FrameType::Hello;
    f.body = {{"type", "HELLO"}, {"protocol_version", kProtocolVersion}};
    return f;
}

WireFrame make_hello_server(const std::string& engine_kind, const std::string& architecture) {
    WireFrame f;
    f.type = FrameType::Hello;
    f.body = {{"type", "HELLO"},
              {"protocol_version", kProtocolVersion},
              {"engine_kind", engine_kind},
              {"architecture", architecture}};
    return f;
}

WireFrame make_translate(const std::string& job_id, std::size_t shard_id,
                         const std::vector<std::string>& sentences) {
    WireFrame f;
    f.type = FrameType::Translate;
    f.body = {{"type", "TRANSLATE"},
              {"job_id", job_id},
              {"shard_id", shard_id},
              {"sentences", sentences}};
    return f;
}

WireFrame make_result(const std::string& job_id, std::size_t shard_id,
                      const std::vector<std::string>& translations, double cost_seconds,
                      std::uint64_t arrival_seq, std::uint64_t service_seq) {
    WireFrame f;
    f.type = FrameType::Result;
    f.body = {{"type", "RESULT"},         {"job_id", job_id},
              {"shard_id", shard_id},     {"translations", translations},
              {"cost_seconds", cost_seconds}, {"arrival_seq", arrival_seq},
              {"service_seq", service_seq}};
    return f;
}

WireFrame make_error(std::int64_t shard_id, const std::string& message, bool retryable) {
    WireFrame f;
    f.type = FrameType::Error;
    f.body = {{"type", "ERROR"},
              {"shard_id", shard_id},
              {"message", message},
              {"retryable", retryable}};
    return f;
}

WireFrame make_ping() {
    return {FrameType::Ping, {{"type", "PING"}}};
}

WireFrame make_pong() {
    return {FrameType::Pong, {{"type", "PONG"}}};
}

WireFrame make_shutdown() {
    return {FrameType::Shutdown, {{"type", "SHUTDOWN"}}};
}

std::string frame_job_id(const WireFrame& frame) {
    const json& field = require_field(frame, "job_id");
    if (!field.is_string()) throw ProtocolError("job_id is not a string");
    return field.get<std::string>();
}

std::size_t frame_shard_id(const WireFrame& frame) {
    const json& field = require_field(frame, "shard_id");
    if (!field.is_number_integer() || field.get<std::int64_t>() < 0)
        throw ProtocolError("shard_id is not a non-negative integer");
    return field.get<std::size_t>();
}

std::vector<std::string> frame_sentences(const WireFrame& frame) {
    return string_array(frame, "sentences");
}

std::vector<std::string> frame_translations(const WireFrame& frame) {
    return string_array(frame, "translations");
}

double frame_cost_seconds(const WireFrame& frame) {
    const json& field = require_field(frame, "cost_seconds");
    if (!field.is_number()) throw ProtocolError("cost_seconds is not a number");
    return field.get<double>();
}

std::string frame_error_message(const WireFrame& frame) {
    const json& field = require_field(frame, "message");
    if (!field.is_string()) throw ProtocolError("message is not a string");
    return field.get<std::string>();
}

bool frame_error_retryable(const WireFrame& frame) {
    return frame.body.value("retryable", false);
}

}  // namespace mrmt
