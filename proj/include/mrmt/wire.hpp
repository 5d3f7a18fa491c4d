#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mrmt {

class TcpStream;

// Coordinator <-> worker messages. On the wire each frame is a 4-byte
// big-endian payload length followed by a UTF-8 JSON object.
enum class FrameType { Hello, Translate, Result, Error, Ping, Pong, Shutdown };

std::string to_string(FrameType type);
FrameType frame_type_from_string(std::string_view name);

inline constexpr std::size_t kMaxFramePayload = 64ull * 1024 * 1024;  // 64 MiB
inline constexpr int kProtocolVersion = 1;

struct WireFrame {
    FrameType type = FrameType::Ping;
    nlohmann::json body;  // full payload object, including "type"

    bool operator==(const WireFrame& other) const {
        return type == other.type && body == other.body;
    }
};

// Length prefix + serialized payload. Throws ProtocolError when the payload
// exceeds kMaxFramePayload.
std::string encode_frame(const WireFrame& frame);

// Inverse of encode_frame over a complete buffer. The declared length is
// validated before any payload is touched. Throws FramingError on truncation
// and ProtocolError on oversize/unknown/malformed payloads.
WireFrame decode_frame(std::string_view bytes);

// Stream variants. read_frame returns nullopt on a clean close at a frame
// boundary.
void write_frame(TcpStream& stream, const WireFrame& frame);
std::optional<WireFrame> read_frame(TcpStream& stream);

WireFrame make_hello_client();
WireFrame make_hello_server(const std::string& engine_kind, const std::string& architecture);
WireFrame make_translate(const std::string& job_id, std::size_t shard_id,
                         const std::vector<std::string>& sentences);
WireFrame make_result(const std::string& job_id, std::size_t shard_id,
                      const std::vector<std::string>& translations, double cost_seconds,
                      std::uint64_t arrival_seq, std::uint64_t service_seq);
WireFrame make_error(std::int64_t shard_id, const std::string& message, bool retryable = false);
WireFrame make_ping();
WireFrame make_pong();
WireFrame make_shutdown();

// Typed field access with validation (throws ProtocolError on missing or
// mistyped fields).
std::string frame_job_id(const WireFrame& frame);
std::size_t frame_shard_id(const WireFrame& frame);
std::vector<std::string> frame_sentences(const WireFrame& frame);
std::vector<std::string> frame_translations(const WireFrame& frame);
double frame_cost_seconds(const WireFrame& frame);
std::string frame_error_message(const WireFrame& frame);
bool frame_error_retryable(const WireFrame& frame);

}  // namespace mrmt
