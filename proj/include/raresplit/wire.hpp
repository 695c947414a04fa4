#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "raresplit/bytes.hpp"
#include "raresplit/rational.hpp"

namespace raresplit::wire {

inline constexpr std::array<std::uint8_t, 4> kMagic{'R', 'S', 'P', 'L'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 4;
inline constexpr std::uint32_t kMaxPayload = 1u << 30;

enum class Tag : std::uint8_t {
  Init = 1,
  RunToLevel = 2,
  LevelReport = 3,
  StateRequest = 4,
  StateTransfer = 5,
  ReplaceSimulation = 6,
  Final = 7,
  Error = 8,
};

std::string_view to_string(Tag t);

/// Source texts and run parameters; the client compiles them itself.
struct Init {
  std::string model;
  std::string formula;
  std::string score;
  Score threshold;
  std::vector<Score> levels;
  std::uint64_t n = 0;
  std::uint64_t client = 0;
  std::uint64_t seed = 0;
  std::uint32_t workers = 1;
  friend bool operator==(const Init&, const Init&) = default;
};

struct RunToLevel {
  std::uint32_t index = 0;
  Score level;
  friend bool operator==(const RunToLevel&, const RunToLevel&) = default;
};

struct LevelReport {
  std::uint32_t index = 0;
  std::uint64_t reached = 0;  // n_i
  std::uint64_t live = 0;     // simulations owned by the client
  std::uint64_t steps = 0;    // cumulative model transitions
  friend bool operator==(const LevelReport&, const LevelReport&) = default;
};

struct StateRequest {
  std::uint64_t count = 0;
  friend bool operator==(const StateRequest&, const StateRequest&) = default;
};

/// Encoded product states, each in the layout of Simulator::encode.
struct StateTransfer {
  std::vector<std::vector<std::uint8_t>> states;
  friend bool operator==(const StateTransfer&, const StateTransfer&) = default;
};

struct Replacement {
  std::uint64_t simulation = 0;
  std::vector<std::uint8_t> state;
  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct ReplaceSimulation {
  std::vector<Replacement> entries;
  friend bool operator==(const ReplaceSimulation&, const ReplaceSimulation&) = default;
};

struct Final {
  std::uint8_t status = 0;  // 0 ok, 1 extinct, 2 aborted
  double gamma_hat = 0.0;
  friend bool operator==(const Final& a, const Final& b) {
    return a.status == b.status && std::bit_cast<std::uint64_t>(a.gamma_hat) == std::bit_cast<std::uint64_t>(b.gamma_hat);
  }
};

struct Error {
  std::uint16_t code = 0;
  std::string message;
  friend bool operator==(const Error&, const Error&) = default;
};

enum ErrorCode : std::uint16_t { kMalformed = 1, kVersionMismatch = 2, kUnexpected = 3, kPrecondition = 4, kCompile = 5, kInternal = 6 };

using Message = std::variant<Init, RunToLevel, LevelReport, StateRequest, StateTransfer, ReplaceSimulation, Final, Error>;

Tag tag_of(const Message& m);

/// Thrown on any malformed frame or payload; carries the protocol error code.
class ProtocolError : public DecodeError {
 public:
  ProtocolError(std::uint16_t code, const std::string& msg) : DecodeError(msg), code_(code) {}
  std::uint16_t code() const { return code_; }

 private:
  std::uint16_t code_;
};

std::vector<std::uint8_t> encode_payload(const Message& m);
Message decode_payload(Tag tag, const std::uint8_t* data, std::size_t size);

/// Header (magic, version u16, tag u8, payload length u32) followed by the payload.
std::vector<std::uint8_t> encode(const Message& m);
Message decode(const std::vector<std::uint8_t>& frame);

struct Header {
  Tag tag;
  std::uint32_t length;
};

/// Validates magic, version and tag of an 11-byte header.
Header decode_header(const std::uint8_t* data);

}  // namespace raresplit::wire
