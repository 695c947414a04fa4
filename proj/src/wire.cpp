#include "raresplit/wire.hpp"

#include <algorithm>

namespace raresplit::wire {

std::string_view to_string(Tag t) {
  switch (t) {
    case Tag::Init: return "Init";
    case Tag::RunToLevel: return "RunToLevel";
    case Tag::LevelReport: return "LevelReport";
    case Tag::StateRequest: return "StateRequest";
    case Tag::StateTransfer: return "StateTransfer";
    case Tag::ReplaceSimulation: return "ReplaceSimulation";
    case Tag::Final: return "Final";
    case Tag::Error: return "Error";
  }
  return "?";
}

Tag tag_of(const Message& m) { return static_cast<Tag>(m.index() + 1); }

namespace {

void put_score(ByteWriter& w, const Score& s) {
  w.i64(s.numerator());
  w.u64(s.denominator());
}

Score get_score(ByteReader& r) {
  const std::int64_t num = r.i64();
  const std::uint64_t den = r.u64();
  if (den == 0) throw ProtocolError(kMalformed, "score with zero denominator");
  const Score s(num, den);
  if (s.numerator() != num || s.denominator() != den) throw ProtocolError(kMalformed, "score not in lowest terms");
  return s;
}

struct Encoder {
  ByteWriter& w;
  void operator()(const Init& m) {
    w.str(m.model);
    w.str(m.formula);
    w.str(m.score);
    put_score(w, m.threshold);
    w.u32(static_cast<std::uint32_t>(m.levels.size()));
    for (const auto& l : m.levels) put_score(w, l);
    w.u64(m.n);
    w.u64(m.client);
    w.u64(m.seed);
    w.u32(m.workers);
  }
  void operator()(const RunToLevel& m) {
    w.u32(m.index);
    put_score(w, m.level);
  }
  void operator()(const LevelReport& m) {
    w.u32(m.index);
    w.u64(m.reached);
    w.u64(m.live);
    w.u64(m.steps);
  }
  void operator()(const StateRequest& m) { w.u64(m.count); }
  void operator()(const StateTransfer& m) {
    w.u32(static_cast<std::uint32_t>(m.states.size()));
    for (const auto& s : m.states) w.blob(s);
  }
  void operator()(const ReplaceSimulation& m) {
    w.u32(static_cast<std::uint32_t>(m.entries.size()));
    for (const auto& e : m.entries) {
      w.u64(e.simulation);
      w.blob(e.state);
    }
  }
  void operator()(const Final& m) {
    w.u8(m.status);
    w.f64(m.gamma_hat);
  }
  void operator()(const Error& m) {
    w.u16(m.code);
    w.str(m.message);
  }
};

Message decode_body(Tag tag, ByteReader& r) {
  switch (tag) {
    case Tag::Init: {
      Init m;
      m.model = r.str();
      m.formula = r.str();
      m.score = r.str();
      m.threshold = get_score(r);
      const std::size_t count = r.count(16);
      for (std::size_t i = 0; i < count; ++i) m.levels.push_back(get_score(r));
      m.n = r.u64();
      m.client = r.u64();
      m.seed = r.u64();
      m.workers = r.u32();
      return m;
    }
    case Tag::RunToLevel: {
      RunToLevel m;
      m.index = r.u32();
      m.level = get_score(r);
      return m;
    }
    case Tag::LevelReport: {
      LevelReport m;
      m.index = r.u32();
      m.reached = r.u64();
      m.live = r.u64();
      m.steps = r.u64();
      return m;
    }
    case Tag::StateRequest: return StateRequest{r.u64()};
    case Tag::StateTransfer: {
      StateTransfer m;
      const std::size_t count = r.count(4);
      for (std::size_t i = 0; i < count; ++i) m.states.push_back(r.blob());
      return m;
    }
    case Tag::ReplaceSimulation: {
      ReplaceSimulation m;
      const std::size_t count = r.count(12);
      for (std::size_t i = 0; i < count; ++i) {
        Replacement e;
        e.simulation = r.u64();
        e.state = r.blob();
        m.entries.push_back(std::move(e));
      }
      return m;
    }
    case Tag::Final: {
      Final m;
      m.status = r.u8();
      m.gamma_hat = r.f64();
      return m;
    }
    case Tag::Error: {
      Error m;
      m.code = r.u16();
      m.message = r.str();
      return m;
    }
  }
  throw ProtocolError(kMalformed, "unknown message tag");
}

}  // namespace

std::vector<std::uint8_t> encode_payload(const Message& m) {
  ByteWriter w;
  std::visit(Encoder{w}, m);
  return w.take();
}

Message decode_payload(Tag tag, const std::uint8_t* data, std::size_t size) {
  ByteReader r(data, size);
  try {
    Message m = decode_body(tag, r);
    r.expect_end();
    return m;
  } catch (const ProtocolError&) {
    throw;
  } catch (const DecodeError& e) {
    throw ProtocolError(kMalformed, std::string(to_string(tag)) + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode(const Message& m) {
  const auto payload = encode_payload(m);
  if (payload.size() > kMaxPayload) throw ProtocolError(kMalformed, "payload too large");
  ByteWriter w;
  w.raw(kMagic.data(), kMagic.size());
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(tag_of(m)));
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.raw(payload);
  return w.take();
}

Header decode_header(const std::uint8_t* data) {
  if (!std::equal(kMagic.begin(), kMagic.end(), data)) throw ProtocolError(kMalformed, "bad magic bytes");
  ByteReader r(data + 4, kHeaderBytes - 4);
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw ProtocolError(kVersionMismatch, "protocol version " + std::to_string(version) + ", expected " + std::to_string(kVersion));
  }
  const std::uint8_t tag = r.u8();
  if (tag < static_cast<std::uint8_t>(Tag::Init) || tag > static_cast<std::uint8_t>(Tag::Error)) {
    throw ProtocolError(kMalformed, "unknown message tag " + std::to_string(tag));
  }
  const std::uint32_t length = r.u32();
  if (length > kMaxPayload) throw ProtocolError(kMalformed, "payload too large");
  return Header{static_cast<Tag>(tag), length};
}

Message decode(const std::vector<std::uint8_t>& frame) {
  if (frame.size() < kHeaderBytes) throw ProtocolError(kMalformed, "truncated header");
  const Header h = decode_header(frame.data());
  if (frame.size() - kHeaderBytes != h.length) throw ProtocolError(kMalformed, "frame length does not match header");
  return decode_payload(h.tag, frame.data() + kHeaderBytes, h.length);
}

}  // namespace raresplit::wire
