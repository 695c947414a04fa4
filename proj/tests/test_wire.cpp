#include <thread>

#include "doctest.h"
#include "raresplit/transport.hpp"

using namespace raresplit;
using namespace raresplit::wire;

namespace {

std::vector<Message> samples() {
  return {Init{"x:[0..1];", "true", "x", Score(3, 2), {Score(1), Score(3, 2)}, 10, 2, 99, 4},
          RunToLevel{1, Score(-7)},
          LevelReport{1, 3, 10, 12345},
          StateRequest{5},
          StateTransfer{{{1, 2, 3}, {}}},
          ReplaceSimulation{{{4, {9, 9}}, {7, {}}}},
          Final{1, 0.125},
          Error{kPrecondition, "no successes"}};
}

}  // namespace

TEST_CASE("every message survives a frame round trip") {
  for (const auto& m : samples()) {
    auto frame = encode(m);
    CHECK(frame.size() == kHeaderBytes + encode_payload(m).size());
    CHECK(decode(frame) == m);
  }
}

TEST_CASE("malformed frames are rejected") {
  auto frame = encode(StateRequest{3});
  auto bad_magic = frame;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode(bad_magic), ProtocolError);
  auto bad_version = frame;
  bad_version[4] = 9;
  try {
    decode(bad_version);
    FAIL("expected a version error");
  } catch (const ProtocolError& e) {
    CHECK(e.code() == kVersionMismatch);
  }
  auto bad_tag = frame;
  bad_tag[6] = 0;
  CHECK_THROWS_AS(decode(bad_tag), ProtocolError);
  auto truncated = frame;
  truncated.pop_back();
  CHECK_THROWS_AS(decode(truncated), DecodeError);
  auto trailing = frame;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode(trailing), DecodeError);

  ByteWriter w;
  w.u32(0);
  w.i64(1);
  w.u64(0);  // zero denominator
  CHECK_THROWS_AS(decode_payload(Tag::RunToLevel, w.take().data(), 20), DecodeError);
}

TEST_CASE("loopback and tcp channels carry frames") {
  auto [a, b] = loopback_pair();
  a->send(StateRequest{2});
  CHECK(b->receive() == Message(StateRequest{2}));
  CHECK(a->frames_sent() == 1);
  a->close();
  CHECK_THROWS_AS(b->receive(), ChannelClosed);

  TcpListener listener(0);
  std::thread t([&] {
    auto c = tcp_connect("127.0.0.1", listener.port());
    c->send(Final{0, 0.5});
    CHECK(c->receive() == Message(Error{kInternal, "bye"}));
  });
  auto server = listener.accept();
  CHECK(server->receive() == Message(Final{0, 0.5}));
  server->send(Error{kInternal, "bye"});
  t.join();
}
