#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "raresplit/wire.hpp"

namespace raresplit {

/// Bidirectional message channel. Every message is framed with wire::encode on
/// send and parsed with wire::decode on receive, whatever the carrier.
class Channel {
 public:
  virtual ~Channel() = default;
  void send(const wire::Message& m) { send_frame(wire::encode(m)); }
  wire::Message receive() { return wire::decode(receive_frame()); }
  virtual void close() = 0;

  std::uint64_t bytes_sent() const { return sent_; }
  std::uint64_t frames_sent() const { return frames_; }

 protected:
  virtual void write_frame(const std::vector<std::uint8_t>& frame) = 0;
  virtual std::vector<std::uint8_t> receive_frame() = 0;

 private:
  void send_frame(const std::vector<std::uint8_t>& frame) {
    sent_ += frame.size();
    ++frames_;
    write_frame(frame);
  }
  std::uint64_t sent_ = 0;
  std::uint64_t frames_ = 0;
};

class ChannelClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two connected in-process endpoints.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> loopback_pair();

/// Blocking TCP transport.
std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port);

class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port);
  ~TcpListener();
  std::uint16_t port() const;
  std::unique_ptr<Channel> accept();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace raresplit
