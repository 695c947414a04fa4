#include "raresplit/transport.hpp"

#include <boost/asio.hpp>

#include <condition_variable>
#include <deque>
#include <mutex>

namespace raresplit {

namespace {

struct Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> frames;
  bool closed = false;

  void push(std::vector<std::uint8_t> f) {
    {
      std::lock_guard lock(mu);
      if (closed) throw ChannelClosed("loopback peer closed");
      frames.push_back(std::move(f));
    }
    cv.notify_one();
  }
  std::vector<std::uint8_t> pop() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !frames.empty() || closed; });
    if (frames.empty()) throw ChannelClosed("loopback channel closed");
    auto f = std::move(frames.front());
    frames.pop_front();
    return f;
  }
  void close() {
    {
      std::lock_guard lock(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class LoopbackChannel : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<Queue> in, std::shared_ptr<Queue> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~LoopbackChannel() override { close(); }
  void close() override {
    in_->close();
    out_->close();
  }

 protected:
  void write_frame(const std::vector<std::uint8_t>& frame) override { out_->push(frame); }
  std::vector<std::uint8_t> receive_frame() override { return in_->pop(); }

 private:
  std::shared_ptr<Queue> in_, out_;
};

using boost::asio::ip::tcp;

class TcpChannel : public Channel {
 public:
  TcpChannel(std::shared_ptr<boost::asio::io_context> io, tcp::socket socket) : io_(std::move(io)), socket_(std::move(socket)) {
    socket_.set_option(tcp::no_delay(true));
  }
  ~TcpChannel() override { close(); }
  void close() override {
    boost::system::error_code ec;
    if (socket_.is_open()) {
      socket_.shutdown(tcp::socket::shutdown_both, ec);
      socket_.close(ec);
    }
  }

 protected:
  void write_frame(const std::vector<std::uint8_t>& frame) override {
    boost::system::error_code ec;
    boost::asio::write(socket_, boost::asio::buffer(frame), ec);
    if (ec) throw ChannelClosed("send failed: " + ec.message());
  }
  std::vector<std::uint8_t> receive_frame() override {
    std::vector<std::uint8_t> frame(wire::kHeaderBytes);
    read_exact(frame.data(), frame.size());
    const wire::Header h = wire::decode_header(frame.data());
    frame.resize(wire::kHeaderBytes + h.length);
    read_exact(frame.data() + wire::kHeaderBytes, h.length);
    return frame;
  }

 private:
  void read_exact(std::uint8_t* p, std::size_t n) {
    boost::system::error_code ec;
    boost::asio::read(socket_, boost::asio::buffer(p, n), ec);
    if (ec) throw ChannelClosed("connection closed: " + ec.message());
  }
  std::shared_ptr<boost::asio::io_context> io_;
  tcp::socket socket_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> loopback_pair() {
  auto a = std::make_shared<Queue>();
  auto b = std::make_shared<Queue>();
  return {std::make_unique<LoopbackChannel>(a, b), std::make_unique<LoopbackChannel>(b, a)};
}

std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port) {
  auto io = std::make_shared<boost::asio::io_context>();
  tcp::resolver resolver(*io);
  tcp::socket socket(*io);
  boost::asio::connect(socket, resolver.resolve(host, std::to_string(port)));
  return std::make_unique<TcpChannel>(io, std::move(socket));
}

struct TcpListener::Impl {
  std::shared_ptr<boost::asio::io_context> io = std::make_shared<boost::asio::io_context>();
  tcp::acceptor acceptor{*io};
};

TcpListener::TcpListener(std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  const tcp::endpoint ep(tcp::v4(), port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
}

TcpListener::~TcpListener() = default;

std::uint16_t TcpListener::port() const { return impl_->acceptor.local_endpoint().port(); }

std::unique_ptr<Channel> TcpListener::accept() {
  tcp::socket socket(*impl_->io);
  impl_->acceptor.accept(socket);
  return std::make_unique<TcpChannel>(impl_->io, std::move(socket));
}

}  // namespace raresplit
