#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>

#include "aam/error.hpp"
#include "aam/replay.hpp"

namespace aam {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

using Buffer = std::shared_ptr<const std::vector<std::uint8_t>>;

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket sock, std::size_t capacity, std::function<void(std::shared_ptr<Session>)> on_close)
      : sock_(std::move(sock)), capacity_(capacity), on_close_(std::move(on_close)) {}

  // io thread only
  void enqueue(Buffer msg, std::uint64_t& dropped) {
    if (closed_) return;
    if (queue_.size() >= capacity_) {
      // never drop the message currently being written
      if (writing_ && queue_.size() > 1) queue_.erase(queue_.begin() + 1);
      else if (!writing_) queue_.pop_front();
      else {
        ++dropped;
        return;
      }
      ++dropped;
    }
    queue_.push_back(std::move(msg));
    if (!writing_) write_next();
  }

  void finish() {
    finishing_ = true;
    if (!writing_ && queue_.empty()) close();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    boost::system::error_code ec;
    sock_.shutdown(tcp::socket::shutdown_both, ec);
    sock_.close(ec);
    on_close_(shared_from_this());
  }

  // Detects the peer going away while we have nothing to send.
  void watch() {
    auto self = shared_from_this();
    sock_.async_read_some(asio::buffer(scratch_), [self](boost::system::error_code ec, std::size_t) {
      if (ec) self->close();
      else self->watch();
    });
  }

 private:
  void write_next() {
    if (queue_.empty()) {
      writing_ = false;
      if (finishing_) close();
      return;
    }
    writing_ = true;
    auto self = shared_from_this();
    asio::async_write(sock_, asio::buffer(*queue_.front()), [self](boost::system::error_code ec, std::size_t) {
      if (ec) {
        std::fprintf(stderr, "stream client dropped: %s\n", ec.message().c_str());
        self->close();
        return;
      }
      self->queue_.pop_front();
      self->write_next();
    });
  }

  tcp::socket sock_;
  std::size_t capacity_;
  std::function<void(std::shared_ptr<Session>)> on_close_;
  std::deque<Buffer> queue_;
  std::array<char, 64> scratch_{};
  bool writing_ = false;
  bool finishing_ = false;
  bool closed_ = false;
};

}  // namespace

struct StreamServer::Impl {
  asio::io_context io;
  asio::executor_work_guard<asio::io_context::executor_type> guard{io.get_executor()};
  tcp::acceptor acceptor{io};
  std::size_t capacity;
  std::set<std::shared_ptr<Session>> sessions;  // io thread only
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  std::size_t clients = 0;
  std::uint64_t dropped = 0;  // io thread writes, guarded by mu for readers
  std::thread thread;

  void accept() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket sock) {
      if (ec) return;  // acceptor closed
      sock.set_option(tcp::no_delay(true));
      auto s = std::make_shared<Session>(std::move(sock), capacity, [this](std::shared_ptr<Session> s) {
        sessions.erase(s);
        std::lock_guard lk(mu);
        clients = sessions.size();
        cv.notify_all();
      });
      sessions.insert(s);
      s->watch();
      {
        std::lock_guard lk(mu);
        clients = sessions.size();
      }
      cv.notify_all();
      accept();
    });
  }
};

StreamServer::StreamServer(const std::string& host, std::uint16_t port, std::size_t queue_capacity)
    : impl_(std::make_unique<Impl>()) {
  impl_->capacity = std::max<std::size_t>(queue_capacity, 1);
  try {
    const tcp::endpoint ep(asio::ip::make_address(host), port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw Error(Errc::BindFailure, host + ":" + std::to_string(port) + ": " + e.what());
  }
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

StreamServer::~StreamServer() { stop(); }

std::uint16_t StreamServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void StreamServer::publish(const PhasorFrame& frame) {
  auto msg = std::make_shared<const std::vector<std::uint8_t>>(encode_message(frame));
  asio::post(impl_->io, [impl = impl_.get(), msg] {
    std::uint64_t dropped = 0;
    // copy: a failing write may remove the session during iteration
    auto sessions = impl->sessions;
    for (const auto& s : sessions) s->enqueue(msg, dropped);
    if (dropped) {
      std::lock_guard lk(impl->mu);
      impl->dropped += dropped;
    }
  });
}

std::size_t StreamServer::client_count() const {
  std::lock_guard lk(impl_->mu);
  return impl_->clients;
}

bool StreamServer::wait_for_clients(std::size_t n, std::chrono::milliseconds timeout) const {
  std::unique_lock lk(impl_->mu);
  return impl_->cv.wait_for(lk, timeout, [&] { return impl_->clients >= n; });
}

bool StreamServer::finish(std::chrono::milliseconds timeout) {
  asio::post(impl_->io, [impl = impl_.get()] {
    auto sessions = impl->sessions;
    for (const auto& s : sessions) s->finish();
  });
  std::unique_lock lk(impl_->mu);
  return impl_->cv.wait_for(lk, timeout, [&] { return impl_->clients == 0; });
}

void StreamServer::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  asio::post(impl_->io, [impl = impl_.get()] {
    boost::system::error_code ec;
    impl->acceptor.close(ec);
    auto sessions = impl->sessions;
    for (const auto& s : sessions) s->close();
  });
  impl_->guard.reset();
  impl_->thread.join();
}

std::uint64_t StreamServer::dropped() const {
  std::lock_guard lk(impl_->mu);
  return impl_->dropped;
}

StreamStats read_stream(const std::string& host, std::uint16_t port,
                        const std::function<void(const PhasorFrame&)>& on_frame,
                        std::chrono::milliseconds connect_timeout) {
  asio::io_context io;
  tcp::socket sock(io);
  const tcp::endpoint ep(asio::ip::make_address(host), port);
  const auto deadline = std::chrono::steady_clock::now() + connect_timeout;
  for (;;) {
    boost::system::error_code ec;
    sock.connect(ep, ec);
    if (!ec) break;
    sock.close();
    if (std::chrono::steady_clock::now() >= deadline)
      throw Error(Errc::Io, "cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }

  FrameDecoder decoder;
  std::vector<PhasorFrame> frames;
  std::array<std::uint8_t, 64 * 1024> buf;
  for (;;) {
    boost::system::error_code ec;
    const std::size_t n = sock.read_some(asio::buffer(buf), ec);
    if (n > 0) {
      frames.clear();
      decoder.push({buf.data(), n}, frames);
      for (const auto& f : frames) on_frame(f);
    }
    if (ec == asio::error::eof || ec == asio::error::connection_reset) break;
    if (ec) throw Error(Errc::Io, "stream read failed: " + ec.message());
  }
  return {decoder.decoded(), decoder.crc_errors(), decoder.malformed()};
}

}  // namespace aam
