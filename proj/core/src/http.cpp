#include <cstdio>
#include <deque>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "aam/error.hpp"
#include "aam/service.hpp"

namespace aam {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket sock, std::shared_ptr<LiveState> live) : ws_(std::move(sock)), live_(std::move(live)) {}

  ~WsSession() {
    if (!sub_) return;
    sub_->set_notify({});
    live_->unsubscribe(sub_);
  }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    sub_ = live_->subscribe();
    if (sub_->initial) out_.push_back(snapshot_json(*sub_->initial));
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto exec = ws_.get_executor();
    sub_->set_notify([weak, exec] {
      asio::post(exec, [weak] {
        if (auto self = weak.lock()) self->pump();
      });
    });
    read();
    pump();
  }

  void read() {
    ws_.async_read(in_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->in_.consume(self->in_.size());
      self->read();
    });
  }

  // Only one write is outstanding; events stay in the subscription (where
  // they coalesce) until the socket is ready for them.
  void pump() {
    if (writing_ || closed_) return;
    if (out_.empty()) {
      if (auto e = sub_->try_pop()) out_.push_back(event_json(*e));
      else return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) {
        self->close();
        return;
      }
      self->out_.pop_front();
      self->pump();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    if (!sub_) return;
    sub_->set_notify({});
    live_->unsubscribe(sub_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<LiveState> live_;
  std::shared_ptr<Subscription> sub_;
  beast::flat_buffer in_;
  std::deque<std::string> out_;
  bool writing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket sock, std::shared_ptr<ServiceApi> api, std::shared_ptr<LiveState> live,
              asio::thread_pool& pool)
      : stream_(std::move(sock)), api_(std::move(api)), live_(std::move(live)), pool_(pool) {}

  void run() { read(); }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        beast::error_code ignore;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignore);
        return;
      }
      self->on_request();
    });
  }

  void on_request() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/api/stream") {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), live_)->run(std::move(req_));
        return;
      }
      respond({404, R"({"error":"not_found"})"});
      return;
    }
    const std::string method(req_.method_string());
    const std::string target(req_.target());
    if (req_.method() == http::verb::post) {
      // model solves run off the io thread
      asio::post(pool_, [self = shared_from_this(), method, target, body = req_.body()] {
        HttpResponse r = self->api_->handle(method, target, body);
        asio::post(self->stream_.get_executor(), [self, r = std::move(r)] { self->respond(r); });
      });
      return;
    }
    respond(api_->handle(method, target, req_.body()));
  }

  void respond(const HttpResponse& r) {
    auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status), req_.version());
    res->set(http::field::server, "aam");
    res->set(http::field::content_type, "application/json");
    res->keep_alive(req_.keep_alive());
    res->body() = r.body;
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) {
        beast::error_code ignore;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignore);
        return;
      }
      self->read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
  std::shared_ptr<ServiceApi> api_;
  std::shared_ptr<LiveState> live_;
  asio::thread_pool& pool_;
};

}  // namespace

struct HttpServer::Impl {
  asio::io_context io{1};
  tcp::acceptor acceptor{io};
  asio::thread_pool pool;
  std::shared_ptr<ServiceApi> api;
  std::shared_ptr<LiveState> live;
  std::thread thread;

  explicit Impl(unsigned workers) : pool(std::max(workers, 1u)) {}

  void accept() {
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket sock) {
      if (ec) return;
      std::make_shared<HttpSession>(std::move(sock), api, live, pool)->run();
      accept();
    });
  }
};

HttpServer::HttpServer(std::shared_ptr<ServiceApi> api, std::shared_ptr<LiveState> live, const std::string& host,
                       std::uint16_t port, unsigned workers)
    : impl_(std::make_unique<Impl>(workers)) {
  impl_->api = std::move(api);
  impl_->live = std::move(live);
  try {
    const tcp::endpoint ep(asio::ip::make_address(host), port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw Error(Errc::BindFailure, host + ":" + std::to_string(port) + ": " + e.what());
  }
  impl_->accept();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HttpServer::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->io.stop();
  impl_->thread.join();
  impl_->pool.join();
}

}  // namespace aam
