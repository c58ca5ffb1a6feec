#pragma once

// WebSocket transport for SessionHost (Boost.Beast).
//
// Each connection owns one SessionHost and one fixed-rate tick timer; all of
// a connection's handlers run on its own strand, so session state is touched
// by exactly one loop. Outgoing frames go through a FIFO write queue.

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include "shared_dof/protocol.hpp"

namespace shared_dof {

namespace ws_detail {
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

inline bool offers_subprotocol(std::string_view header, std::string_view wanted) {
  std::size_t pos = 0;
  while (pos <= header.size()) {
    std::size_t comma = header.find(',', pos);
    if (comma == std::string_view::npos) comma = header.size();
    std::string_view token = header.substr(pos, comma - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token == wanted) return true;
    pos = comma + 1;
  }
  return false;
}

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, HostOptions options)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), host_(options) {}

  void start() {
    net::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->read_request(); });
  }

 private:
  void read_request() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  void on_request(beast::error_code ec) {
    if (ec) return;
    const auto offered = request_[http::field::sec_websocket_protocol];
    if (request_.target() != "/session" || !websocket::is_upgrade(request_) ||
        !offers_subprotocol({offered.data(), offered.size()}, kSubprotocol)) {
      reject();
      return;
    }
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
      res.set(http::field::sec_websocket_protocol, std::string(kSubprotocol));
    }));
    ws_.text(true);
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code accept_ec) {
      if (accept_ec) return;
      self->open_ = true;
      self->next_tick_ = std::chrono::steady_clock::now();
      self->schedule_tick();
      self->read_message();
    });
  }

  void reject() {
    auto res = std::make_shared<http::response<http::string_body>>(http::status::bad_request, request_.version());
    res->set(http::field::content_type, "text/plain");
    res->body() = "expected a WebSocket upgrade on /session with subprotocol shared-dof.v1\n";
    res->prepare_payload();
    res->keep_alive(false);
    http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  void read_message() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        self->timer_.cancel();
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->send(self->host_.handle(text));
      if (!self->host_.closed()) self->read_message();
    });
  }

  void schedule_tick() {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / host_.options().tick_rate_hz));
    next_tick_ += period;
    timer_.expires_at(next_tick_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || !self->open_) return;
      self->send(self->host_.tick());
      if (!self->host_.closed()) self->schedule_tick();
    });
  }

  void send(std::vector<std::string> messages) {
    for (auto& m : messages) queue_.push_back(std::move(m));
    if (!writing_) write_next();
  }

  void write_next() {
    if (queue_.empty()) {
      writing_ = false;
      if (host_.closed() && open_) close();
      return;
    }
    writing_ = true;
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->open_ = false;
        self->timer_.cancel();
        return;
      }
      self->queue_.pop_front();
      self->write_next();
    });
  }

  void close() {
    open_ = false;
    timer_.cancel();
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::deque<std::string> queue_;
  SessionHost host_;
  std::chrono::steady_clock::time_point next_tick_;
  bool writing_ = false;
  bool open_ = false;
};
}  // namespace ws_detail

/// Accepts connections on `endpoint` and serves one session per connection.
class WsServer {
 public:
  WsServer(boost::asio::io_context& ioc, const boost::asio::ip::tcp::endpoint& endpoint, HostOptions options = {})
      : ioc_(ioc), acceptor_(boost::asio::make_strand(ioc)), options_(options) {
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(boost::asio::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen(boost::asio::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() { accept(); }

  void stop() {
    boost::system::error_code ignored;
    acceptor_.close(ignored);
  }

 private:
  void accept() {
    acceptor_.async_accept(boost::asio::make_strand(ioc_),
                           [this](boost::system::error_code ec, boost::asio::ip::tcp::socket socket) {
                             if (ec == boost::asio::error::operation_aborted || !acceptor_.is_open()) return;
                             if (!ec) std::make_shared<ws_detail::Connection>(std::move(socket), options_)->start();
                             accept();
                           });
  }

  boost::asio::io_context& ioc_;
  boost::asio::ip::tcp::acceptor acceptor_;
  HostOptions options_;
};

}  // namespace shared_dof
