#pragma once

// WebSocket front end of the session engine. Everything runs on one
// io_context thread: the acceptor, the caretaker reader (which only queues
// messages) and the tick loop (which alone mutates the engine). The first
// client to connect becomes the caretaker and starts the clock; later
// clients are told the session is occupied and disconnected. When the
// session ends the trace is written through trace-io.

#include <chrono>
#include <csignal>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "hpa/session.hpp"
#include "hpa/trace_io.hpp"

namespace hpa {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  SessionConfig config{};
  std::filesystem::path trace_out = "session_trace.jsonl";
  // Wall-clock period between ticks; zero means 1 / tick_hz. Shorter periods
  // run sessions faster than real time.
  std::chrono::nanoseconds tick_interval{0};
  // End the session (and write the trace) on SIGINT/SIGTERM.
  bool handle_signals = false;
};

class SessionServer {
 public:
  using tcp = boost::asio::ip::tcp;
  using WsStream = boost::beast::websocket::stream<boost::beast::tcp_stream>;

  explicit SessionServer(ServerOptions options)
      : options_(std::move(options)), engine_(options_.config), acceptor_(io_) {
    if (options_.tick_interval.count() <= 0) {
      options_.tick_interval = std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::duration<double>(1.0 / options_.config.tick_hz));
    }
    boost::system::error_code ec;
    const auto address = boost::asio::ip::make_address(options_.address, ec);
    if (ec) throw PortUnavailable("bad listen address " + options_.address);
    const tcp::endpoint endpoint(address, options_.port);
    acceptor_.open(endpoint.protocol(), ec);
    if (!ec) acceptor_.set_option(tcp::acceptor::reuse_address(true), ec);
    if (!ec) acceptor_.bind(endpoint, ec);
    if (!ec) acceptor_.listen(boost::asio::socket_base::max_listen_connections, ec);
    if (ec) {
      throw PortUnavailable("cannot listen on port " + std::to_string(options_.port) + ": " +
                            ec.message());
    }
  }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  // Serves one session and returns its trace. Blocks the calling thread.
  SessionTrace run() {
    boost::asio::signal_set signals(io_);
    if (options_.handle_signals) {
      signals.add(SIGINT);
      signals.add(SIGTERM);
      signals.async_wait([this](const boost::system::error_code& ec, int) {
        if (!ec) request_end();
      });
    }
    boost::asio::co_spawn(io_, accept_loop(), boost::asio::detached);
    io_.run();
    if (persist_error_) std::rethrow_exception(persist_error_);
    return engine_.trace();
  }

  // Ends the session from any thread; the trace is still written.
  void shutdown() {
    boost::asio::post(io_, [this] { request_end(); });
  }

  // Wall-clock time of every tick, for cadence checks.
  const std::vector<std::chrono::steady_clock::time_point>& tick_times() const {
    return tick_times_;
  }

  // Set when the session ended because of a malformed client message.
  const std::optional<std::string>& protocol_error() const { return protocol_error_; }

 private:
  template <class T>
  using awaitable = boost::asio::awaitable<T>;

  static constexpr auto use_awaitable = boost::asio::use_awaitable;
  static constexpr std::chrono::seconds kCloseTimeout{1};

  awaitable<void> accept_loop() {
    for (;;) {
      boost::system::error_code ec;
      auto socket =
          co_await acceptor_.async_accept(boost::asio::redirect_error(use_awaitable, ec));
      if (ec || ended_) co_return;
      if (!caretaker_) {
        boost::asio::co_spawn(io_, serve_caretaker(std::move(socket)), boost::asio::detached);
      } else {
        boost::asio::co_spawn(io_, reject(std::move(socket)), boost::asio::detached);
      }
    }
  }

  awaitable<void> reject(tcp::socket socket) {
    boost::system::error_code ec;
    WsStream ws(std::move(socket));
    co_await ws.async_accept(boost::asio::redirect_error(use_awaitable, ec));
    if (ec) co_return;
    Json msg;
    msg["type"] = "rejected";
    msg["reason"] = "session occupied";
    const auto text = msg.dump();
    co_await ws.async_write(boost::asio::buffer(text),
                            boost::asio::redirect_error(use_awaitable, ec));
    boost::beast::get_lowest_layer(ws).expires_after(kCloseTimeout);
    co_await ws.async_close(boost::beast::websocket::close_code::try_again_later,
                            boost::asio::redirect_error(use_awaitable, ec));
  }

  awaitable<void> serve_caretaker(tcp::socket socket) {
    auto ws = std::make_shared<WsStream>(std::move(socket));
    caretaker_ = ws;
    boost::system::error_code ec;
    co_await ws->async_accept(boost::asio::redirect_error(use_awaitable, ec));
    if (ec) {
      caretaker_.reset();
      co_return;
    }
    ws->text(true);
    const auto hello = engine_.hello().dump();
    co_await ws->async_write(boost::asio::buffer(hello),
                             boost::asio::redirect_error(use_awaitable, ec));
    boost::asio::co_spawn(io_, tick_loop(), boost::asio::detached);

    boost::beast::flat_buffer buffer;
    while (!ended_) {
      co_await ws->async_read(buffer, boost::asio::redirect_error(use_awaitable, ec));
      if (ec) break;  // client gone; the session keeps its clock
      engine_.enqueue(boost::beast::buffers_to_string(buffer.data()));
      buffer.consume(buffer.size());
    }
    connected_ = false;
  }

  awaitable<void> tick_loop() {
    boost::asio::steady_timer timer(io_);
    auto deadline = std::chrono::steady_clock::now();
    while (!ended_) {
      std::optional<TraceRecord> record;
      try {
        record = engine_.tick();
      } catch (const ClientProtocolError& e) {
        protocol_error_ = e.what();
        Json msg;
        msg["type"] = "error";
        msg["reason"] = e.what();
        co_await send(msg);
        break;
      }
      if (!record) break;
      tick_times_.push_back(std::chrono::steady_clock::now());
      co_await send(tick_message(*record));

      deadline += options_.tick_interval;
      timer.expires_at(deadline);
      boost::system::error_code ec;
      co_await timer.async_wait(boost::asio::redirect_error(use_awaitable, ec));
    }
    co_await end_session();
  }

  awaitable<void> send(const Json& msg) {
    if (!connected_ || !caretaker_) co_return;
    boost::system::error_code ec;
    const auto text = msg.dump();
    co_await caretaker_->async_write(boost::asio::buffer(text),
                                     boost::asio::redirect_error(use_awaitable, ec));
    if (ec) connected_ = false;
  }

  void request_end() {
    if (ended_) return;
    engine_.finish();
    if (!caretaker_) {
      // No clock is running; finish here.
      boost::asio::co_spawn(io_, end_session(), boost::asio::detached);
    }
  }

  awaitable<void> end_session() {
    if (ended_) co_return;
    ended_ = true;
    engine_.finish();
    persist();
    Json msg;
    msg["type"] = "end";
    msg["records"] = engine_.trace().records.size();
    co_await send(msg);
    if (caretaker_ && connected_) {
      // A client that stopped reading must not hold the session open.
      boost::asio::steady_timer guard(io_, kCloseTimeout);
      guard.async_wait([ws = caretaker_](const boost::system::error_code& ec) {
        if (!ec) boost::beast::get_lowest_layer(*ws).close();
      });
      boost::system::error_code ec;
      co_await caretaker_->async_close(boost::beast::websocket::close_code::normal,
                                       boost::asio::redirect_error(use_awaitable, ec));
      guard.cancel();
    }
    boost::system::error_code ignored;
    acceptor_.close(ignored);
    io_.stop();
  }

  void persist() {
    if (engine_.trace().records.empty()) return;  // nothing happened
    try {
      write_trace(engine_.trace(), options_.trace_out);
    } catch (...) {
      persist_error_ = std::current_exception();
    }
  }

  ServerOptions options_;
  SessionEngine engine_;
  boost::asio::io_context io_;
  tcp::acceptor acceptor_;
  std::shared_ptr<WsStream> caretaker_;
  bool connected_ = true;
  bool ended_ = false;
  std::optional<std::string> protocol_error_;
  std::exception_ptr persist_error_;
  std::vector<std::chrono::steady_clock::time_point> tick_times_;
};

}  // namespace hpa
