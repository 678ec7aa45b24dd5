#include "advicelab/server/advice_server.hpp"

#include <chrono>
#include <deque>
#include <set>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace advicelab::server {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// Slow clients lose state messages rather than stalling the server.
constexpr std::size_t kMaxQueuedStates = 4;

class Session;

}  // namespace

struct AdviceServer::Impl {
  explicit Impl(AdviceServer& o) : owner(o), acceptor(ioc), timer(ioc) {}

  void accept();
  void schedule_tick();
  void tick();
  void handle(Session& from, const std::string& text);
  void opened(const std::shared_ptr<Session>& s);
  void closed(Session* s, bool was_open);

  AdviceServer& owner;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer timer;
  std::set<std::shared_ptr<Session>> sessions;
  Session* controller = nullptr;

  std::mutex snap_mu;
  std::optional<harness::StepSnapshot> latest;
  bool dirty = false;

  // Episodes are renumbered so (episode, step) stays monotone across sessions.
  int last_session = -1;
  int last_episode = -1;
  int episode_ordinal = -1;
};

namespace {

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, AdviceServer::Impl& impl) : ws_(std::move(socket)), impl_(impl) {}

  bool controller() const { return impl_.controller == this; }

  void start() {
    ws_.async_accept(beast::bind_front_handler(&Session::on_accept, shared_from_this()));
  }

  void send(std::shared_ptr<const std::string> msg, bool droppable) {
    if (closed_) return;
    if (droppable && (!opened_ || queue_.size() >= kMaxQueuedStates)) return;
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    beast::error_code ec;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).socket().close(ec);
    impl_.closed(this, opened_);
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) {
      closed_ = true;
      impl_.closed(this, false);
      return;
    }
    ws_.text(true);
    opened_ = true;
    impl_.opened(shared_from_this());
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Session::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    impl_.handle(*this, text);
    if (!closed_) read();
  }

  void write() {
    ws_.async_write(net::buffer(*queue_.front()),
                    beast::bind_front_handler(&Session::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty() && !closed_) write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  AdviceServer::Impl& impl_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  bool opened_ = false;
  bool closed_ = false;
};

}  // namespace

void AdviceServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    auto s = std::make_shared<Session>(std::move(socket), *this);
    sessions.insert(s);
    s->start();
    accept();
  });
}

void AdviceServer::Impl::opened(const std::shared_ptr<Session>& s) {
  if (!controller) controller = s.get();
  owner.clients_.fetch_add(1);
  s->send(std::make_shared<const std::string>(encode_hello(controller == s.get(), owner.map_.get())), false);
}

void AdviceServer::Impl::closed(Session* s, bool was_open) {
  for (auto it = sessions.begin(); it != sessions.end(); ++it) {
    if (it->get() == s) {
      if (was_open) owner.clients_.fetch_sub(1);
      if (s == controller) controller = nullptr;
      // Keep the object alive until its pending handlers finish.
      net::post(ioc, [keep = *it] {});
      sessions.erase(it);
      return;
    }
  }
}

void AdviceServer::Impl::handle(Session& from, const std::string& text) {
  auto reply = [&](std::string msg) { from.send(std::make_shared<const std::string>(std::move(msg)), false); };
  Inbound in = parse_inbound(text);
  if (auto* err = std::get_if<ProtocolError>(&in)) {
    reply(encode_error(err->reason));
    return;
  }
  if (!from.controller()) {
    reply(encode_error("observe-only"));
    return;
  }
  if (auto* advice = std::get_if<AdviceRequest>(&in)) {
    owner.queue_->push(agents::AdviceEvent{advice->direction, owner.current_step_.load(),
                                           agents::AdviceSource::kHuman});
    owner.advice_received_.fetch_add(1);
    reply(encode_advice_ack(advice->direction));
    return;
  }
  const auto& control = std::get<ControlRequest>(in);
  if (control.cmd == ControlCommand::kPause) {
    owner.pause();
  } else {
    owner.resume();
  }
  reply(encode_control_ack(control.cmd, owner.paused()));
}

void AdviceServer::Impl::schedule_tick() {
  const double hz = owner.cfg_.max_rate_hz;
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / hz));
  timer.expires_after(period);
  timer.async_wait([this](beast::error_code ec) {
    if (ec) return;
    tick();
    schedule_tick();
  });
}

void AdviceServer::Impl::tick() {
  std::optional<harness::StepSnapshot> snap;
  {
    std::lock_guard lock(snap_mu);
    if (!dirty) return;
    dirty = false;
    snap = latest;
  }
  if (!snap || sessions.empty()) return;
  if (snap->session != last_session || snap->episode != last_episode) {
    last_session = snap->session;
    last_episode = snap->episode;
    ++episode_ordinal;
  }
  StateMessage msg;
  msg.episode = episode_ordinal;
  msg.step = snap->step;
  msg.pose = snap->pose;
  msg.score = snap->score;
  msg.last_action = snap->last_action;
  msg.advice_active = snap->advice_active;
  const render::Frame frame =
      owner.cfg_.frame_downsample > 1 ? snap->frame.downsample(owner.cfg_.frame_downsample) : snap->frame;
  msg.frame_width = frame.width();
  msg.frame_height = frame.height();
  msg.frame = frame.to_bytes();
  msg.map_digest = owner.map_ ? owner.map_->digest() : std::string();
  auto text = std::make_shared<const std::string>(encode_state(msg));
  for (const auto& s : sessions) s->send(text, true);
  owner.states_sent_.fetch_add(1);
}

AdviceServer::AdviceServer(ServerConfig cfg, std::shared_ptr<agents::PendingAdviceQueue> queue,
                           std::shared_ptr<const world::GridMap> map)
    : cfg_(std::move(cfg)), queue_(std::move(queue)), map_(std::move(map)) {
  if (!queue_) throw std::invalid_argument("advice server needs a queue");
  if (!(cfg_.max_rate_hz > 0.0)) throw std::invalid_argument("state rate must be positive");
  if (cfg_.frame_downsample < 1) throw std::invalid_argument("frame downsample must be >= 1");
  if (cfg_.port < 0 || cfg_.port > 65535) throw std::invalid_argument("bad port");
}

AdviceServer::~AdviceServer() { stop(); }

void AdviceServer::start() {
  if (running_.load()) return;
  impl_ = std::make_unique<Impl>(*this);
  beast::error_code ec;
  auto address = net::ip::make_address(cfg_.address, ec);
  if (ec) throw ServerError("bad bind address " + cfg_.address);
  tcp::endpoint endpoint(address, static_cast<unsigned short>(cfg_.port));
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    impl_.reset();
    throw ServerError("cannot listen on port " + std::to_string(cfg_.port) + ": " + ec.message());
  }
  port_ = impl_->acceptor.local_endpoint().port();
  running_ = true;
  impl_->accept();
  impl_->schedule_tick();
  io_thread_ = std::thread([this] { impl_->ioc.run(); });
}

void AdviceServer::stop() {
  if (!running_.exchange(false)) return;
  {
    std::lock_guard lock(pause_mu_);
    paused_ = false;
  }
  pause_cv_.notify_all();
  net::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    impl->timer.cancel();
    auto sessions = impl->sessions;
    for (const auto& s : sessions) s->close();
  });
  // Give the close handlers a moment to run, then stop regardless.
  net::post(impl_->ioc, [impl = impl_.get()] { impl->ioc.stop(); });
  if (io_thread_.joinable()) io_thread_.join();
  impl_.reset();
  clients_ = 0;
}

void AdviceServer::before_step(long global_step) {
  current_step_.store(global_step);
  wait_if_paused();
}

void AdviceServer::after_step(const harness::StepSnapshot& snapshot) {
  if (!impl_) return;
  std::lock_guard lock(impl_->snap_mu);
  impl_->latest = snapshot;
  impl_->dirty = true;
}

void AdviceServer::pause() { paused_ = true; }

void AdviceServer::resume() {
  {
    std::lock_guard lock(pause_mu_);
    paused_ = false;
  }
  pause_cv_.notify_all();
}

void AdviceServer::wait_if_paused() {
  if (!paused_.load()) return;
  std::unique_lock lock(pause_mu_);
  waiting_ = true;
  pause_cv_.wait(lock, [this] { return !paused_.load() || !running_.load(); });
  waiting_ = false;
}

}  // namespace advicelab::server
