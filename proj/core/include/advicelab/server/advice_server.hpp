#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "advicelab/agents/advice.hpp"
#include "advicelab/harness/experiment.hpp"
#include "advicelab/server/protocol.hpp"

namespace advicelab::server {

class ServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServerConfig {
  std::string address = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  double max_rate_hz = 10.0;
  // Frames are box-downsampled by this factor before encoding.
  int frame_downsample = 1;
};

// WebSocket telemetry and advice endpoint. The first client to connect may
// send advice and control messages; later clients only observe. Runs its own
// I/O thread; the training loop talks to it only through the StepObserver
// hooks, the shared advice queue and the pause flag.
class AdviceServer final : public harness::StepObserver {
 public:
  AdviceServer(ServerConfig cfg, std::shared_ptr<agents::PendingAdviceQueue> queue,
               std::shared_ptr<const world::GridMap> map = nullptr);
  ~AdviceServer() override;
  AdviceServer(const AdviceServer&) = delete;
  AdviceServer& operator=(const AdviceServer&) = delete;

  // Binds and starts the I/O thread; throws ServerError if the port is taken.
  void start();
  void stop();
  int port() const { return port_.load(); }

  void before_step(long global_step) override;
  void after_step(const harness::StepSnapshot& snapshot) override;
  bool wants_snapshots() const override { return clients_.load() > 0; }

  bool paused() const { return paused_.load(); }
  void pause();
  void resume();
  // Blocks while paused (returns immediately once the server stops).
  void wait_if_paused();
  // True while the training loop is parked inside wait_if_paused.
  bool waiting() const { return waiting_.load(); }

  int client_count() const { return clients_.load(); }
  long advice_received() const { return advice_received_.load(); }
  long states_sent() const { return states_sent_.load(); }

  struct Impl;

 private:
  ServerConfig cfg_;
  std::shared_ptr<agents::PendingAdviceQueue> queue_;
  std::shared_ptr<const world::GridMap> map_;
  std::unique_ptr<Impl> impl_;
  std::thread io_thread_;

  std::atomic<int> port_{0};
  std::atomic<int> clients_{0};
  std::atomic<long> current_step_{0};
  std::atomic<long> advice_received_{0};
  std::atomic<long> states_sent_{0};
  std::atomic<bool> paused_{false};
  std::atomic<bool> waiting_{false};
  std::atomic<bool> running_{false};
  std::mutex pause_mu_;
  std::condition_variable pause_cv_;

  friend struct Impl;
};

}  // namespace advicelab::server
