#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mummi/dataset.hpp"
#include "mummi/harness.hpp"
#include "mummi/model.hpp"

namespace httplib {
class Server;
}

namespace mummi::service {

enum class JobState { pending, ready, failed };

std::string_view job_state_name(JobState s);

/// Result slot for work that runs off the request path.
template <typename T>
struct Job {
  mutable std::mutex mutex;
  mutable std::condition_variable done;
  JobState state = JobState::pending;
  std::shared_ptr<const T> result;
  std::string error;
  std::string fingerprint;  // identifies the inputs, for duplicate detection
};

struct DatasetEntry {
  std::string name;
  Dataset raw;
  /// Normalized copy used for fitting and what-if baselines.
  Dataset normalized;
};

struct ModelEntry {
  std::string dataset_id;
  SelectionParams params;
  std::shared_ptr<const DatasetEntry> dataset;
  Job<ModelSet> job;
};

struct ReportEntry {
  std::string dataset_id;
  Job<harness::ComparisonReport> job;
};

using Entity = std::variant<std::shared_ptr<DatasetEntry>, std::shared_ptr<ModelEntry>,
                            std::shared_ptr<ReportEntry>>;

/// In-memory, capacity-bounded LRU of uploaded and computed entities.
///
/// Lookups hand out shared pointers. Eviction skips any entity whose pointer
/// is still held elsewhere (an in-flight request or a running job), so the
/// store may briefly exceed its capacity.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity) : capacity_(capacity) {}

  std::string put(std::string_view prefix, Entity e);
  std::optional<Entity> get(const std::string& id);
  std::size_t size() const;
  std::vector<std::pair<std::string, Entity>> snapshot() const;

 private:
  void evict_locked();

  struct Slot {
    Entity entity;
    std::list<std::string>::iterator lru;
  };
  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::size_t next_id_ = 1;
  std::list<std::string> lru_;  // most recent first
  std::unordered_map<std::string, Slot> slots_;
};

struct ServiceOptions {
  std::size_t capacity = 64;
  /// CSV files found here are registered as datasets at startup.
  std::optional<std::filesystem::path> data_dir;
  /// Static files served under /ui.
  std::optional<std::filesystem::path> ui_dir;
  /// Default time POST /models waits for a fit before answering 202.
  std::chrono::milliseconds fit_wait{10000};
};

/// HTTP/JSON API under /api/v1 plus GET /health.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds without serving; port 0 picks a free port. Returns the bound
  /// port. Throws an io Error when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();

  /// Registers a dataset directly (startup preload and tests).
  std::string add_dataset(Dataset d, std::string name);

  SessionStore& store() { return store_; }

 private:
  void routes();
  template <typename T, typename F>
  void launch(std::shared_ptr<T> entry, F work);

  ServiceOptions options_;
  SessionStore store_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex submit_mutex_;  // duplicate check + registration of new jobs
  std::mutex jobs_mutex_;
  std::vector<std::thread> jobs_;
  std::atomic<std::size_t> next_error_id_{1};
};

}  // namespace mummi::service
