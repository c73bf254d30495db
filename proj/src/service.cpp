#include "mummi/service.hpp"

#include <algorithm>
#include <iostream>

#include "httplib.h"
#include "mummi/error.hpp"
#include "mummi/json_io.hpp"
#include "mummi/whatif.hpp"

namespace mummi::service {

std::string_view job_state_name(JobState s) {
  switch (s) {
    case JobState::pending: return "pending";
    case JobState::ready: return "ready";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

std::string SessionStore::put(std::string_view prefix, Entity e) {
  std::lock_guard lock(mutex_);
  std::string id = std::string(prefix) + "-" + std::to_string(next_id_++);
  lru_.push_front(id);
  slots_.emplace(id, Slot{std::move(e), lru_.begin()});
  evict_locked();
  return id;
}

std::optional<Entity> SessionStore::get(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = slots_.find(id);
  if (it == slots_.end()) return std::nullopt;
  lru_.splice(lru_.begin(), lru_, it->second.lru);
  return it->second.entity;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return slots_.size();
}

std::vector<std::pair<std::string, Entity>> SessionStore::snapshot() const {
  std::lock_guard lock(mutex_);
  std::vector<std::pair<std::string, Entity>> out;
  for (const auto& id : lru_) out.emplace_back(id, slots_.at(id).entity);
  return out;
}

void SessionStore::evict_locked() {
  auto it = lru_.end();
  while (slots_.size() > capacity_ && it != lru_.begin()) {
    --it;
    auto slot = slots_.find(*it);
    const bool in_use =
        std::visit([](const auto& p) { return p.use_count() > 1; }, slot->second.entity);
    if (in_use) continue;
    slots_.erase(slot);
    it = lru_.erase(it);
  }
}

namespace {

struct HttpError {
  int status;
  std::string kind;
  std::string message;
  json fields = json::object();
};

HttpError field_error(const std::string& field, const std::string& message) {
  return {400, "validation", field + ": " + message, json{{field, message}}};
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(dump_document(body), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw HttpError{400, "parse", "request body must be a JSON object"};
    return j;
  } catch (const json::parse_error& e) {
    throw HttpError{400, "parse", std::string("malformed JSON: ") + e.what()};
  }
}

std::string require_string(const json& body, const std::string& field) {
  auto it = body.find(field);
  if (it == body.end()) throw field_error(field, "is required");
  if (!it->is_string()) throw field_error(field, "must be a string");
  return it->get<std::string>();
}

double number_or(const json& body, const std::string& field, double fallback) {
  auto it = body.find(field);
  if (it == body.end() || it->is_null()) return fallback;
  if (!it->is_number()) throw field_error(field, "must be a number");
  return it->get<double>();
}

template <typename T>
std::shared_ptr<T> lookup(SessionStore& store, const std::string& id, std::string_view what) {
  auto e = store.get(id);
  if (e) {
    if (auto* p = std::get_if<std::shared_ptr<T>>(&*e)) return *p;
  }
  throw HttpError{404, "not_found", "unknown " + std::string(what) + " '" + id + "'"};
}

json dataset_summary(const std::string& id, const DatasetEntry& d) {
  json config = json::array();
  if (!d.raw.empty())
    for (const auto& [k, v] : d.raw[0].config_params) config.push_back(k);
  return json{{"dataset_id", id},
              {"name", d.name},
              {"n_samples", d.raw.size()},
              {"columns",
               {{"counters", d.raw.counter_names()},
                {"targets", d.raw.target_names()},
                {"config", config}}},
              {"normalized", d.raw.normalized()}};
}

template <typename T>
json job_envelope(const Job<T>& job) {
  std::lock_guard lock(job.mutex);
  json j{{"state", job_state_name(job.state)}};
  j["error"] = job.state == JobState::failed ? json(job.error) : json(nullptr);
  return j;
}

json model_envelope(const std::string& id, const ModelEntry& m) {
  json j = job_envelope(m.job);
  j["model_id"] = id;
  j["dataset_id"] = m.dataset_id;
  j["params"] = m.params;
  std::shared_ptr<const ModelSet> result;
  {
    std::lock_guard lock(m.job.mutex);
    result = m.job.result;
  }
  if (result) {
    j["model"] = *result;
    json ranking = json::array();
    for (const auto& r : rank_counters(*result, m.dataset->normalized).models)
      ranking.push_back(r);
    j["ranking"] = ranking;
  } else {
    j["model"] = nullptr;
    j["ranking"] = nullptr;
  }
  return j;
}

std::vector<CounterSample> samples_from_json(const json& arr, bool normalize) {
  if (!arr.is_array() || arr.empty()) throw field_error("samples", "must be a non-empty array");
  std::vector<CounterSample> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    CounterSample s;
    try {
      s = arr[i].get<CounterSample>();
    } catch (const std::exception& e) {
      throw field_error("samples[" + std::to_string(i) + "]", e.what());
    }
    if (normalize) {
      auto cyc = s.counters.find(std::string(kCycleCounter));
      if (cyc == s.counters.end() || cyc->second == 0.0)
        throw field_error("samples[" + std::to_string(i) + "]",
                          "normalize requires a nonzero TOT_CYC counter");
      const double c = cyc->second;
      s.counters.erase(cyc);
      for (auto& [k, v] : s.counters) v /= c;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::shared_ptr<const ModelSet> ready_model(const ModelEntry& m, const std::string& id) {
  std::lock_guard lock(m.job.mutex);
  if (m.job.state == JobState::pending)
    throw HttpError{409, "state", "model '" + id + "' is still fitting"};
  if (m.job.state == JobState::failed)
    throw HttpError{409, "state", "model '" + id + "' failed: " + m.job.error};
  return m.job.result;
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)),
      store_(options_.capacity),
      server_(std::make_unique<httplib::Server>()) {
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // server share a port that is already in use.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  routes();
  if (options_.ui_dir) server_->set_mount_point("/ui", options_.ui_dir->string());
  if (options_.data_dir) {
    std::error_code ec;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(*options_.data_dir, ec))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path());
    if (ec)
      throw Error(ErrorKind::io,
                  "cannot read data dir " + options_.data_dir->string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        const std::string id = add_dataset(load_csv(f, {{}, false}), f.stem().string());
        std::cerr << "loaded " << f.string() << " as " << id << "\n";
      } catch (const Error& e) {
        std::cerr << "skipping " << f.string() << ": " << e.what() << "\n";
      }
    }
  }
}

Service::~Service() {
  stop();
  std::lock_guard lock(jobs_mutex_);
  for (auto& t : jobs_)
    if (t.joinable()) t.join();
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::io, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port))
    throw Error(ErrorKind::io,
                "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
  return port;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

std::string Service::add_dataset(Dataset d, std::string name) {
  auto entry = std::make_shared<DatasetEntry>();
  entry->name = std::move(name);
  entry->normalized = ensure_normalized(d);
  entry->raw = std::move(d);
  return store_.put("ds", std::move(entry));
}

template <typename T, typename F>
void Service::launch(std::shared_ptr<T> entry, F work) {
  std::lock_guard lock(jobs_mutex_);
  jobs_.emplace_back([entry, work = std::move(work)] {
    auto& job = entry->job;
    try {
      auto result = work();
      std::lock_guard l(job.mutex);
      job.result = std::move(result);
      job.state = JobState::ready;
    } catch (const std::exception& e) {
      std::lock_guard l(job.mutex);
      job.error = e.what();
      job.state = JobState::failed;
    }
    job.done.notify_all();
  });
}

void Service::routes() {
  auto& s = *server_;

  // Wraps a handler with the shared error mapping.
  auto wrap = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        send(res, e.status,
             json{{"error", {{"kind", e.kind}, {"message", e.message}, {"fields", e.fields}}}});
      } catch (const Error& e) {
        if (e.is_input_error()) {
          send(res, 400,
               json{{"error",
                     {{"kind", to_string(e.kind())},
                      {"message", e.what()},
                      {"fields", json::object()}}}});
          return;
        }
        const std::string id = "err-" + std::to_string(next_error_id_++);
        std::cerr << id << ": " << e.what() << "\n";
        send(res, 500, json{{"error", {{"kind", "internal"}, {"message", "internal error"}, {"id", id}}}});
      } catch (const std::exception& e) {
        const std::string id = "err-" + std::to_string(next_error_id_++);
        std::cerr << id << ": " << e.what() << "\n";
        send(res, 500, json{{"error", {{"kind", "internal"}, {"message", "internal error"}, {"id", id}}}});
      }
    };
  };

  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  auto health = wrap([](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content("ok", "text/plain");
  });
  s.Get("/health", health);
  s.Get("/api/v1/health", health);

  s.Get("/api/v1/datasets", wrap([this](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& [id, e] : store_.snapshot())
      if (auto* d = std::get_if<std::shared_ptr<DatasetEntry>>(&e))
        list.push_back(dataset_summary(id, **d));
    std::sort(list.begin(), list.end(), [](const json& a, const json& b) {
      return a["dataset_id"].get<std::string>() < b["dataset_id"].get<std::string>();
    });
    send(res, 200, json{{"datasets", list}});
  }));

  s.Post("/api/v1/datasets", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.has_param("name") ? req.get_param_value("name") : "upload";
    Dataset d = parse_csv(std::string_view(req.body), {{}, false}, name);
    const std::string id = add_dataset(std::move(d), name);
    send(res, 201, dataset_summary(id, *lookup<DatasetEntry>(store_, id, "dataset")));
  }));

  s.Get(R"(/api/v1/datasets/([^/]+))",
        wrap([this](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          send(res, 200, dataset_summary(id, *lookup<DatasetEntry>(store_, id, "dataset")));
        }));

  s.Post("/api/v1/models", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string dataset_id = require_string(body, "dataset_id");
    SelectionParams params;
    if (auto it = body.find("params"); it != body.end() && !it->is_null()) {
      if (!it->is_object()) throw field_error("params", "must be an object");
      try {
        params = it->get<SelectionParams>();
      } catch (const Error& e) {
        throw field_error("params", e.what());
      } catch (const json::exception& e) {
        throw field_error("params", e.what());
      }
    }
    const double wait_ms =
        number_or(body, "wait_ms", static_cast<double>(options_.fit_wait.count()));
    if (wait_ms < 0) throw field_error("wait_ms", "must be nonnegative");

    auto dataset = lookup<DatasetEntry>(store_, dataset_id, "dataset");
    if (!dataset->raw.has_targets())
      throw field_error("dataset_id", "dataset has no target columns to fit");

    auto entry = std::make_shared<ModelEntry>();
    entry->dataset_id = dataset_id;
    entry->params = params;
    entry->dataset = dataset;
    entry->job.fingerprint = dataset_id + "|" + json(params).dump();

    std::string id;
    {
      std::lock_guard lock(submit_mutex_);
      for (const auto& [other_id, e] : store_.snapshot()) {
        auto* m = std::get_if<std::shared_ptr<ModelEntry>>(&e);
        if (!m) continue;
        std::lock_guard l((*m)->job.mutex);
        if ((*m)->job.state == JobState::pending &&
            (*m)->job.fingerprint == entry->job.fingerprint)
          throw HttpError{409, "duplicate",
                          "an identical fit is already running as '" + other_id + "'",
                          json{{"model_id", other_id}}};
      }
      id = store_.put("model", entry);
      launch(entry, [dataset, params] {
        return std::make_shared<const ModelSet>(fit_all(dataset->normalized, params));
      });
    }

    {
      std::unique_lock lock(entry->job.mutex);
      entry->job.done.wait_for(lock, std::chrono::duration<double, std::milli>(wait_ms),
                               [&] { return entry->job.state != JobState::pending; });
    }
    json env = model_envelope(id, *entry);
    const std::string state = env["state"];
    send(res, state == "ready" ? 201 : state == "pending" ? 202 : 400, env);
  }));

  s.Get(R"(/api/v1/models/([^/]+))",
        wrap([this](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          send(res, 200, model_envelope(id, *lookup<ModelEntry>(store_, id, "model")));
        }));

  s.Post("/api/v1/predict", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string model_id = require_string(body, "model_id");
    bool normalize = false;
    if (auto it = body.find("normalize"); it != body.end()) {
      if (!it->is_boolean()) throw field_error("normalize", "must be a boolean");
      normalize = it->get<bool>();
    }
    if (!body.contains("samples")) throw field_error("samples", "is required");
    const auto samples = samples_from_json(body["samples"], normalize);
    auto entry = lookup<ModelEntry>(store_, model_id, "model");
    const auto ms = ready_model(*entry, model_id);

    json rows = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      json row{{"row", i}};
      for (const auto& [metric, model] : ms->models) {
        double p;
        try {
          p = predict(model, samples[i]);
        } catch (const Error& e) {
          throw field_error("samples[" + std::to_string(i) + "]", e.what());
        }
        const std::string name(metric_name(metric));
        row[name + "_pred"] = p;
        if (auto t = samples[i].targets.find(metric); t != samples[i].targets.end() && t->second != 0.0)
          row[name + "_error_pct"] = error_rate(p, t->second);
      }
      rows.push_back(row);
    }
    send(res, 200, json{{"model_id", model_id}, {"predictions", rows}});
  }));

  s.Post("/api/v1/whatif", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string model_id = require_string(body, "model_id");
    const std::string counter = require_string(body, "counter");
    if (!body.contains("delta_percent")) throw field_error("delta_percent", "is required");
    const double delta = number_or(body, "delta_percent", 0.0);
    if (!(delta > -100.0)) throw field_error("delta_percent", "must be greater than -100");
    const double tau = number_or(body, "tau", 0.7);
    if (!(tau > 0.0 && tau <= 1.0)) throw field_error("tau", "must lie in (0, 1]");

    auto entry = lookup<ModelEntry>(store_, model_id, "model");
    const auto ms = ready_model(*entry, model_id);
    std::shared_ptr<const DatasetEntry> dataset = entry->dataset;
    if (auto it = body.find("dataset_id"); it != body.end() && !it->is_null()) {
      if (!it->is_string()) throw field_error("dataset_id", "must be a string");
      dataset = lookup<DatasetEntry>(store_, it->get<std::string>(), "dataset");
    }
    const auto& names = ms->counter_correlation.names;
    if (std::find(names.begin(), names.end(), counter) == names.end())
      throw field_error("counter", "unknown counter '" + counter + "'");

    WhatIfScenario sc;
    sc.pivot_counter = counter;
    sc.delta_percent = delta;
    sc.propagation_tau = tau;
    sc.baseline = dataset->normalized.samples();
    send(res, 200, json(evaluate(*ms, sc)));
  }));

  s.Post("/api/v1/compare", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const std::string dataset_id = require_string(body, "dataset_id");
    harness::ComparisonOptions opts;
    opts.dataset_id = dataset_id;
    if (auto it = body.find("methods"); it != body.end()) {
      if (!it->is_array()) throw field_error("methods", "must be an array of names");
      std::vector<std::string> names;
      for (const auto& m : *it) {
        if (!m.is_string()) throw field_error("methods", "must be an array of names");
        names.push_back(m.get<std::string>());
      }
      try {
        opts.methods = harness::parse_methods(names);
      } catch (const Error& e) {
        throw field_error("methods", e.what());
      }
    }
    if (auto it = body.find("targets"); it != body.end()) {
      if (!it->is_array()) throw field_error("targets", "must be an array of metric names");
      opts.targets.clear();
      for (const auto& t : *it) {
        auto m = t.is_string() ? parse_metric(t.get<std::string>()) : std::nullopt;
        if (!m) throw field_error("targets", "unknown metric " + t.dump());
        opts.targets.push_back(*m);
      }
      if (opts.targets.empty()) throw field_error("targets", "must not be empty");
    }
    SplitSpec spec;
    spec.test_fraction = number_or(body, "test_fraction", spec.test_fraction);
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
      throw field_error("test_fraction", "must lie in (0, 1)");
    if (auto it = body.find("seed"); it != body.end()) {
      if (!it->is_number_unsigned()) throw field_error("seed", "must be a nonnegative integer");
      spec.seed = it->get<std::uint64_t>();
    }

    auto dataset = lookup<DatasetEntry>(store_, dataset_id, "dataset");
    if (!dataset->raw.has_targets())
      throw field_error("dataset_id", "dataset has no target columns to compare");

    auto entry = std::make_shared<ReportEntry>();
    entry->dataset_id = dataset_id;
    std::string id;
    {
      std::lock_guard lock(submit_mutex_);
      id = store_.put("report", entry);
      launch(entry, [dataset, spec, opts] {
        return std::make_shared<const harness::ComparisonReport>(
            harness::run_comparison(dataset->raw, spec, opts));
      });
    }
    send(res, 202, json{{"report_id", id}, {"state", "pending"}});
  }));

  s.Get(R"(/api/v1/reports/([^/]+))",
        wrap([this](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          auto entry = lookup<ReportEntry>(store_, id, "report");
          json j = job_envelope(entry->job);
          j["report_id"] = id;
          j["dataset_id"] = entry->dataset_id;
          std::shared_ptr<const harness::ComparisonReport> result;
          {
            std::lock_guard lock(entry->job.mutex);
            result = entry->job.result;
          }
          j["report"] = result ? json(*result) : json(nullptr);
          send(res, 200, j);
        }));
}

}  // namespace mummi::service
