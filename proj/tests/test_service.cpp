#include "doctest.h"

#include <thread>

#include "mummi/cli.hpp"
#include "mummi/json_io.hpp"
#include "mummi/service.hpp"
#include "support.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines a macro named _res.
#include "httplib.h"

using namespace mummi;
using namespace mummi::service;

namespace {

/// A service listening on a free local port for the duration of a test.
struct LiveService {
  Service svc;
  int port;
  std::thread thread;

  explicit LiveService(ServiceOptions o = {}) : svc(std::move(o)), port(svc.bind("127.0.0.1", 0)) {
    thread = std::thread([this] { svc.listen(); });
  }
  ~LiveService() {
    svc.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

json post(httplib::Client& c, const std::string& path, const json& body, int expect) {
  auto res = c.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

json get(httplib::Client& c, const std::string& path, int expect) {
  auto res = c.Get(path);
  REQUIRE(res);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

std::string upload(httplib::Client& c, const std::string& csv) {
  auto res = c.Post("/api/v1/datasets?name=fixture", csv, "text/csv");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  return json::parse(res->body)["dataset_id"];
}

}  // namespace

TEST_CASE("session store evicts least recently used idle entries") {
  SessionStore store(2);
  auto held = std::make_shared<DatasetEntry>();
  const auto a = store.put("ds", held);
  const auto b = store.put("ds", std::make_shared<DatasetEntry>());
  const auto c = store.put("ds", std::make_shared<DatasetEntry>());
  CHECK(a != b);
  // a is oldest but still referenced here, so b goes instead.
  CHECK(store.get(a).has_value());
  CHECK_FALSE(store.get(b).has_value());
  CHECK(store.get(c).has_value());
  held.reset();
  store.get(c);  // a is now least recently used
  store.put("ds", std::make_shared<DatasetEntry>());
  CHECK_FALSE(store.get(a).has_value());
  CHECK(store.size() == 2);
}

TEST_CASE("health and dataset endpoints") {
  LiveService live;
  auto c = live.client();
  auto h = c.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  CHECK(h->body == "ok");
  CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(c.Get("/api/v1/health")->body == "ok");

  const Dataset d = testing::planted_dataset(40, 0.01, 1);
  const std::string id = upload(c, to_csv(d));
  const json info = get(c, "/api/v1/datasets/" + id, 200);
  CHECK(info["n_samples"] == 40);
  CHECK(info["columns"]["counters"].size() == 8);
  CHECK(info["columns"]["targets"].size() == 4);
  CHECK(get(c, "/api/v1/datasets", 200)["datasets"].size() == 1);

  const json missing = get(c, "/api/v1/datasets/ds-999", 404);
  CHECK(missing["error"]["kind"] == "not_found");

  auto bad = c.Post("/api/v1/datasets", "freq_ghz,a\n2.0,zz\n", "text/csv");
  REQUIRE(bad);
  CHECK(bad->status == 400);
}

TEST_CASE("fitted model matches the command-line fit byte for byte") {
  const auto dir = testing::scratch_dir("svc-equiv");
  const Dataset d = testing::planted_dataset(144, 0.01, 2);
  write_csv(d, dir / "d.csv");
  const std::string model_path = (dir / "m.json").string();
  const std::string data_path = (dir / "d.csv").string();
  const char* argv[] = {"mummi", "fit", "--data", data_path.c_str(), "--out", model_path.c_str()};
  std::ostringstream out, err;
  REQUIRE(cli::run(6, argv, out, err) == 0);

  LiveService live;
  auto c = live.client();
  const std::string ds = upload(c, testing::slurp(dir / "d.csv"));
  const json created = post(c, "/api/v1/models", {{"dataset_id", ds}}, 201);
  CHECK(created["state"] == "ready");
  const std::string id = created["model_id"];
  const json fetched = get(c, "/api/v1/models/" + id, 200);
  CHECK(dump_document(fetched["model"]) == testing::slurp(model_path));
  CHECK(fetched["ranking"].size() == 4);

  get(c, "/api/v1/models/model-404", 404);
  const json invalid = post(c, "/api/v1/models", {{"dataset_id", ds}, {"params", {{"max_counters", 0}}}}, 400);
  CHECK(invalid["error"]["fields"].contains("params"));
  const json no_ds = post(c, "/api/v1/models", json::object(), 400);
  CHECK(no_ds["error"]["fields"]["dataset_id"] == "is required");
}

TEST_CASE("whatif and predict over http") {
  LiveService live;
  auto c = live.client();
  const Dataset d = testing::planted_dataset(60, 0.01, 3);
  const std::string ds = upload(c, to_csv(d));
  const std::string model = post(c, "/api/v1/models", {{"dataset_id", ds}}, 201)["model_id"];

  const json zero = post(c, "/api/v1/whatif",
                         {{"model_id", model}, {"dataset_id", ds}, {"counter", "c1"}, {"delta_percent", 0}},
                         200);
  CHECK(zero["format"] == "mummi.whatif");
  for (const auto& m : zero["metrics"]) CHECK(m["improvement_percent"].get<double>() == 0.0);

  const json bad = post(c, "/api/v1/whatif",
                        {{"model_id", model}, {"counter", "nope"}, {"delta_percent", -10}}, 400);
  CHECK(bad["error"]["fields"].contains("counter"));
  const json bad_tau = post(c, "/api/v1/whatif",
                            {{"model_id", model}, {"counter", "c1"}, {"delta_percent", 5}, {"tau", 2}}, 400);
  CHECK(bad_tau["error"]["fields"].contains("tau"));
  post(c, "/api/v1/whatif", {{"model_id", "model-77"}, {"counter", "c1"}, {"delta_percent", 5}}, 404);

  json samples = json::array();
  for (std::size_t i = 0; i < 3; ++i) samples.push_back(d[i]);
  const json pred = post(c, "/api/v1/predict", {{"model_id", model}, {"samples", samples}}, 200);
  REQUIRE(pred["predictions"].size() == 3);
  const auto ms = model_set_from_json(get(c, "/api/v1/models/" + model, 200)["model"]);
  for (std::size_t i = 0; i < 3; ++i) {
    const json& row = pred["predictions"][i];
    CHECK(row["runtime_s_pred"].get<double>() == predict(ms.at(Metric::runtime), d[i]));
    CHECK(row.contains("mem_power_w_error_pct"));
  }
  post(c, "/api/v1/predict", {{"model_id", model}}, 400);
}

TEST_CASE("concurrent whatif requests agree with a serial one") {
  LiveService live;
  auto c = live.client();
  const std::string ds = upload(c, to_csv(testing::planted_dataset(80, 0.01, 4)));
  const std::string model = post(c, "/api/v1/models", {{"dataset_id", ds}}, 201)["model_id"];
  const json body{{"model_id", model}, {"counter", "c2"}, {"delta_percent", -20}, {"tau", 0.5}};
  const std::string serial = c.Post("/api/v1/whatif", body.dump(), "application/json")->body;

  std::vector<std::string> results(8);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < results.size(); ++t)
    threads.emplace_back([&, t] {
      auto client = live.client();
      auto res = client.Post("/api/v1/whatif", body.dump(), "application/json");
      if (res) results[t] = res->body;
    });
  for (auto& t : threads) t.join();
  for (const auto& r : results) CHECK(r == serial);
}

TEST_CASE("compare runs in the background") {
  LiveService live;
  auto c = live.client();
  const std::string ds = upload(c, to_csv(testing::planted_dataset(60, 0.01, 5)));
  const json started = post(c, "/api/v1/compare",
                            {{"dataset_id", ds}, {"methods", {"mummi", "ridge"}}, {"seed", 3}}, 202);
  const std::string id = started["report_id"];
  json env;
  for (int i = 0; i < 600; ++i) {
    env = get(c, "/api/v1/reports/" + id, 200);
    if (env["state"] != "pending") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  REQUIRE(env["state"] == "ready");
  CHECK(env["report"]["format"] == "mummi.report");
  CHECK(env["report"]["methods"] == json({"mummi", "ridge"}));

  const json bad = post(c, "/api/v1/compare", {{"dataset_id", ds}, {"methods", {"svm"}}}, 400);
  CHECK(bad["error"]["fields"].contains("methods"));
  get(c, "/api/v1/reports/report-999", 404);
}

TEST_CASE("an identical fit already in flight is a conflict") {
  LiveService live;
  auto c = live.client();
  const std::string ds = upload(c, to_csv(testing::planted_dataset(40000, 0.01, 6)));
  const json body{{"dataset_id", ds}, {"wait_ms", 0}};
  const json first = post(c, "/api/v1/models", body, 202);
  const json second = post(c, "/api/v1/models", body, 409);
  CHECK(second["error"]["fields"]["model_id"] == first["model_id"]);
}

TEST_CASE("datasets are preloaded from the data directory") {
  const auto dir = testing::scratch_dir("svc-preload");
  write_csv(testing::planted_dataset(20, 0.01, 7), dir / "lulesh.csv");
  ServiceOptions o;
  o.data_dir = dir;
  LiveService live(o);
  auto c = live.client();
  const json list = get(c, "/api/v1/datasets", 200)["datasets"];
  REQUIRE(list.size() == 1);
  CHECK(list[0]["name"] == "lulesh");
}
