#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include "qorch/mock_remote.hpp"
#include "qorch/orchestrator.hpp"
#include "qorch/workloads.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace qorch;
using nlohmann::json;

namespace {

ExecutionRequest ghz_request(int n = 4, uint64_t shots = 256, uint64_t seed = 3) {
    ExecutionRequest req;
    req.circuit = build_ghz(n);
    req.shots = shots;
    req.seed = seed;
    return req;
}

ExecutionRequest slow_request(double delay_ms, int n = 3) {
    auto req = ghz_request(n, 64);
    req.selector.properties["delay_ms"] = std::to_string(delay_ms);
    return req;
}

std::unique_ptr<Service> make_service(int workers, ServiceConfig extra = {}) {
    extra.workers = workers;
    return std::make_unique<Service>(BackendRegistry::with_local_backends(), extra);
}

void sleep_ms(double ms) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

} // namespace

TEST_CASE("submit runs a job to completion with sane timing") {
    auto service = make_service(2);
    const auto id = service->submit(ghz_request());
    auto result = service->result(id, true, 10000);
    CHECK(result.shots == 256);
    CHECK(result.backend == "sv");
    CHECK(result.worker_id >= 0);
    auto snap = service->status(id);
    CHECK(snap.status == JobStatus::done);
    REQUIRE(snap.started_at.has_value());
    REQUIRE(snap.finished_at.has_value());
    CHECK(*snap.started_at >= snap.submitted_at);
    CHECK(*snap.finished_at >= *snap.started_at);
    // queue + exec never exceeds the job's wall clock span (plus slack)
    CHECK(result.queue_ms + result.exec_ms <= *snap.finished_at - snap.submitted_at + 5.0);
}

TEST_CASE("job ids are ordered and carry the session token") {
    auto service = make_service(1, {.session_seed = 77});
    const auto a = service->submit(ghz_request());
    const auto b = service->submit(ghz_request());
    CHECK(a.substr(0, 2) == "1-");
    CHECK(b.substr(0, 2) == "2-");
    CHECK(a.substr(2) == b.substr(2)); // same token
}

TEST_CASE("invalid submissions are rejected without a record") {
    auto service = make_service(1);
    auto req = ghz_request();
    req.shots = 0;
    CHECK_THROWS_AS(service->submit(req), QorchError);
    req = ghz_request();
    req.circuit.ops.push_back(GateOp::one(GateKind::H, 99));
    CHECK_THROWS_AS(service->submit(req), QorchError);
    req = ghz_request();
    req.selector.backend = "nope";
    CHECK_THROWS_AS(service->submit(req), QorchError);
    CHECK_THROWS_AS(service->status("1-whatever"), QorchError);
}

TEST_CASE("workers=0 is a configuration error") {
    CHECK_THROWS_AS(make_service(0), QorchError);
}

TEST_CASE("an idle pool fills round-robin: first 8 jobs hit workers 0..7") {
    auto service = make_service(8);
    std::vector<ExecutionRequest> batch(16, slow_request(150));
    const auto ids = service->submit_batch(batch);
    REQUIRE(ids.size() == 16);
    for (int i = 0; i < 8; ++i) {
        auto snap = service->status(ids[size_t(i)]);
        // wait until assigned
        for (int spin = 0; spin < 200 && !snap.worker_id; ++spin) {
            sleep_ms(5);
            snap = service->status(ids[size_t(i)]);
        }
        REQUIRE(snap.worker_id.has_value());
        CHECK(*snap.worker_id == i);
    }
    for (const auto& id : ids) CHECK_NOTHROW(service->result(id, true, 20000));
}

TEST_CASE("single worker executes strictly in submission order") {
    auto service = make_service(1);
    std::vector<std::string> ids;
    for (int i = 0; i < 6; ++i) ids.push_back(service->submit(ghz_request()));
    std::vector<double> finish_times;
    for (const auto& id : ids) {
        service->result(id, true, 10000);
        finish_times.push_back(*service->status(id).finished_at);
    }
    for (size_t i = 1; i < finish_times.size(); ++i)
        CHECK(finish_times[i] >= finish_times[i - 1]);
    for (size_t i = 0; i < ids.size(); ++i) {
        auto a = service->status(ids[i]);
        for (size_t j = i + 1; j < ids.size(); ++j) {
            auto b = service->status(ids[j]);
            CHECK(*a.started_at <= *b.started_at);
        }
    }
}

TEST_CASE("batch validation is all-or-nothing") {
    auto service = make_service(2);
    CHECK(service->submit_batch({}).empty());
    std::vector<ExecutionRequest> batch(3, ghz_request());
    batch[1].shots = 0;
    try {
        service->submit_batch(batch);
        FAIL("expected validation error");
    } catch (const QorchError& e) {
        CHECK(std::string(e.what()).find("job 1") != std::string::npos);
    }
    // nothing was enqueued: the next accepted job gets id 1
    const auto ids = service->submit_batch({ghz_request()});
    CHECK(ids[0].substr(0, 2) == "1-");
}

TEST_CASE("concurrency floor: 4 long jobs on 4 workers all run at once") {
    auto service = make_service(4);
    const auto ids = service->submit_batch(std::vector<ExecutionRequest>(4, slow_request(400)));
    bool saw_all_running = false;
    for (int spin = 0; spin < 200 && !saw_all_running; ++spin) {
        int running = 0;
        for (const auto& id : ids)
            if (service->status(id).status == JobStatus::running) ++running;
        saw_all_running = running == 4;
        sleep_ms(5);
    }
    CHECK(saw_all_running);
    for (const auto& id : ids) service->result(id, true, 20000);
}

TEST_CASE("workers view reflects busy state") {
    auto service = make_service(2);
    CHECK(service->workers().size() == 2);
    const auto id = service->submit(slow_request(300));
    bool saw_busy = false;
    for (int spin = 0; spin < 200 && !saw_busy; ++spin) {
        for (const auto& info : service->workers())
            if (info.busy && info.current_job == id) saw_busy = true;
        sleep_ms(5);
    }
    CHECK(saw_busy);
    service->result(id, true, 10000);
    for (const auto& info : service->workers()) CHECK_FALSE(info.busy);
}

TEST_CASE("cancel semantics") {
    auto service = make_service(1);
    const auto blocker = service->submit(slow_request(400));
    const auto queued = service->submit(ghz_request());
    service->cancel(queued);
    auto snap = service->status(queued);
    CHECK(snap.status == JobStatus::cancelled);
    CHECK_FALSE(snap.worker_id.has_value());
    CHECK_THROWS_AS(service->result(queued, false, 0), QorchError);
    service->cancel(queued); // idempotent
    CHECK(service->status(queued).status == JobStatus::cancelled);

    service->result(blocker, true, 10000);
    service->cancel(blocker); // cancel after done keeps the result
    CHECK(service->status(blocker).status == JobStatus::done);
    CHECK_THROWS_AS(service->cancel("nope"), QorchError);
}

TEST_CASE("cancelling a running job interrupts it at a gate boundary") {
    auto service = make_service(1);
    // a large, deep circuit so there are plenty of boundaries to stop at
    TfimSpec spec{22, 1.0, 1.0, 1.0, 200, false};
    auto req = ghz_request();
    req.circuit = build_tfim(spec);
    req.shots = 16;
    const auto id = service->submit(req);
    while (service->status(id).status == JobStatus::queued) sleep_ms(1);
    service->cancel(id);
    try {
        service->result(id, true, 30000);
        // allowed: the job may have finished before the flag was seen
        CHECK(service->status(id).status == JobStatus::done);
    } catch (const QorchError& e) {
        CHECK(e.code == "cancelled");
        CHECK(service->status(id).status == JobStatus::cancelled);
    }
}

TEST_CASE("result wait modes") {
    auto service = make_service(1);
    const auto id = service->submit(slow_request(300));
    CHECK_THROWS_AS(service->result(id, false, 0), QorchError);
    try {
        service->result(id, true, 1);
        FAIL("expected timeout");
    } catch (const QorchError& e) {
        CHECK(e.code == "timeout");
    }
    CHECK_NOTHROW(service->result(id, true, 10000));
}

TEST_CASE("a failing job does not disturb its neighbors") {
    auto service = make_service(2);
    auto bad = ghz_request(27, 16); // exceeds the sv capacity at run time
    const auto good1 = service->submit(ghz_request());
    const auto badid = service->submit(bad);
    const auto good2 = service->submit(ghz_request());
    CHECK_NOTHROW(service->result(good1, true, 10000));
    CHECK_NOTHROW(service->result(good2, true, 10000));
    try {
        service->result(badid, true, 10000);
        FAIL("expected failure");
    } catch (const QorchError& e) {
        CHECK(e.code == "capacity");
        CHECK(std::string(e.what()).find("sv") != std::string::npos);
    }
    CHECK(service->status(badid).status == JobStatus::failed);
}

TEST_CASE("no lost jobs under concurrent submit and cancel stress") {
    auto service = make_service(8);
    constexpr int kThreads = 8, kPerThread = 1250;
    std::atomic<int> accepted{0};
    std::vector<std::vector<std::string>> ids(kThreads);
    std::vector<std::thread> clients;
    for (int t = 0; t < kThreads; ++t) {
        clients.emplace_back([&, t] {
            for (int i = 0; i < kPerThread; ++i) {
                auto req = ghz_request(2, 4, uint64_t(t * kPerThread + i));
                const auto id = service->submit(req);
                ids[size_t(t)].push_back(id);
                accepted.fetch_add(1);
                if (i % 7 == 0) service->cancel(id); // races with execution
            }
        });
    }
    for (auto& c : clients) c.join();
    CHECK(accepted.load() == kThreads * kPerThread);
    service->shutdown(true);
    int terminal = 0;
    for (const auto& bucket : ids)
        for (const auto& id : bucket) {
            const auto status = service->status(id).status;
            if (status == JobStatus::done || status == JobStatus::failed ||
                status == JobStatus::cancelled)
                ++terminal;
        }
    CHECK(terminal == kThreads * kPerThread);
}

TEST_CASE("drain shutdown completes the backlog") {
    auto service = make_service(1);
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) ids.push_back(service->submit(ghz_request()));
    service->shutdown(true);
    for (const auto& id : ids) CHECK(service->status(id).status == JobStatus::done);
    CHECK_THROWS_AS(service->submit(ghz_request()), QorchError);
}

TEST_CASE("no-drain shutdown cancels the backlog") {
    auto service = make_service(1);
    const auto running = service->submit(slow_request(200));
    std::vector<std::string> queued;
    for (int i = 0; i < 3; ++i) queued.push_back(service->submit(ghz_request()));
    while (service->status(running).status == JobStatus::queued) sleep_ms(1);
    service->shutdown(false);
    for (const auto& id : queued) CHECK(service->status(id).status == JobStatus::cancelled);
}

TEST_CASE("journal records every transition") {
    const std::string path = "journal_test.jsonl";
    std::remove(path.c_str());
    {
        auto service = make_service(2, {.journal_path = path});
        const auto a = service->submit(ghz_request());
        const auto b = service->submit(ghz_request());
        service->result(a, true, 10000);
        service->result(b, true, 10000);
        service->shutdown(true);
    }
    std::ifstream in(path);
    REQUIRE(in.good());
    std::map<std::string, int> events;
    std::string line;
    while (std::getline(in, line)) {
        const auto entry = json::parse(line);
        events[entry.at("event").get<std::string>()]++;
        CHECK(entry.contains("job_id"));
        CHECK(entry.at("ts_ms").get<double>() >= 0);
    }
    CHECK(events["submitted"] == 2);
    CHECK(events["running"] == 2);
    CHECK(events["done"] == 2);
    std::remove(path.c_str());
}

// ---------------------------------------------------------------------------
// Wire protocol

namespace {

struct WireFixture {
    std::unique_ptr<Service> service = make_service(4);
    HttpServer http{*service};
    WireFixture() { http.start(); }
    httplib::Client client() { return httplib::Client("127.0.0.1", http.port()); }

    static json job_body(int n = 4, uint64_t shots = 128) {
        return json{{"circuit", serialize_circuit(build_ghz(n))},
                    {"shots", shots},
                    {"backend", "sv"},
                    {"seed", 9}};
    }
};

} // namespace

TEST_CASE("wire: submit, status, result round trip") {
    WireFixture fx;
    auto client = fx.client();
    auto res = client.Post("/v1/jobs", WireFixture::job_body().dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    const std::string id = json::parse(res->body).at("job_id");

    auto result = client.Get("/v1/jobs/" + id + "/result?wait=true&timeout_ms=10000");
    REQUIRE(result);
    CHECK(result->status == 200);
    const auto body = json::parse(result->body);
    // unified field set over the wire
    for (const char* field : {"counts", "shots", "backend", "worker_id", "queue_ms", "exec_ms",
                              "seed"})
        CHECK(body.contains(field));
    CHECK(body.at("shots") == 128);
    uint64_t total = 0;
    for (const auto& [key, count] : body.at("counts").items()) {
        CHECK(key.size() == 4);
        total += count.get<uint64_t>();
    }
    CHECK(total == 128);

    auto status = client.Get("/v1/jobs/" + id);
    REQUIRE(status);
    CHECK(json::parse(status->body).at("status") == "done");
}

TEST_CASE("wire: error statuses") {
    WireFixture fx;
    auto client = fx.client();

    auto bad = client.Post("/v1/jobs", "{\"circuit\": \"garbage\"}", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(json::parse(bad->body).at("error").contains("code"));

    auto missing = client.Get("/v1/jobs/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    auto body = WireFixture::job_body();
    body["properties"] = {{"delay_ms", "300"}};
    auto slow = client.Post("/v1/jobs", body.dump(), "application/json");
    const std::string id = json::parse(slow->body).at("job_id");
    auto notready = client.Get("/v1/jobs/" + id + "/result");
    CHECK(notready->status == 409);
    auto timeout = client.Get("/v1/jobs/" + id + "/result?wait=true&timeout_ms=1");
    CHECK(timeout->status == 408);
    auto done = client.Get("/v1/jobs/" + id + "/result?wait=true&timeout_ms=10000");
    CHECK(done->status == 200);
}

TEST_CASE("wire: batch submit and cancel") {
    WireFixture fx;
    auto client = fx.client();
    json batch{{"jobs", json::array({WireFixture::job_body(), WireFixture::job_body()})}};
    auto res = client.Post("/v1/jobs/batch", batch.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    const auto ids = json::parse(res->body).at("job_ids");
    REQUIRE(ids.size() == 2);

    batch["jobs"].push_back({{"circuit", "garbage"}});
    auto rejected = client.Post("/v1/jobs/batch", batch.dump(), "application/json");
    CHECK(rejected->status == 400);

    for (const auto& id : ids) {
        auto cancel = client.Delete("/v1/jobs/" + id.get<std::string>());
        CHECK(cancel->status == 200);
    }
}

TEST_CASE("wire: backends and workers endpoints") {
    WireFixture fx;
    auto client = fx.client();
    auto backends = client.Get("/v1/backends");
    REQUIRE(backends);
    const auto list = json::parse(backends->body).at("backends");
    REQUIRE(list.size() == 2);
    CHECK(list[0].at("name") == "sv");
    CHECK(list[1].at("name") == "mps");

    auto workers = client.Get("/v1/workers");
    REQUIRE(workers);
    CHECK(json::parse(workers->body).at("workers").size() == 4);
}

TEST_CASE("wire: shutdown endpoint drains and stops the listener") {
    WireFixture fx;
    auto client = fx.client();
    auto res = client.Post("/v1/jobs", WireFixture::job_body().dump(), "application/json");
    const std::string id = json::parse(res->body).at("job_id");
    auto shut = client.Post("/v1/shutdown", R"({"drain": true})", "application/json");
    REQUIRE(shut);
    CHECK(shut->status == 202);
    fx.http.wait_until_stopped();
    CHECK(fx.service->status(id).status == JobStatus::done);
}

TEST_CASE("wire: selector round trip resolves the same adapter") {
    auto service = std::make_unique<Service>([] {
        auto registry = BackendRegistry::with_local_backends();
        return registry;
    }());
    HttpServer http(*service);
    http.start();
    httplib::Client client("127.0.0.1", http.port());
    auto body = WireFixture::job_body();
    body["backend"] = "mps";
    body["subbackend"] = "mps-chi32";
    body["properties"] = {{"trunc_threshold", "1e-10"}};
    auto res = client.Post("/v1/jobs", body.dump(), "application/json");
    REQUIRE(res);
    const std::string id = json::parse(res->body).at("job_id");
    auto result = client.Get("/v1/jobs/" + id + "/result?wait=true&timeout_ms=10000");
    REQUIRE(result);
    CHECK(json::parse(result->body).at("backend") == "mps");
}
