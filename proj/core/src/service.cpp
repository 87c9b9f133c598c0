/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include <maxent/service.hpp>

#include <maxent/evalkit.hpp>
#include <maxent/query.hpp>
#include <maxent/serialize.hpp>

#include "httplib.h"
#include "json_codec.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace maxent {

using detail::json;

namespace {

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json meta_to_json(const SummaryMetadata& m) {
    return json{{"id", m.id},
                {"name", m.name},
                {"createdAt", m.created_at},
                {"source", m.source},
                {"modified", m.modified},
                {"sourceHash", m.source_hash},
                {"config", m.config.empty() ? json::object() : json::parse(m.config)},
                {"schemaConfig", m.schema_config.empty() ? json::object() : json::parse(m.schema_config)}};
}

SummaryMetadata meta_from_json(const json& j) {
    SummaryMetadata m;
    m.id = j.at("id").get<std::string>();
    m.name = j.value("name", std::string());
    m.created_at = j.value("createdAt", std::string());
    m.source = j.value("source", std::string());
    m.modified = j.value("modified", false);
    m.source_hash = j.value("sourceHash", std::string());
    if (j.contains("config")) m.config = j.at("config").dump();
    if (j.contains("schemaConfig")) m.schema_config = j.at("schemaConfig").dump();
    return m;
}

bool valid_id(const std::string& id) {
    if (id.empty() || id.size() > 64) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
    return true;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SummaryRegistry::SummaryRegistry(std::optional<std::filesystem::path> data_dir, RebuildPolicy policy,
                                 SolverConfig maintenance)
    : dir_(std::move(data_dir)), policy_(policy), maintenance_(maintenance) {
    if (dir_) {
        std::filesystem::create_directories(*dir_);
        load_all();
    }
}

std::filesystem::path SummaryRegistry::default_data_dir() {
    if (const char* env = std::getenv("MAXENT_DATA_DIR"); env && *env) return env;
    return "maxent-data";
}

void SummaryRegistry::load_all() {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(*dir_))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            const auto doc = json::parse(read_file(f));
            auto meta = meta_from_json(doc.at("meta"));
            auto summary = load_summary(doc.at("summary").dump());
            auto entry = std::make_shared<RegistryEntry>();
            entry->live = std::make_unique<LiveSummary>(std::move(summary), policy_, maintenance_);
            // Reattach the source when it is still the same file and no updates were applied since
            // it was read; otherwise exact counts and rebuilds would disagree with the summary.
            if (!meta.modified && !meta.source.empty() && std::filesystem::exists(meta.source)) {
                const auto bytes = read_file(meta.source);
                if (fnv1a_hex(bytes) == meta.source_hash && !meta.schema_config.empty()) {
                    auto loaded = load_csv(meta.source, parse_schema_config(meta.schema_config));
                    entry->live->attach_dataset(std::move(loaded.dataset), parse_build_config(meta.config));
                }
            }
            entry->meta = std::move(meta);
            if (const auto num = std::strtoull(entry->meta.id.c_str(), nullptr, 10); num >= next_id_)
                next_id_ = num + 1;
            entries_[entry->meta.id] = std::move(entry);
        } catch (const std::exception& e) {
            load_errors_.push_back(f.filename().string() + ": " + e.what());
        }
    }
}

std::string SummaryRegistry::add(Summary summary, SummaryMetadata meta, std::optional<Dataset> data) {
    auto entry = std::make_shared<RegistryEntry>();
    entry->live = std::make_unique<LiveSummary>(std::move(summary), policy_, maintenance_);
    if (data) entry->live->attach_dataset(std::move(*data), meta.config.empty() ? BuildConfig{} : parse_build_config(meta.config));
    if (meta.created_at.empty()) meta.created_at = now_iso8601();
    std::string id;
    {
        std::lock_guard lock(mu_);
        if (meta.id.empty()) {
            while (entries_.count(std::to_string(next_id_))) ++next_id_;
            meta.id = std::to_string(next_id_++);
        } else if (!valid_id(meta.id)) {
            throw ConfigError("summary id must be 1-64 characters of [A-Za-z0-9_-]");
        } else if (entries_.count(meta.id)) {
            throw ConfigError("summary id '" + meta.id + "' already exists");
        }
        id = meta.id;
        entry->meta = std::move(meta);
        entries_[id] = entry;
    }
    persist(id);
    return id;
}

std::shared_ptr<RegistryEntry> SummaryRegistry::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : it->second;
}

std::vector<SummaryMetadata> SummaryRegistry::list() const {
    std::lock_guard lock(mu_);
    std::vector<SummaryMetadata> out;
    for (const auto& [id, e] : entries_) out.push_back(e->meta);
    return out;
}

std::size_t SummaryRegistry::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

void SummaryRegistry::persist(const std::string& id) const {
    if (!dir_) return;
    auto entry = find(id);
    if (!entry) throw NotFound("unknown summary '" + id + "'");
    auto meta = entry->meta;
    const auto st = entry->live->status();
    meta.modified = meta.modified || st.updates_since_rebuild > 0 || st.rebuilds > 0;
    const json doc{{"meta", meta_to_json(meta)}, {"summary", json::parse(serialize_summary(*entry->live->snapshot()))}};
    const auto path = *dir_ / (id + ".json");
    const auto tmp = *dir_ / (id + ".json.tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << doc.dump();
    }
    std::filesystem::rename(tmp, path);
}

BuildRequest parse_build_request(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed build request: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dataset") || !j.at("dataset").is_string())
        throw ConfigError("build request needs a 'dataset' path");
    if (!j.contains("schema")) throw ConfigError("build request needs a 'schema' object");
    BuildRequest r;
    r.name = j.value("name", std::string());
    r.dataset = j.at("dataset").get<std::string>();
    r.schema = detail::schema_config_from_json_value(j.at("schema"));
    r.config = parse_build_config(j.contains("config") ? j.at("config").dump() : "{}");
    return r;
}

std::string build_and_register(SummaryRegistry& registry, const BuildRequest& request) {
    auto loaded = load_csv(request.dataset, request.schema);
    BuildReport report;
    auto summary = build_summary(loaded.dataset, request.config, &report);
    SummaryMetadata meta;
    meta.name = request.name.empty() ? request.dataset.stem().string() : request.name;
    meta.source = std::filesystem::absolute(request.dataset).string();
    meta.source_hash = fnv1a_hex(read_file(request.dataset));
    meta.config = build_config_to_json(request.config);
    // Store the resolved schema so a reload bucketizes identically.
    meta.schema_config = schema_config_to_json(schema_to_config(loaded.dataset.schema()));
    return registry.add(std::move(summary), std::move(meta), std::move(loaded.dataset));
}

struct Server::Impl {
    explicit Impl(SummaryRegistry& r) : registry(r) {}

    struct Job {
        std::string state = "running";  // running | done | failed
        std::string id;
        std::string error;
    };

    SummaryRegistry& registry;
    httplib::Server http;
    std::thread thread;
    std::mutex jobs_mu;
    std::map<std::string, Job> jobs;
    std::vector<std::thread> workers;
    std::uint64_t next_job = 1;

    std::shared_ptr<RegistryEntry> entry(const httplib::Request& req) {
        const std::string id = req.matches[1];
        auto e = registry.find(id);
        if (!e) throw NotFound("unknown summary '" + id + "'");
        return e;
    }

    static void reply(httplib::Response& res, int code, const std::string& body) {
        res.status = code;
        res.set_content(body, "application/json");
    }
    static void fail(httplib::Response& res, int code, const std::string& message) {
        reply(res, code, json{{"error", message}}.dump());
    }

    template <class F>
    httplib::Server::Handler wrap(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const NotFound& e) {
                fail(res, 404, e.what());
            } catch (const BusyError& e) {
                fail(res, 409, e.what());
            } catch (const QueryError& e) {
                fail(res, 400, e.what());
            } catch (const UpdateRejected& e) {
                fail(res, 400, e.what());
            } catch (const SchemaError& e) {
                fail(res, 400, e.what());
            } catch (const DomainError& e) {
                fail(res, 400, e.what());
            } catch (const ConfigError& e) {
                fail(res, 400, e.what());
            } catch (const json::exception& e) {
                fail(res, 400, e.what());
            } catch (const ModelError& e) {
                fail(res, 422, e.what());
            } catch (const std::exception& e) {
                fail(res, 500, e.what());
            }
        };
    }

    static json body_json(const httplib::Request& req) {
        if (req.body.empty()) return json::object();
        try {
            return json::parse(req.body);
        } catch (const json::parse_error& e) {
            throw QueryError(std::string("malformed JSON body: ") + e.what());
        }
    }

    void routes() {
        http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        http.Get("/health", wrap([this](const httplib::Request&, httplib::Response& res) {
                     reply(res, 200, json{{"status", "ok"}, {"summaries", registry.size()}}.dump());
                 }));

        http.Get("/summaries", wrap([this](const httplib::Request&, httplib::Response& res) {
                     json out = json::array();
                     for (const auto& m : registry.list()) {
                         auto e = registry.find(m.id);
                         if (!e) continue;
                         auto snap = e->live->snapshot();
                         out.push_back(json{{"id", m.id},
                                            {"name", m.name},
                                            {"createdAt", m.created_at},
                                            {"sourceHash", m.source_hash},
                                            {"n", snap->n()},
                                            {"statistics", snap->statistics().size()},
                                            {"exact", e->live->has_dataset()}});
                     }
                     reply(res, 200, out.dump());
                 }));

        http.Post("/summaries", wrap([this](const httplib::Request& req, httplib::Response& res) {
                      auto request = parse_build_request(req.body);
                      std::string job_id;
                      {
                          std::lock_guard lock(jobs_mu);
                          job_id = std::to_string(next_job++);
                          jobs[job_id] = Job{};
                          workers.emplace_back([this, job_id, request = std::move(request)] {
                              Job done;
                              try {
                                  done.id = build_and_register(registry, request);
                                  done.state = "done";
                              } catch (const std::exception& e) {
                                  done.state = "failed";
                                  done.error = e.what();
                              }
                              std::lock_guard lock(jobs_mu);
                              jobs[job_id] = std::move(done);
                          });
                      }
                      reply(res, 202, json{{"job", job_id}, {"state", "running"}}.dump());
                  }));

        http.Get(R"(/jobs/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
                     std::lock_guard lock(jobs_mu);
                     auto it = jobs.find(req.matches[1]);
                     if (it == jobs.end()) throw NotFound("unknown job '" + std::string(req.matches[1]) + "'");
                     json j{{"job", it->first}, {"state", it->second.state}};
                     if (!it->second.id.empty()) j["id"] = it->second.id;
                     if (!it->second.error.empty()) j["error"] = it->second.error;
                     reply(res, 200, j.dump());
                 }));

        http.Get(R"(/summaries/([^/]+)/schema)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                     reply(res, 200, summary_schema_json(*entry(req)->live->snapshot()));
                 }));

        http.Post(R"(/summaries/([^/]+)/query)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                      auto snap = entry(req)->live->snapshot();
                      auto q = parse_query_json(snap->schema(), req.body);
                      if (!q.group_by.empty()) {
                          groupby(*snap, q, body_json(req), res);
                          return;
                      }
                      reply(res, 200, answer_to_json(answer_count(*snap, q.predicate)));
                  }));

        http.Post(R"(/summaries/([^/]+)/groupby)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                      auto snap = entry(req)->live->snapshot();
                      auto q = parse_query_json(snap->schema(), req.body);
                      if (q.group_by.empty()) throw QueryError("groupby needs a non-empty 'groupBy' list");
                      groupby(*snap, q, body_json(req), res);
                  }));

        http.Post(R"(/summaries/([^/]+)/exact)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                      auto e = entry(req);
                      auto snap = e->live->snapshot();
                      auto q = parse_query_json(snap->schema(), req.body);
                      auto exact = e->live->exact_count(q.predicate);
                      if (!exact) throw NotFound("no data attached to summary '" + e->meta.id + "'");
                      const auto est = answer_count(*snap, q.predicate);
                      reply(res, 200,
                            json{{"exact", *exact},
                                 {"expectation", est.expectation},
                                 {"rounded", est.rounded},
                                 {"relativeError", relative_error(*exact, est.expectation)}}
                                .dump());
                  }));

        http.Post(R"(/summaries/([^/]+)/updates)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                      auto e = entry(req);
                      const auto deltas = parse_update_json(e->live->snapshot()->schema(), req.body);
                      std::size_t applied = 0;
                      try {
                          for (; applied < deltas.size(); ++applied) e->live->apply_update(deltas[applied]);
                      } catch (...) {
                          // Undo the accepted prefix so a batch lands whole or not at all.
                          while (applied-- > 0) e->live->apply_update({deltas[applied].tuple, -deltas[applied].sign});
                          throw;
                      }
                      const auto body = body_json(req);
                      if (body.is_object() && body.value("refresh", false)) {
                          e->live->maintain();
                          registry.persist(e->meta.id);
                      }
                      reply(res, 200, status_to_json(e->live->status()));
                  }));

        http.Post(R"(/summaries/([^/]+)/refresh)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                      auto e = entry(req);
                      e->live->maintain();
                      registry.persist(e->meta.id);
                      reply(res, 200, status_to_json(e->live->status()));
                  }));

        http.Post(R"(/summaries/([^/]+)/rebuild)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                      auto e = entry(req);
                      if (!e->live->has_dataset()) throw NotFound("no data attached to summary '" + e->meta.id + "'");
                      e->live->rebuild();
                      registry.persist(e->meta.id);
                      reply(res, 200, status_to_json(e->live->status()));
                  }));

        http.Get(R"(/summaries/([^/]+)/status)", wrap([this](const httplib::Request& req, httplib::Response& res) {
                     reply(res, 200, status_to_json(entry(req)->live->status()));
                 }));
    }

    static void groupby(const Summary& snap, const QueryRequest& q, const json& body, httplib::Response& res) {
        GroupByQuery g;
        g.attributes = q.group_by;
        g.filter = q.predicate;
        g.include_zero_groups = q.include_zero_groups;
        if (body.is_object() && body.contains("cap")) g.cap = body.at("cap").get<std::uint64_t>();
        const auto t0 = std::chrono::steady_clock::now();
        const auto rows = answer_groupby(snap, g);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        reply(res, 200, groupby_to_json(snap.schema(), g.attributes, rows, ms));
    }
};

Server::Server(SummaryRegistry& registry) : impl_(std::make_unique<Impl>(registry)) { impl_->routes(); }

Server::~Server() {
    stop();
    wait_for_jobs();
}

int Server::start(const std::string& host, int port) {
    int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return bound;
}

bool Server::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

void Server::stop() {
    impl_->http.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void Server::wait_for_jobs() {
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(impl_->jobs_mu);
        workers.swap(impl_->workers);
    }
    for (auto& w : workers)
        if (w.joinable()) w.join();
}

}  // namespace maxent
