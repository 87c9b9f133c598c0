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

#pragma once

#include <maxent/ingest.hpp>
#include <maxent/maintenance.hpp>
#include <maxent/pipeline.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace maxent {

struct SummaryMetadata {
    std::string id;
    std::string name;
    std::string created_at;   // UTC, ISO 8601
    std::string source;       // CSV path the summary was built from, empty if none
    std::string source_hash;  // FNV-1a 64 of the source bytes, hex
    std::string config;       // build config JSON
    std::string schema_config;
    bool modified = false;  // updates applied since the source was read
};

struct RegistryEntry {
    SummaryMetadata meta;
    std::unique_ptr<LiveSummary> live;
};

/// Summaries keyed by id. With a data directory, each summary is one `<id>.json` document
/// holding the metadata and the serialized summary; documents are loaded on construction.
class SummaryRegistry {
public:
    explicit SummaryRegistry(std::optional<std::filesystem::path> data_dir = std::nullopt,
                             RebuildPolicy policy = {}, SolverConfig maintenance = {});

    /// $MAXENT_DATA_DIR, or ./maxent-data.
    static std::filesystem::path default_data_dir();

    /// Registers a summary, assigning an id when `meta.id` is empty. Persists when backed by a directory.
    std::string add(Summary summary, SummaryMetadata meta, std::optional<Dataset> data = std::nullopt);

    std::shared_ptr<RegistryEntry> find(const std::string& id) const;
    std::vector<SummaryMetadata> list() const;
    std::size_t size() const;

    /// Writes the entry's current snapshot. No-op without a data directory.
    void persist(const std::string& id) const;

    const std::optional<std::filesystem::path>& data_dir() const noexcept { return dir_; }
    /// Documents that failed to load at startup, with the reason.
    const std::vector<std::string>& load_errors() const noexcept { return load_errors_; }

private:
    void load_all();

    std::optional<std::filesystem::path> dir_;
    RebuildPolicy policy_;
    SolverConfig maintenance_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<RegistryEntry>> entries_;
    std::uint64_t next_id_ = 1;
    std::vector<std::string> load_errors_;
};

/// Request to build a summary from a CSV file.
struct BuildRequest {
    std::string name;
    std::filesystem::path dataset;
    SchemaConfig schema;
    BuildConfig config;
};

/// {"name", "dataset": path, "schema": {attributes: [...]}, "config": {...}}.
BuildRequest parse_build_request(const std::string& json_text);

/// Loads the CSV, runs the build pipeline and registers the result; returns the id.
std::string build_and_register(SummaryRegistry& registry, const BuildRequest& request);

std::string fnv1a_hex(const std::string& bytes);

/// HTTP/JSON front end over a registry.
class Server {
public:
    explicit Server(SummaryRegistry& registry);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port. Returns the bound port.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    bool listen(const std::string& host, int port);
    void stop();

    /// Waits for outstanding build jobs.
    void wait_for_jobs();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace maxent
