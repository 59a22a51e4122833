#pragma once

#include "lexiscope/analyzer.hpp"
#include "lexiscope/crowd.hpp"
#include "lexiscope/lexicon.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace lexiscope::service {

struct ApiError {
    std::string code;
    std::string message;
    int http_status = 500;
};

class ApiException : public std::runtime_error {
public:
    explicit ApiException(ApiError error) : std::runtime_error(error.message), error_(std::move(error)) {}
    const ApiError& error() const noexcept { return error_; }

private:
    ApiError error_;
};

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Named, versioned categories, optionally persisted as JSON files in a
/// directory (`<slug>.json` for the current state, `<slug>.generated.json` for
/// the unfiltered generation that crowd imports start from).
class CategoryStore {
public:
    /// An empty directory string keeps the store in memory only.
    explicit CategoryStore(std::string directory = {});

    std::vector<Category> list() const;
    std::optional<Category> get(const std::string& name) const;
    /// The unfiltered generation for `name`, if known.
    std::optional<Category> base(const std::string& name) const;

    /// Stores a freshly generated category. Its version becomes previous + 1.
    /// Throws ApiException (409) when expected_version is given and differs.
    Category put_generated(Category category, std::optional<std::uint64_t> expected_version = std::nullopt);

    /// Replaces the current state with filter(base), bumping the version.
    Category update_from_base(const std::string& name, const std::function<Category(const Category&)>& filter,
                              std::optional<std::uint64_t> expected_version = std::nullopt);

private:
    struct Entry {
        Category current;
        std::optional<Category> generated;
    };

    std::mutex& lock_for(const std::string& name);
    void persist(const Entry& entry) const;

    std::string directory_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, Entry> entries_;
    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> name_locks_;
};

struct ServiceConfig {
    std::size_t max_text_bytes = 1 << 20;
    std::size_t words_per_task = 20;
};

/// Request handling for the JSON API. Stateless apart from the category store;
/// the vector space is shared read-only.
class Service {
public:
    Service(std::shared_ptr<const Space> space, std::shared_ptr<CategoryStore> store, ServiceConfig config = {});

    /// `path` is the already-decoded request path.
    Response handle(const std::string& method, const std::string& path, const std::string& body) const;

    /// Blocks serving HTTP/1.1 until stop() is called from another thread.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool bind_port(const std::string& host, int port);
    bool listen_after_bind();
    void stop();

private:
    Response analyze(const std::string& body) const;
    Response generate(const std::string& body) const;
    Response list_categories() const;
    Response get_category(const std::string& name) const;
    Response crowd_export(const std::string& name) const;
    Response crowd_import(const std::string& name, const std::string& body) const;

    std::shared_ptr<const Space> space_;
    std::shared_ptr<CategoryStore> store_;
    ServiceConfig config_;
    struct Server;
    std::shared_ptr<Server> server_;
};

Response error_response(const ApiError& error);

/// Port from LEXISCOPE_PORT when set, else `fallback`.
int resolve_port(int fallback);

}  // namespace lexiscope::service
