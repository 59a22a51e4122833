#include "lexiscope/service.hpp"

#include "lexiscope/format.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>

namespace lexiscope::service {
namespace fs = std::filesystem;

namespace {

ApiException api_error(int status, std::string code, std::string message) {
    return ApiException(ApiError{std::move(code), std::move(message), status});
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

nlohmann::json parse_body(const std::string& body) {
    try {
        auto doc = nlohmann::json::parse(body);
        if (!doc.is_object()) throw api_error(400, "bad_request", "request body must be a JSON object");
        return doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw api_error(400, "bad_request", std::string("invalid JSON: ") + e.what());
    }
}

std::optional<std::uint64_t> optional_version(const nlohmann::json& doc) {
    auto it = doc.find("expected_version");
    if (it == doc.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_unsigned()) throw api_error(400, "bad_request", "expected_version must be a non-negative integer");
    return it->get<std::uint64_t>();
}

Response json_response(const nlohmann::json& doc, int status = 200) {
    return {status, "application/json", doc.dump()};
}

}  // namespace

Response error_response(const ApiError& error) {
    nlohmann::json doc = {{"error", {{"code", error.code}, {"message", error.message}}}};
    return {error.http_status, "application/json", doc.dump()};
}

int resolve_port(int fallback) {
    if (const char* env = std::getenv("LEXISCOPE_PORT"); env && *env)
        if (auto v = parse_number<int>(env); v && *v > 0 && *v < 65536) return *v;
    return fallback;
}

// ---------------------------------------------------------------------------
// CategoryStore

CategoryStore::CategoryStore(std::string directory) : directory_(std::move(directory)) {
    if (directory_.empty()) return;
    fs::create_directories(directory_);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(directory_)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && ends_with(name, ".json") && !ends_with(name, ".generated.json"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        Entry e{load_category(path.string()), std::nullopt};
        const auto base_path = fs::path(directory_) / (category_slug(e.current.spec.name) + ".generated.json");
        if (fs::exists(base_path)) e.generated = load_category(base_path.string());
        else if (e.current.status == CategoryStatus::unvalidated) e.generated = e.current;
        const auto name = e.current.spec.name;
        if (!entries_.emplace(name, std::move(e)).second)
            throw Error(ErrorCode::schema_violation, "category '" + name + "' stored twice in " + directory_);
    }
}

std::vector<Category> CategoryStore::list() const {
    std::shared_lock lock(map_mutex_);
    std::vector<Category> out;
    for (const auto& [_, e] : entries_) out.push_back(e.current);
    return out;
}

std::optional<Category> CategoryStore::get(const std::string& name) const {
    std::shared_lock lock(map_mutex_);
    auto it = entries_.find(name);
    if (it == entries_.end()) return std::nullopt;
    return it->second.current;
}

std::optional<Category> CategoryStore::base(const std::string& name) const {
    std::shared_lock lock(map_mutex_);
    auto it = entries_.find(name);
    if (it == entries_.end()) return std::nullopt;
    return it->second.generated;
}

std::mutex& CategoryStore::lock_for(const std::string& name) {
    std::lock_guard guard(locks_mutex_);
    auto& slot = name_locks_[name];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

void CategoryStore::persist(const Entry& entry) const {
    if (directory_.empty()) return;
    const auto slug = category_slug(entry.current.spec.name);
    auto write_atomic = [&](const Category& c, const std::string& file) {
        const auto target = fs::path(directory_) / file;
        const auto tmp = fs::path(directory_) / (file + ".tmp");
        save_category(c, tmp.string());
        fs::rename(tmp, target);
    };
    if (entry.generated) write_atomic(*entry.generated, slug + ".generated.json");
    write_atomic(entry.current, slug + ".json");
}

Category CategoryStore::put_generated(Category category, std::optional<std::uint64_t> expected_version) {
    const std::string name = category.spec.name;
    std::lock_guard write_lock(lock_for(name));
    std::uint64_t previous = 0;
    {
        std::shared_lock lock(map_mutex_);
        if (auto it = entries_.find(name); it != entries_.end()) previous = it->second.current.version;
    }
    if (expected_version && *expected_version != previous)
        throw api_error(409, "version_conflict",
                        "category '" + name + "' is at version " + std::to_string(previous) + ", not " +
                            std::to_string(*expected_version));
    category.version = previous + 1;
    Entry entry{category, category};
    persist(entry);
    std::unique_lock lock(map_mutex_);
    entries_[name] = std::move(entry);
    return category;
}

Category CategoryStore::update_from_base(const std::string& name,
                                         const std::function<Category(const Category&)>& filter,
                                         std::optional<std::uint64_t> expected_version) {
    std::lock_guard write_lock(lock_for(name));
    Entry entry;
    {
        std::shared_lock lock(map_mutex_);
        auto it = entries_.find(name);
        if (it == entries_.end()) throw api_error(404, "not_found", "no category named '" + name + "'");
        entry = it->second;
    }
    if (expected_version && *expected_version != entry.current.version)
        throw api_error(409, "version_conflict",
                        "category '" + name + "' is at version " + std::to_string(entry.current.version) +
                            ", not " + std::to_string(*expected_version));
    if (!entry.generated)
        throw api_error(409, "no_unfiltered_base", "category '" + name + "' has no unfiltered generation to filter");
    Category next = filter(*entry.generated);
    next.version = entry.current.version + 1;
    entry.current = next;
    persist(entry);
    std::unique_lock lock(map_mutex_);
    entries_[name] = std::move(entry);
    return next;
}

// ---------------------------------------------------------------------------
// Service

struct Service::Server {
    httplib::Server http;
};

Service::Service(std::shared_ptr<const Space> space, std::shared_ptr<CategoryStore> store, ServiceConfig config)
    : space_(std::move(space)), store_(std::move(store)), config_(config), server_(std::make_shared<Server>()) {
    if (!space_) throw Error(ErrorCode::invalid_argument, "service needs a loaded vector space");
    if (!store_) throw Error(ErrorCode::invalid_argument, "service needs a category store");
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) const {
    try {
        const std::string categories_prefix = "/categories/";
        const std::string export_prefix = "/crowd/export/";
        const std::string import_prefix = "/crowd/import/";
        auto require = [&](const char* m) {
            if (method != m) throw api_error(405, "method_not_allowed", method + " is not supported on " + path);
        };
        if (path == "/analyze") {
            require("POST");
            return analyze(body);
        }
        if (path == "/categories/generate") {
            require("POST");
            return generate(body);
        }
        if (path == "/categories") {
            require("GET");
            return list_categories();
        }
        if (path.rfind(categories_prefix, 0) == 0 && path.size() > categories_prefix.size()) {
            require("GET");
            return get_category(path.substr(categories_prefix.size()));
        }
        if (path.rfind(export_prefix, 0) == 0 && path.size() > export_prefix.size()) {
            require("POST");
            return crowd_export(path.substr(export_prefix.size()));
        }
        if (path.rfind(import_prefix, 0) == 0 && path.size() > import_prefix.size()) {
            require("POST");
            return crowd_import(path.substr(import_prefix.size()), body);
        }
        throw api_error(404, "not_found", "no route for " + path);
    } catch (const ApiException& e) {
        return error_response(e.error());
    } catch (const Error& e) {
        return error_response({std::string(to_string(e.code())), e.what(), 400});
    } catch (const std::exception& e) {
        return error_response({"internal", e.what(), 500});
    }
}

Response Service::analyze(const std::string& body) const {
    const auto doc = parse_body(body);
    auto text_it = doc.find("text");
    if (text_it == doc.end() || !text_it->is_string())
        throw api_error(400, "bad_request", "field 'text' must be a string");
    const auto& text = text_it->get_ref<const std::string&>();
    if (text.size() > config_.max_text_bytes)
        throw api_error(413, "payload_too_large",
                        "text is " + std::to_string(text.size()) + " bytes; the limit is " +
                            std::to_string(config_.max_text_bytes));

    std::vector<Category> selected;
    auto cats_it = doc.find("categories");
    if (cats_it == doc.end() || cats_it->is_null()) {
        selected = store_->list();
    } else {
        if (!cats_it->is_array()) throw api_error(400, "bad_request", "field 'categories' must be an array of names");
        for (const auto& n : *cats_it) {
            if (!n.is_string()) throw api_error(400, "bad_request", "field 'categories' must be an array of names");
            auto c = store_->get(n.get<std::string>());
            if (!c) throw api_error(400, "unknown_category", "no category named '" + n.get<std::string>() + "'");
            if (std::none_of(selected.begin(), selected.end(),
                             [&](const Category& s) { return s.spec.name == c->spec.name; }))
                selected.push_back(std::move(*c));
        }
    }
    return json_response(analysis_to_json(lexiscope::analyze(text, selected)));
}

Response Service::generate(const std::string& body) const {
    const auto doc = parse_body(body);
    CategorySpec spec;
    auto name_it = doc.find("name");
    if (name_it == doc.end() || !name_it->is_string()) throw api_error(400, "bad_request", "field 'name' must be a string");
    spec.name = name_it->get<std::string>();
    auto seeds_it = doc.find("seeds");
    if (seeds_it == doc.end() || !seeds_it->is_array() || seeds_it->empty())
        throw api_error(400, "bad_request", "field 'seeds' must be a non-empty array of strings");
    for (const auto& s : *seeds_it) {
        if (!s.is_string()) throw api_error(400, "bad_request", "field 'seeds' must be a non-empty array of strings");
        spec.seeds.push_back(s.get<std::string>());
    }
    if (auto t = doc.find("threshold"); t != doc.end() && !t->is_null()) {
        if (!t->is_number()) throw api_error(400, "bad_request", "field 'threshold' must be a number");
        spec.threshold = t->get<double>();
    }
    if (auto m = doc.find("max_terms"); m != doc.end() && !m->is_null()) {
        if (!m->is_number_unsigned()) throw api_error(400, "bad_request", "field 'max_terms' must be a positive integer");
        spec.max_terms = m->get<std::size_t>();
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        throw api_error(400, "invalid_argument", e.what());
    }

    std::vector<std::string> missing;
    for (const auto& s : spec.seeds)
        if (!space_->resolve(s)) missing.push_back(s);
    if (missing.size() == spec.seeds.size()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        ApiError err{"no_seed_in_vocabulary", "no seed is in the vocabulary: " + list, 400};
        Response r = error_response(err);
        auto body_doc = nlohmann::json::parse(r.body);
        body_doc["error"]["out_of_vocabulary"] = missing;
        r.body = body_doc.dump();
        return r;
    }

    Category generated = lexiscope::generate(spec, *space_);
    Category stored = store_->put_generated(std::move(generated), optional_version(doc));
    return json_response(category_to_json(stored));
}

Response Service::list_categories() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : store_->list())
        out.push_back({{"name", c.spec.name},
                       {"version", c.version},
                       {"status", std::string(to_string(c.status))},
                       {"size", c.members.size()}});
    return json_response({{"categories", out}});
}

Response Service::get_category(const std::string& name) const {
    auto c = store_->get(name);
    if (!c) throw api_error(404, "not_found", "no category named '" + name + "'");
    return json_response(category_to_json(*c));
}

Response Service::crowd_export(const std::string& name) const {
    auto base = store_->base(name);
    if (!base) {
        if (!store_->get(name)) throw api_error(404, "not_found", "no category named '" + name + "'");
        throw api_error(409, "no_unfiltered_base", "category '" + name + "' has no unfiltered generation to export");
    }
    return {200, "text/csv", crowd::format_tasks_csv(crowd::chunk_tasks(*base, config_.words_per_task))};
}

Response Service::crowd_import(const std::string& name, const std::string& body) const {
    if (!store_->get(name)) throw api_error(404, "not_found", "no category named '" + name + "'");
    crowd::AggregationReport report;
    const Category updated = store_->update_from_base(name, [&](const Category& base) {
        const auto tasks = crowd::chunk_tasks(base, config_.words_per_task);
        try {
            const auto responses = crowd::parse_responses_csv(body, tasks);
            report = crowd::aggregate(responses);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::parse_error || e.code() == ErrorCode::quorum)
                throw api_error(422, "malformed_csv", e.what());
            throw;
        }
        return apply_crowd_filter(base, report.verdicts());
    });
    return json_response({{"category", category_to_json(updated)}, {"report", crowd::report_to_json(report)}});
}

bool Service::listen(const std::string& host, int port) {
    if (port == 0) {
        if (bind_any_port(host) < 0) return false;
        return listen_after_bind();
    }
    if (!bind_port(host, port)) return false;
    return listen_after_bind();
}

int Service::bind_any_port(const std::string& host) {
    return server_->http.bind_to_any_port(host);
}

bool Service::bind_port(const std::string& host, int port) { return server_->http.bind_to_port(host, port); }

bool Service::listen_after_bind() {
    auto& http = server_->http;
    http.set_payload_max_length(config_.max_text_bytes * 8 + (1 << 20));
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const Response r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    http.Get(".*", forward);
    http.Post(".*", forward);
    http.Put(".*", forward);
    http.Delete(".*", forward);
    return http.listen_after_bind();
}

void Service::stop() { server_->http.stop(); }

}  // namespace lexiscope::service
