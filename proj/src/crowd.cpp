#include "lexiscope/crowd.hpp"

#include "lexiscope/csv.hpp"
#include "lexiscope/format.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace lexiscope::crowd {

std::string_view to_string(Label label) noexcept {
    switch (label) {
        case Label::unrelated: return "unrelated";
        case Label::weakly: return "weakly";
        case Label::related: return "related";
        case Label::strongly: return "strongly";
    }
    return "unrelated";
}

std::optional<Label> parse_label(std::string_view text) {
    const std::string t = to_lower_ascii(trim(text));
    for (Label l : all_labels)
        if (t == to_string(l)) return l;
    return std::nullopt;
}

std::map<std::string, Verdict> AggregationReport::verdicts() const {
    std::map<std::string, Verdict> out;
    for (const auto& w : words) out.emplace(w.word, w.verdict);
    return out;
}

std::size_t AggregationReport::kept() const {
    return static_cast<std::size_t>(
        std::count_if(words.begin(), words.end(), [](const WordTally& w) { return w.verdict == Verdict::keep; }));
}

std::string default_prompt(std::string_view category) {
    return "Rate how strongly each word relates to the topic \"" + std::string(category) +
           "\": unrelated, weakly, related, or strongly.";
}

std::vector<LabelTask> chunk_tasks(const Category& category, std::size_t words_per_task) {
    if (words_per_task < 1) throw Error(ErrorCode::invalid_argument, "words_per_task must be >= 1");
    std::vector<LabelTask> tasks;
    const std::string slug = category_slug(category.spec.name);
    for (std::size_t start = 0; start < category.members.size(); start += words_per_task) {
        LabelTask task;
        char id[32];
        std::snprintf(id, sizeof id, "-%03zu", tasks.size() + 1);
        task.task_id = slug + id;
        task.category = category.spec.name;
        task.prompt = default_prompt(category.spec.name);
        const std::size_t end = std::min(category.members.size(), start + words_per_task);
        for (std::size_t i = start; i < end; ++i) task.words.push_back(category.members[i].word);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

Money Money::parse(std::string_view text) {
    std::string t = trim(text);
    std::string_view s = t;
    auto bad = [&]() { return Error(ErrorCode::invalid_argument, "invalid currency amount '" + t + "'"); };
    if (!s.empty() && s.front() == '$') s.remove_prefix(1);
    if (s.empty()) throw bad();
    const auto dot = s.find('.');
    const std::string_view whole = s.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (frac.size() > 4 || (whole.empty() && frac.empty())) throw bad();
    std::int64_t units = 0;
    for (char c : whole) {
        if (c < '0' || c > '9') throw bad();
        units = units * 10 + (c - '0');
    }
    units *= scale;
    std::int64_t place = scale / 10;
    for (char c : frac) {
        if (c < '0' || c > '9') throw bad();
        units += (c - '0') * place;
        place /= 10;
    }
    return Money(units);
}

std::string Money::to_string() const {
    const std::int64_t whole = units_ / scale;
    std::int64_t frac = units_ % scale;
    char buf[48];
    if (frac % 100 == 0) std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(whole),
                                       static_cast<long long>(frac / 100));
    else {
        int digits = 4;
        while (frac % 10 == 0) {
            frac /= 10;
            --digits;
        }
        std::snprintf(buf, sizeof buf, "%lld.%0*lld", static_cast<long long>(whole), digits,
                      static_cast<long long>(frac));
    }
    return buf;
}

Money estimate_cost(std::uint64_t n_tasks, std::uint64_t workers, Money price) {
    return price * static_cast<std::int64_t>(n_tasks) * static_cast<std::int64_t>(workers);
}

AggregationReport aggregate(const std::vector<WorkerResponse>& responses, const AggregationOptions& options) {
    if (options.quorum < 1) throw Error(ErrorCode::invalid_argument, "quorum must be >= 1");
    std::map<std::string, std::vector<Label>> votes;
    for (const auto& r : responses)
        for (const auto& [word, label] : r.labels) votes[word].push_back(label);
    const int majority = (options.quorum + 2) / 2;
    AggregationReport report;
    std::size_t unanimous = 0;
    std::size_t removed_with_support = 0;
    for (const auto& [word, labels] : votes) {
        if (static_cast<int>(labels.size()) != options.quorum)
            throw Error(ErrorCode::quorum, "word '" + word + "' has " + std::to_string(labels.size()) +
                                               " labels, expected " + std::to_string(options.quorum));
        WordTally t;
        t.word = word;
        t.total_votes = options.quorum;
        for (Label l : labels)
            if (static_cast<int>(l) >= static_cast<int>(options.keep_at_least)) ++t.relevant_votes;
        t.verdict = t.relevant_votes >= majority ? Verdict::keep : Verdict::remove;
        if (t.relevant_votes == 0 || t.relevant_votes == t.total_votes) ++unanimous;
        if (t.verdict == Verdict::remove && t.relevant_votes > 0) ++removed_with_support;
        report.words.push_back(std::move(t));
    }
    const std::size_t judged = report.words.size();
    const std::size_t kept = report.kept();
    const std::size_t removed = judged - kept;
    if (judged > 0) {
        report.acceptance_rate = static_cast<double>(kept) / static_cast<double>(judged);
        report.unanimity_rate = static_cast<double>(unanimous) / static_cast<double>(judged);
    }
    if (removed > 0)
        report.minority_relevance_rate = static_cast<double>(removed_with_support) / static_cast<double>(removed);
    return report;
}

std::string format_tasks_csv(const std::vector<LabelTask>& tasks) {
    std::string out = csv::format_row(task_csv_header);
    for (const auto& t : tasks)
        for (const auto& w : t.words) out += csv::format_row({t.task_id, t.category, w, t.prompt});
    return out;
}

std::vector<LabelTask> parse_tasks_csv(std::string_view text) {
    std::vector<LabelTask> tasks;
    std::unordered_map<std::string, std::size_t> by_id;
    for (const auto& rec : csv::parse_with_header(text, task_csv_header)) {
        const auto& f = rec.fields;
        const std::string row = "row " + std::to_string(rec.line);
        if (f[0].empty() || f[2].empty()) throw Error(ErrorCode::parse_error, row + ": empty task_id or word");
        auto [it, inserted] = by_id.try_emplace(f[0], tasks.size());
        if (inserted) tasks.push_back({f[0], f[1], {}, f[3]});
        auto& task = tasks[it->second];
        if (task.category != f[1]) throw Error(ErrorCode::parse_error, row + ": category differs within task");
        if (std::find(task.words.begin(), task.words.end(), f[2]) != task.words.end())
            throw Error(ErrorCode::parse_error, row + ": duplicate word '" + f[2] + "' in task " + f[0]);
        task.words.push_back(f[2]);
    }
    return tasks;
}

std::vector<WorkerResponse> parse_responses_csv(std::string_view text, const std::vector<LabelTask>& tasks) {
    std::unordered_map<std::string, const LabelTask*> task_by_id;
    for (const auto& t : tasks) task_by_id.emplace(t.task_id, &t);

    std::vector<WorkerResponse> out;
    std::map<std::pair<std::string, std::string>, std::size_t> by_key;
    std::map<std::pair<std::string, std::string>, std::size_t> first_row;
    for (const auto& rec : csv::parse_with_header(text, response_csv_header)) {
        const auto& f = rec.fields;
        const std::string row = "row " + std::to_string(rec.line);
        auto task_it = task_by_id.find(f[0]);
        if (task_it == task_by_id.end()) throw Error(ErrorCode::parse_error, row + ": unknown task '" + f[0] + "'");
        const LabelTask& task = *task_it->second;
        if (f[1].empty()) throw Error(ErrorCode::parse_error, row + ": empty worker_id");
        if (std::find(task.words.begin(), task.words.end(), f[2]) == task.words.end())
            throw Error(ErrorCode::parse_error, row + ": word '" + f[2] + "' is not in task " + f[0]);
        const auto label = parse_label(f[3]);
        if (!label) throw Error(ErrorCode::parse_error, row + ": unknown label '" + f[3] + "'");

        const auto key = std::make_pair(f[0], f[1]);
        auto [it, inserted] = by_key.try_emplace(key, out.size());
        if (inserted) {
            out.push_back({f[0], f[1], {}});
            first_row.emplace(key, rec.line);
        }
        if (!out[it->second].labels.emplace(f[2], *label).second)
            throw Error(ErrorCode::parse_error,
                        row + ": duplicate label for word '" + f[2] + "' by worker " + f[1] + " in task " + f[0]);
    }
    for (const auto& r : out) {
        const LabelTask& task = *task_by_id.at(r.task_id);
        for (const auto& w : task.words)
            if (!r.labels.count(w))
                throw Error(ErrorCode::parse_error, "row " + std::to_string(first_row.at({r.task_id, r.worker_id})) +
                                                        ": worker " + r.worker_id + " did not label '" + w +
                                                        "' in task " + r.task_id);
    }
    return out;
}

std::string format_responses_csv(const std::vector<WorkerResponse>& responses, const std::vector<LabelTask>& tasks) {
    std::unordered_map<std::string, const LabelTask*> task_by_id;
    for (const auto& t : tasks) task_by_id.emplace(t.task_id, &t);
    std::string out = csv::format_row(response_csv_header);
    for (const auto& r : responses) {
        auto it = task_by_id.find(r.task_id);
        if (it == task_by_id.end()) throw Error(ErrorCode::invalid_argument, "unknown task '" + r.task_id + "'");
        for (const auto& w : it->second->words) {
            auto l = r.labels.find(w);
            if (l == r.labels.end()) continue;
            out += csv::format_row({r.task_id, r.worker_id, w, std::string(to_string(l->second))});
        }
    }
    return out;
}

void export_tasks(const std::vector<LabelTask>& tasks, const std::string& path) {
    write_file(path, format_tasks_csv(tasks));
}

std::vector<WorkerResponse> import_responses(const std::string& path, const std::vector<LabelTask>& tasks) {
    return parse_responses_csv(read_file(path), tasks);
}

std::string format_report_csv(const AggregationReport& report) {
    std::string out = csv::format_row({"word", "verdict", "relevant_votes", "total_votes"});
    for (const auto& w : report.words)
        out += csv::format_row({w.word, std::string(to_string(w.verdict)), std::to_string(w.relevant_votes),
                                std::to_string(w.total_votes)});
    return out;
}

nlohmann::json report_to_json(const AggregationReport& report) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& w : report.words)
        words.push_back({{"word", w.word},
                         {"verdict", std::string(to_string(w.verdict))},
                         {"relevant_votes", w.relevant_votes},
                         {"total_votes", w.total_votes}});
    return {{"words", words},
            {"judged", report.words.size()},
            {"kept", report.kept()},
            {"acceptance_rate", report.acceptance_rate},
            {"unanimity_rate", report.unanimity_rate},
            {"minority_relevance_rate", report.minority_relevance_rate}};
}

}  // namespace lexiscope::crowd
