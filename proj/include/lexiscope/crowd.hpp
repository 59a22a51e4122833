#pragma once

#include "lexiscope/lexicon.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lexiscope::crowd {

/// Four ordered relatedness levels a worker can assign to a word.
enum class Label : int { unrelated = 0, weakly = 1, related = 2, strongly = 3 };

inline constexpr Label all_labels[] = {Label::unrelated, Label::weakly, Label::related, Label::strongly};

std::string_view to_string(Label label) noexcept;
std::optional<Label> parse_label(std::string_view text);

struct LabelTask {
    std::string task_id;
    std::string category;
    std::vector<std::string> words;  // 1..words_per_task, unique
    std::string prompt;
};

struct WorkerResponse {
    std::string task_id;
    std::string worker_id;
    std::map<std::string, Label> labels;  // covers every word of the task
};

struct AggregationOptions {
    int quorum = 3;
    /// Lowest label that counts as a vote for keeping the word.
    Label keep_at_least = Label::weakly;
};

struct WordTally {
    std::string word;
    Verdict verdict = Verdict::keep;
    int relevant_votes = 0;  // labels >= keep_at_least
    int total_votes = 0;
};

struct AggregationReport {
    std::vector<WordTally> words;  // sorted by word
    double acceptance_rate = 0.0;
    double unanimity_rate = 0.0;
    double minority_relevance_rate = 0.0;

    std::map<std::string, Verdict> verdicts() const;
    std::size_t kept() const;
};

std::string default_prompt(std::string_view category);

/// Order-preserving partition of the members into tasks of at most
/// `words_per_task` words. Ids are `<slug>-001`, `<slug>-002`, ...
std::vector<LabelTask> chunk_tasks(const Category& category, std::size_t words_per_task = 20);

/// Currency held as an exact count of 1/10000 units.
class Money {
public:
    static constexpr std::int64_t scale = 10000;

    constexpr Money() = default;
    static constexpr Money from_units(std::int64_t units) { return Money(units); }

    /// Parses "4", "0.14", "$0.14". At most four decimals; throws invalid_argument.
    static Money parse(std::string_view text);

    constexpr std::int64_t units() const noexcept { return units_; }

    /// Two decimals, or more when sub-cent digits are present.
    std::string to_string() const;

    friend constexpr Money operator*(Money m, std::int64_t k) { return Money(m.units_ * k); }
    friend constexpr bool operator==(Money, Money) = default;

private:
    constexpr explicit Money(std::int64_t units) : units_(units) {}
    std::int64_t units_ = 0;
};

/// n_tasks * workers * price, exactly.
Money estimate_cost(std::uint64_t n_tasks, std::uint64_t workers = 3, Money price = Money::parse("0.14"));

/// Majority vote: keep iff at least ceil((quorum + 1) / 2) workers chose a label
/// >= keep_at_least. Every word must carry exactly `quorum` labels.
AggregationReport aggregate(const std::vector<WorkerResponse>& responses, const AggregationOptions& options = {});

inline const std::vector<std::string> task_csv_header{"task_id", "category", "word", "prompt"};
inline const std::vector<std::string> response_csv_header{"task_id", "worker_id", "word", "label"};

/// One row per (task, word).
std::string format_tasks_csv(const std::vector<LabelTask>& tasks);
std::vector<LabelTask> parse_tasks_csv(std::string_view text);

/// Validates labels, task membership, duplicates and coverage against `tasks`.
/// Errors name the offending row.
std::vector<WorkerResponse> parse_responses_csv(std::string_view text, const std::vector<LabelTask>& tasks);
std::string format_responses_csv(const std::vector<WorkerResponse>& responses, const std::vector<LabelTask>& tasks);

void export_tasks(const std::vector<LabelTask>& tasks, const std::string& path);
std::vector<WorkerResponse> import_responses(const std::string& path, const std::vector<LabelTask>& tasks);

/// Columns: word, verdict, relevant_votes, total_votes.
std::string format_report_csv(const AggregationReport& report);
nlohmann::json report_to_json(const AggregationReport& report);

}  // namespace lexiscope::crowd
