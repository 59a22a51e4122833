#include "lexiscope/cli.hpp"

#include "lexiscope/analyzer.hpp"
#include "lexiscope/crowd.hpp"
#include "lexiscope/csv.hpp"
#include "lexiscope/embedding_io.hpp"
#include "lexiscope/lexicon.hpp"
#include "lexiscope/service.hpp"
#include "lexiscope/stats.hpp"
#include "lexiscope/trainer.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace lexiscope::cli {
namespace fs = std::filesystem;

namespace {

enum class OutputFormat { csv, json };

struct Globals {
    std::uint64_t seed = 1;
    bool quiet = false;
    OutputFormat format = OutputFormat::csv;
};

/// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& contents, std::ostream& out) {
    if (path.empty() || path == "-") out << contents;
    else write_file(path, contents);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (auto t = trim(cur); !t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (auto t = trim(cur); !t.empty()) out.push_back(t);
    return out;
}

std::shared_ptr<const Space> load_space(const std::string& path) {
    return std::make_shared<const Space>(load_embeddings<double>(path));
}

/// A category file, or every category file in a directory (sorted by file name).
std::vector<Category> load_categories(const std::string& path) {
    std::vector<Category> out;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path)) {
            const auto name = e.path().filename().string();
            if (e.is_regular_file() && name.size() > 5 && name.ends_with(".json") && !name.ends_with(".generated.json"))
                files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.push_back(load_category(f.string()));
    } else {
        out.push_back(load_category(path));
    }
    if (out.empty()) throw Error(ErrorCode::invalid_argument, "no category files found in '" + path + "'");
    return out;
}

crowd::Label parse_label_option(const std::string& text) {
    auto l = crowd::parse_label(text);
    if (!l) throw Error(ErrorCode::invalid_argument, "unknown label '" + text + "'");
    return *l;
}

std::map<std::string, std::string> read_group_manifest(const std::string& path) {
    std::map<std::string, std::string> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() != 2)
            throw Error(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": expected '<doc> <group>'");
        out[std::string(fields[0])] = std::string(fields[1]);
    }
    return out;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
    std::string corpus;
    std::string out;
    int dims = 150;
    int window = 5;
    std::uint64_t min_count = 30;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;
    double sample = 1e-5;
    double stopword_logprob = -8.0;
    bool no_stopwords = false;
    bool fixed_window = false;
    int threads = 1;
};

int run_train(const TrainArgs& a, const Globals& g, std::ostream& err) {
    Corpus corpus;
    std::istringstream in(read_file(a.corpus));
    std::string line;
    while (std::getline(in, line)) {
        auto tokens = text::normalized_tokens(line);
        if (!tokens.empty()) corpus.push_back(std::move(tokens));
    }
    TrainingConfig config;
    config.dims = a.dims;
    config.window = a.window;
    config.window_mode = a.fixed_window ? WindowMode::fixed : WindowMode::dynamic;
    config.min_count = a.min_count;
    config.negative_samples = a.negatives;
    config.epochs = a.epochs;
    config.learning_rate = a.lr;
    config.downsample_threshold = a.sample > 0 ? std::optional<double>(a.sample) : std::nullopt;
    config.stopword_logprob = a.no_stopwords ? std::nullopt : std::optional<double>(a.stopword_logprob);
    config.rng_seed = g.seed;
    config.threads = a.threads;

    const auto model = train<double>(corpus, config);
    save_embeddings<double>(a.out, model.vocabulary.words(), model.embeddings.input);
    if (!g.quiet) {
        err << "vocabulary " << model.vocabulary.size() << " words from " << model.vocabulary.total_tokens()
            << " tokens; " << config.epochs << " epochs";
        if (!model.epoch_loss.empty()) err << "; final mean loss " << format_number(model.epoch_loss.back());
        err << "\n";
    }
    return 0;
}

// --- neighbors --------------------------------------------------------------

struct NeighborArgs {
    std::string embeddings;
    std::string query;
    std::size_t k = 8;
};

int run_neighbors(const NeighborArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto space = load_space(a.embeddings);
    std::vector<std::string> terms;
    for (auto t : split_whitespace(a.query)) terms.emplace_back(t);
    const auto q = query_vector<double>("", terms, *space);
    if (!q.missing.empty() && !g.quiet)
        for (const auto& m : q.missing) err << "not in vocabulary: " << m << "\n";
    std::unordered_set<std::string> exclude;
    for (const auto& t : q.resolved) exclude.insert(space->word(*space->resolve(t)));
    const auto result = nearest(*space, q.vector, a.k, exclude);
    if (g.format == OutputFormat::json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : result) arr.push_back({{"word", t.word}, {"similarity", t.similarity}});
        out << arr.dump(2) << "\n";
    } else {
        out << "word,similarity\n";
        for (const auto& t : result) out << csv::format_row({t.word, format_number(t.similarity)});
    }
    return 0;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
    std::string embeddings;
    std::string name;
    std::string seeds;
    double threshold = 0.5;
    std::size_t max_terms = 200;
    bool raw_vectors = false;
    std::string out;
};

int run_generate(const GenerateArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto space = load_space(a.embeddings);
    CategorySpec spec{a.name, split_list(a.seeds), a.threshold, a.max_terms};
    if (!g.quiet)
        for (const auto& w : spec.warnings()) err << "warning: " << w << "\n";
    GenerateOptions opts;
    opts.seed_vectors = a.raw_vectors ? SeedVectors::raw : SeedVectors::unit;
    const Category cat = generate(spec, *space, opts);
    if (!g.quiet) {
        const auto q = query_vector<double>(spec.name, spec.seeds, *space, opts.seed_vectors);
        for (const auto& m : q.missing) err << "not in vocabulary: " << m << "\n";
        err << cat.members.size() << " members\n";
    }
    emit(a.out, serialize_category(cat), out);
    return 0;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
    std::string categories;
    std::string input;
    std::string manifest;
    std::string out;
};

int run_analyze(const AnalyzeArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto categories = load_categories(a.categories);
    const CategoryMatcher matcher(categories);
    std::string manifest = a.manifest;
    if (manifest.empty() && a.input.ends_with(".manifest")) manifest = a.input;

    std::ifstream text_in;
    DocumentSource source;
    if (!manifest.empty()) {
        source = manifest_documents(manifest);
    } else {
        text_in.open(a.input, std::ios::binary);
        if (!text_in) throw Error(ErrorCode::io_error, "cannot open '" + a.input + "' for reading");
        source = line_documents(text_in);
    }

    std::ostringstream buffer;
    std::ofstream file;
    std::ostream* sink = &out;
    if (!a.out.empty() && a.out != "-") {
        file.open(a.out, std::ios::binary | std::ios::trunc);
        if (!file) throw Error(ErrorCode::io_error, "cannot open '" + a.out + "' for writing");
        sink = &file;
    }

    bool first = true;
    if (g.format == OutputFormat::csv) *sink << csv::format_row(analysis_csv_header);
    else *sink << "{\"documents\":[";
    const auto totals = analyze_corpus(source, matcher, [&](const DocumentAnalysis& d) {
        if (!d.result) {
            err << "error: document " << d.id << ": " << d.error << "\n";
            return;
        }
        if (g.format == OutputFormat::csv) {
            *sink << format_analysis_rows(d);
        } else {
            auto doc = analysis_to_json(*d.result);
            doc.erase("matches");
            doc["doc_id"] = d.id;
            if (!d.group.empty()) doc["group"] = d.group;
            *sink << (first ? "" : ",") << doc.dump();
            first = false;
        }
    });
    if (g.format == OutputFormat::json) {
        nlohmann::json t = nlohmann::json::object();
        for (std::size_t c = 0; c < totals.categories.size(); ++c) t[totals.categories[c]] = totals.raw[c];
        *sink << "],\"totals\":" << nlohmann::json{{"raw", t}, {"total_tokens", totals.total_tokens}}.dump() << "}\n";
    }
    if (!g.quiet)
        err << totals.documents << " documents, " << totals.failed << " failed, " << totals.total_tokens
            << " tokens\n";
    return totals.failed > 0 ? 2 : 0;
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
    std::string groups;
    std::string results;
    std::string group_a;
    std::string group_b;
    double alpha = 0.05;
    std::string test = "welch";
    std::string out;
};

int run_compare(const CompareArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto group_of = read_group_manifest(a.groups);
    const auto rows = parse_analysis_csv(read_file(a.results));
    const auto summaries = stats::summarize_groups(rows, group_of);
    auto pick = [&](const std::string& name, std::size_t fallback) -> const stats::GroupSummary& {
        if (name.empty()) {
            if (summaries.size() <= fallback)
                throw Error(ErrorCode::invalid_argument, "the results cover fewer than two groups");
            return summaries[fallback];
        }
        for (const auto& s : summaries)
            if (s.group == name) return s;
        throw Error(ErrorCode::invalid_argument, "group '" + name + "' has no documents in the results");
    };
    const auto& ga = pick(a.group_a, 0);
    const auto& gb = pick(a.group_b, 1);
    const auto test = a.test == "chi-square" ? stats::SignificanceTest::chi_square : stats::SignificanceTest::welch;
    const auto table = stats::compare_groups(ga, gb, a.alpha, test);

    std::string text;
    if (g.format == OutputFormat::json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : table)
            arr.push_back({{"category", r.category},
                           {"odds_ratio", r.odds_ratio},
                           {"p", r.p_value},
                           {"significant", r.significant},
                           {"degenerate", r.degenerate}});
        text = nlohmann::json{{"group_a", ga.group}, {"group_b", gb.group}, {"rows", arr}}.dump(2) + "\n";
    } else {
        text = csv::format_row({"category", "odds_ratio", "p", "significant"});
        for (const auto& r : table)
            text += csv::format_row({r.category, format_number(r.odds_ratio), format_number(r.p_value),
                                     r.significant ? "true" : "false"});
    }
    emit(a.out, text, out);
    if (!g.quiet) {
        err << "comparing " << ga.group << " against " << gb.group << "; Bonferroni threshold "
            << format_number(stats::bonferroni_threshold(table.size(), a.alpha)) << "\n";
        for (const auto& r : table)
            if (r.degenerate) err << "degenerate: " << r.category << " is absent from both groups\n";
    }
    return 0;
}

// --- agree ------------------------------------------------------------------

struct AgreeArgs {
    std::string a;
    std::string b;
    std::string field = "normalized";
    std::string out;
};

int run_agree(const AgreeArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto field = a.field == "raw" ? stats::CountField::raw : stats::CountField::normalized;
    const auto [ta, tb] =
        stats::align_tools(parse_analysis_csv(read_file(a.a)), parse_analysis_csv(read_file(a.b)), field);
    const auto report = stats::agreement(ta, tb);
    std::string text;
    if (g.format == OutputFormat::json) {
        nlohmann::json per = nlohmann::json::object();
        for (const auto& [cat, r] : report.per_category) per[cat] = r;
        text = nlohmann::json{{"per_category", per}, {"overall", report.overall}, {"excluded", report.excluded}}
                   .dump(2) +
               "\n";
    } else {
        text = csv::format_row({"category", "r"});
        for (const auto& [cat, r] : report.per_category) text += csv::format_row({cat, format_number(r)});
        text += csv::format_row({"average", format_number(report.overall)});
    }
    emit(a.out, text, out);
    if (!g.quiet)
        for (const auto& c : report.excluded) err << "excluded (zero variance): " << c << "\n";
    return 0;
}

// --- crowd ------------------------------------------------------------------

struct CrowdArgs {
    std::string category;
    std::string tasks;
    std::string responses;
    std::string out;
    std::string report;
    std::size_t words_per_task = 20;
    std::uint64_t workers = 3;
    std::string price = "0.14";
    int quorum = 3;
    std::string keep_at_least = "weakly";
};

int run_crowd_export(const CrowdArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto cat = load_category(a.category);
    const auto tasks = crowd::chunk_tasks(cat, a.words_per_task);
    emit(a.out, crowd::format_tasks_csv(tasks), out);
    if (!g.quiet)
        err << tasks.size() << " tasks x " << a.workers << " workers at $" << crowd::Money::parse(a.price).to_string()
            << " = $" << crowd::estimate_cost(tasks.size(), a.workers, crowd::Money::parse(a.price)).to_string()
            << "\n";
    return 0;
}

std::string render_report(const crowd::AggregationReport& report, const Globals& g) {
    if (g.format == OutputFormat::json) return crowd::report_to_json(report).dump(2) + "\n";
    return crowd::format_report_csv(report);
}

void print_rates(const crowd::AggregationReport& report, std::ostream& err) {
    err << report.kept() << "/" << report.words.size() << " kept; acceptance "
        << format_number(report.acceptance_rate) << ", unanimity " << format_number(report.unanimity_rate)
        << ", minority relevance " << format_number(report.minority_relevance_rate) << "\n";
}

int run_crowd_import(const CrowdArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto cat = load_category(a.category);
    const auto tasks = crowd::chunk_tasks(cat, a.words_per_task);
    const auto responses = crowd::import_responses(a.responses, tasks);
    const auto report = crowd::aggregate(responses, {a.quorum, parse_label_option(a.keep_at_least)});
    const auto filtered = apply_crowd_filter(cat, report.verdicts());
    emit(a.out, serialize_category(filtered), out);
    if (!a.report.empty()) write_file(a.report, render_report(report, g));
    if (!g.quiet) print_rates(report, err);
    return 0;
}

int run_crowd_aggregate(const CrowdArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const auto tasks = crowd::parse_tasks_csv(read_file(a.tasks));
    const auto responses = crowd::import_responses(a.responses, tasks);
    const auto report = crowd::aggregate(responses, {a.quorum, parse_label_option(a.keep_at_least)});
    emit(a.out, render_report(report, g), out);
    if (!g.quiet) print_rates(report, err);
    return 0;
}

// --- serve ------------------------------------------------------------------

struct ServeArgs {
    std::string embeddings;
    std::string categories;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_text_bytes = 1 << 20;
};

service::Service* active_service = nullptr;

extern "C" void stop_on_signal(int) {
    if (active_service) active_service->stop();
}

int run_serve(const ServeArgs& a, const Globals& g, std::ostream& err) {
    auto space = load_space(a.embeddings);
    auto store = std::make_shared<service::CategoryStore>(a.categories);
    service::ServiceConfig config;
    config.max_text_bytes = a.max_text_bytes;
    service::Service svc(space, store, config);
    const int requested = service::resolve_port(a.port);
    // port 0 picks a free port; the line below reports the real one
    int port = requested;
    if (requested == 0) port = svc.bind_any_port(a.host);
    else if (!svc.bind_port(a.host, requested)) port = -1;
    if (port < 0) throw Error(ErrorCode::io_error, "cannot bind " + a.host + ":" + std::to_string(requested));
    if (!g.quiet) err << "serving " << space->size() << " words on http://" << a.host << ":" << port << std::endl;
    active_service = &svc;
    std::signal(SIGINT, stop_on_signal);
    std::signal(SIGTERM, stop_on_signal);
    const bool ok = svc.listen_after_bind();
    active_service = nullptr;
    if (!ok) throw Error(ErrorCode::io_error, "cannot listen on " + a.host + ":" + std::to_string(port));
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lexicon generation and category-based text analysis", "lexiscope"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals globals;
    std::string format = "csv";
    app.add_option("--seed", globals.seed, "Random seed")->capture_default_str();
    app.add_flag("--quiet", globals.quiet, "Suppress diagnostics");
    app.add_option("--format", format, "Result format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train skip-gram embeddings on a corpus (one document per line)");
    train_cmd->add_option("--corpus", train_args.corpus, "Corpus text file")->required();
    train_cmd->add_option("--out", train_args.out, "Output embedding file")->required();
    train_cmd->add_option("--dims", train_args.dims, "Embedding dimensions")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--window", train_args.window, "Maximum context radius")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--min-count", train_args.min_count, "Minimum word count")->capture_default_str();
    train_cmd->add_option("--negatives", train_args.negatives, "Negative samples per pair")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", train_args.epochs, "Passes over the corpus")->capture_default_str()->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--lr", train_args.lr, "Initial learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--sample", train_args.sample, "Downsampling threshold; 0 disables")->capture_default_str()->check(CLI::NonNegativeNumber);
    auto* logprob_opt = train_cmd->add_option("--stopword-logprob", train_args.stopword_logprob,
                                              "Words with ln(frequency) above this are stopwords")->capture_default_str();
    train_cmd->add_flag("--no-stopwords", train_args.no_stopwords, "Disable the stopword rule")->excludes(logprob_opt);
    train_cmd->add_flag("--fixed-window", train_args.fixed_window, "Use the full window for every center word");
    train_cmd->add_option("--threads", train_args.threads, "Worker threads; >1 is non-deterministic")->capture_default_str()->check(CLI::PositiveNumber);

    NeighborArgs neighbor_args;
    auto* neighbors_cmd = app.add_subcommand("neighbors", "Nearest words to the sum of the query words");
    neighbors_cmd->add_option("--embeddings", neighbor_args.embeddings, "Embedding file")->required();
    neighbors_cmd->add_option("--query", neighbor_args.query, "Space-separated query words")->required();
    neighbors_cmd->add_option("--k", neighbor_args.k, "Number of neighbors")->capture_default_str()->check(CLI::PositiveNumber);

    GenerateArgs generate_args;
    auto* generate_cmd = app.add_subcommand("generate", "Generate a category from seed words");
    generate_cmd->add_option("--embeddings", generate_args.embeddings, "Embedding file")->required();
    generate_cmd->add_option("--name", generate_args.name, "Category name")->required();
    generate_cmd->add_option("--seeds", generate_args.seeds, "Comma-separated seed words")->required();
    generate_cmd->add_option("--threshold", generate_args.threshold, "Minimum cosine similarity")->capture_default_str();
    generate_cmd->add_option("--max-terms", generate_args.max_terms, "Maximum category size")->capture_default_str();
    generate_cmd->add_flag("--raw-vectors", generate_args.raw_vectors, "Sum raw rather than unit seed vectors");
    generate_cmd->add_option("--out", generate_args.out, "Output category file (default stdout)");

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "Count category terms in documents");
    analyze_cmd->add_option("--categories", analyze_args.categories, "Category file or directory")->required();
    auto* input_opt = analyze_cmd->add_option("--input", analyze_args.input,
                                              "Text file with one document per line, or a *.manifest file");
    auto* manifest_opt = analyze_cmd->add_option("--manifest", analyze_args.manifest,
                                                 "Manifest of '<path> [group]' lines");
    input_opt->excludes(manifest_opt);
    analyze_cmd->add_option("--out", analyze_args.out, "Output file (default stdout)");

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "Odds ratios and significance between two document groups");
    compare_cmd->add_option("--groups", compare_args.groups, "Manifest of '<doc_id> <group>' lines")->required();
    compare_cmd->add_option("--results", compare_args.results, "Analysis CSV")->required();
    compare_cmd->add_option("--a", compare_args.group_a, "Numerator group (default: first seen)");
    compare_cmd->add_option("--b", compare_args.group_b, "Denominator group (default: second seen)");
    compare_cmd->add_option("--alpha", compare_args.alpha, "Family-wise significance level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    compare_cmd->add_option("--test", compare_args.test, "Significance test")->check(CLI::IsMember({"welch", "chi-square"}))->capture_default_str();
    compare_cmd->add_option("--out", compare_args.out, "Output file (default stdout)");

    AgreeArgs agree_args;
    auto* agree_cmd = app.add_subcommand("agree", "Per-category Pearson correlation between two tools' analyses");
    agree_cmd->add_option("--a", agree_args.a, "First analysis CSV")->required();
    agree_cmd->add_option("--b", agree_args.b, "Second analysis CSV")->required();
    agree_cmd->add_option("--field", agree_args.field, "Count column")->check(CLI::IsMember({"normalized", "raw"}))->capture_default_str();
    agree_cmd->add_option("--out", agree_args.out, "Output file (default stdout)");

    CrowdArgs crowd_args;
    auto* crowd_cmd = app.add_subcommand("crowd", "Crowd labeling: export tasks, import responses, aggregate votes");
    crowd_cmd->require_subcommand(1);
    auto* export_cmd = crowd_cmd->add_subcommand("export", "Write labeling tasks for a category");
    export_cmd->add_option("--category", crowd_args.category, "Category file")->required();
    export_cmd->add_option("--out", crowd_args.out, "Task CSV (default stdout)");
    export_cmd->add_option("--words-per-task", crowd_args.words_per_task, "Words per task")->capture_default_str()->check(CLI::PositiveNumber);
    export_cmd->add_option("--workers", crowd_args.workers, "Workers per task, for the cost estimate")->capture_default_str();
    export_cmd->add_option("--price", crowd_args.price, "Price per task, for the cost estimate")->capture_default_str();

    auto* import_cmd = crowd_cmd->add_subcommand("import", "Filter a category by worker responses");
    import_cmd->add_option("--category", crowd_args.category, "Category file")->required();
    import_cmd->add_option("--responses", crowd_args.responses, "Response CSV")->required();
    import_cmd->add_option("--out", crowd_args.out, "Filtered category file (default stdout)");
    import_cmd->add_option("--report", crowd_args.report, "Also write the aggregation report here");
    import_cmd->add_option("--words-per-task", crowd_args.words_per_task, "Words per task used at export")->capture_default_str()->check(CLI::PositiveNumber);
    import_cmd->add_option("--quorum", crowd_args.quorum, "Responses per word")->capture_default_str()->check(CLI::PositiveNumber);
    import_cmd->add_option("--keep-at-least", crowd_args.keep_at_least, "Lowest label that votes to keep")
        ->check(CLI::IsMember({"weakly", "related", "strongly"}))->capture_default_str();

    auto* aggregate_cmd = crowd_cmd->add_subcommand("aggregate", "Majority-vote verdicts and agreement rates");
    aggregate_cmd->add_option("--tasks", crowd_args.tasks, "Task CSV")->required();
    aggregate_cmd->add_option("--responses", crowd_args.responses, "Response CSV")->required();
    aggregate_cmd->add_option("--out", crowd_args.out, "Output file (default stdout)");
    aggregate_cmd->add_option("--quorum", crowd_args.quorum, "Responses per word")->capture_default_str()->check(CLI::PositiveNumber);
    aggregate_cmd->add_option("--keep-at-least", crowd_args.keep_at_least, "Lowest label that votes to keep")
        ->check(CLI::IsMember({"weakly", "related", "strongly"}))->capture_default_str();

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP JSON API");
    serve_cmd->add_option("--embeddings", serve_args.embeddings, "Embedding file")->required();
    serve_cmd->add_option("--categories", serve_args.categories, "Category store directory")->required();
    serve_cmd->add_option("--host", serve_args.host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", serve_args.port, "Port (LEXISCOPE_PORT overrides)")->capture_default_str();
    serve_cmd->add_option("--max-text-bytes", serve_args.max_text_bytes, "Largest /analyze text accepted")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
        out << target->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        const CLI::App* target = &app;
        while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
        err << "error: " << e.what() << "\n\n" << target->help();
        return 1;
    }
    globals.format = format == "json" ? OutputFormat::json : OutputFormat::csv;

    try {
        if (train_cmd->parsed()) return run_train(train_args, globals, err);
        if (neighbors_cmd->parsed()) return run_neighbors(neighbor_args, globals, out, err);
        if (generate_cmd->parsed()) return run_generate(generate_args, globals, out, err);
        if (analyze_cmd->parsed()) {
            if (analyze_args.input.empty() && analyze_args.manifest.empty()) {
                err << "error: analyze needs --input or --manifest\n\n" << analyze_cmd->help();
                return 1;
            }
            return run_analyze(analyze_args, globals, out, err);
        }
        if (compare_cmd->parsed()) return run_compare(compare_args, globals, out, err);
        if (agree_cmd->parsed()) return run_agree(agree_args, globals, out, err);
        if (export_cmd->parsed()) return run_crowd_export(crowd_args, globals, out, err);
        if (import_cmd->parsed()) return run_crowd_import(crowd_args, globals, out, err);
        if (aggregate_cmd->parsed()) return run_crowd_aggregate(crowd_args, globals, out, err);
        if (serve_cmd->parsed()) return run_serve(serve_args, globals, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << app.help();
    return 1;
}

int dispatch(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args, out, err);
}

}  // namespace lexiscope::cli
