#include "lexiscope/csv.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/format.hpp"

#include <fstream>
#include <sstream>

namespace lexiscope {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::empty_vocabulary: return "empty_vocabulary";
        case ErrorCode::training_divergence: return "training_divergence";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::undefined_similarity: return "undefined_similarity";
        case ErrorCode::empty_query: return "empty_query";
        case ErrorCode::unknown_word: return "unknown_word";
        case ErrorCode::schema_violation: return "schema_violation";
        case ErrorCode::quorum: return "quorum";
        case ErrorCode::undefined_correlation: return "undefined_correlation";
        case ErrorCode::infinite_f: return "infinite_f";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::string trim(std::string_view text) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
    return std::string(text);
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

namespace csv {

std::vector<Record> parse(std::string_view text) {
    std::vector<Record> records;
    std::size_t i = 0;
    std::size_t line = 1;
    while (i < text.size()) {
        // skip blank lines
        if (text[i] == '\n' || text[i] == '\r') {
            if (text[i] == '\n') ++line;
            ++i;
            continue;
        }
        Record rec{line, {}};
        std::string field;
        bool done = false;
        while (!done) {
            field.clear();
            if (i < text.size() && text[i] == '"') {
                const std::size_t quote_line = line;
                ++i;
                bool closed = false;
                while (i < text.size()) {
                    char c = text[i];
                    if (c == '"') {
                        if (i + 1 < text.size() && text[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        closed = true;
                        break;
                    }
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
                if (!closed)
                    throw Error(ErrorCode::parse_error,
                                "row " + std::to_string(quote_line) + ": unterminated quoted field");
                // anything between the closing quote and the separator is appended verbatim
                while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                    field.push_back(text[i++]);
            } else {
                while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                    field.push_back(text[i++]);
            }
            rec.fields.push_back(field);
            if (i < text.size() && text[i] == ',') {
                ++i;
            } else {
                if (i < text.size() && text[i] == '\r') ++i;
                if (i < text.size() && text[i] == '\n') {
                    ++i;
                    ++line;
                }
                done = true;
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<Record> parse_with_header(std::string_view text, const std::vector<std::string>& expected) {
    auto records = parse(text);
    if (records.empty()) throw Error(ErrorCode::parse_error, "row 1: missing header");
    Row header = records.front().fields;
    for (auto& h : header) h = trim(h);
    if (header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw Error(ErrorCode::parse_error, "row 1: expected header '" + want + "'");
    }
    records.erase(records.begin());
    for (const auto& r : records) {
        if (r.fields.size() != expected.size())
            throw Error(ErrorCode::parse_error, "row " + std::to_string(r.line) + ": expected " +
                                                    std::to_string(expected.size()) + " fields, got " +
                                                    std::to_string(r.fields.size()));
    }
    return records;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(row[i]);
    }
    out.push_back('\n');
    return out;
}

}  // namespace csv
}  // namespace lexiscope
