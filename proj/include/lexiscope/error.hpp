#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexiscope {

enum class ErrorCode {
    empty_vocabulary,
    training_divergence,
    parse_error,
    invalid_argument,
    undefined_similarity,
    empty_query,
    unknown_word,
    schema_violation,
    quorum,
    undefined_correlation,
    infinite_f,
    io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every library failure surfaces as an Error carrying a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lexiscope
