#pragma once

#include <stdexcept>
#include <string>

namespace pmi {

// Error taxonomy. Kinds map onto the CLI exit codes:
//   config/argument problems -> 2, data problems -> 3, numeric problems -> 4.
enum class ErrorKind {
    argument,            // bad parameter value or misuse of an operation
    config,              // malformed or inconsistent run configuration
    parse,               // unreadable file content
    domain,              // coordinate outside [0,1]^d
    degenerate_dataset,  // fewer than 2 classes, empty dataset
    label_conflict,      // identical points carrying different labels
    io,                  // missing or unwritable file
    divergence,          // non-finite loss during training
    degenerate_density,  // KDE cannot be fit (all points identical)
    data_integrity,      // inconsistent numeric inputs (e.g. negative variance)
    unsupported,         // operation not available for this configuration
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // CLI contract: 0 ok, 2 config error, 3 data error, 4 numeric error.
    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::argument:
            case ErrorKind::config:
            case ErrorKind::unsupported:
                return 2;
            case ErrorKind::parse:
            case ErrorKind::domain:
            case ErrorKind::degenerate_dataset:
            case ErrorKind::label_conflict:
            case ErrorKind::io:
                return 3;
            case ErrorKind::divergence:
            case ErrorKind::degenerate_density:
            case ErrorKind::data_integrity:
                return 4;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

}  // namespace pmi
