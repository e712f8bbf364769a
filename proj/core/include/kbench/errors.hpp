#pragma once

#include <stdexcept>
#include <string>

namespace kbench {

// Base for every error the library raises on purpose. Test-level failures
// (a workload that ran and failed) are encoded in result statuses, not
// exceptions; exceptions are for malformed inputs and broken machinery.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed structured document (YAML/JSON). Carries source location.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string source, int line = -1, int column = -1)
        : Error(format(what, source, line, column)),
          source_(std::move(source)),
          line_(line),
          column_(column) {}

    const std::string& source() const { return source_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& what, const std::string& source, int line,
                              int column) {
        std::string msg = source.empty() ? what : source + ": " + what;
        if (line >= 0) {
            msg += " (line " + std::to_string(line + 1);
            if (column >= 0) msg += ", column " + std::to_string(column + 1);
            msg += ")";
        }
        return msg;
    }

    std::string source_;
    int line_;
    int column_;
};

// Well-formed document that violates a semantic invariant. `location` names
// the offending element (e.g. "systems[0].partitions[1]").
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, std::string location = {})
        : Error(location.empty() ? what : location + ": " + what),
          location_(std::move(location)) {}

    const std::string& location() const { return location_; }

private:
    std::string location_;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Document-path mutation could not descend (intermediate node is a scalar,
// array index out of range, ...).
class PathError : public Error {
public:
    using Error::Error;
};

// Bad extraction pattern: invalid regex or capture-group count != 1.
class PatternError : public Error {
public:
    using Error::Error;
};

// Metric inputs outside their domain (nonpositive compute time, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Workload manifest unusable: missing kind, labels node of the wrong type.
class ManifestError : public Error {
public:
    using Error::Error;
};

// Client-side configuration problems: unreadable kubeconfig, unset
// KUBECONFIG when a context is required, unknown context name.
class ConfigError : public Error {
public:
    using Error::Error;
};

// The scheduler backend rejected a workload at submit time.
class SubmitError : public Error {
public:
    using Error::Error;
};

// Broken machinery (unreachable API, filesystem failure). Distinct from a
// test failure: run_suite aggregates these without aborting other instances.
class InfrastructureError : public Error {
public:
    using Error::Error;
};

// HTTP-level failure from the Kubernetes API. `status` is the HTTP status
// code; 0 means the request never completed (connection/transport error).
class ApiError : public Error {
public:
    ApiError(int status, std::string reason, const std::string& what)
        : Error("api error: " + what + (status > 0 ? " [" + std::to_string(status) + " " + reason + "]"
                                                   : " [connection]")),
          status_(status),
          reason_(std::move(reason)) {}

    int status() const { return status_; }
    const std::string& reason() const { return reason_; }
    bool is_connection() const { return status_ == 0 || status_ >= 500; }
    bool is_conflict() const { return status_ == 409; }
    bool is_forbidden() const { return status_ == 403; }
    bool is_not_found() const { return status_ == 404; }

private:
    int status_;
    std::string reason_;
};

}  // namespace kbench
