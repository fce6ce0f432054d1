#pragma once

#include <stdexcept>
#include <string>

namespace rk {

// Error categories surface through the C API as status codes and through the
// CLI as exit codes (validation-type errors exit 2, everything else exits 1).
enum class ErrorKind {
    InvalidArgument,
    Parse,
    Schema,
    Encoding,
    Split,
    Domain,
    UndefinedMetric,
    Fit,
    Io,
    Config,
    MissingArtifact,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(ErrorKind::Parse, w) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& w) : Error(ErrorKind::Schema, w) {}
};
struct EncodingError : Error {
    explicit EncodingError(const std::string& w) : Error(ErrorKind::Encoding, w) {}
};
struct SplitError : Error {
    explicit SplitError(const std::string& w) : Error(ErrorKind::Split, w) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorKind::Domain, w) {}
};
struct UndefinedMetric : Error {
    explicit UndefinedMetric(const std::string& w) : Error(ErrorKind::UndefinedMetric, w) {}
};
struct FitError : Error {
    explicit FitError(const std::string& w) : Error(ErrorKind::Fit, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
struct MissingArtifact : Error {
    explicit MissingArtifact(const std::string& w) : Error(ErrorKind::MissingArtifact, w) {}
};
struct ArgumentError : Error {
    explicit ArgumentError(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};

} // namespace rk
