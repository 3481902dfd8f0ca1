#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relex {

/// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `offset` is a byte offset into the source when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset = npos)
        : Error(offset == npos ? what : what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class RenderError : public Error {
public:
    using Error::Error;
};

/// Network failure, or a non-2xx reply once retries are spent.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int status = 0, int attempts = 0)
        : Error(what), status_(status), attempts_(attempts) {}

    /// Last HTTP status seen, 0 when no response arrived.
    int status() const noexcept { return status_; }
    int attempts() const noexcept { return attempts_; }

private:
    int status_;
    int attempts_;
};

/// The endpoint answered 2xx but the payload is unusable.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class CacheConflict : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Retrieval would put a test-split sentence into a prompt.
class LeakageError : public Error {
public:
    using Error::Error;
};

}  // namespace relex
