#pragma once

#include <stdexcept>
#include <string>

namespace abstain {

// Bad upstream data: schema violations, empty files, malformed JSONL.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Caller passed something the contract forbids (bad fraction, missing pool,
// mismatched spec/instance...). CLI maps these to exit code 2.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what)
        : std::invalid_argument(what) {}
};

// Context pool unusable: empty after filtering, or no eligible entry.
class PoolError : public std::runtime_error {
public:
    explicit PoolError(const std::string& what) : std::runtime_error(what) {}
};

// Endpoint unreachable or still failing after all retries.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& what)
        : std::runtime_error(what) {}
};

// Endpoint rejected the request (4xx other than 429); retrying won't help.
class RequestError : public std::runtime_error {
public:
    explicit RequestError(const std::string& what)
        : std::runtime_error(what) {}
};

// Endpoint returned 2xx but the body is not a chat completion.
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace abstain
