#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jetrl {

/// Input outside the mathematical domain of an operation (non-finite values,
/// negative distances, non-binary indicators).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// API misuse: shape mismatches, stepping a finished episode, empty inputs.
class UsageError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Invalid configuration. `key()` names the offending setting when known.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what, std::string key = {})
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
};

/// Malformed binary file; carries the byte offset where parsing failed.
class FormatError : public std::runtime_error {
  public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), message_(what),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }
    /// Description without the offset suffix.
    const std::string& message() const noexcept { return message_; }

  private:
    std::string message_;
    std::uint64_t offset_;
};

/// Filesystem failure; the message always contains the path.
class IoError : public std::runtime_error {
  public:
    IoError(const std::string& what, const std::string& path)
        : std::runtime_error(what + ": " + path), path_(path) {}

    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

} // namespace jetrl
