#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vcell {

struct FieldError {
  std::string field;
  std::string message;
};

// Raised for invalid configuration. Carries every offending field so the CLI
// can report them all at once.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<FieldError> fields)
      : std::invalid_argument(render(fields)), fields_(std::move(fields)) {}
  ConfigError(std::string field, std::string message)
      : ConfigError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}

  const std::vector<FieldError>& fields() const noexcept { return fields_; }

 private:
  static std::string render(const std::vector<FieldError>& fields) {
    std::string out = "invalid configuration:";
    for (const auto& f : fields) out += " [" + f.field + ": " + f.message + "]";
    return out;
  }

  std::vector<FieldError> fields_;
};

// Collects field errors during validation and throws once at the end.
class FieldErrors {
 public:
  void require(bool ok, std::string field, std::string message) {
    if (!ok) errors_.push_back({std::move(field), std::move(message)});
  }
  void add(std::string field, std::string message) {
    errors_.push_back({std::move(field), std::move(message)});
  }
  // Copies another collection, prefixing each field path.
  void append(const FieldErrors& other, const std::string& prefix = {}) {
    for (const auto& e : other.errors_) errors_.push_back({prefix + e.field, e.message});
  }
  const std::vector<FieldError>& list() const noexcept { return errors_; }
  bool empty() const noexcept { return errors_.empty(); }
  void throw_if_any() const {
    if (!errors_.empty()) throw ConfigError(errors_);
  }

 private:
  std::vector<FieldError> errors_;
};

class DegenerateChannelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InfeasibleStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vcell
