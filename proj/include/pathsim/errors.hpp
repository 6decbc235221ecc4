#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pathsim {

/// Machine-readable failure categories. The CLI maps these onto exit codes:
/// input/validation errors -> 2, undefined quantities -> 3, numerical -> 4.
enum class Errc {
    dimension_mismatch,
    invalid_argument,
    validation_failed,
    parse_failed,
    unknown_name,
    path_cap_exceeded,
    postselection_failed,
    undefined_quantity,
    numerical_failure,
};

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

/// Operand shapes disagree (vector/operator dimensions).
class DimensionError : public Error {
  public:
    explicit DimensionError(const std::string& what) : Error(Errc::dimension_mismatch, what) {}
};

/// A value fails a construction-time invariant (non-finite entry, empty
/// vector, non-unitary matrix, bad meter parameters, ...).
class InvalidArgumentError : public Error {
  public:
    explicit InvalidArgumentError(const std::string& what) : Error(Errc::invalid_argument, what) {}
};

/// One diagnostic from scenario parsing or validation. `code` is a stable
/// machine-readable identifier, `location` a JSON-pointer-like field path.
struct Diagnostic {
    std::string code;
    std::string message;
    std::string location;
};

/// A scenario failed validation; carries the full diagnostic list.
class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<Diagnostic> diags)
        : Error(Errc::validation_failed, summarize(diags)), diagnostics_(std::move(diags)) {}
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

  private:
    static std::string summarize(const std::vector<Diagnostic>& diags) {
        std::string s = "scenario validation failed";
        for (const auto& d : diags) s += "\n  [" + d.code + "] " + d.location + ": " + d.message;
        return s;
    }
    std::vector<Diagnostic> diagnostics_;
};

/// A scenario document could not be parsed at all.
class ParseError : public Error {
  public:
    ParseError(std::vector<Diagnostic> diags, const std::string& what)
        : Error(Errc::parse_failed, what), diagnostics_(std::move(diags)) {}
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

  private:
    std::vector<Diagnostic> diagnostics_;
};

/// Requested quantity is undefined because post-selection succeeds with
/// (squared) weight below threshold; raised instead of returning NaN.
class PostselectionError : public Error {
  public:
    explicit PostselectionError(const std::string& what) : Error(Errc::postselection_failed, what) {}
};

/// Internal numerical damage (conservation or normalization check failed,
/// composed unitary drifted, ...).
class NumericalError : public Error {
  public:
    explicit NumericalError(const std::string& what) : Error(Errc::numerical_failure, what) {}
};

}  // namespace pathsim
