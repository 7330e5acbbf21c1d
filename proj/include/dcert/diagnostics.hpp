#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dcert {

enum class Severity { Error, Warning };

/// One finding produced by document validation. `path` is a JSON-pointer-like
/// location of the offending element ("/requirements/3/trace/dds/0").
struct SpecDiagnostic {
    Severity severity = Severity::Error;
    std::string path;
    std::string message;

    bool operator==(const SpecDiagnostic&) const = default;
};

/// Fatal parse failure. Carries the element path and, when the failure is
/// syntactic, the 1-based line/column in the source text (0 when unknown).
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string message, std::string path, int line = 0, int column = 0)
        : std::runtime_error(format(message, path, line, column)),
          path_(std::move(path)),
          line_(line),
          column_(column) {}

    const std::string& path() const { return path_; }
    int line() const { return line_; }
    int column() const { return column_; }

  private:
    static std::string format(const std::string& message, const std::string& path,
                              int line, int column) {
        std::string out = message;
        if (line > 0) {
            out += " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
        }
        if (!path.empty()) {
            out += " at " + path;
        }
        return out;
    }

    std::string path_;
    int line_;
    int column_;
};

inline const char* severity_name(Severity s) {
    return s == Severity::Error ? "error" : "warning";
}

}  // namespace dcert
