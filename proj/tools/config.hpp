#pragma once

// Flat key = value run configuration with section prefixes ("grid.modes").
// Every key has a default; unknown keys and malformed values are rejected
// with the file name and line. Later sources override earlier ones:
// defaults < config file < command-line flags.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ostrovsky::cli {

enum class KeyType { kReal, kInt, kBool, kText, kRealList, kIntList };

struct KeyInfo {
  std::string key;
  KeyType type;
  std::string default_value;
  std::string help;
};

/// All recognized keys, in documentation order.
const std::vector<KeyInfo>& schema();
/// One line per key: "  key = default    help", for --help.
std::string schema_help();

class RunConfig {
 public:
  RunConfig();  // all defaults

  /// Throws PreconditionError ("path:line: ...") on unknown keys, duplicate
  /// keys, missing '=' or values of the wrong type; missing file names the path.
  void load_file(const std::filesystem::path& path);
  /// Parses "key=value" text as if it were a file called `origin`.
  void load_text(std::string_view text, std::string_view origin);
  /// Validated assignment; `origin` prefixes any diagnostic.
  void set(std::string_view key, std::string_view value, std::string_view origin = "flag");

  const std::string& text(std::string_view key) const;
  double real(std::string_view key) const;
  long integer(std::string_view key) const;
  std::uint64_t seed(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::vector<double> reals(std::string_view key) const;
  std::vector<long> integers(std::string_view key) const;

  /// Fully resolved key -> value map (sorted).
  const std::map<std::string, std::string>& resolved() const { return values_; }
  /// "key=value" lines for embedding in artifacts.
  std::vector<std::string> echo() const;

 private:
  const KeyInfo& info(std::string_view key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace ostrovsky::cli
