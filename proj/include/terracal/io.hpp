#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace terracal::io {

// Shortest round-trip decimal formatting (std::to_chars); parses with full precision.
std::string format_double(double v);
double parse_double(const std::string& s);

// One CSV row; no quoting (numeric data only throughout the toolkit).
std::string join_csv(const std::vector<std::string>& fields);
std::vector<std::string> split_csv(const std::string& line);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);

// FNV-1a 64-bit content digest, hex-encoded. Used for manifest bookkeeping.
std::string digest_hex(const std::string& content);
std::string digest_file(const std::string& path);

// Flat `key = value` config with '#' comments. Later keys override earlier ones.
class Config {
  public:
    Config() = default;
    static Config parse(const std::string& text);       // throws with line number on bad syntax
    static Config load(const std::string& path);        // throws if missing

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_num(const std::string& key, double fallback) const;
    bool get_flag(const std::string& key, bool fallback) const;
    std::optional<double> get_opt(const std::string& key) const;
    // whitespace/comma separated list
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    // merge: values in `over` win
    void merge(const Config& over);

    const std::map<std::string, std::string>& entries() const { return values_; }
    std::string serialize() const;

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace terracal::io
