#pragma once
// Minimal TOML reader covering the configuration schema: [tables],
// key = value lines with strings, integers, floats, booleans, and
// single-line arrays of strings or integers. Keys are flattened to
// "table.key". Anything outside this subset is a parse error.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace convinv::harness::toml {

struct Value {
    enum class Kind { string, integer, floating, boolean, string_array, int_array };
    Kind kind = Kind::string;
    std::string s;
    long long i = 0;
    double d = 0.0;
    bool b = false;
    std::vector<std::string> sa;
    std::vector<long long> ia;
};

using Table = std::map<std::string, Value>;

Table parse(const std::string& content);
Table parse_file(const std::string& path);

// Typed lookups; a key of the wrong kind is an error, a missing key returns
// the fallback. Integer keys satisfy floating lookups.
std::string get_string(const Table& t, const std::string& key, const std::string& fallback);
long long get_int(const Table& t, const std::string& key, long long fallback);
double get_double(const Table& t, const std::string& key, double fallback);
bool get_bool(const Table& t, const std::string& key, bool fallback);
std::vector<std::string> get_string_array(const Table& t, const std::string& key,
                                          const std::vector<std::string>& fallback);
std::vector<long long> get_int_array(const Table& t, const std::string& key,
                                     const std::vector<long long>& fallback);

}  // namespace convinv::harness::toml
