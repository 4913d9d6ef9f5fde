#include "convinv/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace convinv::harness::toml {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
    throw std::runtime_error("toml line " + std::to_string(line_no) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Strips a trailing comment, honoring quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string parse_quoted(const std::string& raw, std::size_t line_no) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
        fail(line_no, "expected quoted string: " + raw);
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 2 < raw.size()) {
            const char n = raw[i + 1];
            if (n == '"' || n == '\\') {
                out.push_back(n);
                ++i;
                continue;
            }
        }
        out.push_back(raw[i]);
    }
    return out;
}

bool looks_like_int(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])) && s[i] != '_') return false;
    }
    return true;
}

std::string drop_underscores(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c != '_') out.push_back(c);
    }
    return out;
}

Value parse_scalar(const std::string& raw, std::size_t line_no) {
    Value v;
    if (!raw.empty() && raw.front() == '"') {
        v.kind = Value::Kind::string;
        v.s = parse_quoted(raw, line_no);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = Value::Kind::boolean;
        v.b = raw == "true";
        return v;
    }
    if (looks_like_int(raw)) {
        v.kind = Value::Kind::integer;
        v.i = std::stoll(drop_underscores(raw));
        return v;
    }
    try {
        std::size_t used = 0;
        v.d = std::stod(drop_underscores(raw), &used);
        if (used != drop_underscores(raw).size()) fail(line_no, "bad value: " + raw);
        v.kind = Value::Kind::floating;
        return v;
    } catch (const std::invalid_argument&) {
        fail(line_no, "bad value: " + raw);
    } catch (const std::out_of_range&) {
        fail(line_no, "value out of range: " + raw);
    }
}

std::vector<std::string> split_array_items(const std::string& inner, std::size_t line_no) {
    std::vector<std::string> items;
    std::string current;
    bool in_string = false;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        const char c = inner[i];
        if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (in_string) fail(line_no, "unterminated string in array");
    const std::string last = trim(current);
    if (!last.empty()) items.push_back(last);
    return items;
}

Value parse_array(const std::string& raw, std::size_t line_no) {
    Value v;
    const auto items = split_array_items(raw.substr(1, raw.size() - 2), line_no);
    bool any_string = false, any_int = false;
    for (const auto& item : items) {
        const Value s = parse_scalar(item, line_no);
        if (s.kind == Value::Kind::string) {
            any_string = true;
            v.sa.push_back(s.s);
        } else if (s.kind == Value::Kind::integer) {
            any_int = true;
            v.ia.push_back(s.i);
        } else {
            fail(line_no, "arrays may hold strings or integers only");
        }
    }
    if (any_string && any_int) fail(line_no, "mixed array element types");
    v.kind = any_string ? Value::Kind::string_array : Value::Kind::int_array;
    return v;
}

}  // namespace

Table parse(const std::string& content) {
    Table table;
    std::istringstream in(content);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated table header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(line_no, "empty table name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string raw = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (raw.empty()) fail(line_no, "empty value for key " + key);

        Value v;
        if (raw.front() == '[') {
            if (raw.back() != ']') fail(line_no, "arrays must close on the same line");
            v = parse_array(raw, line_no);
        } else {
            v = parse_scalar(raw, line_no);
        }
        const std::string full = section.empty() ? key : section + "." + key;
        table[full] = std::move(v);
    }
    return table;
}

Table parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

namespace {

const Value* find(const Table& t, const std::string& key) {
    auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
}

[[noreturn]] void wrong_kind(const std::string& key, const char* want) {
    throw std::runtime_error("config key " + key + ": expected " + want);
}

}  // namespace

std::string get_string(const Table& t, const std::string& key, const std::string& fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::string) wrong_kind(key, "string");
    return v->s;
}

long long get_int(const Table& t, const std::string& key, long long fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::integer) wrong_kind(key, "integer");
    return v->i;
}

double get_double(const Table& t, const std::string& key, double fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind == Value::Kind::integer) return static_cast<double>(v->i);
    if (v->kind != Value::Kind::floating) wrong_kind(key, "float");
    return v->d;
}

bool get_bool(const Table& t, const std::string& key, bool fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::boolean) wrong_kind(key, "boolean");
    return v->b;
}

std::vector<std::string> get_string_array(const Table& t, const std::string& key,
                                          const std::vector<std::string>& fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind == Value::Kind::int_array && v->ia.empty()) return {};
    if (v->kind != Value::Kind::string_array) wrong_kind(key, "string array");
    return v->sa;
}

std::vector<long long> get_int_array(const Table& t, const std::string& key,
                                     const std::vector<long long>& fallback) {
    const Value* v = find(t, key);
    if (!v) return fallback;
    if (v->kind == Value::Kind::string_array && v->sa.empty()) return {};
    if (v->kind != Value::Kind::int_array) wrong_kind(key, "integer array");
    return v->ia;
}

}  // namespace convinv::harness::toml
