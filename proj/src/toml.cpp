#include "slalom/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slalom::toml {

namespace {

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Cuts a trailing comment, honouring quotes.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

/// Bracket depth delta of a comment-stripped line, for multi-line arrays.
int bracket_delta(const std::string& s) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') in_str = true;
        else if (c == '[') ++depth;
        else if (c == ']') --depth;
    }
    return depth;
}

bool valid_bare_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
              c == '-' || c == '.'))
            return false;
    return k.front() != '.' && k.back() != '.' &&
           k.find("..") == std::string::npos;
}

std::string parse_basic_string(const std::string& s, const std::string& origin,
                               int line) {
    // s includes the surrounding quotes.
    std::string out;
    std::size_t i = 1;
    while (i < s.size() && s[i] != '"') {
        char c = s[i];
        if (c == '\\') {
            if (i + 1 >= s.size()) fail(origin, line, "dangling escape");
            switch (s[++i]) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            default:
                fail(origin, line,
                     std::string("unsupported escape \\") + s[i]);
            }
        } else {
            out += c;
        }
        ++i;
    }
    if (i >= s.size()) fail(origin, line, "unterminated string");
    if (trim(s.substr(i + 1)) != "")
        fail(origin, line, "trailing characters after string");
    return out;
}

Value parse_value(const std::string& raw, const std::string& origin, int line);

Value parse_array(const std::string& s, const std::string& origin, int line) {
    // s includes the surrounding brackets.
    Value::Array items;
    std::string current;
    int depth = 0;
    bool in_str = false;
    auto flush = [&]() {
        const std::string el = trim(current);
        if (!el.empty()) items.push_back(parse_value(el, origin, line));
        else if (!current.empty() || !items.empty())
            ; // trailing comma: nothing buffered, fine
        current.clear();
    };
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const char c = s[i];
        if (in_str) {
            current += c;
            if (c == '\\' && i + 2 < s.size()) current += s[++i];
            else if (c == '"') in_str = false;
            continue;
        }
        if (c == '"') {
            in_str = true;
            current += c;
        } else if (c == '[') {
            ++depth;
            current += c;
        } else if (c == ']') {
            --depth;
            current += c;
        } else if (c == ',' && depth == 0) {
            flush();
        } else {
            current += c;
        }
    }
    if (in_str || depth != 0) fail(origin, line, "malformed array");
    flush();
    return Value(std::move(items));
}

Value parse_value(const std::string& raw, const std::string& origin,
                  int line) {
    if (raw.empty()) fail(origin, line, "missing value");
    if (raw.front() == '"') return Value(parse_basic_string(raw, origin, line));
    if (raw.front() == '[') {
        if (raw.back() != ']') fail(origin, line, "unterminated array");
        return parse_array(raw, origin, line);
    }
    if (raw == "true") return Value(true);
    if (raw == "false") return Value(false);

    // Number: integer when it scans as one with nothing left over,
    // otherwise a float.
    {
        std::int64_t iv = 0;
        const auto [p, ec] =
            std::from_chars(raw.data(), raw.data() + raw.size(), iv);
        if (ec == std::errc() && p == raw.data() + raw.size() &&
            raw.find('.') == std::string::npos &&
            raw.find('e') == std::string::npos &&
            raw.find('E') == std::string::npos)
            return Value(iv);
    }
    {
        double dv = 0.0;
        const auto [p, ec] =
            std::from_chars(raw.data(), raw.data() + raw.size(), dv);
        if (ec == std::errc() && p == raw.data() + raw.size()) return Value(dv);
    }
    fail(origin, line, "cannot parse value '" + raw + "'");
}

} // namespace

const std::string& Value::as_string() const {
    if (!is_string())
        throw std::runtime_error(std::string("TOML value is ") + type_name() +
                                 ", wanted string");
    return std::get<std::string>(v_);
}

std::int64_t Value::as_integer() const {
    if (!is_integer())
        throw std::runtime_error(std::string("TOML value is ") + type_name() +
                                 ", wanted integer");
    return std::get<std::int64_t>(v_);
}

double Value::as_number() const {
    if (is_integer()) return static_cast<double>(std::get<std::int64_t>(v_));
    if (!is_float())
        throw std::runtime_error(std::string("TOML value is ") + type_name() +
                                 ", wanted number");
    return std::get<double>(v_);
}

bool Value::as_boolean() const {
    if (!is_boolean())
        throw std::runtime_error(std::string("TOML value is ") + type_name() +
                                 ", wanted boolean");
    return std::get<bool>(v_);
}

const Value::Array& Value::as_array() const {
    if (!is_array())
        throw std::runtime_error(std::string("TOML value is ") + type_name() +
                                 ", wanted array");
    return std::get<Array>(v_);
}

const char* Value::type_name() const {
    if (is_string()) return "a string";
    if (is_integer()) return "an integer";
    if (is_float()) return "a float";
    if (is_boolean()) return "a boolean";
    return "an array";
}

Table Table::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

Table Table::parse_string(const std::string& text, const std::string& origin) {
    Table table;
    std::istringstream in(text);
    std::string physical;
    std::string prefix;
    int line_no = 0;

    while (std::getline(in, physical)) {
        ++line_no;
        std::string logical = trim(strip_comment(physical));
        if (logical.empty()) continue;
        const int start_line = line_no;

        // Table header.
        if (logical.front() == '[' && logical.find('=') == std::string::npos) {
            if (logical.size() < 3 || logical.back() != ']')
                fail(origin, line_no, "malformed table header");
            if (logical[1] == '[')
                fail(origin, line_no,
                     "arrays of tables are not supported by this reader");
            prefix = trim(logical.substr(1, logical.size() - 2));
            if (!valid_bare_key(prefix))
                fail(origin, line_no, "bad table name '" + prefix + "'");
            continue;
        }

        // Key-value pair; pull in continuation lines while an array is open.
        while (bracket_delta(logical) > 0) {
            std::string more;
            if (!std::getline(in, more))
                fail(origin, start_line, "unterminated multi-line array");
            ++line_no;
            logical += " " + trim(strip_comment(more));
        }

        const std::size_t eq = logical.find('=');
        if (eq == std::string::npos)
            fail(origin, start_line, "expected 'key = value'");
        const std::string key = trim(logical.substr(0, eq));
        const std::string raw = trim(logical.substr(eq + 1));
        if (!valid_bare_key(key))
            fail(origin, start_line, "bad key '" + key + "'");

        const std::string full = prefix.empty() ? key : prefix + "." + key;
        if (table.values_.count(full))
            fail(origin, start_line, "duplicate key '" + full + "'");
        table.values_.emplace(full, parse_value(raw, origin, start_line));
        table.order_.push_back(full);
    }
    return table;
}

bool Table::has(const std::string& key) const { return values_.count(key) > 0; }

const Value& Table::require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw std::runtime_error("missing config key '" + key + "'");
    return it->second;
}

std::string Table::get_string(const std::string& key) const {
    try {
        return require(key).as_string();
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("key '" + key + "': " + e.what());
    }
}

std::int64_t Table::get_integer(const std::string& key) const {
    try {
        return require(key).as_integer();
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("key '" + key + "': " + e.what());
    }
}

double Table::get_number(const std::string& key) const {
    try {
        return require(key).as_number();
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("key '" + key + "': " + e.what());
    }
}

bool Table::get_boolean(const std::string& key) const {
    try {
        return require(key).as_boolean();
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("key '" + key + "': " + e.what());
    }
}

std::vector<double> Table::get_number_array(const std::string& key) const {
    std::vector<double> out;
    for (const Value& v : require(key).as_array()) out.push_back(v.as_number());
    return out;
}

std::vector<std::string>
Table::get_string_array(const std::string& key) const {
    std::vector<std::string> out;
    for (const Value& v : require(key).as_array()) out.push_back(v.as_string());
    return out;
}

std::string Table::get_string_or(const std::string& key,
                                 std::string def) const {
    return has(key) ? get_string(key) : std::move(def);
}

std::int64_t Table::get_integer_or(const std::string& key,
                                   std::int64_t def) const {
    return has(key) ? get_integer(key) : def;
}

double Table::get_number_or(const std::string& key, double def) const {
    return has(key) ? get_number(key) : def;
}

bool Table::get_boolean_or(const std::string& key, bool def) const {
    return has(key) ? get_boolean(key) : def;
}

std::vector<std::string> Table::keys() const { return order_; }

} // namespace slalom::toml
