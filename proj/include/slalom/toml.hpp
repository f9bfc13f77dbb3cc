#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace slalom::toml {

/// Scalar or homogeneous-array value. This reader covers the slice of TOML
/// the experiment configs use: [table] headers, bare (possibly dotted) keys,
/// strings, integers, floats, booleans, arrays (nested, multi-line), and
/// comments. It does not try to be a full implementation.
class Value {
public:
    using Array = std::vector<Value>;

    explicit Value(std::string v) : v_(std::move(v)) {}
    explicit Value(std::int64_t v) : v_(v) {}
    explicit Value(double v) : v_(v) {}
    explicit Value(bool v) : v_(v) {}
    explicit Value(Array v) : v_(std::move(v)) {}

    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_integer() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_float() const { return std::holds_alternative<double>(v_); }
    bool is_boolean() const { return std::holds_alternative<bool>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }

    const std::string& as_string() const;
    std::int64_t as_integer() const;
    /// Floats and integers both read as double.
    double as_number() const;
    bool as_boolean() const;
    const Array& as_array() const;

    const char* type_name() const;

private:
    std::variant<std::string, std::int64_t, double, bool, Array> v_;
};

/// Parsed document, flattened to dotted keys ("train.epochs").
class Table {
public:
    static Table parse_file(const std::string& path);
    static Table parse_string(const std::string& text,
                              const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    /// Typed getters; throw std::runtime_error naming the key when it is
    /// missing or has the wrong type.
    std::string get_string(const std::string& key) const;
    std::int64_t get_integer(const std::string& key) const;
    double get_number(const std::string& key) const; // int or float
    bool get_boolean(const std::string& key) const;
    std::vector<double> get_number_array(const std::string& key) const;
    std::vector<std::string> get_string_array(const std::string& key) const;

    std::string get_string_or(const std::string& key, std::string def) const;
    std::int64_t get_integer_or(const std::string& key, std::int64_t def) const;
    double get_number_or(const std::string& key, double def) const;
    bool get_boolean_or(const std::string& key, bool def) const;

    /// All keys in document order of first appearance.
    std::vector<std::string> keys() const;

private:
    const Value& require(const std::string& key) const;

    std::map<std::string, Value> values_;
    std::vector<std::string> order_;
};

} // namespace slalom::toml
