#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace director::scenario {

/// JSON value that remembers where it started in the source text. Numbers are
/// restricted to integers, which is all the scenario format uses.
struct JsonValue {
    enum class Type { Null, Bool, Integer, String, Array, Object };

    Type type = Type::Null;
    bool boolean = false;
    std::int64_t integer = 0;
    std::string string;
    std::vector<JsonValue> items;
    std::vector<std::pair<std::string, JsonValue>> members;
    int line = 1;
    int col = 1;

    bool is_object() const noexcept { return type == Type::Object; }
    bool is_array() const noexcept { return type == Type::Array; }
    bool is_string() const noexcept { return type == Type::String; }
    const JsonValue* find(std::string_view key) const;
};

std::string_view type_name(JsonValue::Type t);

class JsonSyntaxError : public std::runtime_error {
public:
    JsonSyntaxError(int line, int col, const std::string& message)
        : std::runtime_error(message), line_(line), col_(col) {}
    int line() const noexcept { return line_; }
    int col() const noexcept { return col_; }

private:
    int line_;
    int col_;
};

JsonValue parse_json(std::string_view text);

}  // namespace director::scenario
