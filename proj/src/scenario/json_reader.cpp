#include "director/scenario/json_reader.hpp"

#include <cctype>
#include <limits>

namespace director::scenario {

const JsonValue* JsonValue::find(std::string_view key) const {
    for (const auto& [k, v] : members) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string_view type_name(JsonValue::Type t) {
    switch (t) {
        case JsonValue::Type::Null: return "null";
        case JsonValue::Type::Bool: return "boolean";
        case JsonValue::Type::Integer: return "integer";
        case JsonValue::Type::String: return "string";
        case JsonValue::Type::Array: return "array";
        case JsonValue::Type::Object: return "object";
    }
    return "?";
}

namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    JsonValue document() {
        skip_ws();
        auto v = value(0);
        skip_ws();
        if (pos_ < text_.size()) fail("trailing characters after document");
        return v;
    }

private:
    static constexpr int kMaxDepth = 256;

    [[noreturn]] void fail(const std::string& msg) const { throw JsonSyntaxError(line_, col_, msg); }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                advance();
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'" + found());
        advance();
    }

    std::string found() const {
        if (at_end()) return " but reached end of input";
        return std::string(" but found '") + peek() + "'";
    }

    JsonValue value(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        JsonValue v;
        v.line = line_;
        v.col = col_;
        switch (peek()) {
            case '{': object(v, depth); break;
            case '[': array(v, depth); break;
            case '"':
                v.type = JsonValue::Type::String;
                v.string = string();
                break;
            case 't': literal("true"); v.type = JsonValue::Type::Bool; v.boolean = true; break;
            case 'f': literal("false"); v.type = JsonValue::Type::Bool; break;
            case 'n': literal("null"); break;
            default:
                if (peek() == '-' || std::isdigit(static_cast<unsigned char>(peek()))) {
                    v.type = JsonValue::Type::Integer;
                    v.integer = integer();
                } else {
                    fail("expected a value" + found());
                }
        }
        return v;
    }

    void literal(std::string_view word) {
        for (char c : word) {
            if (peek() != c) fail("invalid literal, expected '" + std::string(word) + "'");
            advance();
        }
    }

    std::int64_t integer() {
        bool negative = false;
        if (peek() == '-') {
            negative = true;
            advance();
        }
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digit" + found());
        if (peek() == '0' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            fail("leading zeros are not allowed");
        }
        std::uint64_t magnitude = 0;
        const std::uint64_t limit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) + (negative ? 1 : 0);
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            auto digit = static_cast<std::uint64_t>(advance() - '0');
            if (magnitude > (limit - digit) / 10) fail("integer out of range");
            magnitude = magnitude * 10 + digit;
        }
        if (peek() == '.' || peek() == 'e' || peek() == 'E') fail("only integer numbers are supported");
        if (negative) return magnitude == limit ? std::numeric_limits<std::int64_t>::min() : -static_cast<std::int64_t>(magnitude);
        return static_cast<std::int64_t>(magnitude);
    }

    unsigned hex4() {
        unsigned cp = 0;
        for (int i = 0; i < 4; ++i) {
            char c = peek();
            if (!std::isxdigit(static_cast<unsigned char>(c))) fail("invalid \\u escape");
            advance();
            cp = cp * 16 + static_cast<unsigned>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (std::tolower(c) - 'a' + 10));
        }
        return cp;
    }

    static void append_utf8(std::string& out, unsigned cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    std::string string() {
        expect('"');
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated string");
            char c = peek();
            if (c == '"') {
                advance();
                return out;
            }
            if (static_cast<unsigned char>(c) < 0x20) fail("control character in string");
            advance();
            if (c != '\\') {
                out += c;
                continue;
            }
            char e = at_end() ? '\0' : advance();
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case '/': out += '/'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 't': out += '\t'; break;
                case 'u': {
                    unsigned cp = hex4();
                    if (cp >= 0xD800 && cp <= 0xDBFF) {
                        if (peek() != '\\') fail("unpaired surrogate");
                        advance();
                        expect('u');
                        unsigned lo = hex4();
                        if (lo < 0xDC00 || lo > 0xDFFF) fail("unpaired surrogate");
                        cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                    }
                    append_utf8(out, cp);
                    break;
                }
                default: fail("invalid escape sequence");
            }
        }
    }

    void array(JsonValue& v, int depth) {
        v.type = JsonValue::Type::Array;
        expect('[');
        skip_ws();
        if (peek() == ']') {
            advance();
            return;
        }
        while (true) {
            skip_ws();
            v.items.push_back(value(depth + 1));
            skip_ws();
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() == ']') {
                advance();
                return;
            }
            fail("expected ',' or ']'" + found());
        }
    }

    void object(JsonValue& v, int depth) {
        v.type = JsonValue::Type::Object;
        expect('{');
        skip_ws();
        if (peek() == '}') {
            advance();
            return;
        }
        while (true) {
            skip_ws();
            if (peek() != '"') fail("expected a key string" + found());
            const int key_line = line_;
            const int key_col = col_;
            auto key = string();
            if (v.find(key)) throw JsonSyntaxError(key_line, key_col, "duplicate key '" + key + "'");
            skip_ws();
            expect(':');
            skip_ws();
            v.members.emplace_back(std::move(key), value(depth + 1));
            skip_ws();
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() == '}') {
                advance();
                return;
            }
            fail("expected ',' or '}'" + found());
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

JsonValue parse_json(std::string_view text) { return Reader(text).document(); }

}  // namespace director::scenario
