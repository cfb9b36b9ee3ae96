#pragma once

// Reading and writing reactor configurations.
//
// The accepted format is a small TOML subset: `key = value` lines, `[table]`
// headers, dotted keys, numbers, double-quoted strings, arrays (may span
// lines, trailing comma allowed) and inline tables. `#` starts a comment.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "scf/core_model.hpp"

namespace scf {

namespace config_detail {

struct Value;
using Array = std::vector<Value>;
using Table = std::vector<std::pair<std::string, Value>>;

struct Value {
    std::variant<double, std::string, Array, Table> data;
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    /// Parses a whole document into flat dotted keys.
    Table document()
    {
        Table out;
        std::string prefix;
        for (;;) {
            skip_blank_lines();
            if (at_end())
                break;
            if (peek() == '[') {
                ++pos_;
                skip_ws();
                prefix = key();
                skip_ws();
                expect(']');
                end_of_line();
                continue;
            }
            std::string k = key();
            skip_ws();
            expect('=');
            skip_ws();
            Value v = value();
            end_of_line();
            std::string full = prefix.empty() ? k : prefix + "." + k;
            for (const auto& [existing, unused] : out)
                if (existing == full)
                    fail("duplicate key '" + full + "'");
            out.emplace_back(std::move(full), std::move(v));
        }
        return out;
    }

    Value single_value()
    {
        skip_space_and_newlines();
        Value v = value();
        skip_space_and_newlines();
        if (!at_end())
            fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i)
            if (text_[i] == '\n')
                ++line;
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
    }

    [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
    [[nodiscard]] char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void expect(char c)
    {
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws()
    {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r'))
            ++pos_;
    }

    void skip_comment()
    {
        if (peek() == '#')
            while (!at_end() && peek() != '\n')
                ++pos_;
    }

    void skip_space_and_newlines()
    {
        for (;;) {
            skip_ws();
            skip_comment();
            if (peek() == '\n')
                ++pos_;
            else
                return;
        }
    }

    void skip_blank_lines() { skip_space_and_newlines(); }

    void end_of_line()
    {
        skip_ws();
        skip_comment();
        if (at_end())
            return;
        if (peek() != '\n')
            fail("unexpected characters at end of line");
        ++pos_;
    }

    std::string key()
    {
        std::string out;
        for (;;) {
            std::size_t start = pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
                ++pos_;
            if (pos_ == start)
                fail("expected a key");
            out.append(text_.substr(start, pos_ - start));
            if (peek() != '.')
                return out;
            ++pos_;
            out.push_back('.');
        }
    }

    Value value()
    {
        const char c = peek();
        if (c == '"')
            return Value{string_literal()};
        if (c == '[')
            return Value{array()};
        if (c == '{')
            return Value{inline_table()};
        return Value{number()};
    }

    std::string string_literal()
    {
        expect('"');
        std::string out;
        while (!at_end() && peek() != '"') {
            if (peek() == '\n')
                fail("unterminated string");
            if (peek() == '\\') {
                ++pos_;
                if (at_end())
                    fail("unterminated escape");
            }
            out.push_back(text_[pos_++]);
        }
        expect('"');
        return out;
    }

    double number()
    {
        std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '-' ||
                             peek() == '+' || peek() == '_'))
            ++pos_;
        std::string token(text_.substr(start, pos_ - start));
        std::erase(token, '_');
        if (!token.empty() && token.front() == '+')
            token.erase(0, 1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
            fail("invalid number '" + token + "'");
        return v;
    }

    Array array()
    {
        expect('[');
        Array out;
        for (;;) {
            skip_space_and_newlines();
            if (peek() == ']') {
                ++pos_;
                return out;
            }
            out.push_back(value());
            skip_space_and_newlines();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            if (peek() != ']')
                fail("expected ',' or ']' in array");
        }
    }

    Table inline_table()
    {
        expect('{');
        Table out;
        skip_ws();
        if (peek() == '}') {
            ++pos_;
            return out;
        }
        for (;;) {
            skip_ws();
            std::string k = key();
            skip_ws();
            expect('=');
            skip_ws();
            out.emplace_back(std::move(k), value());
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            expect('}');
            return out;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline double as_number(const Value& v, const std::string& key)
{
    if (const auto* d = std::get_if<double>(&v.data))
        return *d;
    throw Error(ErrorCode::ParseError, "key '" + key + "' must be a number");
}

inline Vec as_numbers(const Value& v, const std::string& key)
{
    const auto* a = std::get_if<Array>(&v.data);
    if (!a)
        throw Error(ErrorCode::ParseError, "key '" + key + "' must be an array of numbers");
    Vec out;
    for (const auto& e : *a)
        out.push_back(as_number(e, key));
    return out;
}

inline std::size_t as_count(const Value& v, const std::string& key)
{
    const double d = as_number(v, key);
    if (d < 0.0 || d != std::floor(d) || d > 1e6)
        throw Error(ErrorCode::ParseError, "key '" + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(d);
}

inline UptakeKind as_kind(const Value& v)
{
    const auto* s = std::get_if<std::string>(&v.data);
    if (s && *s == "liebig")
        return UptakeKind::LiebigMin;
    if (s && *s == "product")
        return UptakeKind::Product;
    throw Error(ErrorCode::ParseError, "uptake.kind must be \"liebig\" or \"product\"");
}

inline std::vector<MonodParams> as_monods(const Value& v)
{
    const auto* a = std::get_if<Array>(&v.data);
    if (!a)
        throw Error(ErrorCode::ParseError, "uptake.monod must be an array of {mu_max, k} tables");
    std::vector<MonodParams> out;
    for (const auto& e : *a) {
        const auto* t = std::get_if<Table>(&e.data);
        if (!t)
            throw Error(ErrorCode::ParseError, "uptake.monod entries must be inline tables");
        MonodParams m;
        bool has_mu = false, has_k = false;
        for (const auto& [k, val] : *t) {
            if (k == "mu_max") {
                m.mu_max = as_number(val, "uptake.monod.mu_max");
                has_mu = true;
            } else if (k == "k") {
                m.k = as_number(val, "uptake.monod.k");
                has_k = true;
            } else {
                throw Error(ErrorCode::ParseError, "unknown key '" + k + "' in uptake.monod entry");
            }
        }
        if (!has_mu || !has_k)
            throw Error(ErrorCode::ParseError, "uptake.monod entries need both mu_max and k");
        out.push_back(m);
    }
    return out;
}

inline void assign(ReactorConfig& cfg, const std::string& key, const Value& v)
{
    if (key == "n")
        cfg.n = as_count(v, key);
    else if (key == "D")
        cfg.D = as_number(v, key);
    else if (key == "r")
        cfg.r = as_number(v, key);
    else if (key == "Y")
        cfg.Y = as_numbers(v, key);
    else if (key == "s_in")
        cfg.s_in = as_numbers(v, key);
    else if (key == "s1_bar")
        cfg.s1_bar = as_number(v, key);
    else if (key == "uptake.kind")
        cfg.uptake.kind = as_kind(v);
    else if (key == "uptake.monod")
        cfg.uptake.per_resource = as_monods(v);
    else
        throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
}

inline const char* const required_keys[] = {"n", "D", "r", "Y", "s_in", "s1_bar", "uptake.kind", "uptake.monod"};

} // namespace config_detail

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

inline ReactorConfig parse_config(std::string_view text)
{
    using namespace config_detail;
    Table doc = Parser(text).document();
    ReactorConfig cfg;
    for (const char* k : required_keys) {
        bool found = false;
        for (const auto& [key, unused] : doc)
            found = found || key == k;
        if (!found)
            throw Error(ErrorCode::ParseError, std::string("missing required key '") + k + "'");
    }
    for (const auto& [key, v] : doc)
        assign(cfg, key, v);
    return cfg;
}

inline ReactorConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Applies a `key=value` override using the same value grammar as the file.
/// Arrays may be given bare, e.g. `Y=1,0.5,2`.
inline void apply_override(ReactorConfig& cfg, std::string_view assignment)
{
    using namespace config_detail;
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw Error(ErrorCode::ParseError, "override must look like key=value");
    std::string key(assignment.substr(0, eq));
    std::string text(assignment.substr(eq + 1));
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back())))
        key.pop_back();
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front())))
        key.erase(0, 1);
    if ((key == "Y" || key == "s_in" || key == "uptake.monod") && text.find('[') == std::string::npos)
        text = "[" + text + "]";
    if (key == "uptake.kind" && text.find('"') == std::string::npos)
        text = "\"" + text + "\"";
    assign(cfg, key, Parser(text).single_value());
}

inline std::string emit_config(const ReactorConfig& cfg)
{
    auto list = [](const Vec& v) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i)
            out += (i ? ", " : "") + format_number(v[i]);
        return out + "]";
    };
    std::string out;
    out += "n = " + std::to_string(cfg.n) + "\n";
    out += "D = " + format_number(cfg.D) + "\n";
    out += "r = " + format_number(cfg.r) + "\n";
    out += "Y = " + list(cfg.Y) + "\n";
    out += "s_in = " + list(cfg.s_in) + "\n";
    out += "s1_bar = " + format_number(cfg.s1_bar) + "\n";
    out += "\n[uptake]\n";
    out += std::string("kind = \"") + (cfg.uptake.kind == UptakeKind::LiebigMin ? "liebig" : "product") + "\"\n";
    out += "monod = [\n";
    for (const auto& m : cfg.uptake.per_resource)
        out += "  { mu_max = " + format_number(m.mu_max) + ", k = " + format_number(m.k) + " },\n";
    out += "]\n";
    return out;
}

} // namespace scf
