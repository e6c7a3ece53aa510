#include "driftbench/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <vector>

#include "driftbench/errors.hpp"

namespace driftbench {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw ParseError("config line " + std::to_string(line_no) + ": " + what);
}

bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

// Strips a trailing comment, respecting quoted strings.
std::string_view strip_comment(std::string_view s, std::size_t line_no) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') {
                if (i + 1 >= s.size()) {
                    fail(line_no, "dangling escape");
                }
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    if (in_string) {
        fail(line_no, "unterminated string");
    }
    return s;
}

std::string parse_string(std::string_view raw, std::size_t line_no) {
    if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
        fail(line_no, "malformed string value");
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '"') {
            fail(line_no, "unexpected quote inside string");
        }
        if (c == '\\') {
            ++i;
            if (i + 1 >= raw.size()) {
                fail(line_no, "dangling escape");
            }
            switch (raw[i]) {
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                default: fail(line_no, std::string("unsupported escape \\") + raw[i]);
            }
        }
        out.push_back(c);
    }
    return out;
}

json parse_scalar(std::string_view raw, std::size_t line_no) {
    if (raw.empty()) {
        fail(line_no, "missing value");
    }
    if (raw.front() == '"') {
        return parse_string(raw, line_no);
    }
    if (raw == "true") {
        return true;
    }
    if (raw == "false") {
        return false;
    }
    const std::string text(raw);
    const bool looks_float = text.find_first_of(".eE") != std::string::npos;
    if (!looks_float) {
        if (text.front() != '-') {
            std::uint64_t u = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), u);
            if (ec == std::errc() && p == text.data() + text.size()) {
                return u;
            }
        } else {
            std::int64_t i = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
            if (ec == std::errc() && p == text.data() + text.size()) {
                return i;
            }
        }
    }
    double d = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec == std::errc() && p == text.data() + text.size()) {
        return d;
    }
    fail(line_no, "unparseable value \"" + text + "\"");
}

json parse_value(std::string_view raw, std::size_t line_no) {
    raw = trim(raw);
    if (raw.empty()) {
        fail(line_no, "missing value");
    }
    if (raw.front() != '[') {
        return parse_scalar(raw, line_no);
    }
    if (raw.back() != ']') {
        fail(line_no, "array must open and close on one line");
    }
    json arr = json::array();
    std::string_view body = raw.substr(1, raw.size() - 2);
    // Split on commas outside strings. Nested arrays are not supported.
    std::size_t start = 0;
    bool in_string = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
        const bool at_end = i == body.size();
        const char c = at_end ? ',' : body[i];
        if (!at_end && in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            fail(line_no, "nested arrays are not supported");
        } else if (c == ',') {
            const std::string_view piece = trim(body.substr(start, i - start));
            start = i + 1;
            if (piece.empty()) {
                if (at_end) {
                    break;  // empty array, or a trailing comma
                }
                fail(line_no, "empty array element");
            }
            arr.push_back(parse_scalar(piece, line_no));
        }
    }
    return arr;
}

}  // namespace

nlohmann::ordered_json parse_toml_lite(const std::string& text) {
    json root = json::object();
    json* table = &root;
    std::set<std::string> declared_tables;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line_raw(text.data() + pos,
                                        (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string_view line = trim(strip_comment(line_raw, line_no));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                fail(line_no, "malformed table header");
            }
            if (line[1] == '[') {
                fail(line_no, "arrays of tables are not supported");
            }
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            table = &root;
            std::string normalized;
            std::size_t seg_start = 0;
            for (std::size_t i = 0; i <= name.size(); ++i) {
                if (i == name.size() || name[i] == '.') {
                    const std::string_view seg = trim(name.substr(seg_start, i - seg_start));
                    if (seg.empty()) {
                        fail(line_no, "empty table name segment");
                    }
                    for (char c : seg) {
                        if (!is_bare_char(c)) {
                            fail(line_no, "bad character in table name");
                        }
                    }
                    if (!normalized.empty()) {
                        normalized += '.';
                    }
                    normalized.append(seg);
                    json& slot = (*table)[std::string(seg)];
                    if (slot.is_null()) {
                        slot = json::object();
                    } else if (!slot.is_object()) {
                        fail(line_no, "table name collides with a value");
                    }
                    table = &slot;
                    seg_start = i + 1;
                }
            }
            if (!declared_tables.insert(normalized).second) {
                fail(line_no, "table [" + normalized + "] is declared twice");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(line_no, "expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (key.empty()) {
            fail(line_no, "empty key");
        }
        for (char c : key) {
            if (!is_bare_char(c)) {
                fail(line_no, "bad character in key \"" + std::string(key) +
                                  "\" (quoted and dotted keys are not supported)");
            }
        }
        const std::string key_str(key);
        if (table->contains(key_str)) {
            fail(line_no, "duplicate key \"" + key_str + "\"");
        }
        (*table)[key_str] = parse_value(line.substr(eq + 1), line_no);
    }
    return root;
}

}  // namespace driftbench
