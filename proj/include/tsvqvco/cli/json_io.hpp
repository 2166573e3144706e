#pragma once

// JSON plumbing for the command-line front end. Every numeric value in input
// and output documents is a quantity object {"value": x, "unit": "..."};
// integers that count things use unit "1".

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tsvqvco/errors.hpp"

namespace tsvqvco::cli {

using Json = nlohmann::ordered_json;

/// Bad flags, unreadable files, malformed JSON or out-of-range fields. Exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

inline Json quantity(double value, const std::string& unit) { return Json{{"value", value}, {"unit", unit}}; }
inline Json quantity(int value, const std::string& unit) { return Json{{"value", value}, {"unit", unit}}; }

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // byte is one past the offending character
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json read_json_file(const std::string& path) { return parse_json(read_text(path), path); }

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Reads object fields with the field path in every error message.
class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InputError(where("") + " must be a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    Reader child(const std::string& key) const {
        if (!has(key)) throw InputError("missing field '" + where(key) + "'");
        return Reader(j_.at(key), where(key));
    }

    double quantity(const std::string& key, const std::string& unit) const {
        if (!has(key)) throw InputError("missing field '" + where(key) + "'");
        const Json& q = j_.at(key);
        if (!q.is_object() || !q.contains("value") || !q.contains("unit") || !q["value"].is_number() ||
            !q["unit"].is_string())
            throw InputError("field '" + where(key) + "' must be {\"value\": <number>, \"unit\": \"" + unit + "\"}");
        if (q["unit"].get<std::string>() != unit)
            throw InputError("field '" + where(key) + "' expects unit '" + unit + "', got '" +
                             q["unit"].get<std::string>() + "'");
        return q["value"].get<double>();
    }

    double quantity(const std::string& key, const std::string& unit, double fallback) const {
        return has(key) ? quantity(key, unit) : fallback;
    }

    int count(const std::string& key) const {
        const double v = quantity(key, "1");
        if (v != static_cast<double>(static_cast<int>(v))) throw InputError("field '" + where(key) + "' must be an integer");
        return static_cast<int>(v);
    }

    int count(const std::string& key, int fallback) const { return has(key) ? count(key) : fallback; }

    std::string string(const std::string& key) const {
        if (!has(key)) throw InputError("missing field '" + where(key) + "'");
        if (!j_.at(key).is_string()) throw InputError("field '" + where(key) + "' must be a string");
        return j_.at(key).get<std::string>();
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }

    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw InputError("field '" + where(key) + "' must be true or false");
        return j_.at(key).get<bool>();
    }

    const Json& raw() const { return j_; }
    std::string where(const std::string& key) const {
        if (key.empty()) return path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const Json& j_;
    std::string path_;
};

/// First numeric field not wrapped in a quantity object, as a JSON pointer; empty if none.
inline std::string find_bare_number(const Json& j, const std::string& at = "") {
    if (j.is_number()) return at.empty() ? "/" : at;
    if (j.is_object()) {
        if (j.contains("value") && j.contains("unit") && j["unit"].is_string() && j.size() == 2 &&
            (j["value"].is_number() || j["value"].is_null()))
            return "";
        for (auto it = j.begin(); it != j.end(); ++it) {
            auto hit = find_bare_number(it.value(), at + "/" + it.key());
            if (!hit.empty()) return hit;
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            auto hit = find_bare_number(j[i], at + "/" + std::to_string(i));
            if (!hit.empty()) return hit;
        }
    }
    return "";
}

}  // namespace tsvqvco::cli
