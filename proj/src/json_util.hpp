#pragma once

// Helpers for strict, schema-checked reading of JSON documents.

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "pimorch/errors.hpp"

namespace pimorch::detail {

using json = nlohmann::ordered_json;

inline json parse_document(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> known,
                                std::string_view where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool found = false;
        for (auto k : known) {
            if (it.key() == k) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw ValidationError(std::string(where) + ": unknown key '" + it.key() + "'");
        }
    }
}

inline const json& require(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ValidationError(std::string(where) + ": missing required key '" + key + "'");
    }
    return *it;
}

template <typename T>
T as(const json& v, const char* key, std::string_view where) {
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
        ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
        ok = v.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
        ok = v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
        ok = v.is_string();
    } else {
        ok = true;
    }
    if (!ok) {
        throw ValidationError(std::string(where) + ": key '" + key + "' has the wrong type");
    }
    return v.get<T>();
}

template <typename T>
T get(const json& obj, const char* key, std::string_view where) {
    return as<T>(require(obj, key, where), key, where);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return as<T>(*it, key, where);
}

inline void check_schema_version(const json& obj, int expected, std::string_view where) {
    int v = get<int>(obj, "schema_version", where);
    if (v != expected) {
        throw ValidationError(std::string(where) + ": unsupported schema_version " +
                              std::to_string(v) + " (expected " + std::to_string(expected) + ")");
    }
}

std::string read_file(const std::string& path);

}  // namespace pimorch::detail
