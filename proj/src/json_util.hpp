#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nrpm/error.hpp"

namespace nrpm::detail {

inline nlohmann::json parse_json(std::string_view text) {
    try {
        return nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

/// Rejects non-objects, missing required keys and keys outside both lists.
inline void require_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional, std::string_view what) {
    if (!obj.is_object()) {
        throw ParseError(std::string(what) + ": expected an object");
    }
    for (auto key : required) {
        if (!obj.contains(std::string(key))) {
            throw ParseError(std::string(what) + ": missing key '" + std::string(key) + "'");
        }
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto k : required) {
            known = known || k == key;
        }
        for (auto k : optional) {
            known = known || k == key;
        }
        if (!known) {
            throw ParseError(std::string(what) + ": unknown key '" + key + "'");
        }
    }
}

inline std::string string_field(const nlohmann::json& obj, const char* key, std::string_view what) {
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        throw ParseError(std::string(what) + ": '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

inline double number_field(const nlohmann::json& obj, const char* key, std::string_view what) {
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        throw ParseError(std::string(what) + ": '" + key + "' must be a number");
    }
    return v.get<double>();
}

inline long long integer_field(const nlohmann::json& obj, const char* key, std::string_view what) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
        throw ParseError(std::string(what) + ": '" + key + "' must be an integer");
    }
    return v.get<long long>();
}

inline const nlohmann::json& array_field(const nlohmann::json& obj, const char* key, std::string_view what) {
    const auto& v = obj.at(key);
    if (!v.is_array()) {
        throw ParseError(std::string(what) + ": '" + key + "' must be an array");
    }
    return v;
}

inline std::vector<double> number_list(const nlohmann::json& arr, std::string_view what) {
    if (!arr.is_array()) {
        throw ParseError(std::string(what) + ": expected an array of numbers");
    }
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) {
            throw ParseError(std::string(what) + ": expected an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace nrpm::detail
