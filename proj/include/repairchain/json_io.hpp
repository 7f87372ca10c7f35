#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "model.hpp"

namespace repairchain::io {

using Json = nlohmann::ordered_json;

/// Parses {"family":"geometric","p":0.25} | {"family":"explicit","a":[...]} |
/// {"family":"half_stable"} | {"family":"power_zeta","alpha":3.0}.
/// Series families also accept an optional "tilt" in (0,1].
inline ModelSpec parse_model_spec(const Json& doc) {
    if (!doc.is_object()) throw InvalidSpec("model spec must be a JSON object");
    const auto family = doc.find("family");
    if (family == doc.end() || !family->is_string()) throw InvalidSpec("missing \"family\"");
    const auto number = [&](const char* key) {
        const auto it = doc.find(key);
        if (it == doc.end() || !it->is_number()) throw InvalidSpec(std::string("missing numeric \"") + key + "\"");
        return it->get<double>();
    };
    ModelSpec spec;
    const auto name = family->get<std::string>();
    if (name == "geometric") {
        spec.family = Family::Geometric;
        spec.p = number("p");
    } else if (name == "explicit") {
        spec.family = Family::Explicit;
        const auto it = doc.find("a");
        if (it == doc.end() || !it->is_array()) throw InvalidSpec("missing array \"a\"");
        for (const auto& v : *it) {
            if (!v.is_number()) throw InvalidSpec("\"a\" must hold numbers");
            spec.a.push_back(v.get<double>());
        }
    } else if (name == "half_stable") {
        spec.family = Family::HalfStable;
    } else if (name == "power_zeta") {
        spec.family = Family::PowerZeta;
        spec.alpha = number("alpha");
    } else {
        throw InvalidSpec("unknown family \"" + name + "\"");
    }
    if (doc.contains("tilt")) spec.tilt = number("tilt");
    return spec;
}

inline ModelSpec parse_model_spec(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidSpec(std::string("malformed JSON: ") + e.what());
    }
    return parse_model_spec(doc);
}

inline ModelSpec parse_model_spec(const char* text) { return parse_model_spec(std::string(text)); }

/// Inline JSON, or "@path" to read the spec from a file.
inline ModelSpec load_model_spec(const std::string& arg) {
    if (!arg.empty() && arg.front() == '@') {
        std::ifstream in(arg.substr(1));
        if (!in) throw InvalidSpec("cannot read " + arg.substr(1));
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_model_spec(ss.str());
    }
    return parse_model_spec(arg);
}

inline Json to_json(const ModelSpec& spec) {
    Json j;
    j["family"] = std::string(to_string(spec.family));
    switch (spec.family) {
        case Family::Geometric: j["p"] = spec.p; break;
        case Family::PowerZeta: j["alpha"] = spec.alpha; break;
        case Family::Explicit: j["a"] = spec.a; break;
        default: break;
    }
    if (spec.tilt != 1.0) j["tilt"] = spec.tilt;
    return j;
}

/// Decimal with 17 significant digits; +inf is written as the string "Infinity".
inline std::string format_number(double x) {
    if (std::isnan(x)) return "null";
    if (std::isinf(x)) return x > 0 ? "\"Infinity\"" : "\"-Infinity\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

namespace detail {
inline void dump(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ',';
                first = false;
                out += Json(key).dump();
                out += ':';
                dump(value, out);
            }
            out += '}';
            break;
        }
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& value : j) {
                if (!first) out += ',';
                first = false;
                dump(value, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::number_float: out += format_number(j.get<double>()); break;
        default: out += j.dump(); break;
    }
}
}  // namespace detail

/// Serializes with every floating-point value at 17 significant digits.
inline std::string dump(const Json& j) {
    std::string out;
    detail::dump(j, out);
    return out;
}

}  // namespace repairchain::io
