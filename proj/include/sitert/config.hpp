#pragma once

// Minimal TOML subset reader for the flat config files used by the CLI:
// [section] headers, key = value with numbers, booleans, quoted strings,
// and one-line arrays.  Section names are flattened into dotted keys.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sitert/geom.hpp"

namespace sitert {

class FlatToml {
public:
    static FlatToml parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw InputError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    static FlatToml parse(const std::string& text, const std::string& origin = "<string>") {
        FlatToml toml;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip_comment(line);
            s = trim(s);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw InputError(origin + ":" + std::to_string(lineno) + ": bad section header");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw InputError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty() || value.empty())
                throw InputError(origin + ":" + std::to_string(lineno) + ": empty key or value");
            if (!section.empty()) key = section + "." + key;
            toml.values_[key] = value;
        }
        return toml;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw InputError("config key '" + key + "' is not a number: " + it->second);
        }
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stol(it->second);
        } catch (const std::exception&) {
            // allow scientific notation for counts like 1e6
            double d = get_double(key, static_cast<double>(fallback));
            return static_cast<long>(d);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        throw InputError("config key '" + key + "' is not a boolean: " + it->second);
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return unquote(it->second);
    }

    std::vector<std::string> get_string_array(const std::string& key,
                                              const std::vector<std::string>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_array(it->second, key);
    }

    std::vector<double> get_double_array(const std::string& key,
                                         const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        for (const auto& s : parse_array(it->second, key)) {
            try {
                out.push_back(std::stod(s));
            } catch (const std::exception&) {
                throw InputError("config key '" + key + "' has non-numeric element: " + s);
            }
        }
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::string strip_comment(const std::string& s) {
        bool in_str = false;
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_str = !in_str;
            if (s[i] == '#' && !in_str) return s.substr(0, i);
        }
        return s;
    }

    static std::string unquote(const std::string& s) {
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
            return s.substr(1, s.size() - 2);
        return s;
    }

    static std::vector<std::string> parse_array(const std::string& v, const std::string& key) {
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw InputError("config key '" + key + "' is not an array: " + v);
        std::vector<std::string> out;
        std::string body = v.substr(1, v.size() - 2);
        std::istringstream ls(body);
        std::string item;
        while (std::getline(ls, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(unquote(item));
        }
        return out;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace sitert
