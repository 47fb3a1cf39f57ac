#include "vidcont/core/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vidcont/core/errors.hpp"
#include "vidcont/core/hash.hpp"

namespace vidcont {

namespace {

std::string trim(const std::string &s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

void Config::set(const std::string &key, const std::string &value) { values_[key] = value; }

bool Config::has(const std::string &key) const { return values_.count(key) > 0; }

void Config::apply_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        values_[key] = value;
    }
}

void Config::apply_env(const std::string &prefix) {
    for (auto &[key, value] : values_) {
        std::string env_key = prefix;
        for (char c : key) {
            if (c == '.')
                env_key += "__";
            else
                env_key += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        if (const char *env = std::getenv(env_key.c_str())) value = env;
    }
}

void Config::apply_assignment(const std::string &assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got: " + assignment);
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key in assignment: " + assignment);
    values_[key] = value;
}

std::string Config::get_str(const std::string &key, const std::string &fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string Config::require_str(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
}

int64_t Config::get_int(const std::string &key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config key " + key + " is not an integer: " + it->second);
    }
}

double Config::get_double(const std::string &key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config key " + key + " is not a number: " + it->second);
    }
}

bool Config::get_bool(const std::string &key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + " is not a boolean: " + it->second);
}

std::string Config::resolved_text() const {
    std::ostringstream out;
    for (const auto &[key, value] : values_) out << key << " = " << value << "\n";
    return out.str();
}

uint64_t Config::hash() const { return fnv1a64(resolved_text()); }

void Config::save(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config snapshot: " + path);
    out << resolved_text();
}

Config Config::from_text(const std::string &text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

}  // namespace vidcont
