#include "pollwait/config.hpp"

#include "pollwait/error.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pollwait {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected key=value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

std::string Config::get_str(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

int Config::get_int(const std::string& key, int def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : std::atoi(it->second.c_str());
}

long long Config::get_int64(const std::string& key, long long def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : std::atoll(it->second.c_str());
}

double Config::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : std::atof(it->second.c_str());
}

bool Config::get_bool(const std::string& key, bool def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw Error("config key " + key + ": not a boolean: " + v);
}

std::string Config::require_str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw Error("missing config key: " + key);
    return it->second;
}

std::vector<std::pair<std::string, std::string>> Config::section(const std::string& prefix) const {
    std::vector<std::pair<std::string, std::string>> out;
    std::string p = prefix + ".";
    for (const auto& [k, v] : kv_)
        if (k.rfind(p, 0) == 0) out.emplace_back(k.substr(p.size()), v);
    return out;
}

} // namespace pollwait
