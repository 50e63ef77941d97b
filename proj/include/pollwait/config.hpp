#pragma once

#include <map>
#include <string>
#include <vector>

namespace pollwait {

// Flat key=value configuration with dotted section prefixes, e.g.
// `filter.min_upper_min=1`. '#' starts a comment. Later assignments win,
// so command-line overrides are applied by a second set() pass.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& def) const;
    int get_int(const std::string& key, int def) const;
    long long get_int64(const std::string& key, long long def) const;
    double get_double(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;

    // Throws Error naming the key when absent.
    std::string require_str(const std::string& key) const;

    // Keys beginning with `prefix.`, with the prefix stripped.
    std::vector<std::pair<std::string, std::string>> section(const std::string& prefix) const;

    const std::map<std::string, std::string>& all() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

} // namespace pollwait
