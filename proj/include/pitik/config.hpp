#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pitik {

// Flat "key = value" configuration; '#' starts a comment. Keys outside the
// documented set are rejected.
class Config {
public:
    static Config parse(std::istream& is);
    static Config load(const std::string& path);
    static const std::vector<std::string>& known_keys();

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
    std::optional<std::string> raw(const std::string& key) const;

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace pitik
