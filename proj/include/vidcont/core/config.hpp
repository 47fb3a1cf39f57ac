#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vidcont {

// Flat key-value configuration with layered overrides:
//   defaults -> config file -> environment (VIDCONT_<KEY>, dots as "__")
//   -> explicit --set pairs.
// Keys are lowercase dotted paths ("scene.width"). Every run serializes the
// resolved snapshot next to its outputs; the snapshot hash chains stages.
class Config {
public:
    Config() = default;

    void set(const std::string &key, const std::string &value);
    bool has(const std::string &key) const;

    void apply_file(const std::string &path);
    void apply_env(const std::string &prefix = "VIDCONT_");
    // "key=value" pairs, e.g. from --set flags.
    void apply_assignment(const std::string &assignment);

    std::string get_str(const std::string &key, const std::string &fallback) const;
    std::string require_str(const std::string &key) const;
    int64_t get_int(const std::string &key, int64_t fallback) const;
    double get_double(const std::string &key, double fallback) const;
    bool get_bool(const std::string &key, bool fallback) const;

    // Sorted "key = value" lines; stable across runs.
    std::string resolved_text() const;
    uint64_t hash() const;
    void save(const std::string &path) const;
    static Config from_text(const std::string &text);

    const std::map<std::string, std::string> &entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace vidcont
