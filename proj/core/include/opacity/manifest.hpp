#ifndef OPACITY_MANIFEST_HPP
#define OPACITY_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace opacity {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything needed to re-run a command and audit what it did. The
/// timestamp is metadata only; no measurement consumes it.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;
    std::vector<std::string> argv;
    std::string config_json;  // effective configuration, JSON object text
    std::vector<std::pair<std::string, std::string>> input_digests;
    std::vector<std::uint64_t> seeds;
    std::string timestamp;

    struct Outcome {
        std::string label;  // e.g. "o2p/seed=7"
        bool ok = true;
        std::string error;
    };
    std::vector<Outcome> outcomes;

    std::string to_json() const;
    void save(const std::string& path) const;
};

/// FNV-1a digest (hex) of a file's bytes; throws when unreadable.
std::string file_digest(const std::string& path);

/// Current wall-clock time, ISO-8601 UTC.
std::string iso8601_now();

}  // namespace opacity

#endif
