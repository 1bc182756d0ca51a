#include "opacity/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "opacity/errors.hpp"
#include "opacity/rng.hpp"

namespace opacity {

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config_json.empty()
                      ? nlohmann::json::object()
                      : nlohmann::json::parse(config_json);
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& [path, digest] : input_digests) digests[path] = digest;
    j["input_digests"] = std::move(digests);
    j["seeds"] = seeds;
    j["timestamp"] = timestamp;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : outcomes) {
        nlohmann::json e;
        e["label"] = o.label;
        e["ok"] = o.ok;
        if (!o.ok) e["error"] = o.error;
        outs.push_back(std::move(e));
    }
    j["outcomes"] = std::move(outs);
    return j.dump(2);
}

void RunManifest::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f << to_json() << '\n';
    if (!f) throw Error("write failed: " + path);
}

std::string file_digest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

std::string iso8601_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace opacity
