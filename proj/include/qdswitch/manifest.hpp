#ifndef QDSWITCH_MANIFEST_HPP
#define QDSWITCH_MANIFEST_HPP

#include "qdswitch/csv.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#define QDSWITCH_VERSION "0.1.0"

namespace qdswitch {

// 64-bit FNV-1a, hex encoded. Content fingerprint for manifests.
inline std::string content_digest(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string subcommand;
    std::string version = QDSWITCH_VERSION;
    std::string started_utc;
    std::string finished_utc;
    std::string config_source;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
    std::vector<std::pair<std::string, std::string>> outputs;  // path, digest
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> warnings;

    // One "key = value" per line, grouped by [section].
    std::string str() const
    {
        std::string s;
        auto kv = [&](std::string_view k, std::string_view v) {
            s.append(k).append(" = ").append(v).append("\n");
        };
        s += "[run]\n";
        kv("subcommand", subcommand);
        kv("artifact_version", version);
        kv("started_utc", started_utc);
        kv("finished_utc", finished_utc);
        kv("seed", std::to_string(seed));
        kv("config_source", config_source);
        kv("config_digest", config_digest);
        s += "\n[config]\n";
        for (const auto& [k, v] : config)
            kv(k, v);
        s += "\n[inputs]\n";
        for (const auto& [k, v] : inputs)
            kv(k, v);
        s += "\n[outputs]\n";
        for (const auto& [k, v] : outputs)
            kv(k, v);
        s += "\n[summary]\n";
        for (const auto& [k, v] : summary)
            kv(k, v);
        s += "\n[warnings]\n";
        for (std::size_t i = 0; i < warnings.size(); ++i)
            kv("warning_" + std::to_string(i), warnings[i]);
        return s;
    }
};

// Read back a manifest as section.key -> value.
inline std::map<std::string, std::string> parse_manifest(std::string_view text)
{
    std::map<std::string, std::string> out;
    std::string section;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = csv::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty())
            continue;
        if (line.front() == '[' && line.back() == ']') {
            section = std::string(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string_view::npos)
            continue;
        out[section + "." + std::string(line.substr(0, eq))] = std::string(line.substr(eq + 3));
    }
    return out;
}

} // namespace qdswitch

#endif
