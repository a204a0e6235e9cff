#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rsparse::io {

inline std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

using Cell = std::variant<std::string, double, long long, bool>;

inline std::string render(const Cell& c) {
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    if (std::holds_alternative<double>(c)) return fmt12(std::get<double>(c));
    if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
    return std::get<bool>(c) ? "1" : "0";
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
        : out_(path), width_(header.size()) {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        write_line(header);
    }
    void row(const std::vector<Cell>& cells) {
        if (cells.size() != width_) throw std::logic_error("CsvWriter: row width does not match header");
        std::vector<std::string> s;
        for (const auto& c : cells) s.push_back(render(c));
        write_line(s);
    }

private:
    void write_line(const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
        out_ << '\n';
    }
    std::ofstream out_;
    std::size_t width_;
};

// 64-bit FNV-1a; stable across platforms and runs.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// <base>/<subcommand>-<hash of the resolved config>, with the config written next to the outputs.
inline std::filesystem::path run_directory(const std::filesystem::path& base, const std::string& subcommand,
                                           const std::string& resolved_config) {
    const auto dir = base / (subcommand + "-" + hex64(fnv1a64(subcommand + "\n" + resolved_config)));
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "config.ini") << resolved_config;
    return dir;
}

}  // namespace rsparse::io
