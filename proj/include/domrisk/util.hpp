#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace domrisk {

inline constexpr const char* kToolVersion = "0.1.0";

/// Error type for all load/validation/contract failures in the pipeline.
class DomriskError : public std::runtime_error {
public:
    explicit DomriskError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    if (haystack.size() < needle.size()) return false;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

inline bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Casefold and collapse whitespace runs to single spaces.
inline std::string normalize_name(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

/// 64-bit FNV-1a. Used for schema/config digests; stability matters,
/// cryptographic strength does not.
class Fnv1a {
public:
    void update(std::string_view data) {
        for (unsigned char c : data) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update_u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            state_ ^= (v >> (i * 8)) & 0xff;
            state_ *= 0x100000001b3ULL;
        }
    }
    uint64_t digest() const { return state_; }

    std::string hex() const {
        static const char* d = "0123456789abcdef";
        std::string out(16, '0');
        uint64_t v = state_;
        for (int i = 15; i >= 0; --i) {
            out[static_cast<size_t>(i)] = d[v & 0xf];
            v >>= 4;
        }
        return out;
    }

private:
    uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string fnv1a_hex(std::string_view data) {
    Fnv1a h;
    h.update(data);
    return h.hex();
}

}  // namespace domrisk
