#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tra/error.hpp"

namespace tra {

enum class Direction { XtoY, YtoX, NoDirection, Unknown };

inline const char* to_string(Direction d) noexcept {
    switch (d) {
        case Direction::XtoY: return "XtoY";
        case Direction::YtoX: return "YtoX";
        case Direction::NoDirection: return "NoDirection";
        case Direction::Unknown: return "Unknown";
    }
    return "Unknown";
}

// An observed bivariate dataset. `source` records where it came from
// (scenario record, file path, ...).
struct PairSample {
    std::vector<double> x;
    std::vector<double> y;
    std::string id;
    std::string source;

    std::size_t size() const noexcept { return x.size(); }

    void validate() const {
        if (x.size() != y.size()) throw Error(ErrorKind::InvalidInput, "x and y differ in length");
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
                throw Error(ErrorKind::InvalidInput, "non-finite value at row " + std::to_string(i));
            }
        }
    }

    PairSample swapped() const { return PairSample{y, x, id, source}; }

    PairSample subset(std::span<const std::size_t> rows) const {
        PairSample out{{}, {}, id, source};
        out.x.reserve(rows.size());
        out.y.reserve(rows.size());
        for (std::size_t r : rows) {
            out.x.push_back(x[r]);
            out.y.push_back(y[r]);
        }
        return out;
    }
};

// FNV-1a over the raw bytes of both columns; identifies a dataset draw.
inline std::uint64_t checksum(const PairSample& s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const std::vector<double>& v) {
        for (double d : v) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &d, sizeof(double));
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 0x100000001b3ULL;
            }
        }
    };
    feed(s.x);
    feed(s.y);
    return h;
}

}  // namespace tra
