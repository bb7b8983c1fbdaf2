#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "frachill/error.hpp"
#include "frachill/grid.hpp"
#include "frachill/stepper.hpp"

namespace frachill {

// Binary layout, little-endian:
//   "FCHT" | u32 version | u32 dim | u32 n per axis (dim of them) | f64 time |
//   mu[N] | phi[N] | S[N]   (f64, row-major)
inline constexpr std::uint32_t snapshot_version = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::vector<char>& buf, T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<char>& buf, std::size_t& at, const std::string& path) {
    if (at + sizeof(T) > buf.size()) throw ConfigError("snapshot '" + path + "' is truncated");
    T v;
    std::memcpy(&v, buf.data() + at, sizeof(T));
    at += sizeof(T);
    return v;
}

}  // namespace detail

struct Snapshot {
    double time = 0.0;
    Field mu, phi, s;
};

inline void write_snapshot(const std::string& path, const SimState& st) {
    const GridSpec& g = st.mu.grid();
    std::vector<char> buf{'F', 'C', 'H', 'T'};
    detail::put<std::uint32_t>(buf, snapshot_version);
    detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.dimension()));
    for (int a = 0; a < g.dimension(); ++a) detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.points(a)));
    detail::put<double>(buf, st.time);
    for (const Field* f : {&st.mu, &st.phi, &st.s}) {
        for (double v : f->values()) detail::put<double>(buf, v);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write snapshot '" + path + "'");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw ConfigError("failed writing snapshot '" + path + "'");
}

/// Reads a snapshot; extents are not stored, so the caller supplies the grid
/// and the header must agree with it.
inline Snapshot read_snapshot(const std::string& path, const GridSpec& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read snapshot '" + path + "'");
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 || std::memcmp(buf.data(), "FCHT", 4) != 0) {
        throw ConfigError("snapshot '" + path + "' has a bad magic");
    }
    std::size_t at = 4;
    const auto version = detail::get<std::uint32_t>(buf, at, path);
    if (version != snapshot_version) {
        throw ConfigError("snapshot '" + path + "' has unsupported version " + std::to_string(version));
    }
    const auto dim = detail::get<std::uint32_t>(buf, at, path);
    if (static_cast<int>(dim) != grid.dimension()) throw ConfigError("snapshot dimension does not match grid");
    for (int a = 0; a < grid.dimension(); ++a) {
        if (detail::get<std::uint32_t>(buf, at, path) != grid.points(a)) {
            throw ConfigError("snapshot point count does not match grid");
        }
    }
    Snapshot snap{detail::get<double>(buf, at, path), Field(grid), Field(grid), Field(grid)};
    const std::size_t payload = 3 * grid.size() * sizeof(double);
    if (buf.size() - at != payload) {
        throw ConfigError("snapshot '" + path + "' payload is " + std::to_string(buf.size() - at) +
                          " bytes, expected " + std::to_string(payload));
    }
    for (Field* f : {&snap.mu, &snap.phi, &snap.s}) {
        for (auto& v : f->values()) v = detail::get<double>(buf, at, path);
    }
    return snap;
}

}  // namespace frachill
