#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sal360/errors.hpp"
#include "sal360/gt_pipeline.hpp"
#include "sal360/sphere_geom.hpp"

// File formats:
//   * saliency map binary: magic "S360", width:u32 LE, height:u32 LE,
//     row-major float32 LE
//   * 8-bit grayscale PNG export for inspection
//   * PPM (P6) frames, as emitted by e.g. `ffmpeg -i video.mp4 f_%06d.ppm`
//   * trace CSV: user_id,timestamp_s,longitude_deg,latitude_deg  (angular)
//                user_id,timestamp_s,u,v                         (normalized)

namespace sal360 {

namespace detail {

inline void put_u32le(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw data_error("unexpected end of stream");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

inline void put_f32le(std::ostream& os, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32le(os, v);
}

inline float get_f32le(std::istream& is) {
    const std::uint32_t v = get_u32le(is);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

}  // namespace detail

inline void write_s360(std::ostream& os, const SaliencyMap& map) {
    os.write("S360", 4);
    detail::put_u32le(os, std::uint32_t(map.grid.width));
    detail::put_u32le(os, std::uint32_t(map.grid.height));
    for (double x : map.v) detail::put_f32le(os, float(x));
    if (!os) throw data_error("write_s360: stream write failed");
}

inline SaliencyMap read_s360(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "S360", 4) != 0)
        throw data_error("read_s360: bad magic (expected S360)");
    const auto w = detail::get_u32le(is);
    const auto h = detail::get_u32le(is);
    if (w < 2 || h < 1 || w > (1u << 20) || h > (1u << 20))
        throw data_error("read_s360: implausible dimensions");
    SaliencyMap map(EquirectGrid(int(w), int(h)));
    for (auto& x : map.v) x = detail::get_f32le(is);
    return map;
}

inline void save_map(const std::string& path, const SaliencyMap& map) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("save_map: cannot open " + path);
    write_s360(os, map);
}

inline SaliencyMap load_map(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("load_map: cannot open " + path);
    return read_s360(is);
}

// ---------------------------------------------------------------------------
// Minimal grayscale PNG writer (zlib-deflated, filter 0 scanlines).

inline void write_gray_png(const std::string& path, const std::vector<std::uint8_t>& pixels,
                           int width, int height) {
    if (width < 1 || height < 1 || pixels.size() != std::size_t(width) * height)
        throw input_error("write_gray_png: bad dimensions");

    std::vector<std::uint8_t> raw;
    raw.reserve(std::size_t(height) * (width + 1));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), pixels.begin() + std::size_t(y) * width,
                   pixels.begin() + std::size_t(y + 1) * width);
    }
    uLongf comp_len = compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), uLong(raw.size()), 6) != Z_OK)
        throw data_error("write_gray_png: deflate failed");
    comp.resize(comp_len);

    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("write_gray_png: cannot open " + path);

    const auto put_be = [&os](std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    const auto chunk = [&](const char type[4], const std::uint8_t* data, std::size_t len) {
        put_be(std::uint32_t(len));
        os.write(type, 4);
        if (len) os.write(reinterpret_cast<const char*>(data), std::streamsize(len));
        uLong crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
        if (len) crc = crc32(crc, data, uInt(len));
        put_be(std::uint32_t(crc));
    };

    static const unsigned char sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    os.write(reinterpret_cast<const char*>(sig), 8);
    std::uint8_t ihdr[13];
    ihdr[0] = std::uint8_t(width >> 24); ihdr[1] = std::uint8_t(width >> 16);
    ihdr[2] = std::uint8_t(width >> 8);  ihdr[3] = std::uint8_t(width);
    ihdr[4] = std::uint8_t(height >> 24); ihdr[5] = std::uint8_t(height >> 16);
    ihdr[6] = std::uint8_t(height >> 8);  ihdr[7] = std::uint8_t(height);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 0;   // grayscale
    ihdr[10] = 0; ihdr[11] = 0; ihdr[12] = 0;
    chunk("IHDR", ihdr, 13);
    chunk("IDAT", comp.data(), comp.size());
    chunk("IEND", nullptr, 0);
    if (!os) throw data_error("write_gray_png: stream write failed");
}

// [0,1] map -> 8-bit grayscale PNG (values clamped).
inline void save_map_png(const std::string& path, const SaliencyMap& map) {
    std::vector<std::uint8_t> px(map.v.size());
    for (std::size_t i = 0; i < map.v.size(); ++i) {
        const double c = std::clamp(map.v[i], 0.0, 1.0);
        px[i] = std::uint8_t(std::lround(c * 255.0));
    }
    write_gray_png(path, px, map.grid.width, map.grid.height);
}

// ---------------------------------------------------------------------------
// PPM (P6) frames. In memory frames are planar CHW float in [0, 1].

struct ImageRGB {
    int width = 0, height = 0;
    std::vector<float> v;  // 3 * height * width, planar CHW

    float& at(int c, int x, int y) {
        return v[(std::size_t(c) * height + y) * width + x];
    }
    float at(int c, int x, int y) const {
        return v[(std::size_t(c) * height + y) * width + x];
    }
};

inline void save_ppm(const std::string& path, const ImageRGB& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("save_ppm: cannot open " + path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    const std::size_t plane = std::size_t(img.width) * img.height;
    for (std::size_t i = 0; i < plane; ++i)
        for (int c = 0; c < 3; ++c) {
            const float x = std::clamp(img.v[c * plane + i], 0.0f, 1.0f);
            os.put(char(std::lround(x * 255.0f)));
        }
    if (!os) throw data_error("save_ppm: stream write failed");
}

inline ImageRGB load_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("load_ppm: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "P6") throw data_error("load_ppm: not a P6 file: " + path);
    const auto next_token = [&is, &path]() {
        // skip whitespace and # comments
        int tok;
        for (;;) {
            is >> std::ws;
            if (is.peek() == '#') {
                std::string line;
                std::getline(is, line);
                continue;
            }
            if (!(is >> tok)) throw data_error("load_ppm: truncated header in " + path);
            return tok;
        }
    };
    const int w = next_token();
    const int h = next_token();
    const int maxval = next_token();
    if (w < 1 || h < 1 || maxval != 255)
        throw data_error("load_ppm: unsupported PPM header in " + path);
    is.ignore(1);  // single whitespace after maxval
    std::vector<unsigned char> buf(std::size_t(w) * h * 3);
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!is) throw data_error("load_ppm: truncated pixel data in " + path);
    ImageRGB img;
    img.width = w;
    img.height = h;
    img.v.resize(buf.size());
    const std::size_t plane = std::size_t(w) * h;
    for (std::size_t i = 0; i < plane; ++i)
        for (int c = 0; c < 3; ++c) img.v[c * plane + i] = buf[i * 3 + c] / 255.0f;
    return img;
}

// ---------------------------------------------------------------------------
// Trace CSVs. Rows are grouped into per-user traces in order of first
// appearance; a header line is skipped when the timestamp field is not
// numeric. Malformed rows report their 1-based line number.

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace detail

inline std::vector<FixationTrace> read_trace_csv(const std::string& path, CoordinateKind kind) {
    std::ifstream is(path);
    if (!is) throw data_error("read_trace_csv: cannot open " + path);
    std::vector<FixationTrace> traces;
    std::vector<std::string> order;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() != 4)
            throw data_error(path + ":" + std::to_string(line_no) + ": expected 4 fields");
        double t, a, b;
        if (!detail::parse_double(fields[1], t)) {
            if (line_no == 1) continue;  // header row
            throw data_error(path + ":" + std::to_string(line_no) + ": bad timestamp");
        }
        if (!detail::parse_double(fields[2], a) || !detail::parse_double(fields[3], b))
            throw data_error(path + ":" + std::to_string(line_no) + ": bad coordinate");
        if (kind == CoordinateKind::angular) {
            if (b < -90.0 || b > 90.0)
                throw data_error(path + ":" + std::to_string(line_no) +
                                 ": latitude outside [-90, 90]");
            a *= M_PI / 180.0;
            b *= M_PI / 180.0;
            while (a >= M_PI) a -= 2.0 * M_PI;
            while (a < -M_PI) a += 2.0 * M_PI;
        } else {
            if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
                throw data_error(path + ":" + std::to_string(line_no) +
                                 ": normalized coordinate outside [0, 1]");
        }
        const std::string& uid = fields[0];
        auto it = std::find(order.begin(), order.end(), uid);
        std::size_t idx;
        if (it == order.end()) {
            order.push_back(uid);
            traces.push_back(FixationTrace{uid, kind, {}});
            idx = traces.size() - 1;
        } else {
            idx = std::size_t(it - order.begin());
        }
        if (!traces[idx].samples.empty() && t <= traces[idx].samples.back().timestamp)
            throw data_error(path + ":" + std::to_string(line_no) +
                             ": timestamps not strictly increasing for user " + uid);
        traces[idx].samples.push_back(TraceSample{t, a, b});
    }
    if (traces.empty()) throw data_error("read_trace_csv: no samples in " + path);
    return traces;
}

inline void write_trace_csv(const std::string& path, std::span<const FixationTrace> traces) {
    std::ofstream os(path);
    if (!os) throw data_error("write_trace_csv: cannot open " + path);
    char buf[128];
    for (const auto& tr : traces) {
        for (const auto& s : tr.samples) {
            if (tr.kind == CoordinateKind::angular)
                std::snprintf(buf, sizeof buf, "%.9g,%.17g,%.17g\n", s.timestamp,
                              s.a * 180.0 / M_PI, s.b * 180.0 / M_PI);
            else
                std::snprintf(buf, sizeof buf, "%.9g,%.17g,%.17g\n", s.timestamp, s.a, s.b);
            os << tr.user_id << ',' << buf;
        }
    }
    if (!os) throw data_error("write_trace_csv: stream write failed");
}

}  // namespace sal360
